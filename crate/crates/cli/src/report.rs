//! Report envelopes and their JSON/CSV renderings.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use folner_core::lp::Tolerances;
use folner_core::verify;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A rectangular table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// A numeric table with columns `c0, c1, ...`.
    pub fn numeric(rows: &[Vec<f64>]) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        let mut t = Table::new((0..width).map(|j| format!("c{j}")));
        for r in rows {
            t.push(r.iter().map(|&v| num(v)).collect());
        }
        t
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Shortest round-trip text for a float; `null` for non-finite values.
pub fn num(v: f64) -> String {
    Value::from(v).to_string()
}

/// What a command hands back before rendering.
pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
    /// Printed as-is when no `--format` is given.
    pub text: Option<String>,
    /// `false` marks a verification failure (exit code 2).
    pub passed: bool,
    /// The working tolerance the command applied.
    pub tol: Option<f64>,
}

impl Outcome {
    pub fn new<T: Serialize>(result: &T) -> Result<Self> {
        Ok(Outcome {
            result: serde_json::to_value(result)?,
            table: None,
            text: None,
            passed: true,
            tol: None,
        })
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn with_text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn checked(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

#[derive(Serialize)]
struct ToleranceConfig {
    /// The command's working tolerance, when it has one.
    tol: Option<f64>,
    lp: Tolerances,
    checks: BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    group: Option<&'a str>,
    seed: u64,
    tolerances: ToleranceConfig,
    passed: bool,
    result: &'a Value,
}

pub struct ReportContext<'a> {
    pub command: &'a str,
    pub group: Option<&'a str>,
    pub seed: u64,
    pub tol: Option<f64>,
}

fn render_json(ctx: &ReportContext, outcome: &Outcome) -> Result<String> {
    let report = Report {
        command: ctx.command,
        group: ctx.group,
        seed: ctx.seed,
        tolerances: ToleranceConfig {
            tol: outcome.tol.or(ctx.tol),
            lp: Tolerances::default(),
            checks: verify::tolerance_table().into_iter().collect(),
        },
        passed: outcome.passed,
        result: &outcome.result,
    };
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

fn sidecar(out: &Path) -> PathBuf {
    out.with_extension("report.json")
}

fn write(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Writes the outcome in the requested format. CSV written to a file gets a
/// `.report.json` sidecar carrying the full report.
pub fn emit(ctx: &ReportContext, outcome: &Outcome, format: Option<Format>, out: Option<&Path>) -> Result<()> {
    match format {
        None if outcome.text.is_some() && out.is_none() => write(None, outcome.text.as_deref().unwrap_or_default()),
        None | Some(Format::Json) => write(out, &render_json(ctx, outcome)?),
        Some(Format::Csv) => {
            let Some(table) = &outcome.table else {
                bail!("`{}` has no tabular output; use --format json", ctx.command);
            };
            write(out, &table.to_csv()?)?;
            if let Some(path) = out {
                write(Some(&sidecar(path)), &render_json(ctx, outcome)?)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        assert_eq!(num(0.8), "0.8");
        assert_eq!(num(1e-20), "1e-20");
        assert_eq!(num(f64::NAN), "null");
    }

    #[test]
    fn csv_has_header_row() {
        let t = Table::numeric(&[vec![1.0, 0.5]]);
        assert_eq!(t.to_csv().unwrap(), "c0,c1\n1.0,0.5\n");
    }

    #[test]
    fn sidecar_sits_next_to_the_table() {
        assert_eq!(sidecar(Path::new("/tmp/trace.csv")), PathBuf::from("/tmp/trace.report.json"));
    }
}
