//! Input documents: JSON with inline or CSV-backed tables.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use folner_core::cocycles::Cocycle;
use folner_core::{Group, GroupKind, LinearAction, Matrix, PointAction};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

pub struct Input {
    doc: Value,
    base: PathBuf,
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a header-led CSV table of numbers.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("malformed CSV at data row {}", i + 1))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| anyhow!("data row {}: `{f}` is not a number", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("CSV table has no data rows");
    }
    Ok(rows)
}

fn read_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_csv(&text).with_context(|| format!("in {}", path.display()))
}

impl Input {
    /// A `.csv` input becomes `{"table": rows}`; anything else is parsed as JSON.
    pub fn read(path: Option<&Path>) -> Result<Self> {
        let path = path.context("this command needs --input")?;
        let doc = if is_csv(path) {
            json!({ "table": read_csv(path)? })
        } else {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))?
        };
        Ok(Input {
            doc,
            base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    pub fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.doc.clone()).context("malformed input document")
    }

    pub fn matrix(&self, t: &TableRef) -> Result<Matrix> {
        let rows = match t {
            TableRef::Rows(rows) => rows.clone(),
            TableRef::File(name) => read_csv(&self.base.join(name))?,
        };
        Matrix::try_from_rows(&rows).ok_or_else(|| anyhow!("table rows have different lengths"))
    }

    pub fn vector(&self, t: &VectorRef) -> Result<Vec<f64>> {
        match t {
            VectorRef::Values(v) => Ok(v.clone()),
            VectorRef::File(name) => {
                let rows = read_csv(&self.base.join(name))?;
                if rows.iter().all(|r| r.len() == 1) {
                    Ok(rows.into_iter().map(|r| r[0]).collect())
                } else if rows.len() == 1 {
                    Ok(rows.into_iter().next().unwrap_or_default())
                } else {
                    bail!("{name} is not a single row or column")
                }
            }
        }
    }
}

/// A table given inline as rows or as a path to a CSV file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TableRef {
    Rows(Vec<Vec<f64>>),
    File(String),
}

/// A vector given inline or as a one-row/one-column CSV file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum VectorRef {
    Values(Vec<f64>),
    File(String),
}

/// How the group acts linearly on the vectors of a document.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionSpec {
    /// Coordinate permutation of a permutation group.
    #[default]
    Permutation,
    /// `Z` rotating the plane by `angle` radians.
    Rotation { angle: f64 },
    /// One table per generator (finite groups, lattices) or the `X, Y, Z`
    /// tables of the Heisenberg group.
    Generators { tables: Vec<TableRef> },
    /// Coordinate permutation of tuples over `{0..base}`.
    Tuples { base: usize },
}

impl ActionSpec {
    pub fn build(&self, group: &Group, input: &Input) -> Result<LinearAction> {
        Ok(match self {
            ActionSpec::Permutation => LinearAction::permutation(group.clone())?,
            ActionSpec::Rotation { angle } => {
                let action = LinearAction::rotation(*angle)?;
                if action.group() != group {
                    bail!("rotation actions need --group z:box");
                }
                action
            }
            ActionSpec::Generators { tables } => {
                let tables = tables.iter().map(|t| input.matrix(t)).collect::<Result<Vec<_>>>()?;
                match group.kind() {
                    GroupKind::Lattice { .. } => LinearAction::lattice(group.clone(), tables)?,
                    GroupKind::Heisenberg => {
                        let [x, y, z]: [Matrix; 3] = tables
                            .try_into()
                            .map_err(|_| anyhow!("the Heisenberg group needs exactly three tables"))?;
                        LinearAction::heisenberg(group.clone(), x, y, z)?
                    }
                    GroupKind::Finite { .. } => LinearAction::from_generator_tables(group.clone(), tables)?,
                    GroupKind::FinitarySymmetric { .. } => bail!("give finitary permutations as `permutation`"),
                }
            }
            ActionSpec::Tuples { base } => PointAction::on_tuples(group.clone(), *base)?.to_linear(),
        })
    }
}

/// How a finite group permutes a finite carrier.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CarrierSpec {
    /// The group's own points.
    #[default]
    Natural,
    /// Tuples over `{0..base}`, indexed big-endian.
    Tuples { base: usize },
    /// `size` points, all fixed.
    Fixed { size: usize },
}

impl CarrierSpec {
    pub fn build(&self, group: &Group) -> Result<PointAction> {
        Ok(match self {
            CarrierSpec::Natural => PointAction::natural(group.clone())?,
            CarrierSpec::Tuples { base } => PointAction::on_tuples(group.clone(), *base)?,
            CarrierSpec::Fixed { size } => PointAction::from_fn(group.clone(), *size, |_, i| i)?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CocycleSpec {
    Identity { dim: usize },
    Sign { dim: usize },
    Character { dim: usize, chi: Vec<f64> },
    /// `θ(g, s) = ρ(g)` for a linear action on the value space.
    Equivariance { action: ActionSpec },
}

impl CocycleSpec {
    pub fn build(&self, carrier: PointAction, input: &Input) -> Result<Cocycle> {
        Ok(match self {
            CocycleSpec::Identity { dim } => Cocycle::identity(carrier, *dim)?,
            CocycleSpec::Sign { dim } => Cocycle::sign(carrier, *dim)?,
            CocycleSpec::Character { dim, chi } => Cocycle::character(carrier, *dim, chi)?,
            CocycleSpec::Equivariance { action } => {
                let target = action.build(carrier.group(), input)?;
                Cocycle::equivariance(carrier, &target)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_is_skipped() {
        let rows = parse_csv("a,b\n1, 2\n3,4.5\n").unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0], vec![3.0, 4.5]]);
    }

    #[test]
    fn csv_rejects_text_cells() {
        assert!(parse_csv("a\nx\n").is_err());
        assert!(parse_csv("a,b\n").is_err());
    }

    #[test]
    fn action_spec_defaults_to_permutation() {
        let spec: ActionSpec = serde_json::from_value(json!({ "kind": "permutation" })).unwrap();
        assert!(matches!(spec, ActionSpec::Permutation));
        let spec: ActionSpec = serde_json::from_value(json!({ "kind": "rotation", "angle": 1.0 })).unwrap();
        assert!(matches!(spec, ActionSpec::Rotation { .. }));
    }
}
