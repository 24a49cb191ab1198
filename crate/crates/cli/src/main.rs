//! `folner`: run averaging experiments, invariant solvers and the acceptance suite.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when a verification fails.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::OrbitopeOp;
use report::{Format, Outcome, ReportContext};

#[derive(Parser)]
#[command(name = "folner", version, about = "Group averaging, orbitopes, invariant couplings and invariant tests")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Group spec, e.g. `cyclic:3`, `sym:4`, `z:box`, `product(cyclic:2,cyclic:3)`.
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Input document (JSON, or a CSV table with a header row).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest window index.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Group(GroupCmd),
    /// Følner average of a vector, with its trace over windows.
    Average {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Mean-ergodic limit of an orthogonal action.
    Ergodic,
    #[command(subcommand)]
    Orbitope(OrbitopeCmd),
    #[command(subcommand)]
    Kernel(KernelCmd),
    #[command(subcommand)]
    Transport(TransportCmd),
    #[command(subcommand)]
    Test(TestCmd),
    #[command(subcommand)]
    Cocycle(CocycleCmd),
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand)]
enum GroupCmd {
    /// `|A_n ∩ φA_n| / |A_n|` for window `n`.
    Ratio {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "e", allow_hyphen_values = true)]
        phi: String,
    },
}

#[derive(Subcommand)]
enum OrbitopeCmd {
    Member,
    Support,
    Invariant,
}

#[derive(Subcommand)]
enum KernelCmd {
    Symmetrize,
    Mmd,
    Decompose,
}

#[derive(Subcommand)]
enum TransportCmd {
    Solve,
    Invariant,
    Extreme,
    Symmetrize,
}

#[derive(Subcommand)]
enum TestCmd {
    Maximin,
    Invariantize,
}

#[derive(Subcommand)]
enum CocycleCmd {
    Apply,
    Average,
    EquivariantKernel,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Runs every acceptance criterion.
    All,
}

fn dispatch(command: &Command, opts: &Options) -> (&'static str, Result<Outcome>) {
    match command {
        Command::Group(GroupCmd::Ratio { n, phi }) => ("group ratio", commands::group_ratio(opts, *n, phi)),
        Command::Average { n } => ("average", commands::average(opts, *n)),
        Command::Ergodic => ("ergodic", commands::ergodic(opts)),
        Command::Orbitope(op) => match op {
            OrbitopeCmd::Member => ("orbitope member", commands::orbitope(opts, OrbitopeOp::Member)),
            OrbitopeCmd::Support => ("orbitope support", commands::orbitope(opts, OrbitopeOp::Support)),
            OrbitopeCmd::Invariant => ("orbitope invariant", commands::orbitope(opts, OrbitopeOp::Invariant)),
        },
        Command::Kernel(op) => match op {
            KernelCmd::Symmetrize => ("kernel symmetrize", commands::kernel_symmetrize(opts)),
            KernelCmd::Mmd => ("kernel mmd", commands::kernel_mmd(opts)),
            KernelCmd::Decompose => ("kernel decompose", commands::kernel_decompose(opts)),
        },
        Command::Transport(op) => match op {
            TransportCmd::Solve => ("transport solve", commands::transport_solve(opts)),
            TransportCmd::Invariant => ("transport invariant", commands::transport_invariant(opts)),
            TransportCmd::Extreme => ("transport extreme", commands::transport_extreme(opts)),
            TransportCmd::Symmetrize => ("transport symmetrize", commands::transport_symmetrize(opts)),
        },
        Command::Test(op) => match op {
            TestCmd::Maximin => ("test maximin", commands::test_maximin(opts)),
            TestCmd::Invariantize => ("test invariantize", commands::test_invariantize(opts)),
        },
        Command::Cocycle(op) => match op {
            CocycleCmd::Apply => ("cocycle apply", commands::cocycle_apply(opts)),
            CocycleCmd::Average => ("cocycle average", commands::cocycle_average(opts)),
            CocycleCmd::EquivariantKernel => ("cocycle equivariant-kernel", commands::cocycle_equivariant_kernel(opts)),
        },
        Command::Verify(VerifyCmd::All) => ("verify all", commands::verify_all(opts)),
    }
}

/// Solver-side failures count as failed verification; everything else is bad input.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numeric = err.chain().any(|c| {
        matches!(
            c.downcast_ref::<folner_core::Error>(),
            Some(folner_core::Error::NotConverged { .. } | folner_core::Error::NumericBreakdown(_))
        )
    });
    if numeric {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let opts = &cli.opts;
    if let Some(tol) = opts.tol {
        if !(tol.is_finite() && tol > 0.0) {
            eprintln!("error: --tol must be a positive number");
            return ExitCode::from(1);
        }
    }
    let (name, outcome) = dispatch(&cli.command, opts);
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let ctx = ReportContext {
        command: name,
        group: opts.group.as_deref(),
        seed: opts.seed,
        tol: opts.tol,
    };
    if let Err(e) = report::emit(&ctx, &outcome, opts.format, opts.out.as_deref()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed");
        ExitCode::from(2)
    }
}
