//! Runs every acceptance criterion and prints one line per criterion.
//! Exits nonzero if any criterion fails.

use std::process::ExitCode;

use folner_core::verify::{run_all, CRITERIA};

const SEED: u64 = 7;

fn main() -> ExitCode {
    let outcomes = run_all(SEED);
    assert_eq!(outcomes.len(), CRITERIA.len());
    for o in &outcomes {
        println!(
            "criterion {:>2} {:<22} {} ({:.2}s) {}",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.seconds,
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
