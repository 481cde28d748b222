//! Runs every acceptance criterion, printing one PASS/FAIL/SKIP line each.
//! Exits non-zero if any criterion fails.

use std::process::ExitCode;

use polyseg_validation::{Outcome, CRITERIA};

fn main() -> ExitCode {
    let mut failed = 0;
    for (name, run) in CRITERIA {
        let (tag, detail) = match run() {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name}: {detail}");
    }
    println!("acceptance: {failed} of {} criteria failed", CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
