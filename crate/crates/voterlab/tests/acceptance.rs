//! End-to-end verification suite: every criterion prints a PASS/FAIL line,
//! and the run exits non-zero if any criterion fails.

use std::process::ExitCode;

use voterlab::harness::run_suite;

fn main() -> ExitCode {
    let results = match run_suite(2024) {
        Ok(results) => results,
        Err(e) => {
            eprintln!("acceptance suite aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    assert_eq!(results.len(), 8);
    let failed = results.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        return ExitCode::FAILURE;
    }
    println!("all 8 criteria passed");
    ExitCode::SUCCESS
}
