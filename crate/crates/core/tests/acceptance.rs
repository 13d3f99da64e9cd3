//! Prints one PASS/FAIL line per acceptance criterion. Two criteria are known
//! to fail for reasons documented in the README; the run succeeds only when
//! exactly those fail, so any other regression still breaks the build.
//! Runs without the libtest harness so the matrix is always printed.

use std::collections::BTreeSet;
use std::process::ExitCode;

use fockforge::report::{run_all, ReportOptions};

/// Criteria whose published values cannot be reproduced:
/// 5, the boosted-analyser formula disagrees with simulation at n = 2 and 3;
/// 8, the published five-qubit encoder inventory cannot be wired.
const KNOWN_FAILURES: [u8; 2] = [5, 8];

fn main() -> ExitCode {
    let checks = match run_all(&ReportOptions::standard(), None) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("acceptance run aborted: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut failed = BTreeSet::new();
    println!();
    for c in &checks {
        println!("{c}");
        for r in c.rows.iter().filter(|r| !r.passed) {
            println!("    failing: {}", r.text);
        }
        if !c.passed() {
            failed.insert(c.criterion);
        }
    }
    let known = BTreeSet::from(KNOWN_FAILURES);
    if checks.len() == 11 && failed == known {
        println!("acceptance: {} of 11 pass; failures are the documented set {known:?}", 11 - failed.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing set {failed:?} differs from the documented set {known:?}");
        ExitCode::FAILURE
    }
}
