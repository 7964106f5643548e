//! Acceptance criteria. Prints one PASS/FAIL line per criterion followed by
//! its individual checks, and exits non-zero if any criterion fails.
//!
//! Numeric arguments restrict the run to those criteria, e.g.
//! `cargo test --test acceptance -- 6 10`.

use std::process::ExitCode;

use cdklab::acceptance::{run_suite, SuiteConfig};

fn main() -> ExitCode {
    // libtest flags such as --nocapture may be forwarded; only ids matter here
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let reports = match run_suite(&SuiteConfig::default(), &only) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for r in &reports {
        print!("{r}");
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.id.to_string())
        .collect();
    println!(
        "\n{}/{} criteria passed",
        reports.len() - failed.len(),
        reports.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
