//! Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if
//! any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use hypolab::suite::run_all;

fn main() -> ExitCode {
    let t0 = Instant::now();
    let results = run_all(|r| {
        println!("{}", r.line());
        if let Some(c) = &r.companion {
            println!("INFO criterion {:2} {c}", r.id);
        }
    });
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!(
        "acceptance: {}/{} passed in {:.1} s; failing: {:?}",
        results.len() - failed.len(),
        results.len(),
        t0.elapsed().as_secs_f64(),
        failed
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
