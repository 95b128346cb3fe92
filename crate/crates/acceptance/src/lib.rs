//! Shared reporting for the acceptance suite.

use std::io::Write;
use std::time::Duration;

/// Writes one `criterion N: PASS|FAIL` line straight to stderr, bypassing the test
/// harness's output capture so every line shows up in the log.
pub fn report(criterion: u32, pass: bool, elapsed: Duration, limit: Duration, detail: &str) -> bool {
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    let line = format!(
        "criterion {criterion}: {} ({:.1}s of {:.0}s) {detail}{}\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64(),
        if in_time { "" } else { " [over time limit]" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    ok
}
