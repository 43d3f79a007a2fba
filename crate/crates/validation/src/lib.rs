//! Runs one acceptance criterion at full size and prints its verdict line.

use cvtomo::verify::{run_check, CheckOutcome, VerifyOptions};

/// Criterion `id` (1–14) with the default seed; prints
/// `criterion NN PASS|FAIL name: summary` to stdout.
pub fn criterion(id: usize) -> CheckOutcome {
    let c = run_check(id, &VerifyOptions::default()).unwrap_or_else(|e| panic!("criterion {id} could not run: {e}"));
    println!("criterion {:02} {} {}: {} ({:.1}s)", c.id, if c.passed { "PASS" } else { "FAIL" }, c.name, c.summary, c.seconds);
    c
}

/// Asserts the criterion passed, with its summary as the message.
pub fn require(id: usize) {
    let c = criterion(id);
    assert!(c.passed, "criterion {id} ({}) failed: {}", c.name, c.summary);
}
