//! Runs every suite criterion at its stated tolerance and time limit.
//!
//! One PASS/FAIL line is printed per criterion. Lines go straight to
//! stderr so they show without `--nocapture`.
//! Criteria listed in `KNOWN_FAILURES` are still run and reported as they
//! come out; the test only insists that they fail on the named clause and
//! nothing else.

use std::io::Write;

use monodist::suite::{self, Ctx, DEFAULT_SEED};

/// Criterion id and the only clause allowed to fail.
///
/// C10: at the sizes the check enumerates (n = 8, 12) every D- sample is
/// exactly unate, so "unate distance > 0" cannot hold there. The witness is
/// reversing half of the dimensions outside M; see the lower-bound tests.
const KNOWN_FAILURES: &[(u32, &str)] = &[(10, "dminus_unate_positive")];

/// Bypasses the test harness's output capture.
fn say(line: impl std::fmt::Display) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

#[test]
fn acceptance_criteria() {
    let ctx = Ctx {
        seed: DEFAULT_SEED,
        n: None,
    };
    let mut reports = Vec::new();
    for c in suite::select(None).unwrap() {
        let report = suite::run_criterion(c, &ctx);
        say(&report);
        reports.push(report);
    }

    let out = std::env::temp_dir().join("monodist-acceptance-constants.csv");
    suite::write_constants_file(&reports, &out).unwrap();
    say(format_args!("constants: {}", out.display()));

    let mut unexpected = Vec::new();
    for r in &reports {
        let known = KNOWN_FAILURES.iter().find(|(id, _)| *id == r.id);
        match (r.passed, known) {
            (true, None) => {}
            (true, Some(_)) => say(format_args!("note: C{} passed although listed as a known failure", r.id)),
            (false, Some((_, clause))) if r.failed.iter().map(String::as_str).eq([*clause]) => {
                say(format_args!("known failure: C{} ({clause})", r.id))
            }
            (false, _) => unexpected.push(format!("C{}: {:?} {}", r.id, r.failed, r.detail)),
        }
    }
    assert!(unexpected.is_empty(), "failed criteria: {unexpected:#?}");
}
