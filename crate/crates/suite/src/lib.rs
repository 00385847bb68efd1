//! A small runner for named pass/fail checks that report one line each.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(passed: bool, detail: impl Into<String>) -> Verdict {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

pub type Check = fn() -> Verdict;

/// Runs every check whose name contains one of `filters` (all of them when
/// `filters` is empty) and prints `PASS name (secs): detail` or `FAIL ...`.
/// A panicking check counts as a failure. Returns (run, failed).
pub fn run_checks(checks: &[(&str, Check)], filters: &[String]) -> (usize, usize) {
    let mut run = 0;
    let mut failed = 0;
    for (name, check) in checks {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Verdict::new(false, format!("panicked: {}", panic_text(&*e))));
        let secs = start.elapsed().as_secs_f64();
        let tag = if verdict.passed { "PASS" } else { "FAIL" };
        println!("{tag} {name} ({secs:.1} s): {}", verdict.detail);
        run += 1;
        failed += usize::from(!verdict.passed);
    }
    (run, failed)
}

fn panic_text(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-text panic".into()
    }
}
