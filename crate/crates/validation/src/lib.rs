//! Reporting scaffold for the acceptance suite: every criterion yields one
//! `PASS`/`FAIL` line with its measured evidence and runtime.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

/// Result of one named check inside a criterion.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    /// `|value - expected| <= tol`.
    pub fn close(name: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        let pass = (value - expected).abs() <= tol;
        Self::new(
            name,
            pass,
            format!("{value:.6} vs {expected} (tol {tol:e})"),
        )
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u32,
    pub title: String,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.elapsed <= self.limit && self.checks.iter().all(|c| c.pass)
    }

    /// The one-line summary followed by indented per-check evidence.
    pub fn render(&self) -> String {
        let mut out = format!(
            "criterion {} {}: {} ({:.2} s, limit {} s)",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            self.limit.as_secs()
        );
        for c in &self.checks {
            let _ = write!(
                out,
                "\n    [{}] {}: {}",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        if self.elapsed > self.limit {
            out.push_str("\n    [FAIL] runtime limit exceeded");
        }
        out
    }
}

/// Times `body` and packages its checks. An `Err` from the body becomes a
/// failing check.
pub fn evaluate<E: std::fmt::Display>(
    id: u32,
    title: &str,
    limit: Duration,
    body: impl FnOnce() -> Result<Vec<Check>, E>,
) -> Verdict {
    let start = Instant::now();
    let checks = match body() {
        Ok(checks) if !checks.is_empty() => checks,
        Ok(_) => vec![Check::new("body", false, "no checks produced")],
        Err(e) => vec![Check::new("body", false, format!("error: {e}"))],
    };
    Verdict {
        id,
        title: title.to_string(),
        checks,
        elapsed: start.elapsed(),
        limit,
    }
}
