//! Statistical verdicts and their JSON form.

use serde::{Deserialize, Serialize};

/// Seeds behind a report: task indices `start..start + count` of `master`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpan {
    pub master: u64,
    pub start: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    /// `None` for tolerance checks.
    pub p_value: Option<f64>,
    /// Significance level or tolerance the verdict was taken against.
    pub threshold: f64,
    pub n: usize,
    pub seeds: SeedSpan,
    pub pass: bool,
}

impl TestReport {
    /// Passes when `p_value ≥ alpha`.
    pub fn significance(name: &str, statistic: f64, p_value: f64, alpha: f64, n: usize, seeds: SeedSpan) -> Self {
        Self { name: name.into(), statistic, p_value: Some(p_value), threshold: alpha, n, seeds, pass: p_value >= alpha }
    }

    /// Passes when `|statistic - target| ≤ tol`.
    pub fn tolerance(name: &str, statistic: f64, target: f64, tol: f64, n: usize, seeds: SeedSpan) -> Self {
        Self { name: name.into(), statistic, p_value: None, threshold: tol, n, seeds, pass: (statistic - target).abs() <= tol }
    }

    pub fn check(name: &str, statistic: f64, threshold: f64, pass: bool, n: usize, seeds: SeedSpan) -> Self {
        Self { name: name.into(), statistic, p_value: None, threshold, n, seeds, pass }
    }

    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match self.p_value {
            Some(p) => format!("{verdict} {}: statistic {:.6e} p {:.4e} (alpha {}) n {}", self.name, self.statistic, p, self.threshold, self.n),
            None => format!("{verdict} {}: statistic {:.6e} (threshold {:e}) n {}", self.name, self.statistic, self.threshold, self.n),
        }
    }
}

pub fn all_pass(reports: &[TestReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
