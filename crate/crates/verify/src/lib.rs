//! The acceptance criteria as library functions, shared by the `acceptance`
//! test target and `ocrs verify`.

use std::time::Instant;

use serde::Serialize;

use ocrs::Result;

mod criteria;

pub use criteria::*;

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Replaces every Monte Carlo trial count when set.
    pub trials: Option<u64>,
    /// Width of the Monte Carlo acceptance intervals in standard errors.
    pub sigmas: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: ocrs::rng::DEFAULT_SEED, trials: None, sigmas: 3.0 }
    }
}

impl VerifyConfig {
    pub fn trials(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub budget_secs: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {} ({:.2}s of {:.0}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_secs,
            self.budget_secs,
            self.detail
        )
    }
}

/// What a criterion reports before timing is added.
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub tags: &'static [&'static str],
    pub budget_secs: f64,
    pub run: fn(&VerifyConfig) -> Result<Outcome>,
}

impl Criterion {
    pub fn matches(&self, filter: &str) -> bool {
        filter.is_empty()
            || self.id.to_string() == filter
            || self.name.contains(filter)
            || self.tags.iter().any(|t| *t == filter)
    }

    /// Runs the check; an error or a blown time budget is a failure.
    pub fn evaluate(&self, cfg: &VerifyConfig) -> CriterionResult {
        let start = Instant::now();
        let outcome = (self.run)(cfg);
        let elapsed_secs = start.elapsed().as_secs_f64();
        let (mut passed, mut detail) = match outcome {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if elapsed_secs > self.budget_secs {
            passed = false;
            detail.push_str(&format!("; over the {:.0}s budget", self.budget_secs));
        }
        CriterionResult {
            id: self.id,
            name: self.name,
            tags: self.tags,
            passed,
            detail,
            elapsed_secs,
            budget_secs: self.budget_secs,
        }
    }
}

pub fn run_all(cfg: &VerifyConfig, filter: &str) -> Vec<CriterionResult> {
    CRITERIA.iter().filter(|c| c.matches(filter)).map(|c| c.evaluate(cfg)).collect()
}
