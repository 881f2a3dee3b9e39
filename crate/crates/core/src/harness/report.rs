use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Estimate,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Estimate => "estimate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementSelectability {
    pub element: usize,
    pub x: f64,
    pub p_select: f64,
    pub mode: Mode,
    pub se: f64,
    pub trials: u64,
}

/// Per-element selection probabilities and the implied constant
/// `c = min_i Pr[i selected] / x_i` over `x_i > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectabilityReport {
    pub scheme: String,
    pub instance_hash: String,
    pub seed: Option<u64>,
    pub mode: Mode,
    pub elements: Vec<ElementSelectability>,
    pub c: Option<f64>,
}

impl SelectabilityReport {
    pub(crate) fn assemble(
        scheme: String,
        instance_hash: String,
        seed: Option<u64>,
        mode: Mode,
        x: &[f64],
        p: &[f64],
        se: &[f64],
        trials: u64,
    ) -> Self {
        let elements: Vec<ElementSelectability> = (0..x.len())
            .map(|i| ElementSelectability { element: i, x: x[i], p_select: p[i], mode, se: se[i], trials })
            .collect();
        let c = elements.iter().filter(|e| e.x > 0.0).map(|e| e.p_select / e.x).reduce(f64::min);
        SelectabilityReport { scheme, instance_hash, seed, mode, elements, c }
    }

    /// Elements with `p_i < c0·x_i − sigmas·se_i − tol`.
    pub fn violations(&self, c0: f64, sigmas: f64, tol: f64) -> Vec<usize> {
        self.elements
            .iter()
            .filter(|e| e.p_select < c0 * e.x - sigmas * e.se - tol)
            .map(|e| e.element)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Columns `element, x_i, p_select, mode, se, trials`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(["element", "x_i", "p_select", "mode", "se", "trials"]).map_err(csv_err)?;
        for e in &self.elements {
            out.write_record([
                e.element.to_string(),
                e.x.to_string(),
                e.p_select.to_string(),
                e.mode.as_str().to_string(),
                e.se.to_string(),
                e.trials.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Estimated `E[Alg]` against the ex-ante objective `Σ x_i y_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub scheme: String,
    pub instance_hash: String,
    pub seed: u64,
    pub trials: u64,
    pub e_alg: f64,
    pub se: f64,
    pub e_revenue: f64,
    pub revenue_se: f64,
    pub e_utility: f64,
    pub utility_se: f64,
    pub exante_objective: f64,
    /// `None` when the ex-ante objective is 0.
    pub ratio: Option<f64>,
    pub ratio_se: Option<f64>,
    /// Arrival order the estimate was taken under, for fixed-order runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
}

impl RatioReport {
    /// `E[Alg] ≥ c0·objective − sigmas·SE`.
    pub fn meets(&self, c0: f64, sigmas: f64) -> bool {
        self.e_alg >= c0 * self.exante_objective - sigmas * self.se
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(["scheme", "trials", "e_alg", "se", "e_revenue", "e_utility", "exante_objective", "ratio"])
            .map_err(csv_err)?;
        out.write_record([
            self.scheme.clone(),
            self.trials.to_string(),
            self.e_alg.to_string(),
            self.se.to_string(),
            self.e_revenue.to_string(),
            self.e_utility.to_string(),
            self.exante_objective.to_string(),
            self.ratio.map_or_else(String::new, |r| r.to_string()),
        ])
        .map_err(csv_err)?;
        out.flush()?;
        Ok(())
    }
}
