use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exante::{base_prices, remaining_value, Decomposition};
use crate::matroid::Matroid;
use crate::set::ElemSet;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PriceBoundCheck {
    /// `(A, S, v̂)` triples checked.
    pub checked: u64,
    /// Largest `Σ_{i∈S} b_i(A, v̂) − R(A, v̂)` seen, and the same for the
    /// expected prices.
    pub worst_fixed: f64,
    pub worst_expected: f64,
}

impl PriceBoundCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.worst_fixed <= tol && self.worst_expected <= tol
    }
}

/// For every independent `A` and every `S` independent in `M/A`, checks
/// `Σ_{i∈S} b_i(A, v̂) ≤ R(A, v̂)` for each `v̂` in the support of the
/// decomposition, and `Σ_{i∈S} b_i(A) ≤ E[R(A, v̂)]`.
pub fn check_base_price_bound(m: &Matroid, dec: &Decomposition, y: &[f64]) -> Result<PriceBoundCheck> {
    let n = m.n();
    let mut out = PriceBoundCheck { checked: 0, worst_fixed: f64::NEG_INFINITY, worst_expected: f64::NEG_INFINITY };
    let vhats: Vec<Vec<f64>> = dec
        .sets
        .iter()
        .map(|s| (0..n).map(|i| if s.contains(i) { y[i] } else { 0.0 }).collect())
        .collect();
    for a in m.ground().subsets().filter(|&a| m.independent(a)) {
        let rest = m.ground().difference(a);
        let extensions: Vec<ElemSet> = rest.subsets().filter(|&s| m.independent(a.union(s))).collect();
        let mut expected_r = 0.0;
        for (v, &w) in vhats.iter().zip(&dec.weights) {
            let r = remaining_value(m, a, v)?;
            expected_r += w * r;
            let mut b = vec![0.0; n];
            for i in rest {
                b[i] = r - remaining_value(m, a.with(i), v)?;
            }
            for s in &extensions {
                let sum: f64 = s.iter().map(|i| b[i]).sum();
                out.worst_fixed = out.worst_fixed.max(sum - r);
                out.checked += 1;
            }
        }
        let prices = base_prices(m, a, dec, y);
        for s in &extensions {
            let sum: f64 = s.iter().map(|i| prices[i]).sum();
            out.worst_expected = out.worst_expected.max(sum - expected_r);
        }
    }
    Ok(out)
}
