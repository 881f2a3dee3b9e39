//! The ex-ante relaxation over the matroid polytope, its convex decomposition
//! into independent sets, correlated value vectors, remaining values and
//! base prices.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BernoulliInstance, GeneralInstance, QuantileRule};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::matroid::{check_weights, Matroid};
use crate::rng::{monte_carlo, Stream};
use crate::set::ElemSet;

pub const DECOMPOSITION_TOL: f64 = 1e-8;
pub const PRICING_TOL: f64 = 1e-9;
/// Exact base prices are used up to this many decomposition sets.
pub const EXACT_BASE_PRICE_SETS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExAnteSolution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
}

/// A convex combination of independent sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub sets: Vec<ElemSet>,
    pub weights: Vec<f64>,
}

impl Decomposition {
    pub fn point(set: ElemSet) -> Self {
        Decomposition { sets: vec![set], weights: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// `Σ_j λ_j 1{i ∈ I_j}` for each `i < n`.
    pub fn marginals(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (s, &w) in self.sets.iter().zip(&self.weights) {
            for i in s.iter().filter(|&i| i < n) {
                m[i] += w;
            }
        }
        m
    }

    /// `‖Σ_j λ_j 1_{I_j} − x‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.marginals(x.len()).iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn validate(&self, m: &Matroid, x: &[f64], tol: f64) -> Result<()> {
        if self.sets.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                what: "decomposition weights",
                expected: self.sets.len(),
                got: self.weights.len(),
            });
        }
        for s in &self.sets {
            if !m.is_independent(*s)? {
                return Err(Error::InvalidInput(format!("decomposition set {s} is not independent")));
            }
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidInput(format!("negative decomposition weight {w}")));
        }
        let total: f64 = self.weights.iter().sum();
        let residual = self.residual(x);
        if (total - 1.0).abs() > tol || residual > tol {
            return Err(Error::DecompositionFailed { residual: residual.max((total - 1.0).abs()), columns: self.len() });
        }
        Ok(())
    }

    /// Index `j` drawn with probability `λ_j`.
    pub fn sample_index(&self, rng: &mut Stream) -> usize {
        let u: f64 = rng.gen::<f64>() * self.weights.iter().sum::<f64>();
        let mut cum = 0.0;
        for (j, &w) in self.weights.iter().enumerate() {
            cum += w;
            if u < cum {
                return j;
            }
        }
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

/// Raises coordinates of a point inside `P_M ∩ box` one at a time. The
/// largest feasible increment of coordinate `k` is found by a column
/// generation LP whose columns are independent sets; the pool of columns is
/// kept between calls and always represents the current point.
struct PolymatroidFill<'m> {
    matroid: &'m Matroid,
    x: Vec<f64>,
    pool: Vec<ElemSet>,
}

impl<'m> PolymatroidFill<'m> {
    fn new(matroid: &'m Matroid) -> Self {
        PolymatroidFill { matroid, x: vec![0.0; matroid.n()], pool: vec![ElemSet::EMPTY] }
    }

    /// Largest `t ≤ cap` with `x + t e_k ∈ P_M`; applies it and returns it.
    fn raise(&mut self, k: usize, cap: f64) -> Result<f64> {
        if cap <= 0.0 || !self.matroid.independent(ElemSet::singleton(k)) {
            return Ok(0.0);
        }
        let n = self.x.len();
        let rows: Vec<usize> = (0..n).filter(|&i| i == k || self.x[i] > 0.0).collect();
        let max_iters = 50 * n + 50;
        let mut t = 0.0;
        for _ in 0..max_iters {
            let cols = self.pool.len();
            let mut objective = vec![0.0; cols + 1];
            objective[cols] = -1.0;
            let mut lp = LinearProgram::new(objective);
            for &i in &rows {
                let mut coeffs: Vec<f64> =
                    self.pool.iter().map(|s| if s.contains(i) { 1.0 } else { 0.0 }).collect();
                coeffs.push(if i == k { -1.0 } else { 0.0 });
                lp.push(coeffs, Relation::Ge, self.x[i]);
            }
            let mut convex = vec![1.0; cols + 1];
            convex[cols] = 0.0;
            lp.push(convex, Relation::Eq, 1.0);
            let mut bound = vec![0.0; cols + 1];
            bound[cols] = 1.0;
            lp.push(bound, Relation::Le, cap);

            let sol = match lp.solve()? {
                LpOutcome::Optimal(s) => s,
                LpOutcome::Infeasible { infeasibility, .. } => {
                    return Err(Error::Lp(format!(
                        "column pool lost feasibility (infeasibility {infeasibility:.3e})"
                    )))
                }
                LpOutcome::Unbounded => return Err(Error::Lp("increment LP unbounded".into())),
            };
            t = sol.x[cols].clamp(0.0, cap);
            let mut weights = vec![0.0; n];
            for (r, &i) in rows.iter().enumerate() {
                weights[i] = sol.duals[r].max(0.0);
            }
            let pi0 = sol.duals[rows.len()];
            let column = self.matroid.greedy(&weights, self.matroid.ground(), ElemSet::EMPTY);
            let gain: f64 = column.iter().map(|i| weights[i]).sum::<f64>() + pi0;
            if gain <= PRICING_TOL || self.pool.contains(&column) {
                break;
            }
            self.pool.push(column);
        }
        self.x[k] += t;
        Ok(t)
    }
}

fn sorted_by_value_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

/// Maximizes `Σ y_i x_i` over `x ∈ P_M`, `0 ≤ x ≤ p` by the polymatroid
/// greedy: elements in descending `y` (ties by id), each raised as far as the
/// box and the matroid polytope allow.
pub fn solve_exante(inst: &BernoulliInstance) -> Result<ExAnteSolution> {
    let mut fill = PolymatroidFill::new(&inst.matroid);
    for k in sorted_by_value_desc(&inst.y) {
        if inst.y[k] > 0.0 {
            fill.raise(k, inst.p[k])?;
        }
    }
    let x = fill.x;
    let objective = x.iter().zip(&inst.y).fold(0.0, |s, (a, b)| s + a * b);
    Ok(ExAnteSolution { x, y: inst.y.clone(), objective })
}

/// Ex-ante relaxation of a general instance: the objective
/// `Σ_i x_i E[v_i | top x_i quantile]` is separable concave with slopes equal
/// to the atom values, so the same greedy runs over (element, atom) pieces in
/// descending value. Returns the solution with `y` set to the conditional
/// values, and the activation rules.
pub fn solve_exante_general(inst: &GeneralInstance) -> Result<(ExAnteSolution, Vec<QuantileRule>)> {
    let mut pieces: Vec<(f64, usize, f64)> = Vec::new();
    for (i, d) in inst.dists.iter().enumerate() {
        for &(v, p) in d.atoms() {
            if v > 0.0 {
                pieces.push((v, i, p));
            }
        }
    }
    pieces.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut fill = PolymatroidFill::new(&inst.matroid);
    let mut saturated = ElemSet::EMPTY;
    for (_, i, p) in pieces {
        if saturated.contains(i) {
            continue;
        }
        let t = fill.raise(i, p)?;
        if t < p {
            saturated.insert(i);
        }
    }
    let x: Vec<f64> = fill.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let (bern, rules) = inst.reduce(&x)?;
    let objective = x.iter().zip(&bern.y).fold(0.0, |s, (a, b)| s + a * b);
    Ok((ExAnteSolution { x, y: bern.y, objective }, rules))
}

/// Whether `Σ_{i∈S} x_i ≤ rank(S) + tol` for every subset `S` (exhaustive).
pub fn in_matroid_polytope(m: &Matroid, x: &[f64], tol: f64) -> Result<bool> {
    if m.n() > 24 {
        return Err(Error::EnumerationCap { n: m.n(), cap: 24 });
    }
    if x.iter().any(|&v| v < -tol) {
        return Ok(false);
    }
    Ok(m.ground().subsets().all(|s| s.iter().map(|i| x[i]).sum::<f64>() <= m.rank_of(s) as f64 + tol))
}

#[derive(Clone, Copy, Debug)]
pub struct DecomposeOptions {
    pub tol: f64,
    pub pricing_tol: f64,
    /// Column cap per ground-set element.
    pub columns_per_element: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { tol: DECOMPOSITION_TOL, pricing_tol: PRICING_TOL, columns_per_element: 50 }
    }
}

/// Writes `x` as a convex combination of independent sets.
pub fn decompose(x: &[f64], m: &Matroid) -> Result<Decomposition> {
    decompose_with(x, m, DecomposeOptions::default())
}

/// Column generation on `Σ_j λ_j 1_{I_j} = x`, `Σ λ_j = 1`, `λ ≥ 0`, made
/// always feasible by elastic slack on each coordinate; columns are priced by
/// the greedy maximum-weight independent set under the current duals.
pub fn decompose_with(x: &[f64], m: &Matroid, opts: DecomposeOptions) -> Result<Decomposition> {
    let n = m.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { what: "x", expected: n, got: x.len() });
    }
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= 1.0 + opts.tol)) {
        return Err(Error::InvalidInput(format!("x[{i}] = {v} is not in [0,1]")));
    }
    let support: ElemSet = (0..n).filter(|&i| x[i] > 0.0).collect();
    if support.is_empty() {
        return Ok(Decomposition::point(ElemSet::EMPTY));
    }
    let rows: Vec<usize> = support.to_vec();
    let r = rows.len();
    let cap = (opts.columns_per_element * n).max(2);

    let mut pool = vec![ElemSet::EMPTY];
    let start = m.greedy(x, support, ElemSet::EMPTY);
    if !start.is_empty() {
        pool.push(start);
    }
    let mut lambda;
    loop {
        let cols = pool.len();
        let mut objective = vec![0.0; cols + 2 * r];
        for v in &mut objective[cols..] {
            *v = 1.0;
        }
        let mut lp = LinearProgram::new(objective);
        for (q, &i) in rows.iter().enumerate() {
            let mut coeffs = vec![0.0; cols + 2 * r];
            for (j, s) in pool.iter().enumerate() {
                if s.contains(i) {
                    coeffs[j] = 1.0;
                }
            }
            coeffs[cols + 2 * q] = 1.0;
            coeffs[cols + 2 * q + 1] = -1.0;
            lp.push(coeffs, Relation::Eq, x[i]);
        }
        let mut convex = vec![0.0; cols + 2 * r];
        for v in &mut convex[..cols] {
            *v = 1.0;
        }
        lp.push(convex, Relation::Eq, 1.0);
        let sol = match lp.solve()? {
            LpOutcome::Optimal(s) => s,
            other => return Err(Error::Lp(format!("elastic decomposition LP returned {other:?}"))),
        };
        lambda = sol.x[..cols].to_vec();
        if sol.objective <= 1e-14 || cols >= cap {
            break;
        }
        let mut weights = vec![0.0; n];
        for (q, &i) in rows.iter().enumerate() {
            weights[i] = sol.duals[q].max(0.0);
        }
        let column = m.greedy(&weights, support, ElemSet::EMPTY);
        let gain = column.iter().map(|i| weights[i]).sum::<f64>() + sol.duals[r];
        if gain <= opts.pricing_tol || pool.contains(&column) {
            break;
        }
        pool.push(column);
    }

    let mut sets = Vec::new();
    let mut weights = Vec::new();
    for (s, w) in pool.into_iter().zip(lambda) {
        if w > 1e-12 {
            sets.push(s);
            weights.push(w);
        } else if w < -1e-12 {
            return Err(Error::Lp(format!("decomposition weight {w} is negative")));
        }
    }
    let dec = Decomposition { sets, weights };
    let residual = dec.residual(x);
    let total: f64 = dec.weights.iter().sum();
    if residual > opts.tol || (total - 1.0).abs() > opts.tol {
        return Err(Error::DecompositionFailed { residual, columns: dec.len() });
    }
    Ok(dec)
}

/// `v̂` with `v̂_i = y_i` on a set drawn from the decomposition, 0 elsewhere.
pub fn sample_correlated(dec: &Decomposition, y: &[f64], rng: &mut Stream) -> Vec<f64> {
    let s = dec.sets[dec.sample_index(rng)];
    y.iter().enumerate().map(|(i, &v)| if s.contains(i) { v } else { 0.0 }).collect()
}

/// `R(A, v̂)`: value of the greedy maximum-weight independent set of `M/A`.
pub fn remaining_value(m: &Matroid, a: ElemSet, v: &[f64]) -> Result<f64> {
    check_weights(v, m.n())?;
    let c = m.contract(a)?;
    Ok(c.greedy(v).iter().map(|i| v[i]).sum())
}

/// Greedy value in `M/A` with weights `y` restricted to `support`, where
/// `basis` is a basis of `A`.
fn remaining_on(m: &Matroid, a: ElemSet, basis: ElemSet, support: ElemSet, y: &[f64]) -> f64 {
    m.greedy(y, support.difference(a), basis).iter().map(|i| y[i]).sum()
}

/// Exact base prices `b_i(A) = Σ_j λ_j [R(A, v̂_j) − R(A ∪ {i}, v̂_j)]` for every element.
pub fn base_prices(m: &Matroid, a: ElemSet, dec: &Decomposition, y: &[f64]) -> Vec<f64> {
    let n = m.n();
    let basis = m.basis_of(a);
    let mut prices = vec![0.0; n];
    let candidates: Vec<(usize, ElemSet)> = m
        .ground()
        .difference(a)
        .iter()
        .filter_map(|i| {
            let grown = basis.with(i);
            // an element spanned by A leaves M/A unchanged and has price 0
            m.independent(grown).then_some((i, grown))
        })
        .collect();
    for (s, &w) in dec.sets.iter().zip(&dec.weights) {
        if w == 0.0 {
            continue;
        }
        let r_a = remaining_on(m, a, basis, *s, y);
        if r_a == 0.0 {
            continue;
        }
        for &(i, grown) in &candidates {
            let r_ai = remaining_on(m, a.with(i), grown, *s, y);
            prices[i] += w * (r_a - r_ai);
        }
    }
    for p in prices.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    prices
}

/// Base prices estimated from `samples` correlated draws, with standard errors.
pub fn base_prices_monte_carlo(
    m: &Matroid,
    a: ElemSet,
    dec: &Decomposition,
    y: &[f64],
    samples: u64,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let n = m.n();
    let basis = m.basis_of(a);
    let (sum, sum_sq) = monte_carlo(
        samples,
        seed,
        || (vec![0.0; n], vec![0.0; n]),
        |acc, rng, _| {
            let s = dec.sets[dec.sample_index(rng)];
            let r_a = remaining_on(m, a, basis, s, y);
            for i in m.ground().difference(a) {
                let grown = basis.with(i);
                let d = if m.independent(grown) { r_a - remaining_on(m, a.with(i), grown, s, y) } else { 0.0 };
                acc.0[i] += d;
                acc.1[i] += d * d;
            }
        },
        |acc, other| {
            for i in 0..n {
                acc.0[i] += other.0[i];
                acc.1[i] += other.1[i];
            }
        },
    );
    let means: Vec<f64> = sum.iter().map(|s| s / samples.max(1) as f64).collect();
    let se = (0..n).map(|i| crate::rng::mean_se(sum[i], sum_sq[i], samples)).collect();
    (means, se)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BasePriceMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Base-price tables memoized by accepted set. Lookups never change values,
/// so the memo can be shared between workers.
#[derive(Debug)]
pub struct BasePriceCache {
    matroid: Arc<Matroid>,
    dec: Decomposition,
    y: Vec<f64>,
    mode: BasePriceMode,
    memo: RwLock<HashMap<ElemSet, Arc<PriceTable>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriceTable {
    pub prices: Vec<f64>,
    /// Standard errors in Monte Carlo mode.
    pub se: Option<Vec<f64>>,
}

impl BasePriceCache {
    pub fn new(matroid: Arc<Matroid>, dec: Decomposition, y: Vec<f64>) -> Self {
        let mode = if dec.len() <= EXACT_BASE_PRICE_SETS {
            BasePriceMode::Exact
        } else {
            BasePriceMode::MonteCarlo { samples: 100_000, seed: crate::rng::DEFAULT_SEED }
        };
        Self::with_mode(matroid, dec, y, mode)
    }

    pub fn with_mode(matroid: Arc<Matroid>, dec: Decomposition, y: Vec<f64>, mode: BasePriceMode) -> Self {
        BasePriceCache { matroid, dec, y, mode, memo: RwLock::new(HashMap::new()) }
    }

    pub fn matroid(&self) -> &Arc<Matroid> {
        &self.matroid
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.dec
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn mode(&self) -> BasePriceMode {
        self.mode
    }

    pub fn table(&self, a: ElemSet) -> Arc<PriceTable> {
        if let Some(t) = self.memo.read().expect("base price memo poisoned").get(&a) {
            return t.clone();
        }
        let table = match self.mode {
            BasePriceMode::Exact => {
                PriceTable { prices: base_prices(&self.matroid, a, &self.dec, &self.y), se: None }
            }
            BasePriceMode::MonteCarlo { samples, seed } => {
                // the seed is tied to the accepted set so the table is a function of A alone
                let (prices, se) =
                    base_prices_monte_carlo(&self.matroid, a, &self.dec, &self.y, samples, seed ^ a.bits());
                PriceTable { prices, se: Some(se) }
            }
        };
        let table = Arc::new(table);
        self.memo.write().expect("base price memo poisoned").entry(a).or_insert(table).clone()
    }

    pub fn price(&self, a: ElemSet, i: usize) -> f64 {
        self.table(a).prices[i]
    }
}

impl Clone for BasePriceCache {
    fn clone(&self) -> Self {
        Self::with_mode(self.matroid.clone(), self.dec.clone(), self.y.clone(), self.mode)
    }
}

/// Cached ex-ante solve, as written by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExAnteRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    pub sets: Vec<ElemSet>,
    pub weights: Vec<f64>,
    pub instance_hash: String,
}

impl ExAnteRecord {
    pub fn new(sol: &ExAnteSolution, dec: &Decomposition, instance_hash: String) -> Self {
        ExAnteRecord {
            x: sol.x.clone(),
            y: sol.y.clone(),
            objective: sol.objective,
            sets: dec.sets.clone(),
            weights: dec.weights.clone(),
            instance_hash,
        }
    }

    pub fn split(self) -> (ExAnteSolution, Decomposition) {
        (
            ExAnteSolution { x: self.x, y: self.y, objective: self.objective },
            Decomposition { sets: self.sets, weights: self.weights },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> ElemSet {
        items.iter().collect()
    }

    fn bern(m: Matroid, p: Vec<f64>, y: Vec<f64>) -> BernoulliInstance {
        BernoulliInstance::new(Arc::new(m), p, y).unwrap()
    }

    fn hat2() -> Matroid {
        Matroid::graphic(4, vec![(0, 2), (2, 1), (0, 3), (3, 1), (0, 1)]).unwrap()
    }

    #[test]
    fn solve_examples() {
        let s = solve_exante(&bern(Matroid::uniform(2, 1).unwrap(), vec![0.5, 0.5], vec![1.0, 1.0])).unwrap();
        assert_eq!(s.x, vec![0.5, 0.5]);
        assert!((s.objective - 1.0).abs() < 1e-12);
        let s = solve_exante(&bern(Matroid::uniform(2, 1).unwrap(), vec![1.0, 1.0], vec![2.0, 1.0])).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
        assert!((s.objective - 2.0).abs() < 1e-12);

        let hat = hat2();
        let x = vec![0.5, 0.5, 0.5, 0.5, 1.0];
        let s = solve_exante(&bern(hat.clone(), x.clone(), vec![1.0; 5])).unwrap();
        assert!(s.objective >= 3.0 - 1e-9);
        assert!(in_matroid_polytope(&hat, &s.x, 1e-9).unwrap());
        assert!(in_matroid_polytope(&hat, &x, 1e-12).unwrap());
    }

    #[test]
    fn loops_and_zero_values_stay_at_zero() {
        let m = Matroid::graphic(2, vec![(0, 0), (0, 1)]).unwrap();
        let s = solve_exante(&bern(m, vec![1.0, 1.0], vec![5.0, 0.0])).unwrap();
        assert_eq!(s.x, vec![0.0, 0.0]);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&[0.5, 0.5], &Matroid::uniform(2, 1).unwrap()).unwrap();
        assert!(d.residual(&[0.5, 0.5]) < 1e-12);
        let mut pairs: Vec<_> = d.sets.iter().zip(&d.weights).filter(|(s, _)| !s.is_empty()).collect();
        pairs.sort_by_key(|(s, _)| s.bits());
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].1 - 0.5).abs() < 1e-12 && (pairs[1].1 - 0.5).abs() < 1e-12);

        let m = Matroid::uniform(3, 2).unwrap();
        let x = [1.0, 0.5, 0.5];
        let d = decompose(&x, &m).unwrap();
        d.validate(&m, &x, 1e-8).unwrap();
        assert!(d.len() <= 4);

        let d = decompose(&[0.0, 0.0], &Matroid::uniform(2, 1).unwrap()).unwrap();
        assert_eq!(d, Decomposition::point(ElemSet::EMPTY));
    }

    #[test]
    fn decompose_rejects_points_outside_the_polytope() {
        match decompose(&[0.75, 0.75], &Matroid::uniform(2, 1).unwrap()) {
            Err(Error::DecompositionFailed { residual, .. }) => assert!(residual > 0.1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn remaining_value_examples() {
        let m = Matroid::uniform(2, 1).unwrap();
        assert_eq!(remaining_value(&m, ElemSet::EMPTY, &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(remaining_value(&m, set(&[0]), &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(remaining_value(&hat2(), ElemSet::EMPTY, &[1.0; 5]).unwrap(), 3.0);
        assert_eq!(remaining_value(&hat2(), set(&[1, 3]), &[0.0; 5]).unwrap(), 0.0);
    }

    #[test]
    fn base_price_examples() {
        let m = Matroid::uniform(2, 1).unwrap();
        let dec = Decomposition { sets: vec![set(&[0]), set(&[1])], weights: vec![0.5, 0.5] };
        assert_eq!(base_prices(&m, ElemSet::EMPTY, &dec, &[1.0, 1.0]), vec![1.0, 1.0]);
        assert_eq!(base_prices(&m, set(&[0]), &dec, &[1.0, 1.0])[1], 0.0);
        assert_eq!(base_prices(&m, ElemSet::EMPTY, &dec, &[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn monte_carlo_base_prices_track_exact() {
        let m = hat2();
        let x = vec![0.5, 0.5, 0.5, 0.5, 1.0];
        let dec = decompose(&x, &m).unwrap();
        let y = [1.0, 2.0, 3.0, 1.5, 2.5];
        let exact = base_prices(&m, set(&[0]), &dec, &y);
        let (est, se) = base_prices_monte_carlo(&m, set(&[0]), &dec, &y, 50_000, 3);
        for i in 0..5 {
            assert!((exact[i] - est[i]).abs() <= 4.0 * se[i] + 1e-12, "{i}: {} vs {}", exact[i], est[i]);
        }
    }

    #[test]
    fn cache_matches_direct_computation() {
        let m = Arc::new(hat2());
        let dec = decompose(&[0.5, 0.5, 0.5, 0.5, 1.0], &m).unwrap();
        let y = vec![1.0; 5];
        let cache = BasePriceCache::new(m.clone(), dec.clone(), y.clone());
        for a in m.ground().subsets() {
            assert_eq!(cache.table(a).prices, base_prices(&m, a, &dec, &y));
            assert_eq!(cache.table(a).prices, base_prices(&m, a, &dec, &y));
        }
    }

    #[test]
    fn general_exante_reduces_to_bernoulli() {
        let m = Arc::new(Matroid::uniform(3, 1).unwrap());
        let b = bern((*m).clone(), vec![0.3, 0.6, 0.9], vec![4.0, 2.0, 1.0]);
        let direct = solve_exante(&b).unwrap();
        let (general, rules) = solve_exante_general(&b.to_general()).unwrap();
        for i in 0..3 {
            assert!((direct.x[i] - general.x[i]).abs() < 1e-12);
        }
        assert!((direct.objective - general.objective).abs() < 1e-12);
        assert_eq!(rules.len(), 3);
    }

    #[test]
    fn record_round_trip() {
        let sol = ExAnteSolution { x: vec![0.5, 0.5], y: vec![1.0, 1.0], objective: 1.0 };
        let dec = Decomposition { sets: vec![set(&[0]), set(&[1])], weights: vec![0.5, 0.5] };
        let rec = ExAnteRecord::new(&sol, &dec, "abc".into());
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains("\"sets\":[[0],[1]]"));
        let (s2, d2) = serde_json::from_str::<ExAnteRecord>(&json).unwrap().split();
        assert_eq!((s2, d2), (sol, dec));
    }
}
