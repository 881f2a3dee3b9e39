//! Exact selection probabilities `q_{i,φ}` of deterministic policies.
//!
//! Fixed order: the distribution over accepted sets is pushed forward along
//! the order, one element at a time. Random order: with independent uniform
//! arrival times, let `G(B, R)(t)` be the expected final selection vector
//! times `Pr[all of R arrive after t]`, given accepted set `B` at time `t`
//! and not-yet-arrived set `R`. Then `G(B, ∅) = 1_B` and
//!
//! `G(B, R)(t) = ∫_t^1 Σ_{j∈R} [G(B, R−j)(s) + x_j 1{s > c_j} (G(B+j, R−j)(s) − G(B, R−j)(s))] ds`
//!
//! where `c_j` is the policy's acceptance cutoff for `j` in state `(N∖R, B)`.
//! Every `G` is piecewise polynomial in `t`, so the recursion is evaluated
//! exactly on merged breakpoints; `q = G(∅, N)(0)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::policy::DeterministicPolicy;
use crate::error::{Error, Result};
use crate::instance::{check_permutation, draw_active, draw_arrival, ArrivalModel};
use crate::matroid::Matroid;
use crate::rng::{monte_carlo, proportion_se};
use crate::set::ElemSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactOptions {
    /// Largest `n` for fixed-order evaluation.
    pub fixed_cap: usize,
    /// Largest `n` for random-order evaluation.
    pub random_cap: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { fixed_cap: 14, random_cap: 7 }
    }
}

fn check_x(m: &Matroid, x: &[f64]) -> Result<()> {
    if x.len() != m.n() {
        return Err(Error::DimensionMismatch { what: "x", expected: m.n(), got: x.len() });
    }
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidInput(format!("x[{i}] = {v} is not in [0,1]")));
    }
    Ok(())
}

/// Exact `Pr[i selected]` when elements are active independently with
/// probability `x_i`.
pub fn exact_q(
    policy: &DeterministicPolicy,
    m: &Matroid,
    x: &[f64],
    arrival: &ArrivalModel,
    opts: &ExactOptions,
) -> Result<Vec<f64>> {
    check_x(m, x)?;
    arrival.validate(m.n())?;
    match arrival {
        ArrivalModel::Fixed(order) => {
            if m.n() > opts.fixed_cap {
                return Err(Error::EnumerationCap { n: m.n(), cap: opts.fixed_cap });
            }
            Ok(propagate_fixed(policy, m, x, order))
        }
        ArrivalModel::RandomOrder => {
            if m.n() > opts.random_cap {
                return Err(Error::EnumerationCap { n: m.n(), cap: opts.random_cap });
            }
            Ok(RandomOrderIntegrator::new(policy, m, x).q())
        }
    }
}

fn propagate_fixed(policy: &DeterministicPolicy, m: &Matroid, x: &[f64], order: &[usize]) -> Vec<f64> {
    let mut q = vec![0.0; x.len()];
    let mut states: BTreeMap<ElemSet, f64> = BTreeMap::from([(ElemSet::EMPTY, 1.0)]);
    let mut arrived = ElemSet::EMPTY;
    for &i in order {
        let xi = x[i];
        let mut next: BTreeMap<ElemSet, f64> = BTreeMap::new();
        for (b, p) in states {
            if xi > 0.0 && policy.decide(m, arrived, b, i, None) {
                q[i] += p * xi;
                *next.entry(b.with(i)).or_insert(0.0) += p * xi;
                if xi < 1.0 {
                    *next.entry(b).or_insert(0.0) += p * (1.0 - xi);
                }
            } else {
                *next.entry(b).or_insert(0.0) += p;
            }
        }
        states = next;
        arrived.insert(i);
    }
    q
}

/// Fixed-order `q` by summing over all `2^n` activity patterns.
pub fn exact_q_enumerate(policy: &DeterministicPolicy, m: &Matroid, x: &[f64], order: &[usize]) -> Result<Vec<f64>> {
    check_x(m, x)?;
    check_permutation(order, m.n())?;
    if m.n() > 20 {
        return Err(Error::EnumerationCap { n: m.n(), cap: 20 });
    }
    let mut q = vec![0.0; x.len()];
    for active in m.ground().subsets() {
        let w = pattern_probability(x, active);
        if w == 0.0 {
            continue;
        }
        for i in policy.select(m, order, None, active) {
            q[i] += w;
        }
    }
    Ok(q)
}

/// `Π_{i∈S} x_i Π_{i∉S} (1 − x_i)`.
pub fn pattern_probability(x: &[f64], active: ElemSet) -> f64 {
    x.iter().enumerate().map(|(i, &xi)| if active.contains(i) { xi } else { 1.0 - xi }).product()
}

/// Random-order `q` for a policy that ignores arrival times, averaging the
/// fixed-order value over all `n!` permutations.
pub fn exact_q_permutations(policy: &DeterministicPolicy, m: &Matroid, x: &[f64], cap: usize) -> Result<Vec<f64>> {
    check_x(m, x)?;
    if let DeterministicPolicy::Threshold(p) = policy {
        if p.rule().schedule() == crate::schemes::Schedule::Exponential {
            return Err(Error::InvalidInput("policy depends on arrival times".into()));
        }
    }
    let n = m.n();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let mut total = vec![0.0; n];
    let mut count = 0u64;
    for order in permutations(n) {
        for (t, v) in total.iter_mut().zip(propagate_fixed(policy, m, x, &order)) {
            *t += v;
        }
        count += 1;
    }
    Ok(total.into_iter().map(|v| v / count as f64).collect())
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(k) = (0..n.saturating_sub(1)).rev().find(|&k| cur[k] < cur[k + 1]) else {
            return out;
        };
        let l = (k + 1..n).rev().find(|&l| cur[k] < cur[l]).expect("successor exists");
        cur.swap(k, l);
        cur[k + 1..].reverse();
    }
}

/// Monte Carlo estimate of `q` with standard errors.
pub fn estimate_q(
    policy: &DeterministicPolicy,
    m: &Matroid,
    x: &[f64],
    arrival: &ArrivalModel,
    trials: u64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_x(m, x)?;
    arrival.validate(m.n())?;
    let n = m.n();
    let counts = monte_carlo(
        trials,
        seed,
        || vec![0u64; n],
        |acc, rng, _| {
            let active = draw_active(x, rng);
            let order = draw_arrival(arrival, n, rng);
            let times = match &order {
                crate::instance::ArrivalOrder::Times(t) => Some(t.as_slice()),
                _ => None,
            };
            for i in policy.select(m, &order.sequence(), times, active) {
                acc[i] += 1;
            }
        },
        |acc, other| {
            for (a, b) in acc.iter_mut().zip(other) {
                *a += b;
            }
        },
    );
    let q: Vec<f64> = counts.iter().map(|&c| c as f64 / trials.max(1) as f64).collect();
    let se = q.iter().map(|&p| proportion_se(p, trials)).collect();
    Ok((q, se))
}

/// Vector-valued piecewise polynomial on `[0, 1]`.
#[derive(Clone, Debug)]
struct Piecewise {
    /// `breaks[0] = 0 < … < breaks[k] = 1`.
    breaks: Vec<f64>,
    /// `pieces[k][i]`: monomial coefficients of component `i` on piece `k`.
    pieces: Vec<Vec<Vec<f64>>>,
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

fn add_scaled(acc: &mut Vec<f64>, c: &[f64], w: f64) {
    if w == 0.0 {
        return;
    }
    if acc.len() < c.len() {
        acc.resize(c.len(), 0.0);
    }
    for (a, &b) in acc.iter_mut().zip(c) {
        *a += w * b;
    }
}

impl Piecewise {
    fn constant(values: Vec<f64>) -> Self {
        Piecewise { breaks: vec![0.0, 1.0], pieces: vec![values.into_iter().map(|v| vec![v]).collect()] }
    }

    fn piece_at(&self, s: f64) -> usize {
        let k = self.breaks.partition_point(|&b| b <= s);
        k.saturating_sub(1).min(self.pieces.len() - 1)
    }

    fn eval(&self, t: f64) -> Vec<f64> {
        self.pieces[self.piece_at(t)].iter().map(|c| horner(c, t)).collect()
    }

    /// `t ↦ ∫_t^1 f(s) ds` for `f` given piecewise on `breaks`.
    fn integrate_to_one(breaks: Vec<f64>, integrand: Vec<Vec<Vec<f64>>>) -> Self {
        let dims = integrand.first().map_or(0, Vec::len);
        let mut tail = vec![0.0; dims];
        let mut pieces = vec![Vec::new(); integrand.len()];
        for k in (0..integrand.len()).rev() {
            let (a, b) = (breaks[k], breaks[k + 1]);
            let mut comps = Vec::with_capacity(dims);
            for (i, c) in integrand[k].iter().enumerate() {
                let mut anti = vec![0.0; c.len() + 1];
                for (p, &v) in c.iter().enumerate() {
                    anti[p + 1] = v / (p + 1) as f64;
                }
                let at_b = horner(&anti, b);
                let at_a = horner(&anti, a);
                let mut g: Vec<f64> = anti.iter().map(|v| -v).collect();
                g[0] += at_b + tail[i];
                tail[i] += at_b - at_a;
                comps.push(g);
            }
            pieces[k] = comps;
        }
        Piecewise { breaks, pieces }
    }
}

struct RandomOrderIntegrator<'a> {
    policy: &'a DeterministicPolicy,
    m: &'a Matroid,
    x: &'a [f64],
    n: usize,
    memo: HashMap<(ElemSet, ElemSet), Arc<Piecewise>>,
}

impl<'a> RandomOrderIntegrator<'a> {
    fn new(policy: &'a DeterministicPolicy, m: &'a Matroid, x: &'a [f64]) -> Self {
        RandomOrderIntegrator { policy, m, x, n: x.len(), memo: HashMap::new() }
    }

    fn q(mut self) -> Vec<f64> {
        let g = self.g(ElemSet::EMPTY, ElemSet::full(self.n));
        g.eval(0.0)
    }

    fn g(&mut self, b: ElemSet, r: ElemSet) -> Arc<Piecewise> {
        if let Some(hit) = self.memo.get(&(b, r)) {
            return hit.clone();
        }
        let result = Arc::new(if r.is_empty() {
            Piecewise::constant((0..self.n).map(|i| if b.contains(i) { 1.0 } else { 0.0 }).collect())
        } else {
            self.step(b, r)
        });
        self.memo.insert((b, r), result.clone());
        result
    }

    fn step(&mut self, b: ElemSet, r: ElemSet) -> Piecewise {
        let arrived = ElemSet::full(self.n).difference(r);
        let mut branches = Vec::with_capacity(r.len());
        let mut breaks = vec![0.0, 1.0];
        for j in r {
            let skip = self.g(b, r.without(j));
            let cutoff = if self.x[j] > 0.0 { self.policy.cutoff(self.m, arrived, b, j) } else { 1.0 };
            let take = (cutoff < 1.0).then(|| self.g(b.with(j), r.without(j)));
            breaks.extend_from_slice(&skip.breaks);
            if let Some(t) = &take {
                breaks.extend_from_slice(&t.breaks);
            }
            if cutoff > 0.0 && cutoff < 1.0 {
                breaks.push(cutoff);
            }
            branches.push((j, cutoff, skip, take));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let mut integrand = Vec::with_capacity(breaks.len() - 1);
        for k in 0..breaks.len() - 1 {
            let mid = 0.5 * (breaks[k] + breaks[k + 1]);
            let mut comps = vec![Vec::new(); self.n];
            for (j, cutoff, skip, take) in &branches {
                let w = if take.is_some() && *cutoff < mid { self.x[*j] } else { 0.0 };
                let sp = &skip.pieces[skip.piece_at(mid)];
                for (c, poly) in comps.iter_mut().zip(sp) {
                    add_scaled(c, poly, 1.0 - w);
                }
                if let Some(t) = take {
                    if w > 0.0 {
                        let tp = &t.pieces[t.piece_at(mid)];
                        for (c, poly) in comps.iter_mut().zip(tp) {
                            add_scaled(c, poly, w);
                        }
                    }
                }
            }
            integrand.push(comps);
        }
        Piecewise::integrate_to_one(breaks, integrand)
    }
}
