use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exact::{exact_q, permutations, ExactOptions};
use super::oracle::{guarantee, separation_oracle, DualPoint, OracleKind};
use super::policy::{DeterministicPolicy, TableEntry, TablePolicy, ThresholdPolicy};
use crate::error::{Error, Result};
use crate::exante::{in_matroid_polytope, Decomposition};
use crate::instance::{ArrivalModel, ArrivalOrder};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::matroid::Matroid;
use crate::rng::Stream;
use crate::schemes::{OnlineScheme, Schedule, SelectionTrace, ThresholdRule};
use crate::set::ElemSet;

pub const FILE_VERSION: u32 = 1;
/// Weights at or below this are dropped from the mixture.
pub const WEIGHT_TOL: f64 = 1e-12;
const POLYTOPE_TOL: f64 = 1e-9;
const IMPROVEMENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    /// Stop once the restricted LP reaches `target − eps`.
    pub target: f64,
    pub eps: f64,
    pub max_iterations: usize,
    pub oracle: OracleKind,
    pub exact: ExactOptions,
}

impl BuildOptions {
    /// Threshold oracle with target `½` (fixed order) or `1 − 1/e`.
    pub fn for_arrival(arrival: &ArrivalModel) -> Self {
        BuildOptions {
            target: guarantee(arrival),
            eps: 1e-6,
            max_iterations: 200,
            oracle: OracleKind::Threshold,
            exact: ExactOptions::default(),
        }
    }

    /// Best-response oracle without a target: solves the LP over all
    /// deterministic policies to optimality.
    pub fn optimum() -> Self {
        BuildOptions {
            target: f64::INFINITY,
            eps: 0.0,
            max_iterations: 200,
            oracle: OracleKind::BestResponse,
            exact: ExactOptions::default(),
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }
}

/// A convex combination of deterministic policies.
#[derive(Clone, Debug)]
pub struct RandomizedOcrs {
    matroid: Arc<Matroid>,
    x: Vec<f64>,
    values: Vec<f64>,
    arrival: ArrivalModel,
    policies: Vec<DeterministicPolicy>,
    weights: Vec<f64>,
    /// `q[φ][i]` for each kept policy.
    q: Vec<Vec<f64>>,
    certified_c: f64,
    history: Vec<f64>,
}

impl RandomizedOcrs {
    pub fn new(
        matroid: Arc<Matroid>,
        x: Vec<f64>,
        arrival: ArrivalModel,
        policies: Vec<DeterministicPolicy>,
        weights: Vec<f64>,
        opts: &ExactOptions,
    ) -> Result<Self> {
        let n = matroid.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch { what: "x", expected: n, got: x.len() });
        }
        if weights.len() != policies.len() {
            return Err(Error::DimensionMismatch { what: "weights", expected: policies.len(), got: weights.len() });
        }
        if policies.is_empty() {
            return Err(Error::InvalidInput("empty policy mixture".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidInput(format!("negative policy weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("policy weights sum to {total}")));
        }
        arrival.validate(n)?;
        let q = policies.iter().map(|p| exact_q(p, &matroid, &x, &arrival, opts)).collect::<Result<Vec<_>>>()?;
        let mut scheme = RandomizedOcrs {
            values: vec![1.0; n],
            matroid,
            x,
            arrival,
            policies,
            weights,
            q,
            certified_c: 0.0,
            history: Vec::new(),
        };
        scheme.certified_c = scheme.selectability();
        Ok(scheme)
    }

    pub fn with_values(mut self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.x.len() {
            return Err(Error::DimensionMismatch { what: "values", expected: self.x.len(), got: values.len() });
        }
        self.values = values;
        Ok(self)
    }

    pub fn matroid_arc(&self) -> &Arc<Matroid> {
        &self.matroid
    }

    pub fn policies(&self) -> &[DeterministicPolicy] {
        &self.policies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn policy_q(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// `min_i Σ_φ λ_φ q_{i,φ} / x_i` over `x_i > 0`, from the stored `q`.
    pub fn certified_c(&self) -> f64 {
        self.certified_c
    }

    /// Restricted-LP value after each iteration of the build.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// `Σ_φ λ_φ q_{i,φ}`.
    pub fn mixture_q(&self) -> Vec<f64> {
        mix(&self.weights, &self.q, self.x.len())
    }

    fn selectability(&self) -> f64 {
        let q = self.mixture_q();
        q.iter().zip(&self.x).filter(|(_, &xi)| xi > 0.0).map(|(qi, xi)| qi / xi).fold(1.0, f64::min)
    }

    /// Recomputes every policy's `q` from scratch and mixes.
    pub fn verify_exact(&self, opts: &ExactOptions) -> Result<Vec<f64>> {
        let q = self
            .policies
            .iter()
            .map(|p| exact_q(p, &self.matroid, &self.x, &self.arrival, opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(mix(&self.weights, &q, self.x.len()))
    }

    /// Index of a policy drawn with probability `λ_φ`.
    pub fn sample_policy(&self, rng: &mut Stream) -> usize {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        for (j, &w) in self.weights.iter().enumerate() {
            cum += w;
            if u < cum {
                return j;
            }
        }
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    pub fn to_file(&self) -> RandomizedOcrsFile {
        RandomizedOcrsFile {
            v: FILE_VERSION,
            matroid: (*self.matroid).clone(),
            x: self.x.clone(),
            arrival: self.arrival.clone(),
            certified_c: self.certified_c,
            weights: self.weights.clone(),
            policies: self.policies.iter().map(|p| PolicyDescriptor::from_policy(p, self.x.len())).collect(),
            history: self.history.clone(),
            q: self.q.clone(),
        }
    }
}

fn mix(weights: &[f64], q: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (w, qp) in weights.iter().zip(q) {
        for (o, v) in out.iter_mut().zip(qp) {
            *o += w * v;
        }
    }
    out
}

/// Samples one policy by `λ` and runs it. Fixed-order schemes only run on
/// their own permutation; random-order schemes need arrival times.
pub fn execute_randomized_crs(
    scheme: &RandomizedOcrs,
    order: &ArrivalOrder,
    active: ElemSet,
    rng: &mut Stream,
) -> Result<SelectionTrace> {
    match (&scheme.arrival, order) {
        (ArrivalModel::Fixed(o), ArrivalOrder::Permutation(p)) if o == p => {}
        (ArrivalModel::RandomOrder, ArrivalOrder::Times(t)) if t.len() == scheme.x.len() => {}
        _ => {
            return Err(Error::SchemeMismatch(format!(
                "arrival {order:?} does not match the scheme's mode {:?}",
                scheme.arrival
            )))
        }
    }
    let j = scheme.sample_policy(rng);
    Ok(scheme.policies[j].run(&scheme.matroid, order, active, Some(&scheme.values)))
}

impl OnlineScheme for RandomizedOcrs {
    fn name(&self) -> String {
        "lp-ocrs".into()
    }

    fn matroid(&self) -> &Matroid {
        &self.matroid
    }

    fn marginals(&self) -> &[f64] {
        &self.x
    }

    fn values(&self) -> &[f64] {
        &self.values
    }

    fn arrival(&self) -> &ArrivalModel {
        &self.arrival
    }

    fn is_deterministic(&self) -> bool {
        self.weights.len() == 1
    }

    fn run(&self, order: &ArrivalOrder, active: ElemSet, rng: &mut Stream) -> Result<SelectionTrace> {
        execute_randomized_crs(self, order, active, rng)
    }

    fn exact_selection(&self) -> Option<Result<Vec<f64>>> {
        Some(Ok(self.mixture_q()))
    }
}

fn fingerprint(q: &[f64]) -> Vec<i64> {
    q.iter().map(|v| (v * 1e12).round() as i64).collect()
}

/// Column generation over deterministic policies: solve
/// `max c  s.t.  Σ_φ q_{i,φ} λ_φ ≥ c x_i (x_i > 0),  Σ λ = 1,  c ≤ 1`
/// over the current columns, hand the normalized duals to the separation
/// oracle, and add its policy while it beats the dual objective.
pub fn build_randomized_crs(
    matroid: Arc<Matroid>,
    x: Vec<f64>,
    arrival: ArrivalModel,
    opts: &BuildOptions,
) -> Result<RandomizedOcrs> {
    let n = matroid.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { what: "x", expected: n, got: x.len() });
    }
    arrival.validate(n)?;
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidInput(format!("x[{i}] = {v} is not in [0,1]")));
    }
    if !in_matroid_polytope(&matroid, &x, POLYTOPE_TOL)? {
        return Err(Error::Infeasible("x is not in the matroid polytope".into()));
    }
    let support: Vec<usize> = (0..n).filter(|&i| x[i] > 0.0).collect();
    if support.is_empty() {
        let mut s = RandomizedOcrs::new(matroid, x, arrival, vec![DeterministicPolicy::Never], vec![1.0], &opts.exact)?;
        s.certified_c = 1.0;
        s.history = vec![1.0];
        return Ok(s);
    }

    let first = separation_oracle(&DualPoint::uniform(&x), &matroid, &x, &arrival, opts.oracle, &opts.exact)?;
    let mut seen = HashSet::from([fingerprint(&first.q)]);
    let mut policies = vec![first.policy];
    let mut qs = vec![first.q];
    let mut history = Vec::new();

    for _ in 0..opts.max_iterations {
        let (lambda, c, duals) = solve_restricted(&qs, &x, &support)?;
        history.push(c);
        let done = |policies: Vec<DeterministicPolicy>, qs: Vec<Vec<f64>>, history: Vec<f64>| {
            finish(matroid.clone(), x.clone(), arrival.clone(), policies, qs, lambda.clone(), history)
        };
        if c >= opts.target - opts.eps {
            return Ok(done(policies, qs, history));
        }
        let mut raw = vec![0.0; n];
        for (k, &i) in support.iter().enumerate() {
            raw[i] = duals[k];
        }
        let dual = DualPoint::normalized(&raw, &x, c);
        let out = separation_oracle(&dual, &matroid, &x, &arrival, opts.oracle, &opts.exact)?;
        if out.value <= dual.mu + IMPROVEMENT_TOL || !seen.insert(fingerprint(&out.q)) {
            return Ok(done(policies, qs, history));
        }
        policies.push(out.policy);
        qs.push(out.q);
    }
    Err(Error::BuildDidNotConverge {
        iterations: opts.max_iterations,
        best_c: history.iter().copied().fold(0.0, f64::max),
    })
}

/// Returns `(λ, c, duals of the support rows)`.
fn solve_restricted(qs: &[Vec<f64>], x: &[f64], support: &[usize]) -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let k = qs.len();
    let mut objective = vec![0.0; k + 1];
    objective[k] = -1.0;
    let mut lp = LinearProgram::new(objective);
    for &i in support {
        let mut row: Vec<f64> = qs.iter().map(|q| q[i]).collect();
        row.push(-x[i]);
        lp.push(row, Relation::Ge, 0.0);
    }
    let mut sum = vec![1.0; k + 1];
    sum[k] = 0.0;
    lp.push(sum, Relation::Eq, 1.0);
    let mut cap = vec![0.0; k + 1];
    cap[k] = 1.0;
    lp.push(cap, Relation::Le, 1.0);
    match lp.solve()? {
        LpOutcome::Optimal(sol) => {
            let c = sol.x[k];
            Ok((sol.x[..k].to_vec(), c, sol.duals[..support.len()].to_vec()))
        }
        other => Err(Error::Lp(format!("restricted LP is not optimal: {other:?}"))),
    }
}

fn finish(
    matroid: Arc<Matroid>,
    x: Vec<f64>,
    arrival: ArrivalModel,
    policies: Vec<DeterministicPolicy>,
    qs: Vec<Vec<f64>>,
    lambda: Vec<f64>,
    history: Vec<f64>,
) -> RandomizedOcrs {
    let mut kept_p = Vec::new();
    let mut kept_q = Vec::new();
    let mut weights = Vec::new();
    for ((p, q), w) in policies.into_iter().zip(qs).zip(lambda) {
        if w > WEIGHT_TOL {
            kept_p.push(p);
            kept_q.push(q);
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let n = x.len();
    let mut s = RandomizedOcrs {
        values: vec![1.0; n],
        matroid,
        x,
        arrival,
        policies: kept_p,
        weights,
        q: kept_q,
        certified_c: 0.0,
        history,
    };
    s.certified_c = s.selectability();
    s
}

/// Result of building against every fixed order.
#[derive(Clone, Debug)]
pub struct WorstOrderBuild {
    pub per_order: Vec<(Vec<usize>, f64)>,
    pub worst_order: Vec<usize>,
    pub worst: RandomizedOcrs,
}

/// Builds a fixed-order scheme for each of the `n!` orders and reports the
/// smallest certified `c`.
pub fn build_worst_order(matroid: Arc<Matroid>, x: Vec<f64>, opts: &BuildOptions, cap: usize) -> Result<WorstOrderBuild> {
    let n = matroid.n();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let mut per_order = Vec::new();
    let mut worst: Option<(Vec<usize>, RandomizedOcrs)> = None;
    for order in permutations(n) {
        let s = build_randomized_crs(matroid.clone(), x.clone(), ArrivalModel::Fixed(order.clone()), opts)?;
        per_order.push((order.clone(), s.certified_c()));
        if worst.as_ref().map_or(true, |(_, w)| s.certified_c() < w.certified_c()) {
            worst = Some((order, s));
        }
    }
    let (worst_order, worst) = worst.expect("at least one order");
    Ok(WorstOrderBuild { per_order, worst_order, worst })
}

/// Serialized form of a [`RandomizedOcrs`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RandomizedOcrsFile {
    pub v: u32,
    pub matroid: Matroid,
    pub x: Vec<f64>,
    pub arrival: ArrivalModel,
    pub certified_c: f64,
    pub weights: Vec<f64>,
    pub policies: Vec<PolicyDescriptor>,
    #[serde(default)]
    pub history: Vec<f64>,
    #[serde(default)]
    pub q: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyDescriptor {
    Threshold { x: Vec<f64>, y: Vec<f64>, sets: Vec<ElemSet>, weights: Vec<f64>, schedule: Schedule },
    Table { accept: Vec<TableEntry> },
    Greedy,
    Never,
}

impl PolicyDescriptor {
    fn from_policy(p: &DeterministicPolicy, n: usize) -> Self {
        match p {
            DeterministicPolicy::Threshold(t) => {
                let rule = t.rule();
                let dec = rule.decomposition();
                PolicyDescriptor::Threshold {
                    x: dec.marginals(n),
                    y: rule.y().to_vec(),
                    sets: dec.sets.clone(),
                    weights: dec.weights.clone(),
                    schedule: rule.schedule(),
                }
            }
            DeterministicPolicy::Table(t) => PolicyDescriptor::Table { accept: t.accept.iter().copied().collect() },
            DeterministicPolicy::Greedy => PolicyDescriptor::Greedy,
            DeterministicPolicy::Never => PolicyDescriptor::Never,
        }
    }

    fn policy(&self, matroid: &Arc<Matroid>) -> Result<DeterministicPolicy> {
        Ok(match self {
            PolicyDescriptor::Threshold { y, sets, weights, schedule, .. } => {
                let dec = Decomposition { sets: sets.clone(), weights: weights.clone() };
                for s in &dec.sets {
                    if !matroid.is_independent(*s)? {
                        return Err(Error::InvalidInput(format!("decomposition set {s} is not independent")));
                    }
                }
                let rule = ThresholdRule::new(matroid.clone(), dec, y.clone(), *schedule)?;
                DeterministicPolicy::Threshold(ThresholdPolicy::new(Arc::new(rule)))
            }
            PolicyDescriptor::Table { accept } => {
                DeterministicPolicy::Table(TablePolicy { accept: accept.iter().copied().collect() })
            }
            PolicyDescriptor::Greedy => DeterministicPolicy::Greedy,
            PolicyDescriptor::Never => DeterministicPolicy::Never,
        })
    }
}

impl RandomizedOcrsFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: RandomizedOcrsFile = serde_json::from_str(text)?;
        if f.v != FILE_VERSION {
            return Err(Error::InvalidInput(format!("unsupported scheme file version {}", f.v)));
        }
        Ok(f)
    }

    /// Rebuilds the scheme, recomputing `q` and the certified constant.
    pub fn scheme(&self, opts: &ExactOptions) -> Result<RandomizedOcrs> {
        let m = Arc::new(self.matroid.clone());
        let policies = self.policies.iter().map(|p| p.policy(&m)).collect::<Result<Vec<_>>>()?;
        let mut s = RandomizedOcrs::new(m, self.x.clone(), self.arrival.clone(), policies, self.weights.clone(), opts)?;
        s.history = self.history.clone();
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn rank1_pair_fixed_order() {
        let m = Arc::new(Matroid::uniform(2, 1).unwrap());
        let arrival = ArrivalModel::identity(2);
        let s = build_randomized_crs(m, vec![0.5, 0.5], arrival.clone(), &BuildOptions::for_arrival(&arrival)).unwrap();
        assert!(s.certified_c() >= 0.5 - 1e-6, "{}", s.certified_c());
        let q = s.verify_exact(&ExactOptions::default()).unwrap();
        assert!(q.iter().all(|&qi| qi >= (0.5 - 1e-6) * 0.5));
        for w in s.history().windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn two_element_optimum_below_ceiling() {
        let eps = 0.01;
        let m = Arc::new(Matroid::uniform(2, 1).unwrap());
        let s = build_randomized_crs(m, vec![1.0 - eps, eps], ArrivalModel::identity(2), &BuildOptions::optimum()).unwrap();
        let c = s.certified_c();
        assert!(c >= 0.5 - 1e-9 && c <= 0.5 + eps / 2.0 + 1e-9, "{c}");
        assert!((c - 1.0 / (2.0 - eps)).abs() < 1e-9, "{c}");
    }

    #[test]
    fn zero_point_and_infeasible_point() {
        let m = Arc::new(Matroid::uniform(2, 1).unwrap());
        let a = ArrivalModel::identity(2);
        let s = build_randomized_crs(m.clone(), vec![0.0, 0.0], a.clone(), &BuildOptions::for_arrival(&a)).unwrap();
        assert_eq!(s.certified_c(), 1.0);
        let err = build_randomized_crs(m, vec![0.7, 0.7], a.clone(), &BuildOptions::for_arrival(&a));
        assert!(matches!(err, Err(Error::Infeasible(_))));
    }

    #[test]
    fn execution_checks_mode_and_roundtrips() {
        let m = Arc::new(Matroid::uniform(3, 2).unwrap());
        let a = ArrivalModel::Fixed(vec![2, 0, 1]);
        let s = build_randomized_crs(m, vec![0.6, 0.7, 0.5], a.clone(), &BuildOptions::for_arrival(&a)).unwrap();
        let mut rng = substream(0, 0);
        let wrong = ArrivalOrder::Permutation(vec![0, 1, 2]);
        assert!(matches!(execute_randomized_crs(&s, &wrong, ElemSet::full(3), &mut rng), Err(Error::SchemeMismatch(_))));
        let right = ArrivalOrder::Permutation(vec![2, 0, 1]);
        let t = execute_randomized_crs(&s, &right, ElemSet::full(3), &mut rng).unwrap();
        t.check(s.matroid()).unwrap();

        let json = serde_json::to_string(&s.to_file()).unwrap();
        let back = RandomizedOcrsFile::parse(&json).unwrap().scheme(&ExactOptions::default()).unwrap();
        let (a, b) = (s.mixture_q(), back.mixture_q());
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() < 1e-12));
    }

    #[test]
    fn random_order_rank1() {
        let m = Arc::new(Matroid::uniform(3, 1).unwrap());
        let a = ArrivalModel::RandomOrder;
        let s = build_randomized_crs(m, vec![1.0 / 3.0; 3], a.clone(), &BuildOptions::for_arrival(&a).with_eps(1e-4)).unwrap();
        assert!(s.certified_c() >= 1.0 - (-1.0f64).exp() - 1e-4, "{}", s.certified_c());
    }
}
