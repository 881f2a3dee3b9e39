//! Value models (Bernoulli and finite discrete), the top-quantile activation
//! rule, active-set sampling and arrival orders.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matroid::Matroid;
use crate::rng::Stream;
use crate::set::ElemSet;

const PROB_SUM_TOL: f64 = 1e-12;
/// Slack used when locating the boundary atom of a quantile.
const MASS_TOL: f64 = 1e-12;

fn check_probability(what: &str, i: usize, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what}[{i}] = {p} is not in [0,1]")))
    }
}

/// Element `i` takes value `y[i]` with probability `p[i]` and 0 otherwise.
#[derive(Clone, Debug)]
pub struct BernoulliInstance {
    pub matroid: Arc<Matroid>,
    pub p: Vec<f64>,
    pub y: Vec<f64>,
}

impl BernoulliInstance {
    pub fn new(matroid: Arc<Matroid>, p: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = matroid.n();
        if p.len() != n {
            return Err(Error::DimensionMismatch { what: "p", expected: n, got: p.len() });
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch { what: "y", expected: n, got: y.len() });
        }
        for (i, &pi) in p.iter().enumerate() {
            check_probability("p", i, pi)?;
        }
        for (i, &yi) in y.iter().enumerate() {
            if !(yi >= 0.0 && yi.is_finite()) {
                return Err(Error::InvalidInput(format!("y[{i}] = {yi} must be finite and nonnegative")));
            }
        }
        Ok(BernoulliInstance { matroid, p, y })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    /// The same instance as per-element two-atom distributions.
    pub fn to_general(&self) -> GeneralInstance {
        let dists = self
            .p
            .iter()
            .zip(&self.y)
            .map(|(&p, &y)| {
                DiscreteDist::new(vec![(y, p), (0.0, 1.0 - p)]).expect("two-atom distribution is valid")
            })
            .collect();
        GeneralInstance { matroid: self.matroid.clone(), dists }
    }
}

/// A finite distribution over nonnegative values; atoms are kept sorted by
/// descending value and merged when values coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDist {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDist {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        let mut total = 0.0;
        for (k, &(v, p)) in atoms.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("atom {k} has invalid value {v}")));
            }
            check_probability("atom probability", k, p)?;
            total += p;
        }
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidInput(format!("atom probabilities sum to {total}, not 1")));
        }
        let mut sorted: Vec<(f64, f64)> = atoms.into_iter().filter(|&(_, p)| p > 0.0).collect();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (v, p) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Ok(DiscreteDist { atoms: merged })
    }

    /// `(value, probability)` pairs in descending value order.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    pub fn sample(&self, rng: &mut Stream) -> f64 {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        for &(v, p) in &self.atoms {
            cum += p;
            if u < cum {
                return v;
            }
        }
        self.atoms.last().map_or(0.0, |a| a.0)
    }

    /// Probability of exactly `v`.
    pub fn mass_at(&self, v: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 == v).map(|a| a.1).sum()
    }

    /// Activation rule for the top `x` quantile of this distribution.
    pub fn quantile_rule(&self, element: usize, x: f64) -> Result<QuantileRule> {
        check_probability("x", element, x)?;
        let Some(&(top, _)) = self.atoms.first() else {
            return Err(Error::InvalidInput("empty distribution".into()));
        };
        if x == 0.0 {
            return Ok(QuantileRule {
                element,
                mass: 0.0,
                threshold: top,
                boundary_prob: 0.0,
                conditional_value: 0.0,
            });
        }
        let mut above = 0.0;
        let mut value_above = 0.0;
        let last = self.atoms.len() - 1;
        for (k, &(v, p)) in self.atoms.iter().enumerate() {
            if above + p > x + MASS_TOL || k == last {
                let rho = ((x - above) / p).clamp(0.0, 1.0);
                let conditional_value = (value_above + rho * p * v) / x;
                return Ok(QuantileRule {
                    element,
                    mass: x,
                    threshold: v,
                    boundary_prob: rho,
                    conditional_value,
                });
            }
            above += p;
            value_above += p * v;
        }
        unreachable!("the last atom always terminates the scan")
    }

    /// `x · E[v | v in the top x quantile]`, a concave piecewise-linear
    /// function of `x` whose slopes are the atom values.
    pub fn top_quantile_value(&self, x: f64) -> f64 {
        let mut remaining = x;
        let mut total = 0.0;
        for &(v, p) in &self.atoms {
            let take = remaining.min(p);
            total += take * v;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        total
    }
}

/// Element `element` is active iff its value exceeds `threshold`, or equals
/// it and an independent coin with bias `boundary_prob` lands heads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileRule {
    pub element: usize,
    pub mass: f64,
    pub threshold: f64,
    pub boundary_prob: f64,
    /// `E[v | active]`, or 0 when the mass is 0.
    pub conditional_value: f64,
}

impl QuantileRule {
    pub fn activate(&self, value: f64, rng: &mut Stream) -> bool {
        if value > self.threshold {
            true
        } else if value == self.threshold {
            self.boundary_prob > 0.0 && rng.gen::<f64>() < self.boundary_prob
        } else {
            false
        }
    }

    /// Exact activation probability under `dist`.
    pub fn activation_probability(&self, dist: &DiscreteDist) -> f64 {
        dist.atoms()
            .iter()
            .map(|&(v, p)| {
                if v > self.threshold {
                    p
                } else if v == self.threshold {
                    self.boundary_prob * p
                } else {
                    0.0
                }
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct GeneralInstance {
    pub matroid: Arc<Matroid>,
    pub dists: Vec<DiscreteDist>,
}

impl GeneralInstance {
    pub fn new(matroid: Arc<Matroid>, dists: Vec<DiscreteDist>) -> Result<Self> {
        if dists.len() != matroid.n() {
            return Err(Error::DimensionMismatch {
                what: "dists",
                expected: matroid.n(),
                got: dists.len(),
            });
        }
        Ok(GeneralInstance { matroid, dists })
    }

    pub fn n(&self) -> usize {
        self.dists.len()
    }

    /// Quantile rules for masses `x` and the Bernoulli instance with
    /// `p = x` and `y` the conditional values.
    pub fn reduce(&self, x: &[f64]) -> Result<(BernoulliInstance, Vec<QuantileRule>)> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { what: "x", expected: self.n(), got: x.len() });
        }
        let rules = self
            .dists
            .iter()
            .zip(x)
            .enumerate()
            .map(|(i, (d, &xi))| d.quantile_rule(i, xi))
            .collect::<Result<Vec<_>>>()?;
        let y = rules.iter().map(|r| r.conditional_value).collect();
        let bern = BernoulliInstance::new(self.matroid.clone(), x.to_vec(), y)?;
        Ok((bern, rules))
    }

    pub fn sample_values(&self, rng: &mut Stream) -> Vec<f64> {
        self.dists.iter().map(|d| d.sample(rng)).collect()
    }
}

/// Includes each element independently with probability `x[i]`.
pub fn sample_active_set(x: &[f64], rng: &mut Stream) -> Result<ElemSet> {
    if x.len() > crate::set::MAX_ELEMENTS {
        return Err(Error::GroundSetTooLarge(x.len()));
    }
    for (i, &xi) in x.iter().enumerate() {
        check_probability("x", i, xi)?;
    }
    Ok(draw_active(x, rng))
}

/// [`sample_active_set`] without validation.
#[inline]
pub fn draw_active(x: &[f64], rng: &mut Stream) -> ElemSet {
    let mut s = ElemSet::EMPTY;
    for (i, &xi) in x.iter().enumerate() {
        if rng.gen::<f64>() < xi {
            s.insert(i);
        }
    }
    s
}

/// How elements arrive: a fixed permutation known in advance, or independent
/// uniform arrival times.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "order", rename_all = "snake_case")]
pub enum ArrivalModel {
    Fixed(Vec<usize>),
    RandomOrder,
}

impl ArrivalModel {
    pub fn identity(n: usize) -> Self {
        ArrivalModel::Fixed((0..n).collect())
    }

    pub fn is_random(&self) -> bool {
        matches!(self, ArrivalModel::RandomOrder)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let ArrivalModel::Fixed(order) = self {
            check_permutation(order, n)?;
        }
        Ok(())
    }
}

pub fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::InvalidInput(format!(
            "order has {} entries for {n} elements",
            order.len()
        )));
    }
    let mut seen = ElemSet::EMPTY;
    for &e in order {
        if e >= n || seen.contains(e) {
            return Err(Error::InvalidInput(format!("order {order:?} is not a permutation of 0..{n}")));
        }
        seen.insert(e);
    }
    Ok(())
}

/// A realized arrival sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalOrder {
    Permutation(Vec<usize>),
    /// Per-element arrival times in `[0,1]`; equal times are ordered by id.
    Times(Vec<f64>),
}

impl ArrivalOrder {
    pub fn permutation(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        check_permutation(&order, n)?;
        Ok(ArrivalOrder::Permutation(order))
    }

    pub fn times(times: Vec<f64>) -> Result<Self> {
        if let Some((i, t)) = times.iter().enumerate().find(|(_, t)| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidInput(format!("arrival time {t} of element {i} is not in [0,1]")));
        }
        Ok(ArrivalOrder::Times(times))
    }

    pub fn n(&self) -> usize {
        match self {
            ArrivalOrder::Permutation(o) => o.len(),
            ArrivalOrder::Times(t) => t.len(),
        }
    }

    /// Elements in processing order.
    pub fn sequence(&self) -> Vec<usize> {
        match self {
            ArrivalOrder::Permutation(o) => o.clone(),
            ArrivalOrder::Times(t) => {
                let mut idx: Vec<usize> = (0..t.len()).collect();
                idx.sort_by(|&a, &b| t[a].total_cmp(&t[b]).then(a.cmp(&b)));
                idx
            }
        }
    }

    pub fn time_of(&self, i: usize) -> Option<f64> {
        match self {
            ArrivalOrder::Permutation(_) => None,
            ArrivalOrder::Times(t) => Some(t[i]),
        }
    }

    pub fn is_timed(&self) -> bool {
        matches!(self, ArrivalOrder::Times(_))
    }
}

/// Draws an arrival order: the fixed permutation is echoed, random order
/// draws independent uniform times.
pub fn sample_arrival(model: &ArrivalModel, n: usize, rng: &mut Stream) -> Result<ArrivalOrder> {
    model.validate(n)?;
    Ok(draw_arrival(model, n, rng))
}

#[inline]
pub fn draw_arrival(model: &ArrivalModel, n: usize, rng: &mut Stream) -> ArrivalOrder {
    match model {
        ArrivalModel::Fixed(order) => ArrivalOrder::Permutation(order.clone()),
        ArrivalModel::RandomOrder => ArrivalOrder::Times((0..n).map(|_| rng.gen::<f64>()).collect()),
    }
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, rng: &mut Stream) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Either kind of instance, as read from an instance file.
#[derive(Clone, Debug)]
pub enum Instance {
    Bernoulli(BernoulliInstance),
    General(GeneralInstance),
}

impl Instance {
    pub fn matroid(&self) -> &Arc<Matroid> {
        match self {
            Instance::Bernoulli(b) => &b.matroid,
            Instance::General(g) => &g.matroid,
        }
    }

    pub fn n(&self) -> usize {
        self.matroid().n()
    }
}

/// On-disk instance format, schema version 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub v: u32,
    pub matroid: Matroid,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dists: Option<Vec<Vec<(f64, f64)>>>,
    /// A fractional point to round, for scheme-only runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn bernoulli(inst: &BernoulliInstance) -> Self {
        InstanceFile {
            v: 1,
            matroid: (*inst.matroid).clone(),
            model: "bernoulli".into(),
            p: Some(inst.p.clone()),
            y: Some(inst.y.clone()),
            dists: None,
            x: None,
        }
    }

    pub fn general(inst: &GeneralInstance) -> Self {
        InstanceFile {
            v: 1,
            matroid: (*inst.matroid).clone(),
            model: "general".into(),
            p: None,
            y: None,
            dists: Some(inst.dists.iter().map(|d| d.atoms().to_vec()).collect()),
            x: None,
        }
    }

    pub fn with_x(mut self, x: Vec<f64>) -> Self {
        self.x = Some(x);
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.v != 1 {
            return Err(Error::InvalidInput(format!("unsupported schema version {}", file.v)));
        }
        Ok(file)
    }

    pub fn instance(&self) -> Result<Instance> {
        let matroid = Arc::new(self.matroid.clone());
        match self.model.as_str() {
            "bernoulli" => {
                let p = self.p.clone().ok_or_else(|| Error::InvalidInput("bernoulli model needs \"p\"".into()))?;
                let y = self.y.clone().ok_or_else(|| Error::InvalidInput("bernoulli model needs \"y\"".into()))?;
                Ok(Instance::Bernoulli(BernoulliInstance::new(matroid, p, y)?))
            }
            "general" => {
                let raw = self
                    .dists
                    .clone()
                    .ok_or_else(|| Error::InvalidInput("general model needs \"dists\"".into()))?;
                let dists = raw.into_iter().map(DiscreteDist::new).collect::<Result<Vec<_>>>()?;
                Ok(Instance::General(GeneralInstance::new(matroid, dists)?))
            }
            other => Err(Error::InvalidInput(format!("unknown model \"{other}\""))),
        }
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("instance serializes");
        hex::encode(Sha256::digest(canonical))
    }
}
