use crate::error::{Error, Result};
use crate::instance::{draw_active, draw_arrival, ArrivalModel, ArrivalOrder, GeneralInstance, QuantileRule};
use crate::lpcrs::pattern_probability;
use crate::rng::{mean_se, proportion_se, substream, try_monte_carlo};
use crate::schemes::{OnlineScheme, SelectionTrace};
use crate::set::ElemSet;

use super::report::{Mode, RatioReport, SelectabilityReport};

pub const FIXED_CAP: usize = 14;
pub const RANDOM_CAP: usize = 7;

/// Exact `Pr[i selected]`: from the scheme's own integration of its coins
/// when it has one, otherwise by running a deterministic fixed-order scheme
/// on all `2^n` activity patterns.
pub fn exact_selectability(scheme: &dyn OnlineScheme, instance_hash: &str) -> Result<SelectabilityReport> {
    let q = match scheme.exact_selection() {
        Some(q) => q?,
        None => enumerate_selection(scheme)?,
    };
    let zeros = vec![0.0; q.len()];
    Ok(SelectabilityReport::assemble(scheme.name(), instance_hash.into(), None, Mode::Exact, scheme.marginals(), &q, &zeros, 0))
}

/// `Pr[i selected]` by running a deterministic fixed-order scheme on every
/// activity pattern.
pub fn enumerate_selection(scheme: &dyn OnlineScheme) -> Result<Vec<f64>> {
    let n = scheme.n();
    let ArrivalModel::Fixed(order) = scheme.arrival() else {
        return Err(Error::SchemeMismatch(format!("{} has no exact random-order evaluation; use estimate mode", scheme.name())));
    };
    if !scheme.is_deterministic() {
        return Err(Error::SchemeMismatch(format!("{} uses internal coins; use estimate mode", scheme.name())));
    }
    if n > FIXED_CAP {
        return Err(Error::EnumerationCap { n, cap: FIXED_CAP });
    }
    let arrival = ArrivalOrder::Permutation(order.clone());
    let x = scheme.marginals();
    let mut q = vec![0.0; n];
    let mut rng = substream(0, 0);
    for active in ElemSet::full(n).subsets() {
        let w = pattern_probability(x, active);
        if w == 0.0 {
            continue;
        }
        for i in scheme.run(&arrival, active, &mut rng)?.accepted {
            q[i] += w;
        }
    }
    Ok(q)
}

/// Monte Carlo over activity, arrival and the scheme's coins.
pub fn estimate_selectability(
    scheme: &dyn OnlineScheme,
    instance_hash: &str,
    trials: u64,
    seed: u64,
) -> Result<SelectabilityReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let n = scheme.n();
    let x = scheme.marginals();
    let arrival = scheme.arrival();
    let counts = try_monte_carlo(
        trials,
        seed,
        || vec![0u64; n],
        |acc, rng, _| {
            let active = draw_active(x, rng);
            let order = draw_arrival(arrival, n, rng);
            for i in scheme.run(&order, active, rng)?.accepted {
                acc[i] += 1;
            }
            Ok::<(), Error>(())
        },
        |acc, other| acc.iter_mut().zip(other).for_each(|(a, b)| *a += b),
    )?;
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / trials as f64).collect();
    let se: Vec<f64> = p.iter().map(|&v| proportion_se(v, trials)).collect();
    Ok(SelectabilityReport::assemble(scheme.name(), instance_hash.into(), Some(seed), Mode::Estimate, x, &p, &se, trials))
}

#[derive(Default)]
struct Moments {
    total: (f64, f64),
    revenue: (f64, f64),
    utility: (f64, f64),
}

impl Moments {
    fn add(&mut self, total: f64, revenue: f64, utility: f64) {
        self.total.0 += total;
        self.total.1 += total * total;
        self.revenue.0 += revenue;
        self.revenue.1 += revenue * revenue;
        self.utility.0 += utility;
        self.utility.1 += utility * utility;
    }

    fn merge(&mut self, o: Moments) {
        self.total.0 += o.total.0;
        self.total.1 += o.total.1;
        self.revenue.0 += o.revenue.0;
        self.revenue.1 += o.revenue.1;
        self.utility.0 += o.utility.0;
        self.utility.1 += o.utility.1;
    }

    fn report(self, scheme: String, instance_hash: &str, seed: u64, trials: u64, objective: f64, order: Option<Vec<usize>>) -> RatioReport {
        let t = trials as f64;
        let e_alg = self.total.0 / t;
        let se = mean_se(self.total.0, self.total.1, trials);
        let (ratio, ratio_se) = if objective > 0.0 { (Some(e_alg / objective), Some(se / objective)) } else { (None, None) };
        RatioReport {
            scheme,
            instance_hash: instance_hash.into(),
            seed,
            trials,
            e_alg,
            se,
            e_revenue: self.revenue.0 / t,
            revenue_se: mean_se(self.revenue.0, self.revenue.1, trials),
            e_utility: self.utility.0 / t,
            utility_se: mean_se(self.utility.0, self.utility.1, trials),
            exante_objective: objective,
            ratio,
            ratio_se,
            order,
        }
    }
}

fn fixed_order(scheme: &dyn OnlineScheme) -> Option<Vec<usize>> {
    match scheme.arrival() {
        ArrivalModel::Fixed(o) => Some(o.clone()),
        ArrivalModel::RandomOrder => None,
    }
}

/// Estimates `E[Alg] / Σ x_i y_i` on a Bernoulli instance whose elements are
/// active with probability `x_i` and worth the scheme's values.
pub fn measure_ratio(
    scheme: &dyn OnlineScheme,
    objective: f64,
    instance_hash: &str,
    trials: u64,
    seed: u64,
) -> Result<RatioReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let n = scheme.n();
    let x = scheme.marginals();
    let arrival = scheme.arrival();
    let m = try_monte_carlo(
        trials,
        seed,
        Moments::default,
        |acc, rng, _| {
            let active = draw_active(x, rng);
            let order = draw_arrival(arrival, n, rng);
            let t = scheme.run(&order, active, rng)?;
            acc.add(t.total, t.revenue, t.utility);
            Ok::<(), Error>(())
        },
        Moments::merge,
    )?;
    Ok(m.report(scheme.name(), instance_hash, seed, trials, objective, fixed_order(scheme)))
}

/// Runs `trials` traces and hands each to `visit`, for trace dumps and
/// invariant checks. Sequential.
pub fn collect_traces(
    scheme: &dyn OnlineScheme,
    trials: u64,
    seed: u64,
    mut visit: impl FnMut(&SelectionTrace) -> Result<()>,
) -> Result<()> {
    let n = scheme.n();
    for t in 0..trials {
        let mut rng = substream(seed, t);
        let active = draw_active(scheme.marginals(), &mut rng);
        let order = draw_arrival(scheme.arrival(), n, &mut rng);
        visit(&scheme.run(&order, active, &mut rng)?)?;
    }
    Ok(())
}

/// Ratio on a general instance: values are drawn from the distributions,
/// activity follows the quantile rules, and the algorithm is credited the
/// realized values of what it accepts.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct GeneralRatioReport {
    pub ratio: RatioReport,
    /// Per element: target `x_i`, observed activation frequency, its SE.
    pub activation: Vec<(f64, f64, f64)>,
}

pub fn measure_ratio_general(
    inst: &GeneralInstance,
    rules: &[QuantileRule],
    scheme: &dyn OnlineScheme,
    objective: f64,
    instance_hash: &str,
    trials: u64,
    seed: u64,
) -> Result<GeneralRatioReport> {
    let n = inst.n();
    if rules.len() != n || scheme.n() != n {
        return Err(Error::DimensionMismatch { what: "quantile rules", expected: n, got: rules.len() });
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let arrival = scheme.arrival();
    let (m, counts) = try_monte_carlo(
        trials,
        seed,
        || (Moments::default(), vec![0u64; n]),
        |acc, rng, _| {
            let values = inst.sample_values(rng);
            let mut active = ElemSet::EMPTY;
            for (i, rule) in rules.iter().enumerate() {
                if rule.activate(values[i], rng) {
                    active.insert(i);
                    acc.1[i] += 1;
                }
            }
            let order = draw_arrival(arrival, n, rng);
            let t = scheme.run(&order, active, rng)?;
            let realized: f64 = t.accepted.iter().map(|&i| values[i]).sum();
            acc.0.add(realized, t.revenue, realized - t.revenue);
            Ok::<(), Error>(())
        },
        |acc, other| {
            acc.0.merge(other.0);
            acc.1.iter_mut().zip(other.1).for_each(|(a, b)| *a += b);
        },
    )?;
    let activation = rules
        .iter()
        .zip(&counts)
        .map(|(r, &c)| {
            let f = c as f64 / trials as f64;
            (r.mass, f, proportion_se(f, trials))
        })
        .collect();
    Ok(GeneralRatioReport {
        ratio: m.report(scheme.name(), instance_hash, seed, trials, objective, fixed_order(scheme)),
        activation,
    })
}

/// Exact `E[Alg] = Σ_i Pr[i selected] · value_i` when the scheme has an
/// exact evaluation.
pub fn exact_value(scheme: &dyn OnlineScheme) -> Option<Result<f64>> {
    scheme
        .exact_selection()
        .map(|q| q.map(|q| q.iter().zip(scheme.values()).map(|(a, b)| a * b).sum()))
}

/// Fraction of trials in which some element is selected, scaled per element:
/// the per-trial quantity `Σ_{i∈A} 1/(n x_i)`, so its mean is the average
/// of `Pr[i selected]/x_i` over elements.
pub fn average_selectability(scheme: &dyn OnlineScheme, trials: u64, seed: u64) -> Result<(f64, f64)> {
    let n = scheme.n();
    let x = scheme.marginals();
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput("average selectability needs x > 0".into()));
    }
    let arrival = scheme.arrival();
    let (s, s2) = try_monte_carlo(
        trials,
        seed,
        || (0.0, 0.0),
        |acc, rng, _| {
            let active = draw_active(x, rng);
            let order = draw_arrival(arrival, n, rng);
            let v: f64 = scheme.run(&order, active, rng)?.accepted.iter().map(|&i| 1.0 / (n as f64 * x[i])).sum();
            acc.0 += v;
            acc.1 += v * v;
            Ok::<(), Error>(())
        },
        |acc, o| {
            acc.0 += o.0;
            acc.1 += o.1;
        },
    )?;
    Ok((s / trials as f64, mean_se(s, s2, trials)))
}
