use std::sync::Arc;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;

use ocrs::exante::{decompose, solve_exante, solve_exante_general};
use ocrs::harness::corpus::{hat, hat_instance, random_bernoulli, random_binary, random_general, random_matroid, random_point};
use ocrs::harness::{
    brute_force_offline, candidate_orders, check_base_price_bound, collect_traces,
    estimate_selectability, exact_value, measure_ratio, measure_ratio_general, rank1_ceiling, two_element_optimum,
    worst_order_adversarial,
};
use ocrs::lpcrs::{build_randomized_crs, BuildOptions, ExactOptions};
use ocrs::rng::{substream, Stream};
use ocrs::schemes::{MagicianState, OnlineScheme, Rank1Ocrs, Rank1Rcrs, Schedule, ThresholdRule, ThresholdScheme};
use ocrs::{ArrivalModel, BernoulliInstance, Matroid, Result};

use super::{Criterion, Outcome, VerifyConfig};

pub static CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "rank-1 OCRS selectability", tags: &["rank1"], budget_secs: 10.0, run: rank1_ocrs },
    Criterion { id: 2, name: "rank-1 RCRS selectability", tags: &["rank1"], budget_secs: 60.0, run: rank1_rcrs },
    Criterion { id: 3, name: "adversarial ex-ante prophet", tags: &["prophet"], budget_secs: 300.0, run: adversarial_prophet },
    Criterion { id: 4, name: "random-order ex-ante prophet", tags: &["prophet"], budget_secs: 300.0, run: random_order_prophet },
    Criterion { id: 5, name: "LP-duality construction", tags: &["lp"], budget_secs: 600.0, run: lp_construction },
    Criterion { id: 6, name: "optimality ceilings", tags: &["rank1", "lp"], budget_secs: 60.0, run: optimality_ceilings },
    Criterion { id: 7, name: "oracle equivalence", tags: &["exante"], budget_secs: 120.0, run: oracle_equivalence },
    Criterion { id: 8, name: "structural invariants", tags: &["schemes"], budget_secs: 120.0, run: structural_invariants },
    Criterion { id: 9, name: "Bernoulli reduction", tags: &["exante", "prophet"], budget_secs: 120.0, run: bernoulli_reduction },
];

const ONE_MINUS_INV_E: f64 = 1.0 - 0.367_879_441_171_442_33;

fn outcome(failures: Vec<String>, summary: String) -> Result<Outcome> {
    let passed = failures.is_empty();
    let detail = if passed {
        summary
    } else {
        let shown: Vec<&str> = failures.iter().take(3).map(String::as_str).collect();
        format!("{summary}; {} failure(s): {}", failures.len(), shown.join("; "))
    };
    Ok(Outcome { passed, detail })
}

/// `Σx ≤ 1` with a random scale in `[0.5, 1]`; every fifth vector sums to 1.
fn rank1_vector(k: usize, rng: &mut Stream) -> Vec<f64> {
    let n = rng.gen_range(1..=12);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let scale = if k % 5 == 0 { 1.0 } else { rng.gen_range(0.5..1.0) };
    raw.iter().map(|v| v * scale / total).collect()
}

pub fn rank1_ocrs(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut rng = substream(cfg.seed, 101);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for k in 0..50 {
        let x = rank1_vector(k, &mut rng);
        let n = x.len();
        let order = ocrs::instance::random_permutation(n, &mut rng);
        let scheme = Rank1Ocrs::new(x.clone(), order.clone())?;
        let sel = scheme.exact_selection().expect("rank-1 OCRS integrates its coins")?;
        // second route: reach probability as a product over earlier arrivals
        let state = MagicianState::along(&x, &order, 0.5)?;
        let mut reach = 1.0;
        for (pos, &i) in order.iter().enumerate() {
            let direct = reach * state.q[pos] * x[i];
            if (direct - sel[i]).abs() > 1e-12 {
                failures.push(format!("vector {k}: element {i} routes disagree ({direct} vs {})", sel[i]));
            }
            if (reach - state.r[pos]).abs() > 1e-12 {
                failures.push(format!("vector {k}: reach {reach} vs r = {}", state.r[pos]));
            }
            reach *= 1.0 - state.q[pos] * x[i];
        }
        for i in 0..n {
            if sel[i] < 0.5 * x[i] - 1e-9 {
                failures.push(format!("vector {k}: element {i} selected w.p. {} < x/2 = {}", sel[i], 0.5 * x[i]));
            }
            if x[i] > 0.0 {
                worst = worst.min(sel[i] / x[i]);
            }
        }
        let sum: f64 = x.iter().sum();
        let end = *state.r.last().expect("n + 1 entries");
        if (end - (1.0 - 0.5 * sum)).abs() > 1e-12 || end < 0.5 - 1e-12 {
            failures.push(format!("vector {k}: r_(n+1) = {end}, 1 − Σx/2 = {}", 1.0 - 0.5 * sum));
        }
    }
    outcome(failures, format!("50 vectors, min Pr[select]/x = {worst:.6}"))
}

pub fn rank1_rcrs(cfg: &VerifyConfig) -> Result<Outcome> {
    let trials = cfg.trials(1_000_000);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for n in [2usize, 5, 10] {
        let x = vec![1.0 / n as f64; n];
        let r = estimate_selectability(&Rank1Rcrs::new(x)?, "", trials, cfg.seed ^ n as u64)?;
        for e in &r.elements {
            let margin = (e.p_select - ONE_MINUS_INV_E * e.x) / e.se.max(f64::MIN_POSITIVE);
            worst = worst.min(margin);
            if e.p_select < ONE_MINUS_INV_E * e.x - cfg.sigmas * e.se {
                failures.push(format!("n = {n}, element {}: {} < (1−1/e)/n − {}σ", e.element, e.p_select, cfg.sigmas));
            }
        }
    }
    let single = estimate_selectability(&Rank1Rcrs::new(vec![1.0])?, "", trials, cfg.seed ^ 1)?;
    let e = &single.elements[0];
    if (e.p_select - ONE_MINUS_INV_E).abs() > cfg.sigmas * e.se {
        failures.push(format!("x = 1: {} vs 1 − 1/e beyond {}σ", e.p_select, cfg.sigmas));
    }
    outcome(
        failures,
        format!("{trials} trials; worst margin {worst:.2}σ; x = 1 gives {:.5} ± {:.5}", e.p_select, e.se),
    )
}

/// Hat(2) followed by 20 seeded partition and graphic instances, `n ≤ 10`.
fn prophet_corpus(seed: u64) -> Result<Vec<(String, BernoulliInstance)>> {
    let mut out = vec![("hat-2".to_string(), hat_instance(2)?)];
    let mut rng = substream(seed, 301);
    for k in 0..20 {
        let n = rng.gen_range(4..=10);
        let m = Arc::new(random_matroid(k, n, &mut rng)?);
        let name = format!("{}-{k}-n{n}", m.kind_name());
        out.push((name, random_bernoulli(m, &mut rng)?));
    }
    Ok(out)
}

pub fn adversarial_prophet(cfg: &VerifyConfig) -> Result<Outcome> {
    let trials = cfg.trials(100_000);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for (k, (name, inst)) in prophet_corpus(cfg.seed)?.into_iter().enumerate() {
        let sol = solve_exante(&inst)?;
        let dec = decompose(&sol.x, &inst.matroid)?;
        let rule = Arc::new(ThresholdRule::new(inst.matroid.clone(), dec, sol.y.clone(), Schedule::Half)?);
        let orders = candidate_orders(inst.n(), 6, 1000, cfg.seed ^ (k as u64 + 1));
        let (order, _) = worst_order_adversarial(&rule, &sol.x, &orders)?;
        let scheme = ThresholdScheme::from_rule(rule, sol.x.clone(), ArrivalModel::Fixed(order.clone()));
        let r = measure_ratio(&scheme, sol.objective, "", trials, cfg.seed ^ (k as u64) << 8)?;
        if let Some(ratio) = r.ratio {
            worst = worst.min(ratio);
        }
        if !r.meets(0.5, cfg.sigmas) {
            failures.push(format!("{name}: E[Alg] = {} < {}·½ − {}σ (order {order:?})", r.e_alg, sol.objective, cfg.sigmas));
        }
    }
    outcome(failures, format!("21 instances at their worst order, {trials} trials, min ratio {worst:.4}"))
}

pub fn random_order_prophet(cfg: &VerifyConfig) -> Result<Outcome> {
    let trials = cfg.trials(100_000);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for (k, (name, inst)) in prophet_corpus(cfg.seed)?.into_iter().enumerate() {
        let sol = solve_exante(&inst)?;
        let dec = decompose(&sol.x, &inst.matroid)?;
        let scheme = ThresholdScheme::random_order(&inst, &sol, &dec)?;
        let r = measure_ratio(&scheme, sol.objective, "", trials, cfg.seed ^ (k as u64) << 8)?;
        if let Some(ratio) = r.ratio {
            worst = worst.min(ratio);
        }
        if !r.meets(ONE_MINUS_INV_E, cfg.sigmas) {
            failures.push(format!("{name}: E[Alg] = {} < {}·(1−1/e) − {}σ", r.e_alg, sol.objective, cfg.sigmas));
        }
    }
    outcome(failures, format!("21 instances, {trials} trials, min ratio {worst:.4}"))
}

/// Rank-1, uniform rank-2, partition and Hat(2) points with `n ≤ 7`.
fn lp_corpus(seed: u64) -> Result<Vec<(String, Arc<Matroid>, Vec<f64>)>> {
    let mut rng = substream(seed, 501);
    let mut out = Vec::new();
    let pair = Arc::new(Matroid::uniform(2, 1)?);
    out.push(("rank1-pair".to_string(), pair, vec![0.5, 0.5]));
    for n in [3usize, 5, 7] {
        let m = Arc::new(Matroid::uniform(n, 1)?);
        let x = random_point(&m, &mut rng);
        out.push((format!("rank1-n{n}"), m, x));
    }
    for n in [4usize, 6] {
        let m = Arc::new(Matroid::uniform(n, 2)?);
        let x = random_point(&m, &mut rng);
        out.push((format!("uniform2-n{n}"), m, x));
    }
    for n in [5usize, 6, 7] {
        let m = Arc::new(ocrs::harness::corpus::random_partition(n, &mut rng)?);
        let x = random_point(&m, &mut rng);
        out.push((format!("partition-n{n}"), m, x));
    }
    let (m, x) = hat(2)?;
    out.push(("hat-2".to_string(), Arc::new(m), x));
    Ok(out)
}

fn min_ratio(q: &[f64], x: &[f64]) -> f64 {
    q.iter().zip(x).filter(|(_, &xi)| xi > 0.0).map(|(q, x)| q / x).fold(1.0, f64::min)
}

pub fn lp_construction(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut worst_fixed = f64::INFINITY;
    let mut worst_random = f64::INFINITY;
    let mut random_count = 0;
    let exact = ExactOptions::default();
    for (name, m, x) in lp_corpus(cfg.seed)? {
        let n = m.n();
        let fixed = ArrivalModel::identity(n);
        let s = build_randomized_crs(m.clone(), x.clone(), fixed.clone(), &BuildOptions::for_arrival(&fixed).with_eps(1e-6))?;
        let q = s.verify_exact(&exact)?;
        let c = s.certified_c();
        worst_fixed = worst_fixed.min(min_ratio(&q, &x));
        if c < 0.5 - 1e-6 {
            failures.push(format!("{name}: fixed-order certified c = {c}"));
        }
        for (i, (&qi, &xi)) in q.iter().zip(&x).enumerate() {
            if qi < (0.5 - 1e-6) * xi {
                failures.push(format!("{name}: re-verified q[{i}] = {qi} < (½−1e−6)·{xi}"));
            }
        }
        if n <= 5 {
            random_count += 1;
            let s = build_randomized_crs(
                m.clone(),
                x.clone(),
                ArrivalModel::RandomOrder,
                &BuildOptions::for_arrival(&ArrivalModel::RandomOrder).with_eps(1e-4),
            )?;
            let q = s.verify_exact(&exact)?;
            let c = s.certified_c();
            worst_random = worst_random.min(min_ratio(&q, &x));
            if c < ONE_MINUS_INV_E - 1e-4 || min_ratio(&q, &x) < ONE_MINUS_INV_E - 1e-4 {
                failures.push(format!("{name}: random-order c = {c}"));
            }
        }
    }
    outcome(
        failures,
        format!("10 fixed-order builds, min c {worst_fixed:.6}; {random_count} random-order builds, min c {worst_random:.6}"),
    )
}

pub fn optimality_ceilings(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    let two = two_element_optimum(0.01)?;
    if !(two.c_star >= 0.5 - 1e-6 && two.c_star <= 0.505 + 1e-6) {
        failures.push(format!("c* = {} outside [½, 0.505]", two.c_star));
    }
    let trials = cfg.trials(1_000_000);
    let mut parts = vec![format!("c* = {:.6}", two.c_star)];
    for n in [2usize, 5, 10] {
        let r = rank1_ceiling(n, trials, cfg.seed ^ (n as u64) << 16)?;
        if (r.p_none_exact - r.p_none_analytic).abs() > 1e-12 {
            failures.push(format!("n = {n}: Pr[none active] {} vs {}", r.p_none_exact, r.p_none_analytic));
        }
        if r.measured_avg > r.ceiling + cfg.sigmas * r.measured_se {
            failures.push(format!("n = {n}: measured {} above ceiling {}", r.measured_avg, r.ceiling));
        }
        parts.push(format!("n={n}: {:.4} ≤ {:.5}", r.measured_avg, r.ceiling));
    }
    outcome(failures, parts.join(", "))
}

/// `max Σ x_i y_i` over `P_M ∩ [0, p]` with every rank inequality written out.
fn exante_by_lp(inst: &BernoulliInstance) -> Result<f64> {
    let m = &inst.matroid;
    let mut pb = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..inst.n()).map(|i| pb.add_var(inst.y[i], (0.0, inst.p[i]))).collect();
    for s in m.ground().subsets().filter(|s| !s.is_empty()) {
        let terms: Vec<_> = s.iter().map(|i| (vars[i], 1.0)).collect();
        pb.add_constraint(&terms, ComparisonOp::Le, m.rank(s)? as f64);
    }
    pb.solve().map(|s| s.objective()).map_err(|e| ocrs::Error::Lp(e.to_string()))
}

pub fn oracle_equivalence(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut rng = substream(cfg.seed, 701);
    let mut failures = Vec::new();
    let mut worst_gap = 0.0f64;
    let mut worst_residual = 0.0f64;
    for k in 0..50 {
        let n = rng.gen_range(2..=6);
        let m = Arc::new(random_binary(n, rng.gen_range(2..=4), &mut rng)?);
        let inst = random_bernoulli(m.clone(), &mut rng)?;
        let sol = solve_exante(&inst)?;
        let lp = exante_by_lp(&inst)?;
        worst_gap = worst_gap.max((sol.objective - lp).abs());
        if (sol.objective - lp).abs() > 1e-9 {
            failures.push(format!("binary {k}: greedy {} vs LP {lp}", sol.objective));
        }
        let dec = decompose(&sol.x, &m)?;
        worst_residual = worst_residual.max(dec.residual(&sol.x));
        if dec.residual(&sol.x) > 1e-8 {
            failures.push(format!("binary {k}: decomposition residual {}", dec.residual(&sol.x)));
        }
        if sol.objective < brute_force_offline(&inst)? - 1e-9 {
            failures.push(format!("binary {k}: ex-ante below offline optimum"));
        }
    }
    for k in 0..20 {
        let n = rng.gen_range(7..=12);
        let m = Arc::new(random_matroid(k, n, &mut rng)?);
        let inst = random_bernoulli(m, &mut rng)?;
        let sol = solve_exante(&inst)?;
        let offline = brute_force_offline(&inst)?;
        if sol.objective < offline - 1e-9 {
            failures.push(format!("{}-{k}: ex-ante {} below offline {offline}", inst.matroid.kind_name(), sol.objective));
        }
    }
    outcome(failures, format!("max |greedy − LP| = {worst_gap:.1e}, max residual = {worst_residual:.1e}"))
}

pub fn structural_invariants(cfg: &VerifyConfig) -> Result<Outcome> {
    let mut rng = substream(cfg.seed, 801);
    let mut failures = Vec::new();
    let mut traces = 0u64;
    for k in 0..100 {
        let n = rng.gen_range(2..=8);
        let m = Arc::new(random_matroid(k, n, &mut rng)?);
        let inst = random_bernoulli(m.clone(), &mut rng)?;
        let sol = solve_exante(&inst)?;
        let dec = decompose(&sol.x, &m)?;
        let scheme = if k % 2 == 0 {
            ThresholdScheme::adversarial(&inst, &sol, &dec, ocrs::instance::random_permutation(n, &mut rng))?
        } else {
            ThresholdScheme::random_order(&inst, &sol, &dec)?
        };
        collect_traces(&scheme, 100, cfg.seed ^ k as u64, |t| {
            traces += 1;
            if t.total != t.revenue + t.utility && (t.total - t.revenue - t.utility).abs() > 1e-12 * t.total.max(1.0) {
                failures.push(format!("instance {k}: total {} ≠ {} + {}", t.total, t.revenue, t.utility));
            }
            if let Err(e) = t.check(&m) {
                failures.push(format!("instance {k}: {e}"));
            }
            let mut accepted = ocrs::ElemSet::EMPTY;
            for r in &t.records {
                let feasible = m.independent(accepted.with(r.element));
                if r.active && feasible && !r.accepted && r.threshold.is_some_and(|th| r.value > th) {
                    failures.push(format!("instance {k}: element {} above threshold but rejected", r.element));
                }
                if r.accepted {
                    accepted.insert(r.element);
                }
            }
            Ok(())
        })?;
    }
    let mut checked = 0u64;
    let mut worst = f64::NEG_INFINITY;
    let mut claim_instances: Vec<BernoulliInstance> = vec![hat_instance(2)?, hat_instance(3)?];
    for k in 0..12 {
        let n = rng.gen_range(2..=8);
        let m = Arc::new(random_matroid(k, n, &mut rng)?);
        claim_instances.push(random_bernoulli(m, &mut rng)?);
    }
    for (k, inst) in claim_instances.iter().enumerate() {
        let sol = solve_exante(inst)?;
        let dec = decompose(&sol.x, &inst.matroid)?;
        let c = check_base_price_bound(&inst.matroid, &dec, &sol.y)?;
        checked += c.checked;
        worst = worst.max(c.worst_fixed).max(c.worst_expected);
        if !c.holds(1e-9) {
            failures.push(format!("price bound instance {k}: excess {} / {}", c.worst_fixed, c.worst_expected));
        }
    }
    outcome(
        failures,
        format!("{traces} traces; base-price bound on {checked} (A, S, v̂) triples, max excess {worst:.1e}"),
    )
}

pub fn bernoulli_reduction(cfg: &VerifyConfig) -> Result<Outcome> {
    let trials = cfg.trials(100_000);
    let mut rng = substream(cfg.seed, 901);
    let mut failures = Vec::new();
    let mut worst_activation = 0.0f64;
    let mut worst_value = 0.0f64;
    for k in 0..10 {
        let n = rng.gen_range(2..=6);
        let m = Arc::new(random_matroid(k, n, &mut rng)?);
        let inst = random_general(m.clone(), &mut rng)?;
        let (sol, rules) = solve_exante_general(&inst)?;
        let (bern, _) = inst.reduce(&sol.x)?;
        let dec = decompose(&sol.x, &m)?;
        let scheme = ThresholdScheme::adversarial(&bern, &sol, &dec, (0..n).collect())?;
        let r = measure_ratio_general(&inst, &rules, &scheme, sol.objective, "", trials, cfg.seed ^ (k as u64) << 4)?;
        for (i, &(x, f, se)) in r.activation.iter().enumerate() {
            let z = if se > 0.0 { (f - x).abs() / se } else if f == x { 0.0 } else { f64::INFINITY };
            worst_activation = worst_activation.max(z);
            if (f - x).abs() > cfg.sigmas * se + 1e-12 {
                failures.push(format!("instance {k}: element {i} active {f} vs x = {x}"));
            }
        }
        let bern_value = exact_value(&scheme).expect("threshold schemes evaluate exactly")?;
        let z = (r.ratio.e_alg - bern_value).abs() / r.ratio.se.max(f64::MIN_POSITIVE);
        worst_value = worst_value.max(z);
        if (r.ratio.e_alg - bern_value).abs() > cfg.sigmas * r.ratio.se + 1e-12 {
            failures.push(format!("instance {k}: general E[Alg] {} vs Bernoulli {bern_value}", r.ratio.e_alg));
        }
    }
    outcome(
        failures,
        format!("10 instances, {trials} trials; worst activation gap {worst_activation:.2}σ, worst value gap {worst_value:.2}σ"),
    )
}
