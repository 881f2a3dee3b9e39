use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use ocrs::exante::{decompose, solve_exante, solve_exante_general, Decomposition, ExAnteRecord, ExAnteSolution};
use ocrs::harness::corpus::standard_corpus;
use ocrs::harness::{
    collect_traces, estimate_selectability, exact_selectability, hat_regression, measure_ratio, measure_ratio_general,
    optimality_experiments, SelectabilityReport,
};
use ocrs::instance::{Instance, InstanceFile};
use ocrs::lpcrs::{build_randomized_crs, guarantee, BuildOptions, ExactOptions, OracleKind, RandomizedOcrs, RandomizedOcrsFile};
use ocrs::schemes::{OnlineScheme, QuarterBaseline, Rank1Ocrs, Rank1Rcrs, ThresholdScheme};
use ocrs::{ArrivalModel, Error, Matroid, Result};
use ocrs_verify::{run_all, VerifyConfig};

use crate::output::{csv_rows, emit};
use crate::{Cli, Command, Global, ModeArg, OracleArg, PointArgs, SchemeKind};

const ONE_MINUS_INV_E: f64 = 1.0 - 0.367_879_441_171_442_33;
const RUN_TRIALS: u64 = 100_000;
const OPTIMALITY_TRIALS: u64 = 1_000_000;
const HAT_TRIALS: u64 = 100_000;

pub enum Failure {
    Error(Error),
    Acceptance(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl Failure {
    /// 0 ok, 1 internal, 2 input, 3 infeasible, 4 scheme/instance mismatch,
    /// 5 acceptance failure.
    pub fn code(&self) -> u8 {
        match self {
            Failure::Acceptance(_) => 5,
            Failure::Error(e) => match e {
                Error::Json(_)
                | Error::Io(_)
                | Error::InvalidInput(_)
                | Error::InvalidMatroid(_)
                | Error::DimensionMismatch { .. }
                | Error::ElementOutOfRange { .. }
                | Error::GroundSetTooLarge(_) => 2,
                Error::Infeasible(_) | Error::DecompositionFailed { .. } => 3,
                Error::SchemeMismatch(_) | Error::EnumerationCap { .. } => 4,
                Error::BuildDidNotConverge { .. } | Error::GuaranteeViolated { .. } | Error::Lp(_) => 1,
            },
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

pub fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::SolveExante { instance } => solve_exante_cmd(g, instance),
        Command::Run { point, scheme, scheme_file, estimate, sigmas } => {
            run_cmd(g, point, *scheme, scheme_file.as_deref(), *estimate, *sigmas)
        }
        Command::BuildLpOcrs { point, eps, oracle, max_iterations } => build_cmd(g, point, *eps, *oracle, *max_iterations),
        Command::Verify { filter } => verify_cmd(g, filter),
        Command::Optimality { eps, n } => optimality_cmd(g, *eps, n),
        Command::Hat { hats, lp_hats } => hat_cmd(g, hats, *lp_hats),
        Command::ExportCorpus { dir } => export_cmd(g, dir),
    }
}

struct Loaded {
    file: InstanceFile,
    instance: Instance,
    hash: String,
}

fn load(path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let file = InstanceFile::parse(&text)?;
    let instance = file.instance()?;
    let hash = file.content_hash();
    Ok(Loaded { file, instance, hash })
}

/// The ex-ante solution and its decomposition; general instances go through
/// the quantile reduction.
fn exante(inst: &Instance) -> Result<(ExAnteSolution, Decomposition)> {
    let sol = match inst {
        Instance::Bernoulli(b) => solve_exante(b)?,
        Instance::General(g) => solve_exante_general(g)?.0,
    };
    let dec = decompose(&sol.x, inst.matroid())?;
    Ok((sol, dec))
}

fn solve_exante_cmd(g: &Global, path: &Path) -> Outcome {
    let l = load(path)?;
    if let Some(x) = &l.file.x {
        check_point(l.instance.matroid(), x)?;
    }
    let (sol, dec) = exante(&l.instance)?;
    eprintln!("objective {}", sol.objective);
    let record = ExAnteRecord::new(&sol, &dec, l.hash);
    emit(g, &record, |w| {
        csv_rows(
            w,
            &["element", "x_i", "y_i"],
            (0..record.x.len()).map(|i| vec![i.to_string(), record.x[i].to_string(), record.y[i].to_string()]),
        )
    })?;
    Ok(())
}

/// Rejects points outside the matroid polytope with an infeasibility error.
fn check_point(m: &Matroid, x: &[f64]) -> Result<()> {
    if x.len() != m.n() {
        return Err(Error::DimensionMismatch { what: "x", expected: m.n(), got: x.len() });
    }
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Infeasible(format!("x[{i}] = {v} is not in [0,1]")));
    }
    decompose(x, m).map(|_| ()).map_err(|e| match e {
        Error::DecompositionFailed { residual, .. } => {
            Error::Infeasible(format!("x is not in the matroid polytope (residual {residual:.3e})"))
        }
        e => e,
    })
}

/// The point a contention resolution scheme rounds and the values credited
/// on acceptance: `--x`, else the file's `x`, else the ex-ante solution.
fn crs_point(l: &Loaded, p: &PointArgs, rank1: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = match (&p.x, &l.file.x) {
        (Some(x), _) | (None, Some(x)) => {
            let total: f64 = x.iter().sum();
            if rank1 && total > 1.0 + 1e-9 {
                return Err(Error::SchemeMismatch(format!("rank-1 schemes need Σx ≤ 1, got {total}")));
            }
            check_point(l.instance.matroid(), x)?;
            x.clone()
        }
        (None, None) => exante(&l.instance)?.0.x,
    };
    let values = match &l.instance {
        Instance::Bernoulli(b) => b.y.clone(),
        Instance::General(g) => g.reduce(&x)?.0.y,
    };
    Ok((x, values))
}

fn arrival(p: &PointArgs, n: usize) -> Result<ArrivalModel> {
    match (p.mode, &p.order) {
        (Some(ModeArg::Random), Some(_)) => Err(Error::SchemeMismatch("--order conflicts with --mode random".into())),
        (Some(ModeArg::Random), None) => Ok(ArrivalModel::RandomOrder),
        (_, Some(order)) => {
            let a = ArrivalModel::Fixed(order.clone());
            a.validate(n)?;
            Ok(a)
        }
        (_, None) => Ok(ArrivalModel::identity(n)),
    }
}

fn fixed_order(a: &ArrivalModel, scheme: &str) -> Result<Vec<usize>> {
    match a {
        ArrivalModel::Fixed(o) => Ok(o.clone()),
        ArrivalModel::RandomOrder => Err(Error::SchemeMismatch(format!("{scheme} runs in a fixed order"))),
    }
}

fn require_rank1(m: &Matroid) -> Result<()> {
    let loops = (0..m.n()).any(|i| m.rank_of(ocrs::ElemSet::singleton(i)) == 0);
    if m.rank_of(m.ground()) != 1 || loops {
        return Err(Error::SchemeMismatch(format!("rank-1 schemes need a rank-1 matroid without loops, got {}", m.kind_name())));
    }
    Ok(())
}

fn run_cmd(g: &Global, p: &PointArgs, kind: SchemeKind, scheme_file: Option<&Path>, estimate: bool, sigmas: f64) -> Outcome {
    let l = load(&p.instance)?;
    let n = l.instance.n();
    let trials = g.trials.unwrap_or(RUN_TRIALS);
    if trials == 0 {
        return Err(Error::InvalidInput("--trials must be at least 1".into()).into());
    }
    let m = l.instance.matroid().clone();
    let mut general = None;
    let (scheme, objective, c0): (Box<dyn OnlineScheme>, f64, f64) = match kind {
        SchemeKind::Adversarial | SchemeKind::RandomOrder => {
            let (sol, dec) = exante(&l.instance)?;
            let bern = match &l.instance {
                Instance::Bernoulli(b) => b.clone(),
                Instance::General(gi) => {
                    let (b, rules) = gi.reduce(&sol.x)?;
                    general = Some((gi.clone(), rules));
                    b
                }
            };
            let (s, c0) = if kind == SchemeKind::Adversarial {
                let order = fixed_order(&arrival(p, n)?, "adversarial")?;
                (ThresholdScheme::adversarial(&bern, &sol, &dec, order)?, 0.5)
            } else {
                if p.order.is_some() || p.mode == Some(ModeArg::Fixed) {
                    return Err(Error::SchemeMismatch("random-order scheme takes no fixed order".into()).into());
                }
                (ThresholdScheme::random_order(&bern, &sol, &dec)?, ONE_MINUS_INV_E)
            };
            (Box::new(s), sol.objective, c0)
        }
        SchemeKind::Rank1Ocrs | SchemeKind::Rank1Rcrs | SchemeKind::Quarter => {
            require_rank1(&m)?;
            let (x, values) = crs_point(&l, p, true)?;
            let objective = dot(&x, &values);
            let s: Box<dyn OnlineScheme> = match kind {
                SchemeKind::Rank1Ocrs => {
                    let order = fixed_order(&arrival(p, n)?, "rank1-ocrs")?;
                    Box::new(Rank1Ocrs::new(x, order)?.with_values(values)?)
                }
                SchemeKind::Quarter => {
                    let order = fixed_order(&arrival(p, n)?, "quarter")?;
                    Box::new(QuarterBaseline::new(x, order)?.with_values(values)?)
                }
                _ => {
                    if p.order.is_some() || p.mode == Some(ModeArg::Fixed) {
                        return Err(Error::SchemeMismatch("rank1-rcrs runs in random order".into()).into());
                    }
                    Box::new(Rank1Rcrs::new(x)?.with_values(values)?)
                }
            };
            let c0 = match kind {
                SchemeKind::Rank1Ocrs => 0.5,
                SchemeKind::Quarter => 0.25,
                _ => ONE_MINUS_INV_E,
            };
            (s, objective, c0)
        }
        SchemeKind::LpOcrs => {
            let s = lp_scheme(&l, p, scheme_file)?;
            let objective = dot(s.marginals(), s.values());
            let c0 = guarantee(s.arrival());
            (Box::new(s), objective, c0)
        }
    };
    let scheme = scheme.as_ref();

    let selectability = selectability(scheme, &l.hash, estimate, trials, g.seed)?;
    let crs = !matches!(kind, SchemeKind::Adversarial | SchemeKind::RandomOrder);
    let (ratio, activation) = match &general {
        Some((gi, rules)) => {
            let r = measure_ratio_general(gi, rules, scheme, objective, &l.hash, trials, g.seed)?;
            (r.ratio, Some(r.activation))
        }
        None => (measure_ratio(scheme, objective, &l.hash, trials, g.seed)?, None),
    };
    if let Some(path) = &g.dump_traces {
        dump_traces(scheme, trials, g.seed, path)?;
    }

    let violations = if crs { selectability.violations(c0, sigmas, 1e-9) } else { Vec::new() };
    let passed = if crs { violations.is_empty() } else { ratio.meets(c0, sigmas) };
    eprintln!(
        "{}: c = {}, E[Alg] = {:.6} ± {:.6}, ex-ante {:.6}, ratio {}",
        scheme.name(),
        selectability.c.map_or("n/a".into(), |c| format!("{c:.6}")),
        ratio.e_alg,
        ratio.se,
        objective,
        ratio.ratio.map_or("n/a".into(), |r| format!("{r:.6}")),
    );
    let report = json!({
        "selectability": selectability,
        "ratio": ratio,
        "activation": activation,
        "target": c0,
        "sigmas": sigmas,
        "checked": if crs { "selectability" } else { "ratio" },
        "violations": violations,
        "passed": passed,
    });
    emit(g, &report, |w| {
        selectability.write_csv(&mut *w)?;
        writeln!(w)?;
        ratio.write_csv(w)
    })?;
    if passed {
        Ok(())
    } else if crs {
        Err(Failure::Acceptance(format!("elements {violations:?} below {c0}·x − {sigmas}σ")))
    } else {
        Err(Failure::Acceptance(format!("E[Alg] = {} below {c0}·{objective} − {sigmas}σ", ratio.e_alg)))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact when the scheme supports it and fits the caps, Monte Carlo otherwise.
fn selectability(scheme: &dyn OnlineScheme, hash: &str, estimate: bool, trials: u64, seed: u64) -> Result<SelectabilityReport> {
    if !estimate {
        match exact_selectability(scheme, hash) {
            Ok(r) => return Ok(r),
            Err(Error::EnumerationCap { .. } | Error::SchemeMismatch(_)) => {}
            Err(e) => return Err(e),
        }
    }
    estimate_selectability(scheme, hash, trials, seed)
}

fn lp_scheme(l: &Loaded, p: &PointArgs, scheme_file: Option<&Path>) -> Result<RandomizedOcrs> {
    let n = l.instance.n();
    let Some(path) = scheme_file else {
        let (x, values) = crs_point(l, p, false)?;
        let a = arrival(p, n)?;
        let s = build_randomized_crs(l.instance.matroid().clone(), x, a.clone(), &BuildOptions::for_arrival(&a))?;
        return s.with_values(values);
    };
    let f = RandomizedOcrsFile::parse(&fs::read_to_string(path)?)?;
    if serde_json::to_value(&f.matroid)? != serde_json::to_value(&**l.instance.matroid())? {
        return Err(Error::SchemeMismatch("scheme file was built for a different matroid".into()));
    }
    if p.order.is_some() || p.mode.is_some() {
        let requested = arrival(p, n)?;
        if requested != f.arrival {
            return Err(Error::SchemeMismatch(format!("scheme file arrival {:?} ≠ requested {requested:?}", f.arrival)));
        }
    }
    let s = f.scheme(&ExactOptions::default())?;
    let values = match &l.instance {
        Instance::Bernoulli(b) => b.y.clone(),
        Instance::General(gi) => gi.reduce(&f.x)?.0.y,
    };
    s.with_values(values)
}

fn dump_traces(scheme: &dyn OnlineScheme, trials: u64, seed: u64, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    collect_traces(scheme, trials, seed, |t| {
        serde_json::to_writer(&mut w, t)?;
        writeln!(w)?;
        Ok(())
    })?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BuildReport {
    scheme: RandomizedOcrsFile,
    target: f64,
    eps: f64,
    verified_c: f64,
}

fn build_cmd(g: &Global, p: &PointArgs, eps: f64, oracle: OracleArg, max_iterations: usize) -> Outcome {
    if !(eps >= 0.0) {
        return Err(Error::InvalidInput("--eps must be non-negative".into()).into());
    }
    let l = load(&p.instance)?;
    let (x, _) = crs_point(&l, p, false)?;
    let a = arrival(p, l.instance.n())?;
    let mut opts = match oracle {
        OracleArg::Threshold => BuildOptions::for_arrival(&a),
        OracleArg::BestResponse => BuildOptions { oracle: OracleKind::BestResponse, ..BuildOptions::for_arrival(&a) },
    }
    .with_eps(eps);
    opts.max_iterations = max_iterations;
    let s = build_randomized_crs(l.instance.matroid().clone(), x.clone(), a, &opts)?;
    let q = s.verify_exact(&opts.exact)?;
    let verified_c = q.iter().zip(&x).filter(|(_, &xi)| xi > 0.0).map(|(q, x)| q / x).fold(1.0, f64::min);
    eprintln!(
        "certified c = {:.9} (re-verified {verified_c:.9}) with {} policies after {} iterations",
        s.certified_c(),
        s.policies().len(),
        s.history().len()
    );
    let target = opts.target;
    let report = BuildReport { scheme: s.to_file(), target, eps, verified_c };
    match g.format {
        crate::Format::Json => emit(g, &report.scheme, |_| Ok(()))?,
        crate::Format::Csv => emit(g, &report, |w| {
            csv_rows(
                w,
                &["policy", "weight", "kind"],
                report.scheme.policies.iter().zip(&report.scheme.weights).enumerate().map(|(k, (p, wt))| {
                    let kind = serde_json::to_value(p).ok().and_then(|v| v["kind"].as_str().map(String::from));
                    vec![k.to_string(), wt.to_string(), kind.unwrap_or_default()]
                }),
            )
        })?,
    }
    if s.certified_c() < target - eps || verified_c < target - eps {
        return Err(Failure::Acceptance(format!("certified c {} below target {target} − {eps}", s.certified_c())));
    }
    Ok(())
}

fn verify_cmd(g: &Global, filter: &str) -> Outcome {
    let cfg = VerifyConfig { seed: g.seed, trials: g.trials, ..VerifyConfig::default() };
    let results = run_all(&cfg, filter);
    if results.is_empty() {
        return Err(Error::InvalidInput(format!("no criterion matches \"{filter}\"")).into());
    }
    for r in &results {
        eprintln!("{}", r.line());
    }
    emit(g, &results, |w| {
        csv_rows(
            w,
            &["id", "name", "passed", "elapsed_secs", "budget_secs", "detail"],
            results.iter().map(|r| {
                vec![
                    r.id.to_string(),
                    r.name.to_string(),
                    r.passed.to_string(),
                    format!("{:.3}", r.elapsed_secs),
                    r.budget_secs.to_string(),
                    r.detail.clone(),
                ]
            }),
        )
    })?;
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| format!("[{}] {}", r.id, r.name)).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Acceptance(failed.join(", ")))
    }
}

fn optimality_cmd(g: &Global, eps: f64, ns: &[usize]) -> Outcome {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput("--eps must be in (0, 1)".into()).into());
    }
    let trials = g.trials.unwrap_or(OPTIMALITY_TRIALS);
    let r = optimality_experiments(eps, ns, trials, g.seed)?;
    let two = &r.two_element;
    eprintln!("two elements, ε = {eps}: c* = {:.9}, ceiling ½ + ε/2 = {:.9}", two.c_star, two.ceiling);
    let mut failures = Vec::new();
    if two.c_star < 0.5 - 1e-6 || two.c_star > two.ceiling + 1e-6 {
        failures.push(format!("c* = {} outside [½, {}]", two.c_star, two.ceiling));
    }
    for c in &r.rank1 {
        eprintln!("n = {}: measured {:.6} ± {:.6}, ceiling {:.6}", c.n, c.measured_avg, c.measured_se, c.ceiling);
        if c.measured_avg > c.ceiling + 3.0 * c.measured_se {
            failures.push(format!("n = {}: measured {} above ceiling {}", c.n, c.measured_avg, c.ceiling));
        }
    }
    emit(g, &r, |w| {
        csv_rows(
            w,
            &["n", "p_none_exact", "p_none_analytic", "ceiling", "measured_avg", "measured_se", "trials"],
            r.rank1.iter().map(|c| {
                vec![
                    c.n.to_string(),
                    c.p_none_exact.to_string(),
                    c.p_none_analytic.to_string(),
                    c.ceiling.to_string(),
                    c.measured_avg.to_string(),
                    c.measured_se.to_string(),
                    c.trials.to_string(),
                ]
            }),
        )
    })?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Acceptance(failures.join("; ")))
    }
}

fn hat_cmd(g: &Global, hats: &[usize], lp_hats: usize) -> Outcome {
    let trials = g.trials.unwrap_or(HAT_TRIALS);
    let r = hat_regression(hats, lp_hats, trials, g.seed)?;
    for p in &r.straw_man {
        eprintln!("hats = {}: straw-man base selectability {:.6} ± {:.6}", p.hats, p.measured, p.se);
    }
    eprintln!(
        "LP scheme on {} hats: certified c = {:.6}, re-verified {:.6}; threshold worst-order ratio {:.6}",
        r.lp_hats, r.lp_certified_c, r.lp_verified_c, r.threshold_worst_ratio
    );
    emit(g, &r, |w| {
        csv_rows(
            w,
            &["hats", "exact", "measured", "se"],
            r.straw_man.iter().map(|p| {
                vec![p.hats.to_string(), p.exact.map_or_else(String::new, |e| e.to_string()), p.measured.to_string(), p.se.to_string()]
            }),
        )
    })?;
    if r.lp_verified_c < 0.5 - 1e-6 || r.threshold_worst_ratio < 0.5 - 1e-9 {
        return Err(Failure::Acceptance(format!(
            "LP scheme c = {}, threshold worst ratio = {}",
            r.lp_verified_c, r.threshold_worst_ratio
        )));
    }
    Ok(())
}

fn export_cmd(g: &Global, dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(Error::Io)?;
    let corpus = standard_corpus(g.seed)?;
    for e in &corpus {
        let path = dir.join(format!("{}.json", e.name));
        fs::write(&path, serde_json::to_string_pretty(&e.file).map_err(Error::Json)? + "\n").map_err(Error::Io)?;
    }
    eprintln!("wrote {} instances to {}", corpus.len(), dir.display());
    Ok(())
}
