//! Reproducible random streams and a worker-count independent Monte Carlo driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type Stream = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0;

/// Trials per parallel work unit. Results are merged block by block in
/// index order, so the outcome does not depend on the number of workers.
pub const BLOCK: u64 = 1024;

/// Independent stream number `index` under the master `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `trials` independent trials, trial `t` drawing from `substream(seed, t)`.
///
/// `init` creates an accumulator, `step` folds one trial into it and `merge`
/// combines accumulators. Blocks of [`BLOCK`] trials are processed in parallel
/// and merged sequentially in block order.
pub fn monte_carlo<A, I, S, M>(trials: u64, seed: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, &mut Stream, u64) + Sync + Send,
    M: Fn(&mut A, A),
{
    let blocks = trials.div_ceil(BLOCK);
    let partial: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let mut rng = substream(seed, t);
                step(&mut acc, &mut rng, t);
            }
            acc
        })
        .collect();
    let mut total = init();
    for acc in partial {
        merge(&mut total, acc);
    }
    total
}

/// Fallible variant of [`monte_carlo`]; the first error in block order wins.
pub fn try_monte_carlo<A, E, I, S, M>(
    trials: u64,
    seed: u64,
    init: I,
    step: S,
    merge: M,
) -> Result<A, E>
where
    A: Send,
    E: Send,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, &mut Stream, u64) -> Result<(), E> + Sync + Send,
    M: Fn(&mut A, A),
{
    let blocks = trials.div_ceil(BLOCK);
    let partial: Vec<Result<A, E>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let mut rng = substream(seed, t);
                step(&mut acc, &mut rng, t)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for acc in partial {
        merge(&mut total, acc?);
    }
    Ok(total)
}

/// Standard error of a Bernoulli proportion estimated from `trials` draws.
pub fn proportion_se(p_hat: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (p_hat * (1.0 - p_hat) / trials as f64).max(0.0).sqrt()
}

/// Standard error of a sample mean from running sums.
pub fn mean_se(sum: f64, sum_sq: f64, trials: u64) -> f64 {
    if trials < 2 {
        return 0.0;
    }
    let t = trials as f64;
    let mean = sum / t;
    let var = ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0);
    (var / t).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: u64 = substream(7, 3).gen();
        let b: u64 = substream(7, 3).gen();
        let c: u64 = substream(7, 4).gen();
        let d: u64 = substream(8, 3).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn result_independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                monte_carlo(
                    5000,
                    11,
                    || 0.0f64,
                    |acc, rng, _| *acc += rng.gen::<f64>(),
                    |acc, other| *acc += other,
                )
            })
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }

    #[test]
    fn standard_errors() {
        assert_eq!(proportion_se(0.0, 100), 0.0);
        assert!((proportion_se(0.5, 100) - 0.05).abs() < 1e-15);
        // values 0,1,0,1: sample variance 1/3, se sqrt(1/12)
        assert!((mean_se(2.0, 2.0, 4) - (1.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
