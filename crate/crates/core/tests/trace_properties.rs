use std::sync::Arc;

use ocrs::exante::{decompose, solve_exante};
use ocrs::harness::collect_traces;
use ocrs::harness::corpus::{random_bernoulli, random_matroid};
use ocrs::rng::substream;
use ocrs::schemes::{OnlineScheme, ThresholdScheme};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn threshold_traces_satisfy_invariants(seed in 0u64..1_000_000, n in 2usize..9, random in any::<bool>()) {
        let mut rng = substream(seed, 0);
        let m = Arc::new(random_matroid(seed as usize, n, &mut rng).unwrap());
        let inst = random_bernoulli(m.clone(), &mut rng).unwrap();
        let sol = solve_exante(&inst).unwrap();
        let dec = decompose(&sol.x, &m).unwrap();
        let s = if random {
            ThresholdScheme::random_order(&inst, &sol, &dec).unwrap()
        } else {
            ThresholdScheme::adversarial(&inst, &sol, &dec, (0..n).rev().collect()).unwrap()
        };
        collect_traces(&s, 50, seed, |t| {
            t.check(s.matroid())?;
            for r in &t.records {
                if r.active && !r.accepted {
                    if let Some(th) = r.threshold {
                        assert!(r.value <= th);
                    }
                }
            }
            Ok(())
        }).unwrap();
    }
}
