use crate::error::{Error, Result};
use crate::instance::BernoulliInstance;
use crate::lpcrs::pattern_probability;
use crate::set::ElemSet;

pub const OFFLINE_CAP: usize = 14;

/// `E[max-weight independent set value]` over all `2^n` activity patterns.
pub fn brute_force_offline(inst: &BernoulliInstance) -> Result<f64> {
    brute_force_offline_with_cap(inst, OFFLINE_CAP)
}

pub fn brute_force_offline_with_cap(inst: &BernoulliInstance, cap: usize) -> Result<f64> {
    let n = inst.n();
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let m = &inst.matroid;
    let mut total = 0.0;
    for active in ElemSet::full(n).subsets() {
        let w = pattern_probability(&inst.p, active);
        if w == 0.0 {
            continue;
        }
        let best: f64 = m.greedy(&inst.y, active, ElemSet::EMPTY).iter().map(|i| inst.y[i]).sum();
        total += w * best;
    }
    Ok(total)
}
