//! Seeded instance generators and the bundled corpus.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::instance::{BernoulliInstance, DiscreteDist, GeneralInstance, InstanceFile};
use crate::matroid::Matroid;
use crate::rng::{substream, Stream};
use crate::set::ElemSet;

/// Hat graph with `hats` hats: vertices `u1 = 0`, `u2 = 1`, `v_j = 2 + j`;
/// edges `(u1, v_j), (v_j, u2)` for each hat, then the base edge `(u1, u2)`
/// with the largest id. Returns the matroid and the point with `1/2` on hat
/// edges and 1 on the base edge.
pub fn hat(hats: usize) -> Result<(Matroid, Vec<f64>)> {
    let mut edges = Vec::with_capacity(2 * hats + 1);
    for j in 0..hats {
        edges.push((0, 2 + j));
        edges.push((2 + j, 1));
    }
    edges.push((0, 1));
    let mut x = vec![0.5; 2 * hats];
    x.push(1.0);
    Ok((Matroid::graphic(hats + 2, edges)?, x))
}

/// Hat instance with `p = x` and unit values.
pub fn hat_instance(hats: usize) -> Result<BernoulliInstance> {
    let (m, x) = hat(hats)?;
    let n = x.len();
    BernoulliInstance::new(Arc::new(m), x, vec![1.0; n])
}

/// Rank-1 matroid with `x_i = 1/n`.
pub fn uniform_rank1(n: usize) -> Result<(Matroid, Vec<f64>)> {
    Ok((Matroid::uniform(n, 1)?, vec![1.0 / n as f64; n]))
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Partition matroid with 1 to 3 blocks and random capacities.
pub fn random_partition(n: usize, rng: &mut Stream) -> Result<Matroid> {
    let k = rng.gen_range(1..=3.min(n.max(1)));
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut blocks = vec![Vec::new(); k];
    for (j, i) in ids.into_iter().enumerate() {
        let b = if j < k { j } else { rng.gen_range(0..k) };
        blocks[b].push(i);
    }
    blocks.iter_mut().for_each(|b| b.sort_unstable());
    let caps = blocks.iter().map(|b| rng.gen_range(1..=b.len().max(1))).collect();
    Matroid::partition(blocks, caps)
}

/// Graphic matroid of a random multigraph on 3 to 5 vertices without loops.
pub fn random_graphic(n: usize, rng: &mut Stream) -> Result<Matroid> {
    let v = rng.gen_range(3..=5);
    let edges = (0..n)
        .map(|_| {
            let a = rng.gen_range(0..v);
            let mut b = rng.gen_range(0..v - 1);
            if b >= a {
                b += 1;
            }
            (a.min(b), a.max(b))
        })
        .collect();
    Matroid::graphic(v, edges)
}

/// Binary matroid of `n` random vectors in `GF(2)^dim`, as an explicit family.
pub fn random_binary(n: usize, dim: usize, rng: &mut Stream) -> Result<Matroid> {
    let vectors: Vec<u32> = (0..n).map(|_| rng.gen_range(0..1u32 << dim)).collect();
    let family = ElemSet::full(n)
        .subsets()
        .filter(|s| gf2_independent(s.iter().map(|i| vectors[i])))
        .map(|s| s.iter().collect())
        .collect();
    Matroid::explicit(n, family)
}

fn gf2_independent(vectors: impl Iterator<Item = u32>) -> bool {
    let mut basis: Vec<u32> = Vec::new();
    for mut v in vectors {
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v == 0 {
            return false;
        }
        basis.push(v);
        basis.sort_unstable_by(|a, b| b.cmp(a));
    }
    true
}

/// A point of the matroid polytope: a scaled random convex combination of
/// greedy independent sets.
pub fn random_point(m: &Matroid, rng: &mut Stream) -> Vec<f64> {
    let n = m.n();
    let k = rng.gen_range(1..=4);
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let scale = rng.gen_range(0.6..1.0);
    let mut x = vec![0.0; n];
    for w in raw {
        let weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let allowed: ElemSet = (0..n).filter(|_| rng.gen_bool(0.8)).collect();
        for i in m.greedy(&weights, allowed, ElemSet::EMPTY) {
            x[i] += scale * w / total;
        }
    }
    x
}

/// Random `p ∈ [0.1, 0.9]` and `y ∈ [0.5, 5]`, rounded to two decimals.
pub fn random_bernoulli(m: Arc<Matroid>, rng: &mut Stream) -> Result<BernoulliInstance> {
    let n = m.n();
    let p = (0..n).map(|_| round2(rng.gen_range(0.1..0.9))).collect();
    let y = (0..n).map(|_| round2(rng.gen_range(0.5..5.0))).collect();
    BernoulliInstance::new(m, p, y)
}

/// One to three atoms per element on values in `[0, 5]`.
pub fn random_general(m: Arc<Matroid>, rng: &mut Stream) -> Result<GeneralInstance> {
    let dists = (0..m.n())
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mut atoms: Vec<(f64, f64)> = raw.iter().map(|w| (round2(rng.gen_range(0.0..5.0)), w / total)).collect();
            let s: f64 = atoms.iter().map(|a| a.1).sum();
            atoms[0].1 += 1.0 - s;
            DiscreteDist::new(atoms)
        })
        .collect::<Result<Vec<_>>>()?;
    GeneralInstance::new(m, dists)
}

/// A random partition or graphic matroid of size `n`, alternating by `index`.
pub fn random_matroid(index: usize, n: usize, rng: &mut Stream) -> Result<Matroid> {
    if index % 2 == 0 {
        random_partition(n, rng)
    } else {
        random_graphic(n, rng)
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub file: InstanceFile,
}

/// The bundled instances: rank-1 pairs, the uniform `1/n` family, Hat(n),
/// and seeded partition, graphic and binary matroids.
pub fn standard_corpus(seed: u64) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    let mut push = |name: String, file: InstanceFile| out.push(CorpusEntry { name, file });
    let pair = Arc::new(Matroid::uniform(2, 1)?);
    push("rank1-pair".into(), InstanceFile::bernoulli(&BernoulliInstance::new(pair.clone(), vec![0.5, 0.5], vec![1.0, 1.0])?));
    push(
        "rank1-skewed".into(),
        InstanceFile::bernoulli(&BernoulliInstance::new(pair, vec![0.99, 0.01], vec![1.0, 1.0])?).with_x(vec![0.99, 0.01]),
    );
    for n in [2, 5, 10] {
        let (m, x) = uniform_rank1(n)?;
        let inst = BernoulliInstance::new(Arc::new(m), x.clone(), vec![1.0; n])?;
        push(format!("uniform-{n}"), InstanceFile::bernoulli(&inst).with_x(x));
    }
    for h in 2..=6 {
        let inst = hat_instance(h)?;
        let x = inst.p.clone();
        push(format!("hat-{h}"), InstanceFile::bernoulli(&inst).with_x(x));
    }
    let mut rng = substream(seed, 0);
    for k in 0..4 {
        let n = rng.gen_range(4..=8);
        let m = Arc::new(random_matroid(k, n, &mut rng)?);
        let kind = m.kind_name();
        let inst = random_bernoulli(m, &mut rng)?;
        push(format!("{kind}-{k}"), InstanceFile::bernoulli(&inst));
    }
    for k in 0..2 {
        let n = rng.gen_range(4..=6);
        let m = Arc::new(random_binary(n, 3, &mut rng)?);
        push(format!("binary-{k}"), InstanceFile::bernoulli(&random_bernoulli(m, &mut rng)?));
    }
    for k in 0..2 {
        let n = rng.gen_range(3..=6);
        let m = Arc::new(random_matroid(k, n, &mut rng)?);
        push(format!("general-{k}"), InstanceFile::general(&random_general(m, &mut rng)?));
    }
    Ok(out)
}
