//! Finite matroids: independence, rank, span, contraction and the greedy
//! maximum-weight independent set.
//!
//! Four families are supported: uniform, partition, graphic and explicit
//! (a listed family of independent sets). All oracles are immutable after
//! construction; scratch space (the union-find forest for graphic matroids)
//! lives on the stack of each call.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::{ElemSet, MAX_ELEMENTS};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MatroidSpec", into = "MatroidSpec")]
pub struct Matroid {
    n: usize,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Uniform {
        rank: usize,
    },
    Partition {
        blocks: Vec<ElemSet>,
        capacities: Vec<usize>,
    },
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
        // endpoints relabelled to 0..touched, so that the forest fits in a fixed array
        compact: Vec<(u8, u8)>,
    },
    Explicit {
        family: HashSet<u64>,
    },
}

/// JSON form of a matroid, e.g. `{"kind":"uniform","n":5,"rank":2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatroidSpec {
    Uniform {
        n: usize,
        rank: usize,
    },
    Partition {
        blocks: Vec<Vec<usize>>,
        capacities: Vec<usize>,
    },
    Graphic {
        vertices: usize,
        edges: Vec<[usize; 2]>,
    },
    Explicit {
        n: usize,
        independent_sets: Vec<Vec<usize>>,
    },
}

fn check_ground(n: usize) -> Result<()> {
    if n > MAX_ELEMENTS {
        Err(Error::GroundSetTooLarge(n))
    } else {
        Ok(())
    }
}

impl Matroid {
    pub fn uniform(n: usize, rank: usize) -> Result<Self> {
        check_ground(n)?;
        Ok(Matroid { n, kind: Kind::Uniform { rank: rank.min(n) } })
    }

    /// Every element must belong to exactly one block; at most
    /// `capacities[b]` elements of block `b` may be chosen together.
    pub fn partition(blocks: Vec<Vec<usize>>, capacities: Vec<usize>) -> Result<Self> {
        if blocks.len() != capacities.len() {
            return Err(Error::DimensionMismatch {
                what: "partition capacities",
                expected: blocks.len(),
                got: capacities.len(),
            });
        }
        let n: usize = blocks.iter().map(Vec::len).sum();
        check_ground(n)?;
        let mut seen = ElemSet::EMPTY;
        let mut masks = Vec::with_capacity(blocks.len());
        for block in &blocks {
            let mut mask = ElemSet::EMPTY;
            for &e in block {
                if e >= n {
                    return Err(Error::InvalidMatroid(format!(
                        "partition element {e} outside 0..{n}"
                    )));
                }
                if seen.contains(e) {
                    return Err(Error::InvalidMatroid(format!(
                        "element {e} appears in more than one block"
                    )));
                }
                seen.insert(e);
                mask.insert(e);
            }
            masks.push(mask);
        }
        Ok(Matroid { n, kind: Kind::Partition { blocks: masks, capacities } })
    }

    /// Cycle matroid of a multigraph; element `k` is `edges[k]`. Self-loops are
    /// matroid loops.
    pub fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = edges.len();
        check_ground(n)?;
        let mut relabel = std::collections::HashMap::new();
        let mut compact = Vec::with_capacity(n);
        for &(u, v) in &edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidMatroid(format!(
                    "edge ({u},{v}) references a vertex outside 0..{vertices}"
                )));
            }
            let next = relabel.len();
            let cu = *relabel.entry(u).or_insert(next);
            let next = relabel.len();
            let cv = *relabel.entry(v).or_insert(next);
            compact.push((cu as u8, cv as u8));
        }
        Ok(Matroid { n, kind: Kind::Graphic { vertices, edges, compact } })
    }

    /// A matroid given by its full list of independent sets. The family is
    /// checked for the matroid axioms (empty set, downward closure, and
    /// augmentation between consecutive sizes).
    pub fn explicit(n: usize, independent_sets: Vec<Vec<usize>>) -> Result<Self> {
        check_ground(n)?;
        let mut family = HashSet::with_capacity(independent_sets.len());
        for set in &independent_sets {
            let mut s = ElemSet::EMPTY;
            for &e in set {
                if e >= n {
                    return Err(Error::InvalidMatroid(format!(
                        "independent set mentions element {e} outside 0..{n}"
                    )));
                }
                s.insert(e);
            }
            family.insert(s.bits());
        }
        Self::explicit_from_family(n, family)
    }

    fn explicit_from_family(n: usize, family: HashSet<u64>) -> Result<Self> {
        if !family.contains(&0) {
            return Err(Error::InvalidMatroid("the empty set must be independent".into()));
        }
        let mut by_size: Vec<Vec<ElemSet>> = vec![Vec::new(); n + 1];
        for &bits in &family {
            let s = ElemSet::from_bits(bits);
            for e in s {
                if !family.contains(&s.without(e).bits()) {
                    return Err(Error::InvalidMatroid(format!(
                        "family is not downward closed: {s} is listed but {} is not",
                        s.without(e)
                    )));
                }
            }
            by_size[s.len()].push(s);
        }
        for k in 0..n {
            for &small in &by_size[k] {
                for &big in &by_size[k + 1] {
                    let augmentable = big
                        .difference(small)
                        .iter()
                        .any(|e| family.contains(&small.with(e).bits()));
                    if !augmentable {
                        return Err(Error::InvalidMatroid(format!(
                            "augmentation fails for {small} and {big}"
                        )));
                    }
                }
            }
        }
        Ok(Matroid { n, kind: Kind::Explicit { family } })
    }

    /// Converts any matroid into the explicit family of its independent sets.
    /// Intended for small ground sets.
    pub fn to_explicit(&self) -> Result<Matroid> {
        if self.n > 24 {
            return Err(Error::EnumerationCap { n: self.n, cap: 24 });
        }
        let family = self.independent_sets().map(ElemSet::bits).collect();
        Ok(Matroid { n: self.n, kind: Kind::Explicit { family } })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ground(&self) -> ElemSet {
        ElemSet::full(self.n)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Uniform { .. } => "uniform",
            Kind::Partition { .. } => "partition",
            Kind::Graphic { .. } => "graphic",
            Kind::Explicit { .. } => "explicit",
        }
    }

    pub fn spec(&self) -> MatroidSpec {
        self.clone().into()
    }

    fn check(&self, s: ElemSet) -> Result<()> {
        if s.is_subset(self.ground()) {
            Ok(())
        } else {
            let element = s.difference(self.ground()).iter().next().unwrap_or(self.n);
            Err(Error::ElementOutOfRange { element, n: self.n })
        }
    }

    pub fn is_independent(&self, s: ElemSet) -> Result<bool> {
        self.check(s)?;
        Ok(self.independent(s))
    }

    pub fn rank(&self, s: ElemSet) -> Result<usize> {
        self.check(s)?;
        Ok(self.rank_of(s))
    }

    /// `{ i : rank(A + i) = rank(A) }`.
    pub fn span(&self, a: ElemSet) -> Result<ElemSet> {
        self.check(a)?;
        Ok(self.span_of(a))
    }

    /// `M / A`. The contracted set need not be independent.
    pub fn contract(&self, a: ElemSet) -> Result<Contraction<'_>> {
        self.check(a)?;
        Ok(Contraction::new(self, a))
    }

    /// Greedy maximum-weight independent set: descending weight, ties by
    /// ascending element id, zero-weight elements skipped.
    pub fn max_weight_independent_set(&self, weights: &[f64]) -> Result<ElemSet> {
        check_weights(weights, self.n)?;
        Ok(self.greedy(weights, self.ground(), ElemSet::EMPTY))
    }

    /// Independence test without range checking; `s` must lie in the ground set.
    #[inline]
    pub fn independent(&self, s: ElemSet) -> bool {
        debug_assert!(s.is_subset(self.ground()));
        match &self.kind {
            Kind::Uniform { rank } => s.len() <= *rank,
            Kind::Partition { blocks, capacities } => blocks
                .iter()
                .zip(capacities)
                .all(|(b, &cap)| s.intersection(*b).len() <= cap),
            Kind::Graphic { compact, .. } => {
                let mut forest = Forest::new();
                s.iter().all(|e| {
                    let (u, v) = compact[e];
                    forest.union(u, v)
                })
            }
            Kind::Explicit { family } => family.contains(&s.bits()),
        }
    }

    /// Rank without range checking.
    pub fn rank_of(&self, s: ElemSet) -> usize {
        debug_assert!(s.is_subset(self.ground()));
        match &self.kind {
            Kind::Uniform { rank } => s.len().min(*rank),
            Kind::Partition { blocks, capacities } => blocks
                .iter()
                .zip(capacities)
                .map(|(b, &cap)| s.intersection(*b).len().min(cap))
                .sum(),
            Kind::Graphic { compact, .. } => {
                let mut forest = Forest::new();
                s.iter()
                    .filter(|&e| {
                        let (u, v) = compact[e];
                        forest.union(u, v)
                    })
                    .count()
            }
            Kind::Explicit { .. } => self.basis_of(s).len(),
        }
    }

    /// A maximal independent subset of `s`, built by insertion in ascending id order.
    pub fn basis_of(&self, s: ElemSet) -> ElemSet {
        let mut basis = ElemSet::EMPTY;
        for e in s {
            let grown = basis.with(e);
            if self.independent(grown) {
                basis = grown;
            }
        }
        basis
    }

    pub fn span_of(&self, a: ElemSet) -> ElemSet {
        let basis = self.basis_of(a);
        let mut span = a;
        for e in self.ground().difference(a) {
            if !self.independent(basis.with(e)) {
                span.insert(e);
            }
        }
        span
    }

    /// Greedy over the elements of `allowed` with strictly positive weight,
    /// keeping `base ∪ chosen` independent. `base` must be independent.
    /// Returns only the chosen elements.
    pub fn greedy(&self, weights: &[f64], allowed: ElemSet, base: ElemSet) -> ElemSet {
        let mut candidates: Vec<usize> =
            allowed.difference(base).iter().filter(|&e| weights[e] > 0.0).collect();
        candidates.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
        let mut current = base;
        let mut chosen = ElemSet::EMPTY;
        for e in candidates {
            let grown = current.with(e);
            if self.independent(grown) {
                current = grown;
                chosen.insert(e);
            }
        }
        chosen
    }

    /// Every independent set, in increasing bitmask order.
    pub fn independent_sets(&self) -> impl Iterator<Item = ElemSet> + '_ {
        assert!(self.n < MAX_ELEMENTS, "enumeration over the full 64-element ground set");
        (0..1u64 << self.n).map(ElemSet::from_bits).filter(move |&s| self.independent(s))
    }
}

pub(crate) fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::DimensionMismatch { what: "weights", expected: n, got: weights.len() });
    }
    if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite())
    {
        return Err(Error::InvalidInput(format!("weight {w} of element {i} is not a finite nonnegative number")));
    }
    Ok(())
}

/// Union-find over at most 128 compacted vertices with path halving.
struct Forest {
    parent: [u8; 2 * MAX_ELEMENTS],
}

impl Forest {
    fn new() -> Self {
        let mut parent = [0u8; 2 * MAX_ELEMENTS];
        for (i, p) in parent.iter_mut().enumerate() {
            *p = i as u8;
        }
        Forest { parent }
    }

    fn find(&mut self, mut v: u8) -> u8 {
        while self.parent[v as usize] != v {
            let grand = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = grand;
            v = grand;
        }
        v
    }

    /// Merges the components of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: u8, b: u8) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        self.parent[ra as usize] = rb;
        true
    }
}

/// The contraction `M / A`: `S` is independent iff `S ∩ A = ∅` and
/// `rank(S ∪ A) = |S| + rank(A)`.
#[derive(Clone, Copy, Debug)]
pub struct Contraction<'m> {
    base: &'m Matroid,
    contracted: ElemSet,
    basis: ElemSet,
}

impl<'m> Contraction<'m> {
    pub(crate) fn new(base: &'m Matroid, contracted: ElemSet) -> Self {
        Contraction { base, contracted, basis: base.basis_of(contracted) }
    }

    pub fn contracted(&self) -> ElemSet {
        self.contracted
    }

    /// Ground set of the minor, `N \ A`.
    pub fn ground(&self) -> ElemSet {
        self.base.ground().difference(self.contracted)
    }

    pub fn is_independent(&self, s: ElemSet) -> Result<bool> {
        self.base.check(s)?;
        Ok(self.independent(s))
    }

    pub fn rank(&self, s: ElemSet) -> Result<usize> {
        self.base.check(s)?;
        Ok(self.rank_of(s))
    }

    pub fn max_weight_independent_set(&self, weights: &[f64]) -> Result<ElemSet> {
        check_weights(weights, self.base.n)?;
        Ok(self.greedy(weights))
    }

    #[inline]
    pub fn independent(&self, s: ElemSet) -> bool {
        s.is_disjoint(self.contracted) && self.base.independent(s.union(self.basis))
    }

    pub fn rank_of(&self, s: ElemSet) -> usize {
        self.base.rank_of(s.union(self.contracted)) - self.basis.len()
    }

    pub fn greedy(&self, weights: &[f64]) -> ElemSet {
        self.base.greedy(weights, self.ground(), self.basis)
    }
}

impl TryFrom<MatroidSpec> for Matroid {
    type Error = Error;

    fn try_from(spec: MatroidSpec) -> Result<Self> {
        match spec {
            MatroidSpec::Uniform { n, rank } => Matroid::uniform(n, rank),
            MatroidSpec::Partition { blocks, capacities } => Matroid::partition(blocks, capacities),
            MatroidSpec::Graphic { vertices, edges } => {
                Matroid::graphic(vertices, edges.into_iter().map(|[u, v]| (u, v)).collect())
            }
            MatroidSpec::Explicit { n, independent_sets } => Matroid::explicit(n, independent_sets),
        }
    }
}

impl From<Matroid> for MatroidSpec {
    fn from(m: Matroid) -> Self {
        match m.kind {
            Kind::Uniform { rank } => MatroidSpec::Uniform { n: m.n, rank },
            Kind::Partition { blocks, capacities } => MatroidSpec::Partition {
                blocks: blocks.into_iter().map(ElemSet::to_vec).collect(),
                capacities,
            },
            Kind::Graphic { vertices, edges, .. } => MatroidSpec::Graphic {
                vertices,
                edges: edges.into_iter().map(|(u, v)| [u, v]).collect(),
            },
            Kind::Explicit { family } => {
                let mut sets: Vec<ElemSet> = family.into_iter().map(ElemSet::from_bits).collect();
                sets.sort_by_key(|s| (s.len(), s.bits()));
                MatroidSpec::Explicit {
                    n: m.n,
                    independent_sets: sets.into_iter().map(ElemSet::to_vec).collect(),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> ElemSet {
        items.iter().collect()
    }

    /// Two hats: u1=0, u2=1, v1=2, v2=3; hat edges first, base edge (u1,u2) last.
    fn hat2() -> Matroid {
        Matroid::graphic(4, vec![(0, 2), (2, 1), (0, 3), (3, 1), (0, 1)]).unwrap()
    }

    fn brute_rank(m: &Matroid, s: ElemSet) -> usize {
        s.subsets().filter(|&t| m.independent(t)).map(ElemSet::len).max().unwrap()
    }

    /// Acyclicity by depth-first search, independent of the union-find path.
    fn acyclic(vertices: usize, edges: &[(usize, usize)], s: ElemSet) -> bool {
        let mut adj = vec![Vec::new(); vertices];
        for e in s {
            let (u, v) = edges[e];
            if u == v {
                return false;
            }
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        let mut seen = vec![false; vertices];
        for root in 0..vertices {
            if seen[root] {
                continue;
            }
            let mut stack = vec![(root, usize::MAX)];
            seen[root] = true;
            while let Some((u, via)) = stack.pop() {
                for &(w, e) in &adj[u] {
                    if e == via {
                        continue;
                    }
                    if seen[w] {
                        return false;
                    }
                    seen[w] = true;
                    stack.push((w, e));
                }
            }
        }
        true
    }

    #[test]
    fn uniform_examples() {
        let m = Matroid::uniform(3, 1).unwrap();
        assert!(!m.is_independent(set(&[0, 1])).unwrap());
        assert!(m.is_independent(ElemSet::EMPTY).unwrap());
        let m5 = Matroid::uniform(5, 2).unwrap();
        assert_eq!(m5.rank(set(&[0, 1, 2])).unwrap(), 2);
        assert_eq!(m5.rank(ElemSet::EMPTY).unwrap(), 0);
        assert_eq!(m.span(set(&[0])).unwrap(), set(&[0, 1, 2]));
        assert!(matches!(
            m.is_independent(set(&[3])),
            Err(Error::ElementOutOfRange { element: 3, n: 3 })
        ));
    }

    #[test]
    fn hat_examples() {
        let m = hat2();
        // (u1,v1), (v1,u2), (u1,u2) close a triangle
        assert!(!m.is_independent(set(&[0, 1, 4])).unwrap());
        assert_eq!(m.rank(m.ground()).unwrap(), 3);
        assert_eq!(brute_rank(&m, m.ground()), 3);
        assert!(m.span(set(&[0, 1])).unwrap().contains(4));
        assert_eq!(m.span(ElemSet::EMPTY).unwrap(), ElemSet::EMPTY);
    }

    #[test]
    fn contraction_examples() {
        let m = Matroid::uniform(3, 1).unwrap();
        let c = m.contract(set(&[0])).unwrap();
        assert!((1..3).all(|i| !c.is_independent(set(&[i])).unwrap()));

        let hat = hat2();
        let c = hat.contract(set(&[4])).unwrap();
        assert!(!c.is_independent(set(&[0, 1])).unwrap());
        // rank identity by enumeration
        for s in hat.ground().subsets() {
            let expect = s.is_disjoint(set(&[4]))
                && brute_rank(&hat, s.union(set(&[4]))) == s.len() + brute_rank(&hat, set(&[4]));
            assert_eq!(c.independent(s), expect, "{s}");
        }

        let empty = hat.contract(ElemSet::EMPTY).unwrap();
        for s in hat.ground().subsets() {
            assert_eq!(empty.independent(s), hat.independent(s));
        }
    }

    #[test]
    fn greedy_examples() {
        let m = Matroid::uniform(3, 1).unwrap();
        assert_eq!(m.max_weight_independent_set(&[2.0, 1.0, 3.0]).unwrap(), set(&[2]));
        assert_eq!(m.max_weight_independent_set(&[0.0; 3]).unwrap(), ElemSet::EMPTY);
        assert!(m.max_weight_independent_set(&[1.0, -1.0, 0.0]).is_err());

        let hat = hat2();
        let best = hat.max_weight_independent_set(&[1.0; 5]).unwrap();
        assert_eq!(best.len(), 3);
        assert!(hat.independent(best));
        // ties by ascending id: 0, 1 taken; 2 and 3 are fine with them; 4 closes a triangle
        assert_eq!(best, set(&[0, 1, 2]));
        let brute = hat.ground().subsets().filter(|&s| hat.independent(s)).map(ElemSet::len).max();
        assert_eq!(brute, Some(3));
    }

    #[test]
    fn partition_and_validation() {
        let m = Matroid::partition(vec![vec![0, 1], vec![2, 3, 4]], vec![1, 2]).unwrap();
        assert!(m.independent(set(&[0, 2, 3])));
        assert!(!m.independent(set(&[0, 1])));
        assert_eq!(m.rank_of(m.ground()), 3);
        assert!(Matroid::partition(vec![vec![0, 1], vec![1]], vec![1, 1]).is_err());
        assert!(Matroid::partition(vec![vec![0]], vec![1, 1]).is_err());
        assert!(Matroid::graphic(2, vec![(0, 2)]).is_err());
    }

    #[test]
    fn explicit_axioms_enforced() {
        assert!(Matroid::explicit(2, vec![vec![0]]).is_err(), "missing empty set");
        assert!(Matroid::explicit(2, vec![vec![], vec![0, 1]]).is_err(), "not downward closed");
        // {0,1} and {2} as bases: {2} cannot be augmented from {0,1}
        let bad = vec![vec![], vec![0], vec![1], vec![2], vec![0, 1]];
        assert!(Matroid::explicit(3, bad).is_err());
        let good = Matroid::explicit(3, vec![vec![], vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2]]);
        assert!(good.is_ok());
    }

    #[test]
    fn self_loop_is_a_matroid_loop() {
        let m = Matroid::graphic(2, vec![(0, 0), (0, 1)]).unwrap();
        assert!(!m.independent(set(&[0])));
        assert_eq!(m.rank_of(m.ground()), 1);
        assert_eq!(m.span_of(ElemSet::EMPTY), set(&[0]));
    }

    #[test]
    fn json_schema_round_trip() {
        let json = r#"{"kind":"partition","blocks":[[0,1],[2,3,4]],"capacities":[1,2]}"#;
        let m: Matroid = serde_json::from_str(json).unwrap();
        assert_eq!(m.n(), 5);
        let back = serde_json::to_string(&m).unwrap();
        assert_eq!(back, json);
        let g: Matroid =
            serde_json::from_str(r#"{"kind":"graphic","vertices":4,"edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(g.n(), 2);
        let e: Matroid =
            serde_json::from_str(r#"{"kind":"explicit","n":2,"independent_sets":[[],[0],[1]]}"#).unwrap();
        assert_eq!(e.rank_of(e.ground()), 1);
        assert!(serde_json::from_str::<Matroid>(r#"{"kind":"explicit","n":2,"independent_sets":[[0]]}"#).is_err());
    }

    // Exhaustive structural checks over a handful of small matroids of every family.
    fn zoo() -> Vec<Matroid> {
        let k4 = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let multi = vec![(0, 1), (0, 1), (1, 2), (2, 0), (2, 2), (3, 4), (4, 5)];
        vec![
            Matroid::uniform(6, 3).unwrap(),
            Matroid::partition(vec![vec![0, 3], vec![1, 4, 5], vec![2]], vec![1, 2, 0]).unwrap(),
            Matroid::graphic(4, k4).unwrap(),
            Matroid::graphic(6, multi).unwrap(),
            hat2(),
            Matroid::graphic(4, vec![(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap().to_explicit().unwrap(),
        ]
    }

    #[test]
    fn rank_is_bounded_monotone_submodular() {
        for m in zoo() {
            let g = m.ground();
            for s in g.subsets() {
                let r = m.rank_of(s);
                assert_eq!(r, brute_rank(&m, s));
                assert!(r <= s.len());
                for e in g.difference(s) {
                    assert!(m.rank_of(s.with(e)) >= r);
                }
            }
            for s in g.subsets() {
                for t in g.subsets() {
                    assert!(
                        m.rank_of(s.union(t)) + m.rank_of(s.intersection(t))
                            <= m.rank_of(s) + m.rank_of(t)
                    );
                }
            }
        }
    }

    #[test]
    fn exchange_and_downward_closure() {
        for m in zoo() {
            let indep: Vec<ElemSet> = m.independent_sets().collect();
            for &s in &indep {
                assert!(s.subsets().all(|t| m.independent(t)));
            }
            for &a in &indep {
                for &b in &indep {
                    if a.len() < b.len() {
                        assert!(b.difference(a).iter().any(|e| m.independent(a.with(e))));
                    }
                }
            }
        }
    }

    #[test]
    fn greedy_matches_enumeration() {
        let weights = [
            vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0],
            vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0],
            vec![0.0, 2.5, 0.0, 7.0, 0.5, 0.25, 3.0],
        ];
        for m in zoo() {
            for w in &weights {
                let w = &w[..m.n()];
                let g = m.max_weight_independent_set(w).unwrap();
                assert!(m.independent(g));
                let value: f64 = g.iter().map(|e| w[e]).sum();
                let best = m
                    .independent_sets()
                    .map(|s| s.iter().map(|e| w[e]).sum::<f64>())
                    .fold(0.0, f64::max);
                assert!((value - best).abs() < 1e-12);
                assert!(g.iter().all(|e| w[e] > 0.0));
            }
        }
    }

    #[test]
    fn contraction_rank_consistency() {
        for m in zoo() {
            let g = m.ground();
            for a in g.subsets().step_by(3) {
                let c = m.contract(a).unwrap();
                for s in g.subsets() {
                    assert_eq!(c.rank_of(s), m.rank_of(s.union(a)) - m.rank_of(a));
                    let expect = s.is_disjoint(a) && m.rank_of(s.union(a)) == s.len() + m.rank_of(a);
                    assert_eq!(c.independent(s), expect);
                }
            }
        }
    }

    #[test]
    fn graphic_agrees_with_cycle_search() {
        let edges = vec![(0, 1), (0, 1), (1, 2), (2, 0), (2, 2), (3, 4), (4, 5), (5, 3), (1, 4)];
        let m = Matroid::graphic(6, edges.clone()).unwrap();
        for s in m.ground().subsets() {
            assert_eq!(m.independent(s), acyclic(6, &edges, s), "{s}");
        }
    }
}
