use super::{binom_big, for_each_subset, subsets, CliqueIndex, IntVec, RGraph, VSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundedReport {
    pub ok: bool,
    /// The (r−1)-set of maximal weighted degree and that degree.
    pub witness: VSet,
    pub max_degree: i64,
}

/// Checks that Σ{|v_e| : f ⊆ e} < θ·n for every (r−1)-set f, returning the
/// maximizing (r−1)-set either way.
pub fn bounded_check(v: &IntVec, theta: &BigRational, n: u32, r: usize) -> BoundedReport {
    let mut deg: BTreeMap<VSet, i64> = BTreeMap::new();
    for (e, x) in v.iter() {
        for_each_subset(e, r - 1, |f| {
            *deg.entry(VSet::from_slice(f)).or_insert(0) += x.abs();
        });
    }
    let (witness, max_degree) = deg
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(f, &d)| (f.clone(), d))
        .unwrap_or_else(|| ((1..r as u32).collect(), 0));
    let bound = theta * BigRational::from_integer(BigInt::from(n));
    let ok = BigRational::from_integer(BigInt::from(max_degree)) < bound;
    BoundedReport {
        ok,
        witness,
        max_degree,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DecompVerdict {
    Ok,
    UncoveredEdge(VSet),
    DoublyCoveredEdge(VSet),
    CliqueNotInGraph(VSet),
}

impl DecompVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, DecompVerdict::Ok)
    }
}

/// Checks that the cliques of `d` are edge-disjoint, lie in `g` and cover it.
pub fn verify_decomposition(g: &RGraph, d: &[VSet]) -> DecompVerdict {
    let mut covered: HashSet<VSet> = HashSet::with_capacity(g.len());
    for c in d {
        let mut edges = Vec::new();
        let mut bad = c.len() < g.r;
        for_each_subset(c, g.r, |e| {
            if !g.contains(e) {
                bad = true;
            }
            edges.push(VSet::from_slice(e));
        });
        if bad {
            return DecompVerdict::CliqueNotInGraph(c.clone());
        }
        for e in edges {
            if !covered.insert(e.clone()) {
                return DecompVerdict::DoublyCoveredEdge(e);
            }
        }
    }
    for e in g.edges() {
        if !covered.contains(e) {
            return DecompVerdict::UncoveredEdge(e.clone());
        }
    }
    DecompVerdict::Ok
}

/// ⋂_{S ∈ A} G(S), where G(S) is the set of vertices x with S ∪ {x} ∈ G.
pub fn common_neighbourhood(idx: &CliqueIndex, a: &[VSet]) -> usize {
    let mut it = a.iter();
    let Some(first) = it.next() else {
        return idx.n() as usize;
    };
    let mut acc = idx.link(first).clone();
    for s in it {
        acc.and_assign(idx.link(s));
    }
    acc.count()
}

/// Relative deviation |X − d^{|A|} n| / (d^{|A|} n) of the common neighbourhood
/// size X from its random-graph prediction. `None` when d = 0 (then X must be 0).
pub fn typicality_deviation(g: &RGraph, idx: &CliqueIndex, a: &[VSet]) -> (usize, Option<BigRational>) {
    let x = common_neighbourhood(idx, a);
    let d = g.density();
    if d.is_zero() {
        return (x, None);
    }
    let expected = num_traits::pow(d, a.len()) * BigRational::from_integer(BigInt::from(g.n));
    let dev = (BigRational::from_integer(BigInt::from(x)) - &expected).abs() / expected;
    (x, Some(dev))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TypicalityMode {
    Exhaustive { families: u64 },
    Sampled { samples: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct TypicalityReport {
    pub ok: bool,
    pub mode: TypicalityMode,
    pub witness: Option<Vec<VSet>>,
    pub witness_size: Option<usize>,
    pub max_deviation: f64,
}

/// Checks (c, h)-typicality: every family A of at most h distinct (r−1)-sets has
/// |⋂ G(S)| = (1 ± c) d^{|A|} n. Exhaustive when the number of families is at most
/// `budget`, otherwise `budget` uniformly sampled families.
pub fn typicality_check(
    g: &RGraph,
    c: &BigRational,
    h: usize,
    budget: u64,
    rng: &mut impl Rng,
) -> TypicalityReport {
    let idx = CliqueIndex::new(g);
    let verts: Vec<u32> = (1..=g.n).collect();
    let shadows = subsets(&verts, g.r - 1);
    let m = shadows.len() as u64;
    let mut families: BigInt = BigInt::zero();
    for a in 1..=h as u64 {
        families += binom_big(m, a);
    }
    let mut report = TypicalityReport {
        ok: true,
        mode: TypicalityMode::Exhaustive { families: 0 },
        witness: None,
        witness_size: None,
        max_deviation: 0.0,
    };
    let check = |fam: &[VSet], report: &mut TypicalityReport| {
        let (x, dev) = typicality_deviation(g, &idx, fam);
        let fail = match &dev {
            None => x != 0,
            Some(dv) => {
                let f = super::ratio_to_f64(dv);
                if f > report.max_deviation {
                    report.max_deviation = f;
                }
                dv > c
            }
        };
        if fail && report.ok {
            report.ok = false;
            report.witness = Some(fam.to_vec());
            report.witness_size = Some(x);
        }
    };
    if families <= BigInt::from(budget) {
        let idxs: Vec<u32> = (0..m as u32).collect();
        let mut count = 0u64;
        for a in 1..=h.min(m as usize) {
            for_each_subset(&idxs, a, |sel| {
                let fam: Vec<VSet> = sel.iter().map(|&i| shadows[i as usize].clone()).collect();
                check(&fam, &mut report);
                count += 1;
            });
        }
        report.mode = TypicalityMode::Exhaustive { families: count };
    } else {
        for _ in 0..budget {
            let a = rng.random_range(1..=h);
            let mut chosen: Vec<usize> = Vec::with_capacity(a);
            while chosen.len() < a {
                let i = rng.random_range(0..m as usize);
                if !chosen.contains(&i) {
                    chosen.push(i);
                }
            }
            chosen.sort_unstable();
            let fam: Vec<VSet> = chosen.iter().map(|&i| shadows[i].clone()).collect();
            check(&fam, &mut report);
        }
        report.mode = TypicalityMode::Sampled { samples: budget };
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::vset;
    use rand::SeedableRng;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn bounded_examples() {
        let k10 = RGraph::complete(10, 2).indicator();
        assert!(bounded_check(&k10, &q(1, 1), 10, 2).ok);
        let rep = bounded_check(&k10, &q(9, 10), 10, 2);
        assert!(!rep.ok);
        assert_eq!(rep.max_degree, 9);
        let v: IntVec = [(vset(&[1, 2]), 3), (vset(&[1, 3]), -2)].into_iter().collect();
        let rep = bounded_check(&v, &q(1, 2), 10, 2);
        assert!(!rep.ok);
        assert_eq!(rep.witness, vset(&[1]));
        assert_eq!(rep.max_degree, 5);
    }

    #[test]
    fn fano_verification() {
        let g = RGraph::complete(7, 2);
        let fano: Vec<VSet> = [[1, 2, 4], [2, 3, 5], [3, 4, 6], [4, 5, 7], [1, 5, 6], [2, 6, 7], [1, 3, 7]]
            .iter()
            .map(|b| vset(b))
            .collect();
        // pair-coverage oracle
        for e in g.edges() {
            let cnt = fano.iter().filter(|b| crate::hypercore::is_subset(e, b)).count();
            assert_eq!(cnt, 1);
        }
        assert_eq!(verify_decomposition(&g, &fano), DecompVerdict::Ok);
        assert!(matches!(verify_decomposition(&g, &fano[1..]), DecompVerdict::UncoveredEdge(_)));
        let mut dup = fano.clone();
        dup.push(fano[0].clone());
        assert!(matches!(verify_decomposition(&g, &dup), DecompVerdict::DoublyCoveredEdge(_)));
        let mut h = g.clone();
        h.remove(&[1, 2]);
        assert_eq!(verify_decomposition(&h, &fano), DecompVerdict::CliqueNotInGraph(vset(&[1, 2, 4])));
    }

    #[test]
    fn typicality_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        // complete graph: common neighbourhood of one vertex is n − 1, d = 1
        let g = RGraph::complete(9, 2);
        let idx = CliqueIndex::new(&g);
        let (x, dev) = typicality_deviation(&g, &idx, &[vset(&[1])]);
        assert_eq!(x, 8);
        assert_eq!(dev.unwrap(), q(1, 9));
        let rep = typicality_check(&g, &q(1, 9), 1, 1000, &mut rng);
        assert!(rep.ok);

        let empty = RGraph::new(8, 2);
        let rep = typicality_check(&empty, &q(1, 100), 2, 10_000, &mut rng);
        assert!(rep.ok);
        assert!(matches!(rep.mode, TypicalityMode::Exhaustive { families: 36 }));

        // K6 minus the perfect matching {12, 34, 56}
        let mut g = RGraph::complete(6, 2);
        for e in [[1, 2], [3, 4], [5, 6]] {
            g.remove(&e);
        }
        let idx = CliqueIndex::new(&g);
        let (x, dev) = typicality_deviation(&g, &idx, &[vset(&[1]), vset(&[2])]);
        assert_eq!(x, 4);
        // |4 − 3.84| / 3.84 = 1/24
        assert_eq!(dev.unwrap(), q(1, 24));
        let rep = typicality_check(&g, &q(1, 100), 2, 5, &mut rng);
        assert!(matches!(rep.mode, TypicalityMode::Sampled { samples: 5 }));
    }
}
