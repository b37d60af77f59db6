//! Generating and saturated cliques of a random host K over Γ = Z/NZ.

use crate::algebra::{Insert, ModSpan};
use crate::error::Result;
use crate::hypercore::{binom, for_each_subset, CliqueIndex, RGraph, VSet};
use crate::rng::Rng;
use rand::Rng as _;
use serde::Serialize;
use std::collections::{HashMap, HashSet};

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorReport {
    pub q: usize,
    pub r: usize,
    pub modulus: u64,
    pub k: RGraph,
    pub kstar: RGraph,
    /// (r−1)-sets in at least `saturation_threshold` generating cliques.
    pub saturated_sets: Vec<VSet>,
    /// Cliques of K containing a saturated (r−1)-set.
    pub saturated: Vec<VSet>,
    /// Generating cliques in insertion order.
    pub gset: Vec<VSet>,
    pub saturation_threshold: f64,
    pub k0_threshold: f64,
    /// |K^r_q(K)|.
    pub cliques: usize,
    /// Coordinates of the span: the edges of K in sorted order.
    #[serde(skip)]
    pub coords: HashMap<VSet, usize>,
    #[serde(skip)]
    pub span: ModSpan,
}

impl GeneratorReport {
    /// ∂Q as a dense vector over the edges of K, or None if Q ⊄ K.
    pub fn boundary_vector(&self, c: &[u32]) -> Option<Vec<i64>> {
        let mut v = vec![0i64; self.coords.len()];
        let mut ok = true;
        for_each_subset(c, self.r, |e| match self.coords.get(e) {
            Some(&i) => v[i] += 1,
            None => ok = false,
        });
        ok.then_some(v)
    }

    /// True when Q contains a saturated (r−1)-set.
    pub fn is_saturated(&self, c: &[u32]) -> bool {
        let sat: HashSet<&VSet> = self.saturated_sets.iter().collect();
        let mut hit = false;
        for_each_subset(c, self.r - 1, |f| hit |= sat.contains(&VSet::from_slice(f)));
        hit
    }

    /// Coefficients over `gset` expressing ∂Q modulo N.
    pub fn express(&self, c: &[u32]) -> Result<Option<Vec<u64>>> {
        match self.boundary_vector(c) {
            Some(v) => self.span.express(&v),
            None => Ok(None),
        }
    }

    /// Completeness audit: every unsaturated clique of K lies in the span,
    /// |Gset| ≤ N|K|, and 𝒮 is exactly the cliques meeting a saturated set.
    pub fn audit(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.gset.len() as u64 > self.modulus * self.k.len() as u64 {
            v.push(format!("|Gset| = {} exceeds N|K|", self.gset.len()));
        }
        let sat: HashSet<&VSet> = self.saturated.iter().collect();
        let idx = CliqueIndex::new(&self.k);
        let mut count = 0;
        idx.for_each_clique(self.q, |c| {
            count += 1;
            let in_s = sat.contains(&VSet::from_slice(c));
            if in_s != self.is_saturated(c) {
                v.push(format!("saturation label of {c:?} is inconsistent"));
            }
            if !in_s {
                let b = self.boundary_vector(c).expect("clique of K");
                if !self.span.member(&b).unwrap_or(false) {
                    v.push(format!("boundary of {c:?} is not generated"));
                }
            }
        });
        if count != self.cliques {
            v.push(format!("clique count {count} differs from recorded {}", self.cliques));
        }
        v
    }
}

/// Default saturation threshold n^{1−0.7α}.
pub fn default_saturation(n: u32, alpha: f64) -> f64 {
    (n as f64).powf(1.0 - 0.7 * alpha)
}

/// Default K₀ threshold n^{0.85α}·n^{−kα}·C(n, q−r).
pub fn default_k0(n: u32, q: usize, r: usize, alpha: f64) -> f64 {
    let k = binom(q as u64, r as u64) as f64;
    let nf = n as f64;
    nf.powf(0.85 * alpha) * nf.powf(-k * alpha) * binom(n as u64, (q - r) as u64) as f64
}

/// K ~ K^r_n(rate) with the edges of `exclude` removed.
pub fn sample_host(n: u32, r: usize, rate: f64, exclude: &RGraph, rng: &mut Rng) -> RGraph {
    let verts: Vec<u32> = (1..=n).collect();
    let mut edges = Vec::new();
    for_each_subset(&verts, r, |e| {
        if rng.random::<f64>() < rate && !exclude.contains(e) {
            edges.push(VSet::from_slice(e));
        }
    });
    RGraph::from_edges(n, r, edges).expect("edges inside [n]")
}

/// The greedy: scan the cliques of K in lexicographic order, adding every
/// unsaturated clique whose boundary is outside the current span. A single
/// pass suffices because rejected cliques stay rejected: the span and the
/// saturation counts only grow.
pub fn generating_cliques(k: &RGraph, q: usize, modulus: u64, saturation: f64, k0: f64) -> Result<GeneratorReport> {
    let r = k.r;
    let coords: HashMap<VSet, usize> = k.edges().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    let mut span = ModSpan::with_tracking(modulus, coords.len().max(1));
    let idx = CliqueIndex::new(k);
    let mut cliques = idx.cliques(q);
    cliques.sort_unstable();
    let mut counts: HashMap<VSet, usize> = HashMap::new();
    let saturated_now = |counts: &HashMap<VSet, usize>, c: &[u32]| {
        let mut hit = false;
        for_each_subset(c, r - 1, |f| hit |= counts.get(f).is_some_and(|&x| x as f64 >= saturation));
        hit
    };
    // a threshold of zero saturates every set before anything is added
    let all_saturated = saturation <= 0.0;
    let mut gset = Vec::new();
    let mut v = vec![0i64; coords.len().max(1)];
    for c in &cliques {
        if all_saturated || saturated_now(&counts, c) {
            continue;
        }
        v.iter_mut().for_each(|x| *x = 0);
        for_each_subset(c, r, |e| v[coords[e]] += 1);
        if span.member(&v)? {
            continue;
        }
        let grew = span.insert(&v)?;
        debug_assert_eq!(grew, Insert::Grew);
        for_each_subset(c, r - 1, |f| *counts.entry(VSet::from_slice(f)).or_insert(0) += 1);
        gset.push(c.clone());
    }
    let mut saturated_sets: Vec<VSet> = if all_saturated {
        let mut all = HashSet::new();
        for c in &cliques {
            for_each_subset(c, r - 1, |f| {
                all.insert(VSet::from_slice(f));
            });
        }
        all.into_iter().collect()
    } else {
        counts
            .iter()
            .filter(|(_, &x)| x as f64 >= saturation)
            .map(|(f, _)| f.clone())
            .collect()
    };
    saturated_sets.sort_unstable();
    let sat: HashSet<&VSet> = saturated_sets.iter().collect();
    let saturated: Vec<VSet> = cliques
        .iter()
        .filter(|c| {
            let mut hit = false;
            for_each_subset(c, r - 1, |f| hit |= sat.contains(&VSet::from_slice(f)));
            hit
        })
        .cloned()
        .collect();
    let mut in_s: HashMap<VSet, usize> = HashMap::new();
    for c in &saturated {
        for_each_subset(c, r, |e| *in_s.entry(VSet::from_slice(e)).or_insert(0) += 1);
    }
    let kstar = RGraph::from_edges(
        k.n,
        r,
        k.edges()
            .filter(|e| !in_s.get(*e).is_some_and(|&x| x as f64 >= k0))
            .cloned(),
    )?;
    Ok(GeneratorReport {
        q,
        r,
        modulus,
        k: k.clone(),
        kstar,
        saturated_sets,
        saturated,
        gset,
        saturation_threshold: saturation,
        k0_threshold: k0,
        cliques: cliques.len(),
        coords,
        span,
    })
}
