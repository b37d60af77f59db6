//! Regularity boosting: exact rational clique weights p_Q = p'_Q + p''_Q with
//! Σ_{Q ∋ e} p_Q = 1/2 for every edge, corrected through local decoders, and
//! independent sampling of a clique set H.

use crate::decode::{decoder_qr, DecoderTable};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hypercore::{binom, for_each_subset, ratio_to_f64, set_union, CliqueIndex, Params, RGraph, VSet};
use crate::rng;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug)]
pub struct BoostWeights {
    pub g: RGraph,
    pub q: usize,
    pub r: usize,
    /// C(n, q−r).
    pub binom_nqr: u128,
    /// Number of q-cliques of G containing e.
    pub clique_count: HashMap<VSet, u64>,
    /// |Z_e|: number of (q+r)-cliques of G containing e.
    pub z_size: HashMap<VSet, u64>,
    idx: CliqueIndex,
    dec: DecoderTable,
}

impl BoostWeights {
    /// p'_Q = 1 / (2·C(n, q−r)).
    pub fn p_prime(&self) -> BigRational {
        BigRational::new(1.into(), BigInt::from(2 * self.binom_nqr))
    }

    /// c_e = 1/2 − cnt_e·p'.
    pub fn c_e(&self, e: &[u32]) -> BigRational {
        let cnt = self.clique_count[e];
        BigRational::new(BigInt::from(self.binom_nqr) - BigInt::from(cnt), BigInt::from(2 * self.binom_nqr))
    }

    pub fn index(&self) -> &CliqueIndex {
        &self.idx
    }

    /// p''_Q = Σ_e Σ_{Q ⊆ Z ∈ Z_e} c_e Ψ^{Z,e}_Q / (N|Z_e|). With Z_e all
    /// (q+r)-cliques containing e, the inner sum is x(|e \ Q|)·m(Q ∪ e), where
    /// m(S) counts (q+r)-cliques containing S.
    pub fn p_double_prime(&self, q_clique: &[u32]) -> BigRational {
        // numerators grouped by |Z_e|, over the common factor 2·C(n,q−r)·N
        let mut groups: BTreeMap<u64, i128> = BTreeMap::new();
        let s = self.q + self.r;
        let cand = self.idx.candidates(q_clique);
        let outside: Vec<u32> = cand.iter().map(|x| x as u32).collect();
        let mut visit = |e: &[u32], t: usize| {
            if !self.g.contains(e) {
                return;
            }
            let u = set_union(q_clique, e);
            let m = self.idx.count_cliques_containing(&u, s) as i128;
            if m == 0 {
                return;
            }
            let num = (self.binom_nqr as i128 - self.clique_count[e] as i128) * self.dec.coeff[t] as i128 * m;
            *groups.entry(self.z_size[e]).or_insert(0) += num;
        };
        let mut e: Vec<u32> = Vec::with_capacity(self.r);
        for t in 0..=self.r {
            for_each_subset(q_clique, self.r - t, |inner| {
                for_each_subset(&outside, t, |outer| {
                    e.clear();
                    e.extend_from_slice(inner);
                    e.extend_from_slice(outer);
                    e.sort_unstable();
                    visit(&e, t);
                });
            });
        }
        let base = BigInt::from(2 * self.binom_nqr) * BigInt::from(self.dec.big_n);
        let mut out = BigRational::zero();
        for (z, num) in groups {
            if num != 0 {
                out += BigRational::new(BigInt::from(num), &base * BigInt::from(z));
            }
        }
        out
    }

    pub fn p(&self, q_clique: &[u32]) -> BigRational {
        self.p_prime() + self.p_double_prime(q_clique)
    }

    /// The drawing probability C(n, q−r)·p_Q (so that E|H(e)| = C(n, q−r)/2).
    pub fn draw_probability(&self, q_clique: &[u32]) -> BigRational {
        self.p(q_clique) * BigRational::from_integer(BigInt::from(self.binom_nqr))
    }

    /// Σ_{Q ∋ e} p_Q over q-cliques of G.
    pub fn half_sum(&self, e: &[u32]) -> BigRational {
        let mut s = BigRational::zero();
        self.idx.for_each_clique_containing(e, self.q, |c| s += self.p(c));
        s
    }
}

/// Precomputes clique counts and Z-family sizes for every edge of G.
pub fn boost_weights(g: &RGraph, p: &Params, exec: Exec) -> Result<BoostWeights> {
    let idx = CliqueIndex::new(g);
    let edges: Vec<VSet> = g.edges().cloned().collect();
    let counts: Vec<(u64, u64)> = exec.map_slice(&edges, |e| {
        (
            idx.count_cliques_containing(e, p.q) as u64,
            idx.count_cliques_containing(e, p.q + p.r) as u64,
        )
    });
    let mut clique_count = HashMap::with_capacity(edges.len());
    let mut z_size = HashMap::with_capacity(edges.len());
    for (e, (c, z)) in edges.iter().zip(counts) {
        if z == 0 {
            return Err(Error::stage("boost", format!("edge {e:?} lies in no {}-clique of G", p.q + p.r)));
        }
        clique_count.insert(e.clone(), c);
        z_size.insert(e.clone(), z);
    }
    Ok(BoostWeights {
        g: g.clone(),
        q: p.q,
        r: p.r,
        binom_nqr: binom(g.n as u64, (p.q - p.r) as u64),
        clique_count,
        z_size,
        idx,
        dec: decoder_qr(p.q, p.r),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub cliques: usize,
    pub min_draw: f64,
    pub max_draw: f64,
    pub outside_unit: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub target: f64,
    pub tolerance: f64,
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    pub within: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoostSample {
    pub h: Vec<VSet>,
    pub positivity: PositivityReport,
    pub degrees: DegreeReport,
}

/// Draw probabilities of all q-cliques of G, in lexicographic clique order.
pub fn draw_table(w: &BoostWeights, exec: Exec) -> (Vec<VSet>, Vec<f64>) {
    let cliques = w.idx.cliques(w.q);
    let probs = exec.map_slice(&cliques, |c| ratio_to_f64(&w.draw_probability(c)));
    (cliques, probs)
}

pub fn positivity(cliques: usize, probs: &[f64]) -> PositivityReport {
    let outside = probs.iter().filter(|&&x| !(0.0..=1.0).contains(&x)).count();
    PositivityReport {
        cliques,
        min_draw: probs.iter().copied().fold(f64::INFINITY, f64::min),
        max_draw: probs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        outside_unit: outside,
        ok: outside == 0,
    }
}

const DRAW_CHUNK: usize = 4096;

/// Independent selection of each clique with its draw probability.
pub fn sample_h(w: &BoostWeights, seed: u64, exec: Exec) -> Result<BoostSample> {
    let (cliques, probs) = draw_table(w, exec);
    let pos = positivity(cliques.len(), &probs);
    if !pos.ok {
        return Err(Error::stage(
            "boost",
            format!("{} clique probabilities lie outside [0,1]", pos.outside_unit),
        ));
    }
    sample_with(w, &cliques, &probs, pos, seed, exec)
}

/// Sampling with a precomputed table (the probabilities are used as given).
pub fn sample_with(
    w: &BoostWeights,
    cliques: &[VSet],
    probs: &[f64],
    positivity: PositivityReport,
    seed: u64,
    exec: Exec,
) -> Result<BoostSample> {
    let chunks = cliques.len().div_ceil(DRAW_CHUNK);
    let picked: Vec<Vec<VSet>> = exec.map(chunks, |k| {
        let mut rg = rng::stream(seed, &format!("boost/{k}"));
        let lo = k * DRAW_CHUNK;
        let hi = (lo + DRAW_CHUNK).min(cliques.len());
        (lo..hi)
            .filter(|&i| rg.random_bool(probs[i].clamp(0.0, 1.0)))
            .map(|i| cliques[i].clone())
            .collect()
    });
    let h: Vec<VSet> = picked.into_iter().flatten().collect();
    let degrees = degree_report(w, &h);
    Ok(BoostSample { h, positivity, degrees })
}

/// |H(e)| against (1/2 ± n^{−1/3})·C(n, q−r).
pub fn degree_report(w: &BoostWeights, h: &[VSet]) -> DegreeReport {
    let mut deg: HashMap<VSet, u64> = w.g.edges().map(|e| (e.clone(), 0)).collect();
    for c in h {
        for_each_subset(c, w.r, |e| {
            if let Some(d) = deg.get_mut(e) {
                *d += 1;
            }
        });
    }
    let n = w.g.n as f64;
    let b = w.binom_nqr.to_f64().unwrap_or(f64::MAX);
    let target = 0.5 * b;
    let tolerance = n.powf(-1.0 / 3.0) * b;
    let vals: Vec<u64> = deg.values().copied().collect();
    DegreeReport {
        target,
        tolerance,
        min: vals.iter().copied().min().unwrap_or(0),
        max: vals.iter().copied().max().unwrap_or(0),
        mean: if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<u64>() as f64 / vals.len() as f64
        },
        within: vals.iter().filter(|&&d| (d as f64 - target).abs() <= tolerance).count(),
        edges: vals.len(),
    }
}
