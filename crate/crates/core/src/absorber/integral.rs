//! The integral absorber 𝒬₁: a clique family whose integer span reaches every
//! divisible vector supported in R, with edge multiplicity kept small.

use super::chain::{solve_q0prime, ChainTrace, RandomFragment};
use super::colour::ColorSystem;
use super::flatten::{flatten, FlattenResult};
use super::generate::{default_k0, default_saturation, generating_cliques, sample_host};
use super::{check_packable, max_multiplicity, AbsorberConfig, EdgeSet, IntegralMode};
use crate::decode::integral_decompose;
use crate::error::{Error, Result};
use crate::hypercore::{boundary_qr, for_each_subset, subsets, CliqueVec, IntVec, Params, RGraph, VSet};
use crate::omega::omega_cached;
use crate::rng::Rng;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralAbsorber {
    pub mode: IntegralMode,
    pub q: usize,
    pub r: usize,
    pub n: u32,
    pub q1: Vec<VSet>,
    /// The vertex set W carrying 𝒬₁ before flattening (local mode).
    pub support: VSet,
    pub flatten: Option<FlattenResult>,
    /// Maximum edge multiplicity of 𝒬₁.
    pub multiplicity: usize,
    /// Not persisted: a reloaded book cannot replay the full solve chain.
    #[serde(skip)]
    pub random: Option<Box<RandomFragment>>,
    /// Effective thresholds and counts of the run.
    pub effective: serde_json::Value,
}

/// Largest multiplicity m with 1 + m·⌊N/2⌋ < 2N, so that rounding to
/// (−N/2, N/2] leaves J_e ∈ {−N, 0, N}.
pub fn rounding_multiplicity_limit(big_n: i64) -> usize {
    let half = big_n / 2;
    if half == 0 {
        return usize::MAX;
    }
    ((2 * big_n - 2) / half) as usize
}

impl IntegralAbsorber {
    /// Φ ∈ Z^{𝒬₁} with ∂Φ = J.
    pub fn solve(&self, j: &IntVec, rng: &mut Rng, budget: u64, attempts: usize) -> Result<(CliqueVec, Option<ChainTrace>)> {
        let (phi0, trace) = match self.mode {
            IntegralMode::Local if self.support.is_empty() => {
                if !j.is_empty() {
                    return Err(Error::stage("integral", "J is nonzero but the absorber support is empty"));
                }
                (CliqueVec::new(), None)
            }
            IntegralMode::Local => {
                let pos: BTreeMap<u32, u32> =
                    self.support.iter().enumerate().map(|(i, &v)| (v, i as u32 + 1)).collect();
                if let Some(v) = j.vertices().iter().find(|v| !pos.contains_key(v)) {
                    return Err(Error::stage("integral", format!("vertex {v} is outside the absorber support")));
                }
                let local = integral_decompose(&j.relabel(|v| pos[&v]), self.q, self.r, self.support.len() as u32)
                    .map_err(|e| Error::stage("integral", e.to_string()))?;
                (local.relabel(|v| self.support[v as usize - 1]), None)
            }
            IntegralMode::Random => {
                let frag = self
                    .random
                    .as_ref()
                    .ok_or_else(|| Error::stage("integral", "random-host fragment missing"))?;
                let (phi, tr) = solve_q0prime(frag, j, rng, budget, attempts)?;
                (phi, Some(tr))
            }
        };
        let phi = match &self.flatten {
            Some(f) => f.expand(&phi0),
            None => phi0,
        };
        let members: HashSet<&VSet> = self.q1.iter().collect();
        if let Some(c) = phi.keys().find(|c| !members.contains(c)) {
            return Err(Error::stage("integral", format!("solution uses {c:?} outside Q1")));
        }
        if boundary_qr(&phi, self.q, self.r)? != *j {
            return Err(Error::stage("integral", "boundary of the solution differs from J"));
        }
        Ok((phi, trace))
    }
}

/// Builds 𝒬₁ for R inside K^r_n with the configured mode. `used` collects
/// every edge the construction occupies.
pub fn integral_absorber(
    r_graph: &RGraph,
    p: &Params,
    cfg: &AbsorberConfig,
    used: &mut EdgeSet,
    rng: &mut Rng,
) -> Result<IntegralAbsorber> {
    check_packable(p.n, p.r)?;
    if r_graph.r != p.r {
        return Err(Error::Config(format!("R is {}-uniform, expected {}", r_graph.r, p.r)));
    }
    if let Some(e) = r_graph.edges().find(|e| e.last().is_some_and(|&v| v > p.n)) {
        return Err(Error::Config(format!("edge {e:?} of R is outside [{}]", p.n)));
    }
    for e in r_graph.edges() {
        used.insert(e);
    }
    match cfg.mode {
        IntegralMode::Local => local(r_graph, p, cfg, used, rng),
        IntegralMode::Random => random_host(r_graph, p, cfg, used, rng),
    }
}

fn finish_flatten(
    q0prime: Vec<VSet>,
    p: &Params,
    cfg: &AbsorberConfig,
    used: &mut EdgeSet,
    rng: &mut Rng,
) -> Result<(Vec<VSet>, Option<FlattenResult>, usize)> {
    let limit = rounding_multiplicity_limit(p.big_n as i64);
    let m0 = max_multiplicity(&q0prime, p.r);
    let (q1, fl) = if m0 <= limit.min(3) {
        (q0prime, None)
    } else {
        let f = flatten(&q0prime, p.q, p.r, p.n, used, rng, cfg.embed_budget, cfg.attempts)?;
        (f.q1.clone(), Some(f))
    };
    let m = max_multiplicity(&q1, p.r);
    if m > limit {
        return Err(Error::stage(
            "flatten",
            format!("multiplicity {m} exceeds {limit}, the most that rounding modulo N = {} tolerates", p.big_n),
        ));
    }
    Ok((q1, fl, m))
}

fn local(r_graph: &RGraph, p: &Params, cfg: &AbsorberConfig, used: &mut EdgeSet, rng: &mut Rng) -> Result<IntegralAbsorber> {
    let mut w: BTreeSet<u32> = r_graph.edges().flat_map(|e| e.iter().copied()).collect();
    if w.is_empty() {
        return Ok(IntegralAbsorber {
            mode: IntegralMode::Local,
            q: p.q,
            r: p.r,
            n: p.n,
            q1: Vec::new(),
            support: VSet::new(),
            flatten: None,
            multiplicity: 0,
            random: None,
            effective: serde_json::json!({ "support": 0 }),
        });
    }
    let mut pad = 1;
    while w.len() < p.q + p.r {
        if pad > p.n {
            return Err(Error::Config(format!("n = {} is below q + r", p.n)));
        }
        w.insert(pad);
        pad += 1;
    }
    let support: VSet = w.into_iter().collect();
    let q0 = subsets(&support, p.q);
    for c in &q0 {
        used.insert_clique(c, p.r);
    }
    let (q1, fl, m) = finish_flatten(q0.clone(), p, cfg, used, rng)?;
    Ok(IntegralAbsorber {
        mode: IntegralMode::Local,
        q: p.q,
        r: p.r,
        n: p.n,
        effective: serde_json::json!({
            "support": support.len(),
            "initial_cliques": q0.len(),
            "initial_multiplicity": max_multiplicity(&q0, p.r),
        }),
        q1,
        support,
        flatten: fl,
        multiplicity: m,
        random: None,
    })
}

fn random_host(r_graph: &RGraph, p: &Params, cfg: &AbsorberConfig, used: &mut EdgeSet, rng: &mut Rng) -> Result<IntegralAbsorber> {
    let (q, r, n) = (p.q, p.r, p.n);
    let alpha = p.alpha_f64();
    let rate = cfg.sample_rate.unwrap_or((n as f64).powf(-alpha));
    let sat = cfg.saturation.unwrap_or_else(|| default_saturation(n, alpha));
    let k0 = cfg.k0_threshold.unwrap_or_else(|| default_k0(n, q, r, alpha));
    let omega = omega_cached(q, r);
    let u_default = (20.0 * (q * q) as f64 / alpha * omega.graph.len() as f64).ceil();
    let u = match cfg.colours {
        Some(u) => u,
        None => u_default.min(usize::MAX as f64) as usize,
    };
    let mut effective = serde_json::json!({
        "sample_rate": rate,
        "saturation_threshold": sat,
        "k0_threshold": k0,
        "colours": u,
        "colours_default": u_default,
        "relaxed": cfg.relaxed,
    });
    if (u as f64) * (n as f64) > cfg.colour_cap as f64 {
        return Err(Error::stage(
            "colours",
            format!("{u} permutations of [{n}] exceed the cap of {} entries", cfg.colour_cap),
        ));
    }
    let k = sample_host(n, r, rate, r_graph, rng);
    let report = generating_cliques(&k, q, p.big_n, sat, k0)?;
    effective["host_edges"] = k.len().into();
    effective["good_edges"] = report.kstar.len().into();
    effective["generators"] = report.gset.len().into();
    effective["saturated_cliques"] = report.saturated.len().into();
    let cs = ColorSystem::new(n, u, &report, rng);
    let mut q0: BTreeSet<VSet> = BTreeSet::new();
    for i in 0..u {
        for c in &report.gset {
            q0.insert(cs.image(i, c));
        }
    }
    let q0: Vec<VSet> = q0.into_iter().collect();
    let mut q0_edges: BTreeSet<VSet> = BTreeSet::new();
    for c in &q0 {
        used.insert_clique(c, r);
        for_each_subset(c, r, |e| {
            q0_edges.insert(VSet::from_slice(e));
        });
    }
    effective["q0"] = q0.len().into();
    let mut decoders = BTreeMap::new();
    let mut q0prime: BTreeSet<VSet> = q0.iter().cloned().collect();
    for e in &q0_edges {
        let z = random_superset(e, q + r, n, &[], used, cfg.relaxed, cfg.attempts, rng, |_| true)
            .ok_or_else(|| Error::stage("decoders", format!("no decoder set for edge {e:?}")))?;
        if !cfg.relaxed {
            for f in subsets(&z, r) {
                used.insert(&f);
            }
        }
        q0prime.extend(subsets(&z, q));
        decoders.insert(e.clone(), z);
    }
    let mut focusing = BTreeMap::new();
    for e in r_graph.edges() {
        let qe = random_superset(e, q, n, &[], used, cfg.relaxed, cfg.attempts, rng, |c| {
            let mut ok = true;
            for_each_subset(c, r, |f| ok &= f == e.as_slice() || cs.is_coloured(f));
            ok
        })
        .ok_or_else(|| Error::stage("focusing", format!("no focusing clique for edge {e:?}")))?;
        if !cfg.relaxed {
            used.insert_clique(&qe, r);
        }
        q0prime.insert(qe.clone());
        focusing.insert(e.clone(), qe);
    }
    let q0prime: Vec<VSet> = q0prime.into_iter().collect();
    effective["q0prime"] = q0prime.len().into();
    let frag = RandomFragment {
        q,
        r,
        n,
        report,
        colours: cs,
        q0,
        decoders,
        focusing,
        q0prime: q0prime.clone(),
    };
    let (q1, fl, m) = if cfg.relaxed {
        let m = max_multiplicity(&q0prime, r);
        (q0prime, None, m)
    } else {
        finish_flatten(q0prime, p, cfg, used, rng)?
    };
    Ok(IntegralAbsorber {
        mode: IntegralMode::Random,
        q,
        r,
        n,
        q1,
        support: VSet::new(),
        flatten: fl,
        multiplicity: m,
        random: Some(Box::new(frag)),
        effective,
    })
}

/// A random s-set containing `e` and avoiding `avoid`, whose r-subsets other
/// than `e` are unused (unless relaxed) and which passes `accept`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn random_superset(
    e: &[u32],
    s: usize,
    n: u32,
    avoid: &[u32],
    used: &EdgeSet,
    relaxed: bool,
    attempts: usize,
    rng: &mut Rng,
    accept: impl Fn(&[u32]) -> bool,
) -> Option<VSet> {
    if (n as usize) < s {
        return None;
    }
    let r = e.len();
    for _ in 0..attempts {
        let mut c: VSet = VSet::from_slice(e);
        while c.len() < s {
            let v = rng.random_range(1..=n);
            if !c.contains(&v) && !avoid.contains(&v) {
                c.push(v);
            }
        }
        c.sort_unstable();
        if (relaxed || used.clique_free(&c, r, e)) && accept(&c) {
            return Some(c);
        }
    }
    None
}
