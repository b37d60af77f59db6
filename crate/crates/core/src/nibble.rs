//! Random clique removal: repeatedly pick a uniformly random clique of H
//! that is edge-disjoint from all earlier picks.

use crate::hypercore::{binom, for_each_subset, RGraph, VSet};
use crate::rng;
use crate::{Error, Result};
use rand::Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stop {
    /// Stop after the horizon step i* of the given model.
    Horizon(u64),
    Exhaustion,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub i: u64,
    pub h_size: u64,
    pub he_min: u64,
    pub he_max: u64,
    /// Largest (r−1)-degree of the current leave.
    pub leave_shadow_max: u64,
    /// max_f | |G^i(f)| − p|G(f)| |.
    pub leave_shadow_dev: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RemovalRun {
    pub n: u32,
    pub q: usize,
    pub r: usize,
    pub seed: u64,
    pub g_size: usize,
    pub h_size: usize,
    pub selected: Vec<VSet>,
    #[serde(skip)]
    pub leave: RGraph,
    pub samples: Vec<TrajectorySample>,
    pub cadence: u64,
}

impl RemovalRun {
    pub fn leave_fraction(&self) -> f64 {
        if self.g_size == 0 {
            0.0
        } else {
            self.leave.len() as f64 / self.g_size as f64
        }
    }
}

/// Sampling cadence ⌈|G|/(100k)⌉.
pub fn cadence(g_size: usize, k: usize) -> u64 {
    (g_size.div_ceil(100 * k)).max(1) as u64
}

/// Runs the removal process on G with clique family H (each clique a sorted
/// q-set whose r-subsets lie in G).
pub fn removal_process(g: &RGraph, q: usize, h: &[VSet], stop: Stop, seed: u64) -> Result<RemovalRun> {
    let r = g.r;
    let k = binom(q as u64, r as u64) as usize;
    let edges: Vec<VSet> = g.edges().cloned().collect();
    let eid: HashMap<&[u32], u32> = edges.iter().enumerate().map(|(i, e)| (e.as_slice(), i as u32)).collect();

    let mut clique_edges: Vec<u32> = Vec::with_capacity(h.len() * k);
    let mut he: Vec<u64> = vec![0; edges.len()];
    for c in h {
        if c.len() != q {
            return Err(Error::Malformed(format!("clique {c:?} does not have {q} vertices")));
        }
        let start = clique_edges.len();
        let mut bad = None;
        for_each_subset(c, r, |e| match eid.get(e) {
            Some(&id) => clique_edges.push(id),
            None => bad = Some(VSet::from_slice(e)),
        });
        if let Some(e) = bad {
            return Err(Error::Malformed(format!("clique {c:?} uses non-edge {e:?}")));
        }
        for &id in &clique_edges[start..] {
            he[id as usize] += 1;
        }
    }

    // Per-edge clique lists in CSR form.
    let mut offs = vec![0u32; edges.len() + 1];
    for &id in &clique_edges {
        offs[id as usize + 1] += 1;
    }
    for i in 0..edges.len() {
        offs[i + 1] += offs[i];
    }
    let mut fill = offs.clone();
    let mut by_edge = vec![0u32; clique_edges.len()];
    for (ci, chunk) in clique_edges.chunks(k).enumerate() {
        for &id in chunk {
            by_edge[fill[id as usize] as usize] = ci as u32;
            fill[id as usize] += 1;
        }
    }

    // Alive cliques as a dense array with positions for O(1) removal.
    let mut alive: Vec<u32> = (0..h.len() as u32).collect();
    let mut pos: Vec<u32> = (0..h.len() as u32).collect();
    const DEAD: u32 = u32::MAX;
    let mut covered = vec![false; edges.len()];

    // Shadow degrees of G and of the leave.
    let mut shadow_ids: HashMap<VSet, u32> = HashMap::new();
    let mut edge_shadows: Vec<u32> = Vec::with_capacity(edges.len() * r);
    for e in &edges {
        for_each_subset(e, r - 1, |f| {
            let next = shadow_ids.len() as u32;
            let id = *shadow_ids.entry(VSet::from_slice(f)).or_insert(next);
            edge_shadows.push(id);
        });
    }
    let mut g_deg = vec![0u64; shadow_ids.len()];
    for &s in &edge_shadows {
        g_deg[s as usize] += 1;
    }
    let mut l_deg = g_deg.clone();

    let cad = cadence(edges.len(), k);
    let limit = match stop {
        Stop::Horizon(i) => i,
        Stop::Exhaustion => u64::MAX,
    };
    let mut rng = rng::stream(seed, "nibble");
    let mut selected = Vec::new();
    let mut samples = Vec::new();
    let g_size = edges.len() as f64;

    let sample = |i: u64, alive: &[u32], he: &[u64], covered: &[bool], l_deg: &[u64]| {
        let p = 1.0 - (k as f64) * (i as f64) / g_size;
        let mut he_min = u64::MAX;
        let mut he_max = 0;
        for (id, &c) in he.iter().enumerate() {
            if !covered[id] {
                he_min = he_min.min(c);
                he_max = he_max.max(c);
            }
        }
        if he_min == u64::MAX {
            he_min = 0;
        }
        let mut dev: f64 = 0.0;
        for (&l, &g0) in l_deg.iter().zip(g_deg.iter()) {
            dev = dev.max((l as f64 - p * g0 as f64).abs());
        }
        TrajectorySample {
            i,
            h_size: alive.len() as u64,
            he_min,
            he_max,
            leave_shadow_max: l_deg.iter().copied().max().unwrap_or(0),
            leave_shadow_dev: dev,
        }
    };

    let mut i: u64 = 0;
    loop {
        if i % cad == 0 {
            samples.push(sample(i, &alive, &he, &covered, &l_deg));
        }
        if alive.is_empty() || i >= limit {
            break;
        }
        let ci = alive[rng.random_range(0..alive.len())] as usize;
        selected.push(h[ci].clone());
        for &id in &clique_edges[ci * k..(ci + 1) * k] {
            covered[id as usize] = true;
            for s in &edge_shadows[id as usize * r..(id as usize + 1) * r] {
                l_deg[*s as usize] -= 1;
            }
        }
        for &id in &clique_edges[ci * k..(ci + 1) * k] {
            for &other in &by_edge[offs[id as usize] as usize..offs[id as usize + 1] as usize] {
                let p = pos[other as usize];
                if p == DEAD {
                    continue;
                }
                let last = *alive.last().expect("alive nonempty");
                alive[p as usize] = last;
                pos[last as usize] = p;
                alive.pop();
                pos[other as usize] = DEAD;
                let o = other as usize;
                for &e2 in &clique_edges[o * k..(o + 1) * k] {
                    he[e2 as usize] -= 1;
                }
            }
        }
        i += 1;
    }
    if samples.last().map(|s| s.i) != Some(i) {
        samples.push(sample(i, &alive, &he, &covered, &l_deg));
    }

    let leave = RGraph::from_edges(
        g.n,
        r,
        edges.iter().zip(covered.iter()).filter(|(_, &c)| !c).map(|(e, _)| e.clone()),
    )?;
    Ok(RemovalRun {
        n: g.n,
        q,
        r,
        seed,
        g_size: edges.len(),
        h_size: h.len(),
        selected,
        leave,
        samples,
        cadence: cad,
    })
}

/// Checks that the selection is pairwise edge-disjoint, drawn from H, and
/// that the leave equals G minus the covered edges. Returns a description of
/// the first failure.
pub fn check_run(g: &RGraph, h: &[VSet], run: &RemovalRun) -> Option<String> {
    let hs: std::collections::HashSet<&VSet> = h.iter().collect();
    let mut used = RGraph::new(g.n, g.r);
    for c in &run.selected {
        if !hs.contains(c) {
            return Some(format!("{c:?} not in H"));
        }
        let mut clash = None;
        for_each_subset(c, g.r, |e| {
            if clash.is_none() && !matches!(used.insert(VSet::from_slice(e)), Ok(true)) {
                clash = Some(VSet::from_slice(e));
            }
        });
        if let Some(e) = clash {
            return Some(format!("edge {e:?} covered twice"));
        }
    }
    if g.minus(&used) != run.leave {
        return Some("leave differs from G minus selected edges".into());
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryModel {
    pub n: u32,
    pub q: usize,
    pub r: usize,
    pub k: usize,
    pub g_size: usize,
    pub phi: f64,
    pub theta: f64,
    pub d: f64,
    pub eps: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Expectation {
    pub p: f64,
    pub h: f64,
    pub e_h: f64,
    pub he: f64,
    pub e_d: f64,
    /// Multiplier for |G(f)| in the leave-shadow prediction.
    pub shadow_factor: f64,
    pub e_f: f64,
}

impl TrajectoryModel {
    pub fn new(n: u32, q: usize, r: usize, g_size: usize, theta: f64, eps: f64) -> Self {
        let k = binom(q as u64, r as u64) as usize;
        let nf = n as f64;
        let b = nf.powf(-eps);
        TrajectoryModel {
            n,
            q,
            r,
            k,
            g_size,
            phi: g_size as f64 / binom(n as u64, r as u64) as f64,
            theta,
            d: theta * binom(n as u64, (q - r) as u64) as f64,
            eps,
            b,
            c: 2.0 / 3.0,
        }
    }

    /// θ taken as the mean of |H(e)| over G, divided by C(n, q−r).
    pub fn fitted(g: &RGraph, q: usize, h_len: usize, eps: f64) -> Self {
        let k = binom(q as u64, g.r as u64) as f64;
        let mean = if g.is_empty() { 0.0 } else { k * h_len as f64 / g.len() as f64 };
        let theta = mean / binom(g.n as u64, (q - g.r) as u64) as f64;
        Self::new(g.n, q, g.r, g.len(), theta, eps)
    }

    pub fn horizon(&self) -> u64 {
        let x = (self.n as f64).powf(-self.eps / (3.0 * self.k as f64));
        ((1.0 - x) * self.g_size as f64 / self.k as f64).floor() as u64
    }

    pub fn p(&self, i: u64) -> f64 {
        1.0 - self.k as f64 * i as f64 / self.g_size as f64
    }

    pub fn e_h(&self, p: f64) -> f64 {
        let l = 1.0 - self.k as f64 * p.ln();
        6.0 * l * l * self.b * self.d * self.g_size as f64
    }

    pub fn e_d(&self, p: f64) -> f64 {
        2.0 * (1.0 - self.k as f64 * p.ln()) * self.b.powf(self.c) * self.d
    }

    pub fn e_f(&self) -> f64 {
        2.0 * self.b.powf(self.c / 2.0) * self.n as f64
    }

    pub fn expected(&self, i: u64) -> Result<Expectation> {
        let hz = self.horizon();
        if i > hz {
            return Err(Error::Config(format!("step {i} is beyond the horizon {hz}")));
        }
        let p = self.p(i);
        let k = self.k as i32;
        Ok(Expectation {
            p,
            h: p.powi(k) * self.d * self.g_size as f64 / self.k as f64,
            e_h: self.e_h(p),
            he: p.powi(k - 1) * self.d,
            e_d: self.e_d(p),
            shadow_factor: p,
            e_f: self.e_f(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Exit {
    pub i: u64,
    pub quantity: String,
    pub observed: f64,
    pub predicted: f64,
    pub envelope: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub checked: usize,
    pub horizon: u64,
    pub first_exit: Option<Exit>,
}

/// First sampled step at or before the horizon where an observed quantity
/// leaves its envelope.
pub fn trajectory_audit(run: &RemovalRun, m: &TrajectoryModel) -> AuditReport {
    let hz = m.horizon();
    let mut checked = 0;
    for s in &run.samples {
        let Ok(x) = m.expected(s.i) else { continue };
        checked += 1;
        let exit = |quantity: &str, observed: f64, predicted: f64, envelope: f64| {
            ((observed - predicted).abs() > envelope).then(|| Exit {
                i: s.i,
                quantity: quantity.into(),
                observed,
                predicted,
                envelope,
            })
        };
        let found = exit("H_size", s.h_size as f64, x.h, x.e_h)
            .or_else(|| exit("He_min", s.he_min as f64, x.he, x.e_d))
            .or_else(|| exit("He_max", s.he_max as f64, x.he, x.e_d))
            .or_else(|| (s.leave_shadow_dev > x.e_f).then(|| Exit {
                i: s.i,
                quantity: "leave_shadow".into(),
                observed: s.leave_shadow_dev,
                predicted: 0.0,
                envelope: x.e_f,
            }));
        if found.is_some() {
            return AuditReport { checked, horizon: hz, first_exit: found };
        }
    }
    AuditReport { checked, horizon: hz, first_exit: None }
}

/// Trajectory as CSV. Envelope columns are empty past the horizon.
pub fn trajectory_csv(run: &RemovalRun, m: &TrajectoryModel) -> String {
    let mut out = String::from(
        "i,p,H_size,He_min,He_max,leave_shadow_max,H_pred,e_H,He_pred,e_D,e_F\n",
    );
    for s in &run.samples {
        let p = m.p(s.i);
        let _ = write!(
            out,
            "{},{:.6},{},{},{},{}",
            s.i, p, s.h_size, s.he_min, s.he_max, s.leave_shadow_max
        );
        match m.expected(s.i) {
            Ok(x) => {
                let _ = writeln!(out, ",{:.3},{:.3},{:.3},{:.3},{:.3}", x.h, x.e_h, x.he, x.e_d, x.e_f);
            }
            Err(_) => out.push_str(",,,,,\n"),
        }
    }
    out
}
