//! Rooted embeddings of a template r-graph H into K^r_n.
//!
//! The vertices of F ⊆ V(H) are fixed by an anchor; the remaining vertices are
//! mapped injectively so that every edge of H outside H[F] lands on a usable
//! host edge. Three search modes: exhaustive enumeration with uniform
//! reservoir choice when the extension space is small, rejection sampling,
//! and a randomized vertex-by-vertex greedy fallback.

use crate::error::{Error, Result};
use crate::hypercore::{is_subset, VSet};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

/// Extension spaces up to this size are enumerated exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Random probes per vertex before the greedy scans all candidates.
const PROBES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EmbedMode {
    Exhaustive,
    Rejection,
    Greedy,
}

/// A template H on vertices 1..=nv with rooted set F.
#[derive(Clone, Debug)]
pub struct Template {
    pub nv: u32,
    pub r: usize,
    pub edges: Vec<VSet>,
    pub f: VSet,
    /// Free vertices in assignment order.
    free: Vec<u32>,
    /// For each position in `free`, the non-rooted edges whose last assigned
    /// vertex is that one.
    closing: Vec<Vec<VSet>>,
    /// Non-rooted edges with all vertices in F (none when admissible roots are used).
    rooted_only: Vec<VSet>,
}

impl Template {
    pub fn new(nv: u32, r: usize, edges: Vec<VSet>, f: VSet) -> Self {
        let free: Vec<u32> = (1..=nv).filter(|v| !f.contains(v)).collect();
        let mut pos = vec![usize::MAX; nv as usize + 1];
        for (i, &v) in free.iter().enumerate() {
            pos[v as usize] = i;
        }
        let mut closing = vec![Vec::new(); free.len()];
        let mut rooted_only = Vec::new();
        for e in &edges {
            if is_subset(e, &f) {
                rooted_only.push(e.clone());
                continue;
            }
            let last = e.iter().filter(|v| pos[**v as usize] != usize::MAX).map(|v| pos[*v as usize]).max();
            closing[last.unwrap()].push(e.clone());
        }
        Template {
            nv,
            r,
            edges,
            f,
            free,
            closing,
            rooted_only,
        }
    }

    /// Edges of H[F].
    pub fn rooted_edges(&self) -> &[VSet] {
        &self.rooted_only
    }

    pub fn free_vertices(&self) -> &[u32] {
        &self.free
    }
}

/// Constraints on an extension: `usable` is tested on every non-rooted image
/// edge (sorted); `vertex_ok` on every image of a free vertex; `accept` on the
/// complete map (index v−1 ↦ image).
pub struct Constraints<'a> {
    pub usable: &'a (dyn Fn(&[u32]) -> bool + Sync),
    pub accept: Option<&'a (dyn Fn(&[u32]) -> bool + Sync)>,
    pub vertex_ok: Option<&'a (dyn Fn(u32) -> bool + Sync)>,
}

impl<'a> Constraints<'a> {
    pub fn edges(usable: &'a (dyn Fn(&[u32]) -> bool + Sync)) -> Self {
        Constraints {
            usable,
            accept: None,
            vertex_ok: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extension {
    /// map[v − 1] is the image of template vertex v.
    pub map: Vec<u32>,
    pub mode: EmbedMode,
    /// Number of valid extensions when enumerated exhaustively.
    pub candidates: Option<u64>,
}

impl Extension {
    pub fn image(&self, s: &[u32]) -> VSet {
        let mut o: VSet = s.iter().map(|&v| self.map[v as usize - 1]).collect();
        o.sort_unstable();
        o
    }
}

fn falling(a: u128, b: u128) -> u128 {
    let mut x: u128 = 1;
    for i in 0..b {
        if i >= a {
            return 0;
        }
        x = x.saturating_mul(a - i);
    }
    x
}

struct Search<'a, 't> {
    t: &'t Template,
    c: &'a Constraints<'a>,
    hosts: Vec<u32>,
    map: Vec<u32>,
    used: Vec<bool>,
    buf: Vec<u32>,
}

impl Search<'_, '_> {
    fn edge_ok(&mut self, e: &[u32]) -> bool {
        self.buf.clear();
        self.buf.extend(e.iter().map(|&v| self.map[v as usize - 1]));
        self.buf.sort_unstable();
        (self.c.usable)(&self.buf)
    }

    fn closes_ok(&mut self, i: usize) -> bool {
        let t = self.t;
        t.closing[i].iter().all(|e| self.edge_ok(e))
    }

    fn accepted(&self) -> bool {
        self.c.accept.is_none_or(|a| a(&self.map))
    }

    fn enumerate(&mut self, i: usize, count: &mut u64, pick: &mut Option<Vec<u32>>, rng: &mut impl Rng) {
        if i == self.t.free.len() {
            if self.accepted() {
                *count += 1;
                if rng.random_range(0..*count) == 0 {
                    *pick = Some(self.map.clone());
                }
            }
            return;
        }
        let v = self.t.free[i] as usize - 1;
        for k in 0..self.hosts.len() {
            let x = self.hosts[k];
            if self.used[x as usize] {
                continue;
            }
            self.map[v] = x;
            if self.closes_ok(i) {
                self.used[x as usize] = true;
                self.enumerate(i + 1, count, pick, rng);
                self.used[x as usize] = false;
            }
        }
        self.map[v] = 0;
    }
}

/// Extends `anchor` (pairs template vertex ↦ host vertex covering F) to an
/// embedding of the whole template into K^r_{host_n}.
pub fn extend(
    t: &Template,
    anchor: &[(u32, u32)],
    host_n: u32,
    c: &Constraints,
    rng: &mut impl Rng,
    budget: u64,
) -> Result<Extension> {
    let mut map = vec![0u32; t.nv as usize];
    let mut used = vec![false; host_n as usize + 1];
    for &(v, x) in anchor {
        if v == 0 || v > t.nv || x == 0 || x > host_n {
            return Err(Error::Malformed(format!("anchor pair {v} -> {x} out of range")));
        }
        if map[v as usize - 1] != 0 || used[x as usize] {
            return Err(Error::Malformed("anchor is not injective".into()));
        }
        map[v as usize - 1] = x;
        used[x as usize] = true;
    }
    if let Some(v) = t.f.iter().find(|v| map[**v as usize - 1] == 0) {
        return Err(Error::Malformed(format!("anchor misses rooted vertex {v}")));
    }
    let free_hosts: Vec<u32> = (1..=host_n)
        .filter(|x| !used[*x as usize] && c.vertex_ok.is_none_or(|f| f(*x)))
        .collect();
    let space = falling(free_hosts.len() as u128, t.free.len() as u128);
    if space == 0 {
        return Err(Error::Exhausted(format!(
            "host has {} free vertices, template needs {}",
            free_hosts.len(),
            t.free.len()
        )));
    }
    let mut s = Search {
        t,
        c,
        hosts: free_hosts.clone(),
        map,
        used,
        buf: Vec::with_capacity(t.r),
    };
    if space <= EXHAUSTIVE_LIMIT {
        let mut count = 0;
        let mut pick = None;
        s.enumerate(0, &mut count, &mut pick, rng);
        return match pick {
            Some(map) => Ok(Extension {
                map,
                mode: EmbedMode::Exhaustive,
                candidates: Some(count),
            }),
            None => Err(Error::Exhausted("no extension exists".into())),
        };
    }
    // rejection sampling
    let base = s.map.clone();
    let mut pool = free_hosts.clone();
    for _ in 0..budget {
        let (chosen, _) = pool.partial_shuffle(rng, t.free.len());
        for (i, &x) in chosen.iter().enumerate() {
            s.map[t.free[i] as usize - 1] = x;
        }
        if (0..t.free.len()).all(|i| s.closes_ok(i)) && s.accepted() {
            return Ok(Extension {
                map: s.map,
                mode: EmbedMode::Rejection,
                candidates: None,
            });
        }
    }
    // greedy fallback: uniform among currently valid choices, with restarts.
    // Random probes find a valid image first; a full scan runs only when
    // every probe fails.
    let mut cands: Vec<u32> = Vec::new();
    'restart: for _ in 0..budget.max(1) {
        s.map.clone_from(&base);
        for x in &free_hosts {
            s.used[*x as usize] = false;
        }
        'vertex: for i in 0..t.free.len() {
            let v = t.free[i] as usize - 1;
            for _ in 0..PROBES {
                let x = free_hosts[rng.random_range(0..free_hosts.len())];
                if s.used[x as usize] {
                    continue;
                }
                s.map[v] = x;
                if s.closes_ok(i) {
                    s.used[x as usize] = true;
                    continue 'vertex;
                }
            }
            cands.clear();
            for &x in &free_hosts {
                if s.used[x as usize] {
                    continue;
                }
                s.map[v] = x;
                if s.closes_ok(i) {
                    cands.push(x);
                }
            }
            let Some(&x) = cands.get(rng.random_range(0..cands.len().max(1))) else {
                for x in &free_hosts {
                    s.used[*x as usize] = false;
                }
                continue 'restart;
            };
            s.map[v] = x;
            s.used[x as usize] = true;
        }
        if s.accepted() {
            return Ok(Extension {
                map: s.map,
                mode: EmbedMode::Greedy,
                candidates: None,
            });
        }
    }
    Err(Error::Exhausted(format!("no extension found within budget {budget}")))
}
