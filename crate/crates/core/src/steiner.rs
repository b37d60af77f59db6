//! End-to-end construction of K^r_q-decompositions of K^r_n.
//!
//! Small mode runs reserve → boost → nibble → cover and finishes the residual
//! leave with an exact backtracking search. Full mode replaces the finisher by
//! the absorber; at desk scale its build is expected to fail with a stage error.

use crate::absorber::{absorb_solve, build_absorber, AbsorberConfig};
use crate::boost::{boost_weights, sample_h};
use crate::decode::divisible;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hypercore::{for_each_subset, verify_decomposition, CliqueIndex, Params, RGraph, VSet};
use crate::nibble::{removal_process, Stop};
use crate::process::{cover, sample_reserve};
use crate::rng::{self, child_seed, Rng};
use rand::seq::SliceRandom;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Clone, Debug, Serialize)]
pub struct SmallConfig {
    /// Edge probability of the reserve R.
    pub reserve_rate: f64,
    /// Node budget of one backtracking search.
    pub node_budget: u64,
    /// Unwinding rounds before a restart with the next seed.
    pub unwinds: usize,
    /// Seeds tried, in order seed, seed+1, ...
    pub seeds: u64,
    /// Budget handed to the cover process per root.
    pub cover_budget: u64,
}

impl Default for SmallConfig {
    fn default() -> Self {
        SmallConfig {
            reserve_rate: 0.25,
            node_budget: 200_000,
            unwinds: 12,
            seeds: 10,
            cover_budget: 8,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AttemptReport {
    pub seed: u64,
    pub reserve_edges: usize,
    /// None when boosting was applied; otherwise why all cliques were used.
    pub boost_fallback: Option<String>,
    pub h_size: usize,
    pub nibble_selected: usize,
    pub nibble_leave: usize,
    pub cover_cliques: usize,
    pub cover_aborted: bool,
    pub finisher_leave: usize,
    pub unwinds: usize,
    pub nodes: u64,
    pub success: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BuildReport {
    pub attempts: Vec<AttemptReport>,
    pub blocks: usize,
    pub verified: bool,
}

/// Checks divisibility of K^r_n for (q, r), returning `Error::NotDivisible`.
pub fn check_complete_divisible(p: &Params) -> Result<()> {
    divisible(&RGraph::complete(p.n, p.r).indicator(), p.q, p.r)
}

/// Exact decomposition of `leave` into q-cliques by backtracking on the edge
/// with fewest available cliques. Returns None when the budget runs out or the
/// search space is exhausted, with the number of nodes visited.
pub fn exact_decompose(leave: &RGraph, q: usize, budget: u64, rng: &mut Rng) -> (Option<Vec<VSet>>, u64) {
    let r = leave.r;
    let edges: Vec<VSet> = leave.edges().cloned().collect();
    let eid: HashMap<&[u32], usize> = edges.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();
    let mut cliques = CliqueIndex::new(leave).cliques(q);
    cliques.shuffle(rng);
    let mut cedges: Vec<Vec<usize>> = Vec::with_capacity(cliques.len());
    let mut by_edge: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
    for (ci, c) in cliques.iter().enumerate() {
        let mut es = Vec::new();
        for_each_subset(c, r, |e| es.push(eid[e]));
        for &e in &es {
            by_edge[e].push(ci);
        }
        cedges.push(es);
    }
    let mut s = Search {
        cedges: &cedges,
        by_edge: &by_edge,
        covered: vec![false; edges.len()],
        left: edges.len(),
        chosen: Vec::new(),
        nodes: 0,
        budget,
    };
    let ok = s.dfs();
    let nodes = s.nodes;
    if ok {
        let mut d: Vec<VSet> = s.chosen.iter().map(|&c| cliques[c].clone()).collect();
        d.sort_unstable();
        (Some(d), nodes)
    } else {
        (None, nodes)
    }
}

struct Search<'a> {
    cedges: &'a [Vec<usize>],
    by_edge: &'a [Vec<usize>],
    covered: Vec<bool>,
    left: usize,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn free(&self, c: usize) -> bool {
        self.cedges[c].iter().all(|&e| !self.covered[e])
    }

    fn dfs(&mut self) -> bool {
        if self.left == 0 {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        let mut best: Option<(usize, usize)> = None;
        for e in 0..self.covered.len() {
            if self.covered[e] {
                continue;
            }
            let k = self.by_edge[e].iter().filter(|&&c| self.free(c)).count();
            if best.is_none_or(|(_, b)| k < b) {
                best = Some((e, k));
                if k <= 1 {
                    break;
                }
            }
        }
        let (e, k) = best.expect("an uncovered edge");
        if k == 0 {
            return false;
        }
        let options: Vec<usize> = self.by_edge[e].iter().copied().filter(|&c| self.free(c)).collect();
        for c in options {
            for &f in &self.cedges[c] {
                self.covered[f] = true;
            }
            self.left -= self.cedges[c].len();
            self.chosen.push(c);
            if self.dfs() {
                return true;
            }
            self.chosen.pop();
            self.left += self.cedges[c].len();
            for &f in &self.cedges[c] {
                self.covered[f] = false;
            }
            if self.nodes > self.budget {
                return false;
            }
        }
        false
    }
}

/// Removes from `d` up to `count` random blocks meeting the vertices of
/// `leave` (any blocks if none meet it) and returns their edges to `leave`.
fn unwind(d: &mut Vec<VSet>, leave: &mut RGraph, count: usize, rng: &mut Rng) {
    let mut hot = vec![false; leave.n as usize + 1];
    for e in leave.edges() {
        for &v in e {
            hot[v as usize] = true;
        }
    }
    let mut idx: Vec<usize> = (0..d.len()).filter(|&i| d[i].iter().any(|&v| hot[v as usize])).collect();
    if idx.is_empty() {
        idx = (0..d.len()).collect();
    }
    idx.shuffle(rng);
    idx.truncate(count);
    idx.sort_unstable_by(|a, b| b.cmp(a));
    for i in idx {
        let c = d.swap_remove(i);
        for_each_subset(&c, leave.r, |e| {
            leave.insert(VSet::from_slice(e)).expect("edge of K_n");
        });
    }
}

fn small_attempt(p: &Params, cfg: &SmallConfig, seed: u64) -> Result<(Option<Vec<VSet>>, AttemptReport)> {
    let (q, r, n) = (p.q, p.r, p.n);
    let mut rep = AttemptReport {
        seed,
        ..Default::default()
    };
    let (reserve, _) = sample_reserve(p, Some(cfg.reserve_rate), child_seed(seed, "reserve"));
    rep.reserve_edges = reserve.len();
    let g = RGraph::complete(n, r).minus(&reserve);

    let h = match boost_weights(&g, p, Exec::Parallel).and_then(|w| sample_h(&w, child_seed(seed, "boost"), Exec::Parallel)) {
        Ok(s) => s.h,
        Err(e) => {
            rep.boost_fallback = Some(e.to_string());
            CliqueIndex::new(&g).cliques(q)
        }
    };
    rep.h_size = h.len();

    let run = removal_process(&g, q, &h, Stop::Exhaustion, child_seed(seed, "nibble"))?;
    rep.nibble_selected = run.selected.len();
    rep.nibble_leave = run.leave.len();
    let mut d = run.selected.clone();

    let cov = cover(&run.leave, &reserve, p, child_seed(seed, "cover"), cfg.cover_budget)?;
    rep.cover_cliques = cov.cliques.len();
    rep.cover_aborted = cov.aborted_at.is_some();
    let mut leave = reserve.union(&run.leave);
    for c in &cov.cliques {
        for_each_subset(c, r, |e| {
            leave.remove(e);
        });
    }
    d.extend(cov.cliques);
    rep.finisher_leave = leave.len();
    divisible(&leave.indicator(), q, r).map_err(|e| Error::stage("finish", format!("leave is not divisible: {e}")))?;

    let mut rg = rng::stream(seed, "finish");
    let mut grow = 1usize.max(leave.len() / 8);
    for round in 0..=cfg.unwinds {
        let (sol, nodes) = exact_decompose(&leave, q, cfg.node_budget, &mut rg);
        rep.nodes += nodes;
        if let Some(sol) = sol {
            rep.unwinds = round;
            rep.success = true;
            d.extend(sol);
            d.sort_unstable();
            return Ok((Some(d), rep));
        }
        if round < cfg.unwinds {
            unwind(&mut d, &mut leave, grow, &mut rg);
            grow *= 2;
        }
    }
    rep.unwinds = cfg.unwinds;
    Ok((None, rep))
}

/// Small-mode construction over seeds `seed, seed+1, ...`. The result is
/// verified against K^r_n before it is returned.
pub fn build_small(p: &Params, cfg: &SmallConfig, seed: u64) -> Result<(Vec<VSet>, BuildReport)> {
    check_complete_divisible(p)?;
    let mut attempts = Vec::new();
    for s in 0..cfg.seeds.max(1) {
        let (sol, rep) = small_attempt(p, cfg, seed.wrapping_add(s))?;
        attempts.push(rep);
        if let Some(d) = sol {
            let verdict = verify_decomposition(&RGraph::complete(p.n, p.r), &d);
            if !verdict.is_ok() {
                return Err(Error::stage("verify", format!("{verdict:?}")));
            }
            let report = BuildReport {
                attempts,
                blocks: d.len(),
                verified: true,
            };
            return Ok((d, report));
        }
    }
    Err(Error::stage(
        "finish",
        format!("no completion within {} seeds of {} nodes", cfg.seeds, cfg.node_budget),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct FullReport {
    pub reserve_edges: usize,
    pub absorber_edges: usize,
    pub h_size: usize,
    pub nibble_selected: usize,
    pub cover_cliques: usize,
    pub leave_edges: usize,
    pub blocks: usize,
}

/// Reserve → absorber → boost → nibble → cover → absorb.
pub fn build_full(p: &Params, cfg: &AbsorberConfig, reserve_rate: Option<f64>, seed: u64, cover_budget: u64) -> Result<(Vec<VSet>, FullReport)> {
    check_complete_divisible(p)?;
    let (q, r, n) = (p.q, p.r, p.n);
    let (reserve, _) = sample_reserve(p, reserve_rate, child_seed(seed, "reserve"));
    let book = build_absorber(&reserve, p, cfg, &mut rng::stream(seed, "absorber"))?;
    let a = book.a_graph();
    let g = RGraph::complete(n, r).minus(&reserve).minus(&a);
    let w = boost_weights(&g, p, Exec::Parallel)?;
    let h = sample_h(&w, child_seed(seed, "boost"), Exec::Parallel)?.h;
    let run = removal_process(&g, q, &h, Stop::Exhaustion, child_seed(seed, "nibble"))?;
    let cov = cover(&run.leave, &reserve, p, child_seed(seed, "cover"), cover_budget)?;
    if let Some(i) = cov.aborted_at {
        return Err(Error::stage("cover", format!("cover aborted at root {i}")));
    }
    let mut leave = reserve.clone();
    for c in &cov.cliques {
        for_each_subset(c, r, |e| {
            leave.remove(e);
        });
    }
    let (da, _) = absorb_solve(&book, &leave, &mut rng::stream(seed, "absorb"))?;
    let mut d = run.selected.clone();
    d.extend(cov.cliques.iter().cloned());
    d.extend(da);
    d.sort_unstable();
    let verdict = verify_decomposition(&RGraph::complete(n, r), &d);
    if !verdict.is_ok() {
        return Err(Error::stage("verify", format!("{verdict:?}")));
    }
    let report = FullReport {
        reserve_edges: reserve.len(),
        absorber_edges: a.len(),
        h_size: h.len(),
        nibble_selected: run.selected.len(),
        cover_cliques: cov.cliques.len(),
        leave_edges: leave.len(),
        blocks: d.len(),
    };
    Ok((d, report))
}
