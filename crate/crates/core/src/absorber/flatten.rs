//! Flattening: rounds of pair eliminations that lower edge multiplicities of a
//! clique family while keeping its integer span, each removed clique carrying a
//! witness expression over the cliques that replace it.

use super::EdgeSet;
use crate::error::{Error, Result};
use crate::exchange::{anchor_pair, find_embedding_with, AnchorKind};
use crate::hypercore::{boundary_qr, for_each_subset, set_minus, CliqueVec, VSet};
use crate::omega::omega_cached;
use crate::rng::Rng;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

/// Number of groups minimizing the post-round multiplicity of an edge in x
/// cliques, and that multiplicity: g groups leave g cliques on the edge and
/// 1 + ⌈x/g⌉ on the other edges of each new clique.
pub fn best_grouping(x: usize) -> (usize, usize) {
    (1..=x.max(1))
        .map(|g| (g, g.max(1 + x.div_ceil(g))))
        .min_by_key(|&(g, m)| (m, g))
        .unwrap()
}

/// Post-round multiplicity of an edge processed with the best grouping.
pub fn round_multiplicity(x: usize) -> usize {
    best_grouping(x).1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlattenResult {
    pub q1: Vec<VSet>,
    /// Removed clique ↦ signed cliques with the same boundary.
    #[serde(with = "super::as_pairs")]
    pub witnesses: BTreeMap<VSet, CliqueVec>,
    pub rounds: usize,
    /// Maximum multiplicity at the start of each round, then the final one.
    pub history: Vec<usize>,
    pub gadgets: usize,
    /// True when rounds stopped above multiplicity two because no edge could improve.
    pub stalled: bool,
}

impl FlattenResult {
    pub fn identity(q0: &[VSet], max: usize) -> Self {
        let set: BTreeSet<VSet> = q0.iter().cloned().collect();
        FlattenResult {
            q1: set.into_iter().collect(),
            witnesses: BTreeMap::new(),
            rounds: 0,
            history: vec![max],
            gadgets: 0,
            stalled: max > 2,
        }
    }

    /// Rewrites Φ over removed cliques as a vector over the final family.
    pub fn expand(&self, phi: &CliqueVec) -> CliqueVec {
        let mut out = CliqueVec::new();
        let mut stack: Vec<(VSet, i64)> = phi.iter().map(|(c, x)| (c.clone(), x)).collect();
        while let Some((c, x)) = stack.pop() {
            match self.witnesses.get(&c) {
                Some(w) => stack.extend(w.iter().map(|(d, y)| (d.clone(), x * y))),
                None => out.add(c, x),
            }
        }
        out
    }

    /// Replays every witness: ∂Q equals the boundary of its expression.
    pub fn check_witnesses(&self, q: usize, r: usize) -> Vec<String> {
        let mut bad = Vec::new();
        for (c, w) in &self.witnesses {
            let lhs = boundary_qr(&CliqueVec::singleton(c.clone(), 1), q, r);
            let rhs = boundary_qr(w, q, r);
            match (lhs, rhs) {
                (Ok(a), Ok(b)) if a == b => {}
                _ => bad.push(format!("witness for {c:?} does not reproduce its boundary")),
            }
        }
        bad
    }
}

const MAX_ROUNDS: usize = 64;

/// Flattens `q0` inside K^r_{host_n}; new edges avoid `used`, which is updated.
#[allow(clippy::too_many_arguments)]
pub fn flatten(
    q0: &[VSet],
    q: usize,
    r: usize,
    host_n: u32,
    used: &mut EdgeSet,
    rng: &mut Rng,
    budget: u64,
    attempts: usize,
) -> Result<FlattenResult> {
    let mut cur: BTreeSet<VSet> = q0.iter().cloned().collect();
    let start = super::max_multiplicity(&cur.iter().cloned().collect::<Vec<_>>(), r);
    if start <= 2 {
        return Ok(FlattenResult::identity(q0, start));
    }
    let g = omega_cached(q, r);
    let (hp, hm, _) = g.pair();
    let (hp, hm) = (hp.clone(), hm.clone());
    let mut res = FlattenResult::identity(&[], 0);
    res.history.clear();
    res.stalled = false;
    for round in 0..MAX_ROUNDS {
        let mut by_edge: HashMap<VSet, Vec<VSet>> = HashMap::new();
        for c in &cur {
            for_each_subset(c, r, |e| by_edge.entry(VSet::from_slice(e)).or_default().push(c.clone()));
        }
        let max = by_edge.values().map(Vec::len).max().unwrap_or(0);
        res.history.push(max);
        if max <= 2 {
            break;
        }
        let mut cand: Vec<(&VSet, &Vec<VSet>)> = by_edge
            .iter()
            .filter(|(_, cs)| cs.len() > 2 && round_multiplicity(cs.len()) < cs.len())
            .collect();
        if cand.is_empty() {
            res.stalled = true;
            break;
        }
        cand.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(b.0)));
        let mut touched: HashSet<VSet> = HashSet::new();
        let mut removed: Vec<VSet> = Vec::new();
        let mut added: Vec<VSet> = Vec::new();
        for (e, cs) in cand {
            if cs.iter().any(|c| touched.contains(c)) {
                continue;
            }
            let mut cs = cs.clone();
            cs.sort_unstable();
            cs.shuffle(rng);
            let (groups, _) = best_grouping(cs.len());
            let (base, extra) = (cs.len() / groups, cs.len() % groups);
            let mut it = cs.into_iter();
            for gi in 0..groups {
                let members: Vec<VSet> = it.by_ref().take(base + usize::from(gi < extra)).collect();
                let qi = new_clique(e, &members, q, r, host_n, used, rng, attempts).ok_or_else(|| {
                    Error::stage("flatten", format!("round {round}: no new clique through edge {e:?}"))
                })?;
                used.insert_clique(&qi, r);
                added.push(qi.clone());
                for m in &members {
                    let anchor = anchor_pair(&g, &qi, m)?;
                    let usable = |x: &[u32]| !used.contains(x);
                    let emb = find_embedding_with(&g, AnchorKind::Pair, &anchor, host_n, &usable, rng, budget)
                        .map_err(|err| {
                            Error::stage("flatten", format!("round {round}: eliminating {m:?} at edge {e:?}: {err}"))
                        })?;
                    for ne in emb.new_edges() {
                        used.insert(&ne);
                    }
                    let mut w = CliqueVec::singleton(qi.clone(), 1);
                    for c in &g.upsilon_plus {
                        if *c != hp {
                            let img = emb.image(c);
                            added.push(img.clone());
                            w.add(img, 1);
                        }
                    }
                    for c in &g.upsilon_minus {
                        if *c != hm {
                            let img = emb.image(c);
                            added.push(img.clone());
                            w.add(img, -1);
                        }
                    }
                    res.witnesses.insert(m.clone(), w);
                    res.gadgets += 1;
                    touched.insert(m.clone());
                    removed.push(m.clone());
                }
            }
        }
        for c in &removed {
            cur.remove(c);
        }
        cur.extend(added);
        res.rounds = round + 1;
    }
    if res.history.last().is_some_and(|&m| m > 2) && !res.stalled {
        res.stalled = true;
    }
    res.q1 = cur.into_iter().collect();
    let fin = super::max_multiplicity(&res.q1, r);
    if res.history.last() != Some(&fin) {
        res.history.push(fin);
    }
    Ok(res)
}

/// A q-set through `e`, meeting every member only in `e`, whose other edges are unused.
#[allow(clippy::too_many_arguments)]
fn new_clique(
    e: &[u32],
    members: &[VSet],
    q: usize,
    r: usize,
    host_n: u32,
    used: &EdgeSet,
    rng: &mut Rng,
    attempts: usize,
) -> Option<VSet> {
    let banned: HashSet<u32> = members.iter().flat_map(|m| m.iter().copied()).collect();
    for _ in 0..attempts {
        let mut c: VSet = VSet::from_slice(e);
        while c.len() < q {
            let v = rng.random_range(1..=host_n);
            if !banned.contains(&v) && !c.contains(&v) {
                c.push(v);
            }
        }
        c.sort_unstable();
        if used.clique_free(&c, r, e) && set_minus(&c, e).len() == q - r {
            return Some(c);
        }
    }
    None
}
