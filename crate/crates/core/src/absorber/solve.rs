//! The absorb procedure: for a divisible leave L ⊆ R, a K^r_q-decomposition
//! of A ∪ L assembled from the book.

use super::book::{img, AbsorberBook, Shape};
use crate::decode::{decoder_qr, divisible};
use crate::error::{Error, Result};
use crate::hypercore::{
    boundary_qr, for_each_subset, verify_decomposition, CliqueIndex, CliqueVec, IntVec, RGraph, VSet,
};
use crate::rng::Rng;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolveReport {
    pub leave_edges: usize,
    /// Support of Φ, Φ¹ and Φ².
    pub phi_support: usize,
    pub rounded_support: usize,
    pub decoded_edges: usize,
    pub decoded_support: usize,
    pub splits_used: usize,
    pub pair_eliminations: usize,
    pub further_eliminations: usize,
    pub decomposition: usize,
    pub verified: bool,
}

/// Representative of x modulo N in (−N/2, N/2].
pub fn round_centered(x: i64, big_n: i64) -> i64 {
    let m = x.rem_euclid(big_n);
    if 2 * m > big_n {
        m - big_n
    } else {
        m
    }
}

fn check_boundary(phi: &CliqueVec, l: &IntVec, q: usize, r: usize, stage: &str) -> Result<()> {
    if boundary_qr(phi, q, r)? != *l {
        return Err(Error::stage(stage, "boundary differs from L"));
    }
    Ok(())
}

fn apply(phi: &mut CliqueVec, map: &[u32], minus: &[VSet], plus: &[VSet], sign: i64) {
    for c in minus {
        phi.add(img(map, c), sign);
    }
    for c in plus {
        phi.add(img(map, c), -sign);
    }
}

/// Decomposition D of A ∪ L for a divisible 0/1 leave L ⊆ R.
pub fn absorb_solve(book: &AbsorberBook, leave: &RGraph, rng: &mut Rng) -> Result<(Vec<VSet>, SolveReport)> {
    let (q, r) = (book.q, book.r);
    let big_n = book.big_n;
    if leave.r != r {
        return Err(Error::Config(format!("leave is {}-uniform, expected {r}", leave.r)));
    }
    if let Some(e) = leave.edges().find(|e| !book.reserve.contains(e)) {
        return Err(Error::Config(format!("leave edge {e:?} is outside the reserve")));
    }
    let l = leave.indicator();
    divisible(&l, q, r).map_err(|e| Error::Config(format!("leave is not divisible: {e}")))?;
    let mut rep = SolveReport {
        leave_edges: leave.len(),
        ..Default::default()
    };
    let cfg = &book.config;

    // Φ over 𝒬₁, then Φ¹ with entries in (−N/2, N/2]
    let (phi, _) = book.integral.solve(&l, rng, cfg.embed_budget, cfg.attempts)?;
    rep.phi_support = phi.len();
    let mut phi1 = CliqueVec::new();
    for (c, x) in phi.iter() {
        let y = round_centered(x, big_n);
        debug_assert_eq!((x - y).rem_euclid(big_n), 0);
        phi1.add(c.clone(), y);
    }
    rep.rounded_support = phi1.len();
    let j = l.sub(&boundary_qr(&phi1, q, r)?);
    for (e, x) in j.iter() {
        if x != 0 && x.abs() != big_n {
            return Err(Error::stage("rounding", format!("J at {e:?} is {x}, not in {{-N, 0, N}}")));
        }
    }

    // Φ² = Φ¹ + Σ (J_e/N)·Ψ^e on the decoder sets
    let dec = decoder_qr(q, r);
    let mut phi2 = phi1;
    for (e, x) in j.iter() {
        let z = book
            .zsets
            .get(e)
            .ok_or_else(|| Error::stage("decoders", format!("no decoder set for {e:?}")))?;
        phi2.add_scaled(&dec.materialize(z, e), x / big_n);
        rep.decoded_edges += 1;
    }
    rep.decoded_support = phi2.len();
    check_boundary(&phi2, &l, q, r, "decoders")?;

    // splitting: every clique of Φ² is replaced through its first |m| copies
    let sh = Shape::new(q, r);
    let mut cur = phi2.clone();
    let mut used_splits = Vec::new();
    for (c, m) in phi2.iter() {
        let sign: i8 = if m > 0 { 1 } else { -1 };
        let list = book.index.split_copies.get(&(c.clone(), sign)).map_or(&[][..], |v| &v[..]);
        if list.len() < m.unsigned_abs() as usize {
            return Err(Error::stage(
                "splitting",
                format!("copies exhausted: {c:?} needs {} of sign {sign}, book has {}", m.abs(), list.len()),
            ));
        }
        for &i in &list[..m.unsigned_abs() as usize] {
            let s = &book.splits[i];
            apply(&mut cur, &s.map, &sh.g.upsilon_minus, &sh.g.upsilon_plus, sign as i64);
            used_splits.push(i);
        }
        if cur.get(c) != 0 {
            return Err(Error::stage("splitting", format!("{c:?} survives splitting")));
        }
    }
    rep.splits_used = used_splits.len();
    check_boundary(&cur, &l, q, r, "splitting")?;

    // pair the near cliques at each edge and eliminate
    let mut buckets: BTreeMap<&VSet, (Vec<(&VSet, usize)>, Vec<(&VSet, usize)>)> = BTreeMap::new();
    for &i in &used_splits {
        let s = &book.splits[i];
        for (f, c) in &s.near {
            let b = buckets.entry(f).or_default();
            if s.sign > 0 {
                b.0.push((c, i));
            } else {
                b.1.push((c, i));
            }
        }
    }
    let mut used_pairs = Vec::new();
    for (f, (pos, neg)) in &buckets {
        let excess = pos.len() as i64 - neg.len() as i64;
        if excess != l.get(f) {
            return Err(Error::stage(
                "elimination",
                format!("edge {f:?}: {} positive and {} negative near cliques", pos.len(), neg.len()),
            ));
        }
        for ((pp, _), (pm, _)) in pos.iter().zip(neg.iter()) {
            let k = *book
                .index
                .pair_of
                .get(&((*pp).clone(), (*pm).clone()))
                .ok_or_else(|| Error::stage("elimination", format!("no gadget for {pp:?}, {pm:?}")))?;
            if cur.get(pp) != 1 || cur.get(pm) != -1 {
                return Err(Error::stage("elimination", format!("pair {pp:?}, {pm:?} is not +1/−1")));
            }
            apply(&mut cur, &book.pairs[k].map, &sh.minus_rest, &sh.plus_rest, 1);
            cur.add((*pp).clone(), -1);
            cur.add((*pm).clone(), 1);
            used_pairs.push(k);
        }
    }
    rep.pair_eliminations = used_pairs.len();
    check_boundary(&cur, &l, q, r, "elimination")?;

    // further eliminations of bad cliques
    for &k in &used_pairs {
        for b in &book.pairs[k].bad {
            let fg = &book.further[b.further];
            if cur.get(&b.clique) != -1 || cur.get(&b.target) != 1 {
                return Err(Error::stage(
                    "further",
                    format!("bad clique {:?} or target {:?} has the wrong coefficient", b.clique, b.target),
                ));
            }
            apply(&mut cur, &fg.map, &sh.minus_rest, &sh.plus_rest, 1);
            cur.add(b.target.clone(), -1);
            cur.add(b.clique.clone(), 1);
            rep.further_eliminations += 1;
        }
    }
    check_boundary(&cur, &l, q, r, "further")?;

    // D = D⁺ ∪ (𝒬⁻ \ D⁻)
    let mut d_plus = Vec::new();
    let mut d_minus = HashSet::new();
    for (c, x) in cur.iter() {
        match x {
            1 if book.index.q_plus.contains(c) => d_plus.push(c.clone()),
            -1 if book.index.q_minus.contains(c) => {
                d_minus.insert(c.clone());
            }
            _ => {
                return Err(Error::stage("assembly", format!("{c:?} has coefficient {x} outside its family")));
            }
        }
    }
    let mut d = d_plus;
    d.extend(book.index.q_minus.iter().filter(|c| !d_minus.contains(*c)).cloned());
    d.sort_unstable();
    rep.decomposition = d.len();
    let mut host = book.a_graph();
    for e in leave.edges() {
        host.insert(e.clone())?;
    }
    let verdict = verify_decomposition(&host, &d);
    if !verdict.is_ok() {
        return Err(Error::stage("assembly", format!("A ∪ L is not decomposed: {verdict:?}")));
    }
    rep.verified = true;
    Ok((d, rep))
}

/// A random divisible 0/1 leave inside R: the union of random edge-disjoint
/// q-cliques of R, each kept with probability one half.
pub fn random_divisible_leave(reserve: &RGraph, q: usize, rng: &mut Rng) -> RGraph {
    let r = reserve.r;
    let mut cliques = CliqueIndex::new(reserve).cliques(q);
    cliques.sort_unstable();
    cliques.shuffle(rng);
    let mut taken: HashSet<VSet> = HashSet::new();
    let mut out = RGraph::new(reserve.n, r);
    for c in cliques {
        let mut free = true;
        for_each_subset(&c, r, |e| free &= !taken.contains(e));
        if free && rng.random_bool(0.5) {
            for_each_subset(&c, r, |e| {
                taken.insert(VSet::from_slice(e));
            });
        }
    }
    for e in taken {
        out.insert(e).expect("edge of the reserve");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_rounding() {
        let got: Vec<i64> = (-7..=7).map(|x| round_centered(x, 6)).collect();
        assert_eq!(got, vec![-1, 0, 1, 2, 3, -2, -1, 0, 1, 2, 3, -2, -1, 0, 1]);
        for x in -100..100 {
            let y = round_centered(x, 6);
            assert!(-3 < y && y <= 3 && (x - y) % 6 == 0);
        }
    }
}
