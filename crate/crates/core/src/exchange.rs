//! Clique exchange moves on integral decompositions: splitting one signed copy
//! of a clique and eliminating a cancelling pair, both through an embedded
//! copy of the gadget Ω.

use crate::embed::{extend, Constraints, EmbedMode, Extension, Template};
use crate::error::{Error, Result};
use crate::hypercore::{intersection_size, is_subset, set_minus, CliqueVec, IntVec, RGraph, VSet};
use crate::omega::OmegaGadget;
use rand::Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Which gadget cliques are anchored: Q̂⁺ alone, or Q̂⁺ and Q̂⁻ = Q̂^{e₀}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum AnchorKind {
    Single,
    Pair,
}

/// Template of Ω rooted at V(Q̂⁺) or V(Q̂⁺) ∪ V(Q̂⁻), cached per gadget.
pub fn gadget_template(g: &OmegaGadget, kind: AnchorKind) -> Arc<Template> {
    type Key = (usize, usize, AnchorKind);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Template>>>> = OnceLock::new();
    let key = (g.q, g.r, kind);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let (qp, qm, _) = g.pair();
    let f: VSet = match kind {
        AnchorKind::Single => qp.clone(),
        AnchorKind::Pair => {
            let mut s: VSet = qp.iter().chain(qm.iter()).copied().collect();
            s.sort_unstable();
            s.dedup();
            s
        }
    };
    let t = Arc::new(Template::new(g.graph.n, g.r, g.graph.edges().cloned().collect(), f));
    cache.lock().unwrap().entry(key).or_insert(t).clone()
}

/// A copy φ(Ω) of the gadget in K^r_n.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub gadget: Arc<OmegaGadget>,
    pub kind: AnchorKind,
    pub ext: Extension,
}

impl Embedding {
    pub fn mode(&self) -> EmbedMode {
        self.ext.mode
    }

    pub fn image(&self, s: &[u32]) -> VSet {
        self.ext.image(s)
    }

    pub fn image_edges(&self) -> Vec<VSet> {
        self.gadget.graph.edges().map(|e| self.image(e)).collect()
    }

    /// Image edges outside the anchored cliques.
    pub fn new_edges(&self) -> Vec<VSet> {
        let (qp, qm, _) = self.gadget.pair();
        self.gadget
            .graph
            .edges()
            .filter(|e| match self.kind {
                AnchorKind::Single => !is_subset(e, qp),
                AnchorKind::Pair => !is_subset(e, qp) && !is_subset(e, qm),
            })
            .map(|e| self.image(e))
            .collect()
    }

    pub fn plus(&self) -> CliqueVec {
        CliqueVec::indicator(&self.gadget.upsilon_plus.iter().map(|c| self.image(c)).collect::<Vec<_>>())
    }

    pub fn minus(&self) -> CliqueVec {
        CliqueVec::indicator(&self.gadget.upsilon_minus.iter().map(|c| self.image(c)).collect::<Vec<_>>())
    }

    /// Injectivity of the vertex map.
    pub fn is_injective(&self) -> bool {
        let mut m = self.ext.map.clone();
        m.sort_unstable();
        m.windows(2).all(|w| w[0] != w[1]) && m.first().is_some_and(|&x| x > 0)
    }
}

/// Anchor mapping Q̂⁺ onto the sorted clique `q` in sorted order.
pub fn anchor_single(g: &OmegaGadget, q: &[u32]) -> Result<Vec<(u32, u32)>> {
    if q.len() != g.q {
        return Err(Error::Malformed(format!("anchor clique {q:?} is not a {}-set", g.q)));
    }
    Ok(g.qhat_plus.iter().copied().zip(q.iter().copied()).collect())
}

/// Anchor mapping Q̂⁺ ↦ `qp`, Q̂⁻ ↦ `qm` with e₀ ↦ qp ∩ qm, all in sorted order.
pub fn anchor_pair(g: &OmegaGadget, qp: &[u32], qm: &[u32]) -> Result<Vec<(u32, u32)>> {
    let e: VSet = qp.iter().copied().filter(|v| qm.contains(v)).collect();
    if qp.len() != g.q || qm.len() != g.q || e.len() != g.r {
        return Err(Error::Malformed(format!(
            "{qp:?} and {qm:?} must be {}-sets sharing exactly one edge",
            g.q
        )));
    }
    let (hp, hm, e0) = g.pair();
    let mut a: Vec<(u32, u32)> = e0.iter().copied().zip(e.iter().copied()).collect();
    a.extend(set_minus(hp, &e0).into_iter().zip(set_minus(qp, &e)));
    a.extend(set_minus(hm, &e0).into_iter().zip(set_minus(qm, &e)));
    Ok(a)
}

/// Finds φ(Ω) extending `anchor` whose non-anchored edges satisfy `usable`.
pub fn find_embedding_with(
    g: &Arc<OmegaGadget>,
    kind: AnchorKind,
    anchor: &[(u32, u32)],
    host_n: u32,
    usable: &(dyn Fn(&[u32]) -> bool + Sync),
    rng: &mut impl Rng,
    budget: u64,
) -> Result<Embedding> {
    let t = gadget_template(g, kind);
    let c = Constraints::edges(usable);
    let ext = extend(&t, anchor, host_n, &c, rng, budget)?;
    Ok(Embedding {
        gadget: g.clone(),
        kind,
        ext,
    })
}

/// Finds φ(Ω) extending `anchor` whose non-anchored edges avoid the support of
/// `forbidden` and lie in `allowed` when given.
#[allow(clippy::too_many_arguments)]
pub fn find_embedding(
    g: &Arc<OmegaGadget>,
    kind: AnchorKind,
    anchor: &[(u32, u32)],
    host_n: u32,
    forbidden: &IntVec,
    allowed: Option<&RGraph>,
    rng: &mut impl Rng,
    budget: u64,
) -> Result<Embedding> {
    let usable = |e: &[u32]| forbidden.get(e) == 0 && allowed.is_none_or(|a| a.contains(e));
    find_embedding_with(g, kind, anchor, host_n, &usable, rng, budget)
}

/// Removes one copy of `q` with the given sign: Φ' = Φ + sign·(φ(Υ⁻) − φ(Υ⁺)).
pub fn split(phi: &CliqueVec, q: &[u32], sign: i64, emb: &Embedding) -> Result<CliqueVec> {
    if sign != 1 && sign != -1 {
        return Err(Error::Malformed(format!("sign must be ±1, got {sign}")));
    }
    if emb.image(&emb.gadget.qhat_plus).as_slice() != q {
        return Err(Error::Malformed(format!("embedding does not map qhat+ to {q:?}")));
    }
    let mut out = phi.clone();
    out.add_scaled(&emb.minus(), sign);
    out.add_scaled(&emb.plus(), -sign);
    Ok(out)
}

/// Eliminates the cancelling pair +qp, −qm: Φ' = Φ + φ(Υ⁻) − φ(Υ⁺).
pub fn eliminate_pair(phi: &CliqueVec, qp: &[u32], qm: &[u32], emb: &Embedding) -> Result<CliqueVec> {
    let r = emb.gadget.r;
    if intersection_size(qp, qm) != r {
        return Err(Error::Malformed(format!("{qp:?} and {qm:?} do not share exactly one edge")));
    }
    if phi.get(qp) <= 0 || phi.get(qm) >= 0 {
        return Err(Error::Malformed("pair signs must be positive then negative".into()));
    }
    let (hp, hm, _) = emb.gadget.pair();
    if emb.image(hp).as_slice() != qp || emb.image(hm).as_slice() != qm {
        return Err(Error::Malformed("embedding does not map the designated pair onto the given cliques".into()));
    }
    let mut out = phi.clone();
    out.add_scaled(&emb.minus(), 1);
    out.add_scaled(&emb.plus(), -1);
    Ok(out)
}

/// Structural properties of the gadget behind both moves, checked once:
/// replacing cliques meet Q̂⁺ in at most r vertices; new cliques of a pair
/// elimination avoid e₀; new negative cliques meet Q̂⁻ in at most one edge and
/// share no edge with Q̂⁺ (or each other, as parts of a decomposition).
pub fn move_properties(g: &OmegaGadget) -> Vec<String> {
    let mut v = Vec::new();
    let (qp, qm, e0) = g.pair();
    for c in g.upsilon_plus.iter().chain(&g.upsilon_minus) {
        if c != qp && intersection_size(c, qp) > g.r {
            v.push(format!("split: {c:?} meets qhat+ in more than r vertices"));
        }
    }
    for c in g.upsilon_plus.iter().filter(|c| *c != qp).chain(g.upsilon_minus.iter().filter(|c| *c != qm)) {
        if is_subset(&e0, c) {
            v.push(format!("pair: new clique {c:?} uses e0"));
        }
    }
    for c in g.upsilon_plus.iter().filter(|c| *c != qp) {
        if intersection_size(c, qm) > g.r {
            v.push(format!("pair: negative clique {c:?} meets qhat- in more than one edge"));
        }
        if intersection_size(c, qp) >= g.r {
            v.push(format!("pair: negative clique {c:?} shares an edge with qhat+"));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::{boundary_qr, vset, RGraph};
    use crate::omega::omega_cached;
    use rand::SeedableRng;

    fn rng(s: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(s)
    }

    #[test]
    fn gadget_move_properties_hold() {
        for (q, r) in [(3, 2), (4, 2), (4, 3)] {
            assert!(move_properties(&omega_cached(q, r)).is_empty(), "q={q} r={r}");
        }
    }

    #[test]
    fn split_single_clique() {
        let g = omega_cached(3, 2);
        let q = vset(&[3, 17, 40]);
        let a = anchor_single(&g, &q).unwrap();
        let emb = find_embedding(&g, AnchorKind::Single, &a, 50, &IntVec::new(), None, &mut rng(1), 100).unwrap();
        assert!(emb.is_injective());
        let phi = CliqueVec::singleton(q.clone(), 1);
        let out = split(&phi, &q, 1, &emb).unwrap();
        assert_eq!(out.get(&q), 0);
        assert_eq!(boundary_qr(&out, 3, 2).unwrap(), boundary_qr(&phi, 3, 2).unwrap());
        // 2|Ω|/k − 1 signed cliques
        assert_eq!(out.len(), 2 * g.graph.len() / 3 - 1);
        for (c, _) in out.iter() {
            assert!(intersection_size(c, &q) <= 2);
        }
        let neg = CliqueVec::singleton(q.clone(), -1);
        let out = split(&neg, &q, -1, &emb).unwrap();
        assert_eq!(out.get(&q), 0);
        assert_eq!(boundary_qr(&out, 3, 2).unwrap(), boundary_qr(&neg, 3, 2).unwrap());
        assert!(split(&phi, &vset(&[1, 2, 3]), 1, &emb).is_err());
    }

    #[test]
    fn double_split_with_disjoint_embeddings() {
        let g = omega_cached(3, 2);
        let q = vset(&[1, 2, 3]);
        let a = anchor_single(&g, &q).unwrap();
        let mut r = rng(2);
        let e1 = find_embedding(&g, AnchorKind::Single, &a, 100, &IntVec::new(), None, &mut r, 100).unwrap();
        let used = IntVec::indicator(&e1.new_edges());
        let e2 = find_embedding(&g, AnchorKind::Single, &a, 100, &used, None, &mut r, 100).unwrap();
        for e in e2.new_edges() {
            assert_eq!(used.get(&e), 0);
        }
        let phi = CliqueVec::singleton(q.clone(), 2);
        let out = split(&split(&phi, &q, 1, &e1).unwrap(), &q, 1, &e2).unwrap();
        assert_eq!(out.get(&q), 0);
        assert_eq!(boundary_qr(&out, 3, 2).unwrap(), boundary_qr(&phi, 3, 2).unwrap());
    }

    #[test]
    fn forbidding_everything_exhausts() {
        let g = omega_cached(3, 2);
        let q = vset(&[1, 2, 3]);
        let a = anchor_single(&g, &q).unwrap();
        let mut all = RGraph::complete(50, 2).indicator();
        for e in [[1, 2], [1, 3], [2, 3]] {
            all.set(vset(&e), 0);
        }
        let res = find_embedding(&g, AnchorKind::Single, &a, 50, &all, None, &mut rng(3), 5);
        assert!(matches!(res, Err(Error::Exhausted(_))));
    }

    #[test]
    fn eliminate_cancelling_pair() {
        let g = omega_cached(3, 2);
        let qp = vset(&[1, 2, 3]);
        let qm = vset(&[1, 2, 4]);
        let a = anchor_pair(&g, &qp, &qm).unwrap();
        let emb = find_embedding(&g, AnchorKind::Pair, &a, 60, &IntVec::new(), None, &mut rng(4), 100).unwrap();
        // post-hoc validation oracle: non-anchored edges avoid the anchored ones
        let anchored = IntVec::indicator(&[vset(&[1, 2]), vset(&[1, 3]), vset(&[2, 3]), vset(&[1, 4]), vset(&[2, 4])]);
        for e in emb.new_edges() {
            assert_eq!(anchored.get(&e), 0);
        }
        let phi: CliqueVec = [(qp.clone(), 1), (qm.clone(), -1)].into_iter().collect();
        let out = eliminate_pair(&phi, &qp, &qm, &emb).unwrap();
        assert_eq!(out.get(&qp), 0);
        assert_eq!(out.get(&qm), 0);
        assert_eq!(boundary_qr(&out, 3, 2).unwrap(), boundary_qr(&phi, 3, 2).unwrap());
        assert!(out.keys().all(|c| !is_subset(&[1, 2], c)));
        let far = vset(&[1, 5, 6]);
        assert!(anchor_pair(&g, &qp, &far).is_err());
        assert!(eliminate_pair(&phi, &qp, &vset(&[1, 2, 5]), &emb).is_err());
        let wrong: CliqueVec = [(qp.clone(), -1), (qm.clone(), 1)].into_iter().collect();
        assert!(eliminate_pair(&wrong, &qp, &qm, &emb).is_err());
    }
}
