//! The clique-exchange gadget Ω: an r-graph with two K^r_q-decompositions
//! Υ⁺, Υ⁻, a designated clique Q̂⁺ ∈ Υ⁺ and a ring of cliques Q̂^e ∈ Υ⁻.

use crate::algebra::{bertrand_prime, mat_vec, VandermondeMatrix};
use crate::error::{Error, Result};
use crate::hypercore::{
    binom, for_each_subset, io, is_subset, set_minus, subsets, verify_decomposition, vset, Params, RGraph, VSet,
};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;
use std::sync::{Arc, Mutex, OnceLock};

/// The p-blowup K^r_q(p). Part i ∈ 0..q holds vertices i·p + x + 1 for x ∈ F_p.
#[derive(Clone, Debug)]
pub struct Blowup {
    pub q: usize,
    pub r: usize,
    pub p: u64,
    pub graph: RGraph,
    pub upsilon_plus: Vec<VSet>,
    pub upsilon_minus: Vec<VSet>,
    pub qhat_plus: VSet,
    pub qhat_minus: VSet,
    pub e0: VSet,
    m: VandermondeMatrix,
}

impl Blowup {
    pub fn vertex(&self, part: usize, x: u64) -> u32 {
        (part as u64 * self.p + x + 1) as u32
    }

    fn part_of(&self, v: u32) -> (usize, u64) {
        let z = (v - 1) as u64;
        ((z / self.p) as usize, z % self.p)
    }

    fn clique_of(&self, v: &[u64]) -> VSet {
        v.iter().enumerate().map(|(i, &x)| self.vertex(i, x)).collect()
    }

    fn shift(&self, i: usize) -> u64 {
        u64::from(i >= self.r)
    }

    /// The clique of Υ⁺₀ (`plus`) or Υ⁻₀ containing edge e, found by solving
    /// u = M_I^{-1}(e − v⁰_I).
    pub fn clique_containing(&self, e: &[u32], plus: bool) -> Result<VSet> {
        let f = self.m.field;
        let mut rows = Vec::with_capacity(self.r);
        let mut rhs = Vec::with_capacity(self.r);
        for &v in e {
            let (i, x) = self.part_of(v);
            if rows.last().is_some_and(|&l: &usize| l >= i + 1) {
                return Err(Error::Malformed(format!("{e:?} is not a transversal edge")));
            }
            rows.push(i + 1);
            rhs.push(if plus { x } else { f.sub(x, self.shift(i)) });
        }
        let inv = self.m.submatrix_invert(&rows)?;
        let u = mat_vec(&inv, &rhs, f);
        let mut v = self.m.apply(&u);
        if !plus {
            for (i, x) in v.iter_mut().enumerate() {
                *x = f.add(*x, self.shift(i));
            }
        }
        Ok(self.clique_of(&v))
    }
}

fn all_vectors(p: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..p).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn build_blowup(p: &Params) -> Blowup {
    build_blowup_qr(p.q, p.r)
}

pub fn build_blowup_qr(q: usize, r: usize) -> Blowup {
    let p = bertrand_prime(q as u64);
    let m = VandermondeMatrix::new(p, q, r).expect("p >= q is prime");
    let n = (q as u64 * p) as u32;
    let mut b = Blowup {
        q,
        r,
        p,
        graph: RGraph::new(n, r),
        upsilon_plus: vec![],
        upsilon_minus: vec![],
        qhat_plus: VSet::new(),
        qhat_minus: VSet::new(),
        e0: VSet::new(),
        m,
    };
    let parts: Vec<u32> = (0..q as u32).collect();
    for idx in subsets(&parts, r) {
        for xs in all_vectors(p, r) {
            let e: VSet = idx.iter().zip(&xs).map(|(&i, &x)| b.vertex(i as usize, x)).collect();
            b.graph.insert(e).expect("transversal edge");
        }
    }
    let f = b.m.field;
    for u in all_vectors(p, r) {
        let v = b.m.apply(&u);
        b.upsilon_plus.push(b.clique_of(&v));
        let w: Vec<u64> = v.iter().enumerate().map(|(i, &x)| f.add(x, b.shift(i))).collect();
        b.upsilon_minus.push(b.clique_of(&w));
    }
    b.upsilon_plus.sort();
    b.upsilon_minus.sort();
    b.qhat_plus = b.clique_of(&vec![0; q]);
    let v0: Vec<u64> = (0..q).map(|i| b.shift(i)).collect();
    b.qhat_minus = b.clique_of(&v0);
    b.e0 = b.qhat_plus[..r].into();
    b
}

/// A gadget under assembly: an r-graph with two decompositions.
#[derive(Clone, Debug)]
pub struct GlueState {
    pub n: u32,
    pub r: usize,
    pub edges: BTreeMap<VSet, usize>,
    pub upsilon_plus: BTreeSet<VSet>,
    pub upsilon_minus: BTreeSet<VSet>,
    pub copies: usize,
}

impl GlueState {
    fn from_blowup(b: &Blowup) -> Self {
        GlueState {
            n: b.graph.n,
            r: b.r,
            edges: b.graph.edges().map(|e| (e.clone(), 0)).collect(),
            upsilon_plus: b.upsilon_plus.iter().cloned().collect(),
            upsilon_minus: b.upsilon_minus.iter().cloned().collect(),
            copies: 1,
        }
    }

    fn minus_clique_containing(&self, e: &[u32]) -> Option<&VSet> {
        self.upsilon_minus.iter().find(|c| is_subset(e, c))
    }
}

/// Glues a fresh copy of `b` onto `state`, identifying `b.qhat_plus` with the
/// Υ⁻ clique `target` via `map` (a bijection V(Q̂⁺₀) → V(target)). Returns the
/// image of `b.qhat_minus`.
pub fn glue(state: &mut GlueState, target: &VSet, b: &Blowup, map: &HashMap<u32, u32>) -> Result<VSet> {
    if !state.upsilon_minus.contains(target) {
        return Err(Error::Malformed(format!("{target:?} is not in the current negative decomposition")));
    }
    let img: BTreeSet<u32> = b.qhat_plus.iter().filter_map(|v| map.get(v).copied()).collect();
    if map.len() != b.qhat_plus.len() || img.len() != b.qhat_plus.len() || !img.iter().copied().eq(target.iter().copied())
    {
        return Err(Error::Malformed("identification is not a bijection onto the target clique".into()));
    }
    let mut full: HashMap<u32, u32> = map.clone();
    for v in 1..=b.graph.n {
        full.entry(v).or_insert_with(|| {
            state.n += 1;
            state.n
        });
    }
    let tr = |c: &VSet| -> VSet {
        let mut o: VSet = c.iter().map(|v| full[v]).collect();
        o.sort_unstable();
        o
    };
    let copy = state.copies;
    for e in b.graph.edges() {
        state.edges.entry(tr(e)).or_insert(copy);
    }
    state.upsilon_minus.remove(target);
    for c in &b.upsilon_plus {
        if *c != b.qhat_plus {
            state.upsilon_plus.insert(tr(c));
        }
    }
    for c in &b.upsilon_minus {
        state.upsilon_minus.insert(tr(c));
    }
    state.copies += 1;
    Ok(tr(&b.qhat_minus))
}

/// Canonical identification of Q̂⁺₀ with `target ⊇ e`: e ↦ e₀ and
/// target \ e ↦ Q̂⁺₀ \ e₀, both in sorted order.
fn canonical_map(b: &Blowup, target: &VSet, e: &[u32]) -> HashMap<u32, u32> {
    let rest_t = set_minus(target, e);
    let rest_b = set_minus(&b.qhat_plus, &b.e0);
    b.e0
        .iter()
        .zip(e)
        .chain(rest_b.iter().zip(rest_t.iter()))
        .map(|(&a, &c)| (a, c))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaGadget {
    pub q: usize,
    pub r: usize,
    pub p: u64,
    pub graph: RGraph,
    pub upsilon_plus: Vec<VSet>,
    pub upsilon_minus: Vec<VSet>,
    pub qhat_plus: VSet,
    pub ring: BTreeMap<VSet, VSet>,
    pub f: VSet,
    /// Index of the blowup copy (0 = the initial one) that created each edge.
    pub provenance: BTreeMap<VSet, usize>,
}

impl OmegaGadget {
    /// The designated pair (Q̂⁺, Q̂⁻) with Q̂⁻ := Q̂^{e₀}, e₀ the first edge of Q̂⁺.
    pub fn pair(&self) -> (&VSet, &VSet, VSet) {
        let e0: VSet = self.qhat_plus[..self.r].into();
        (&self.qhat_plus, &self.ring[&e0], e0)
    }

    pub fn size_bound(&self) -> u128 {
        3 * (2 * self.q as u128).pow(self.r as u32) * binom(self.q as u64, self.r as u64).pow(2)
    }
}

pub fn build_omega(p: &Params) -> OmegaGadget {
    build_omega_qr(p.q, p.r)
}

pub fn build_omega_qr(q: usize, r: usize) -> OmegaGadget {
    let b = build_blowup_qr(q, r);
    let mut st = GlueState::from_blowup(&b);
    let qhat_plus = b.qhat_plus.clone();
    let rounds = subsets(&qhat_plus, r);
    for e in &rounds {
        for _ in 0..2 {
            let target = st.minus_clique_containing(e).expect("Υ⁻ decomposes Ω'").clone();
            let map = canonical_map(&b, &target, e);
            glue(&mut st, &target, &b, &map).expect("canonical map is a bijection");
        }
    }
    let ring: BTreeMap<VSet, VSet> = rounds
        .iter()
        .map(|e| (e.clone(), st.minus_clique_containing(e).unwrap().clone()))
        .collect();
    let mut f: BTreeSet<u32> = qhat_plus.iter().copied().collect();
    for c in ring.values() {
        f.extend(c.iter().copied());
    }
    let graph = RGraph::from_edges(st.n, r, st.edges.keys().cloned()).expect("valid edges");
    let g = OmegaGadget {
        q,
        r,
        p: b.p,
        graph,
        upsilon_plus: st.upsilon_plus.into_iter().collect(),
        upsilon_minus: st.upsilon_minus.into_iter().collect(),
        qhat_plus,
        ring,
        f: f.into_iter().collect(),
        provenance: st.edges,
    };
    let rep = validate_omega(&g);
    assert!(rep.ok, "gadget construction violated its invariants: {:?}", rep.violations);
    g
}

/// Cached gadget for (q, r).
pub fn omega_cached(q: usize, r: usize) -> Arc<OmegaGadget> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<OmegaGadget>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(g) = cache.lock().unwrap().get(&(q, r)) {
        return g.clone();
    }
    let g = Arc::new(build_omega_qr(q, r));
    cache.lock().unwrap().entry((q, r)).or_insert(g).clone()
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaReport {
    pub ok: bool,
    pub vertices: u32,
    pub edges: usize,
    pub size_bound: u128,
    pub violations: Vec<String>,
}

/// Checks: both Υ± decompose the graph; property (i); property (ii); the size bound.
pub fn validate_omega(g: &OmegaGadget) -> OmegaReport {
    let mut v = Vec::new();
    for (name, d) in [("upsilon+", &g.upsilon_plus), ("upsilon-", &g.upsilon_minus)] {
        let verdict = verify_decomposition(&g.graph, d);
        if !verdict.is_ok() {
            v.push(format!("{name} is not a decomposition: {verdict:?}"));
        }
    }
    if !g.upsilon_plus.contains(&g.qhat_plus) {
        v.push("qhat+ is not in upsilon+".into());
    }
    let edges_of_qhat = subsets(&g.qhat_plus, g.r);
    if g.ring.len() != edges_of_qhat.len() {
        v.push(format!("ring has {} cliques, expected {}", g.ring.len(), edges_of_qhat.len()));
    }
    let mut outer_seen: BTreeMap<u32, VSet> = BTreeMap::new();
    for e in &edges_of_qhat {
        let Some(c) = g.ring.get(e) else {
            v.push(format!("ring misses edge {e:?}"));
            continue;
        };
        if g.upsilon_minus.binary_search(c).is_err() {
            v.push(format!("ring clique {c:?} is not in upsilon-"));
        }
        let common: VSet = c.iter().copied().filter(|x| g.qhat_plus.contains(x)).collect();
        if common != *e {
            v.push(format!("(i): ring clique {c:?} meets qhat+ in {common:?}, not {e:?}"));
        }
        for x in set_minus(c, &g.qhat_plus) {
            if let Some(prev) = outer_seen.insert(x, e.clone()) {
                v.push(format!("(i): vertex {x} is outside qhat+ in ring cliques of {prev:?} and {e:?}"));
            }
        }
    }
    let mut f: BTreeSet<u32> = g.qhat_plus.iter().copied().collect();
    for c in g.ring.values() {
        f.extend(c.iter().copied());
    }
    if !f.iter().copied().eq(g.f.iter().copied()) {
        v.push("F does not match the ring".into());
    }
    for e in g.graph.edges() {
        let inter: VSet = e.iter().copied().filter(|x| f.contains(x)).collect();
        let ok = is_subset(&inter, &g.qhat_plus) || g.ring.values().any(|c| is_subset(&inter, c));
        if !ok {
            v.push(format!("(ii): edge {e:?} meets F in {inter:?}"));
        }
    }
    let bound = g.size_bound();
    if g.graph.len() as u128 > bound {
        v.push(format!("size {} exceeds bound {bound}", g.graph.len()));
    }
    OmegaReport {
        ok: v.is_empty(),
        vertices: g.graph.n,
        edges: g.graph.len(),
        size_bound: bound,
        violations: v,
    }
}

/// Text dump with sections `[graph]`, `[upsilon+]`, `[upsilon-]`, `[qhat+]`, `[ring]`.
/// Ring lines read `e | Q̂^e`.
pub fn dump(g: &OmegaGadget) -> String {
    let mut s = String::new();
    writeln!(s, "[graph]").unwrap();
    s.push_str(&io::write_graph(&g.graph));
    writeln!(s, "[upsilon+]").unwrap();
    s.push_str(&io::write_cliques(&g.upsilon_plus));
    writeln!(s, "[upsilon-]").unwrap();
    s.push_str(&io::write_cliques(&g.upsilon_minus));
    writeln!(s, "[qhat+]").unwrap();
    s.push_str(&io::write_cliques(std::slice::from_ref(&g.qhat_plus)));
    writeln!(s, "[ring]").unwrap();
    for (e, c) in &g.ring {
        let j = |x: &VSet| x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(s, "{} | {}", j(e), j(c)).unwrap();
    }
    s
}

/// Parses a dump back into its sections (graph, Υ⁺, Υ⁻, Q̂⁺, ring).
pub fn parse_dump(text: &str) -> Result<(RGraph, Vec<VSet>, Vec<VSet>, VSet, BTreeMap<VSet, VSet>)> {
    let mut sections: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    let mut cur: Option<&str> = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            let name = &t[1..t.len() - 1];
            sections.insert(name, (i, String::new()));
            cur = Some(name);
            continue;
        }
        match cur {
            Some(c) => {
                let sec = sections.get_mut(c).unwrap();
                sec.1.push_str(line);
                sec.1.push('\n');
            }
            None if t.is_empty() || t.starts_with('#') => {}
            None => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "content before the first section".into(),
                })
            }
        }
    }
    let get = |name: &str| -> Result<&(usize, String)> {
        sections.get(name).ok_or(Error::Parse {
            line: text.lines().count().max(1),
            msg: format!("missing section [{name}]"),
        })
    };
    // line numbers inside sections are shifted to file line numbers
    let shift = |off: usize, e: Error| match e {
        Error::Parse { line, msg } => Error::Parse { line: line + off + 1, msg },
        other => other,
    };
    let (o, t) = get("graph")?;
    let graph = io::parse_graph(t).map_err(|e| shift(*o, e))?;
    let (o, t) = get("upsilon+")?;
    let up = io::parse_cliques(t, None).map_err(|e| shift(*o, e))?;
    let (o, t) = get("upsilon-")?;
    let um = io::parse_cliques(t, None).map_err(|e| shift(*o, e))?;
    let (o, t) = get("qhat+")?;
    let qh = io::parse_cliques(t, None).map_err(|e| shift(*o, e))?;
    let qhat = qh.into_iter().next().ok_or(Error::Parse {
        line: o + 1,
        msg: "empty [qhat+]".into(),
    })?;
    let (o, t) = get("ring")?;
    let mut ring = BTreeMap::new();
    for (i, line) in t.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line.split_once('|').ok_or(Error::Parse {
            line: o + i + 2,
            msg: "ring line must read `e | clique`".into(),
        })?;
        let ea = io::parse_cliques(a, None).map_err(|e| shift(o + i, e))?;
        let cb = io::parse_cliques(b, None).map_err(|e| shift(o + i, e))?;
        match (ea.first(), cb.first()) {
            (Some(e), Some(c)) => {
                ring.insert(e.clone(), c.clone());
            }
            _ => {
                return Err(Error::Parse {
                    line: o + i + 2,
                    msg: "empty ring entry".into(),
                })
            }
        }
    }
    Ok((graph, up, um, qhat, ring))
}

/// Edges of Ω inside V(Q̂⁺) ∪ V(Q̂⁻) that lie in neither clique (should be none).
pub fn pair_view_violations(g: &OmegaGadget) -> Vec<VSet> {
    let (qp, qm, _) = g.pair();
    let u: VSet = {
        let mut s: BTreeSet<u32> = qp.iter().copied().collect();
        s.extend(qm.iter().copied());
        s.into_iter().collect()
    };
    let mut bad = Vec::new();
    for_each_subset(&u, g.r, |e| {
        if g.graph.contains(e) && !is_subset(e, qp) && !is_subset(e, qm) {
            bad.push(vset(e));
        }
    });
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::{boundary_qr, intersection_size, CliqueVec};

    #[test]
    fn blowup_q3_r2() {
        let b = build_blowup_qr(3, 2);
        assert_eq!(b.p, 3);
        assert_eq!(b.graph.n, 9);
        assert_eq!(b.graph.len(), 27);
        assert_eq!(b.upsilon_plus.len(), 9);
        assert_eq!(b.upsilon_minus.len(), 9);
        assert_eq!(b.qhat_plus, vset(&[1, 4, 7]));
        assert_eq!(b.qhat_minus, vset(&[1, 4, 8]));
        assert_eq!(b.e0, vset(&[1, 4]));
        assert_eq!(intersection_size(&b.qhat_plus, &b.qhat_minus), 2);
        for e in b.graph.edges() {
            for (plus, d) in [(true, &b.upsilon_plus), (false, &b.upsilon_minus)] {
                let hits: Vec<_> = d.iter().filter(|c| is_subset(e, c)).collect();
                assert_eq!(hits.len(), 1);
                assert_eq!(&b.clique_containing(e, plus).unwrap(), hits[0]);
            }
        }
    }

    #[test]
    fn glue_two_blowups() {
        let b = build_blowup_qr(3, 2);
        let mut st = GlueState::from_blowup(&b);
        let target = b.qhat_minus.clone();
        let map = canonical_map(&b, &target, &b.e0);
        let old_plus = CliqueVec::indicator(&b.upsilon_plus);
        let old_minus = CliqueVec::indicator(&b.upsilon_minus);
        glue(&mut st, &target, &b, &map).unwrap();
        assert_eq!(st.n, 15);
        assert_eq!(st.edges.len(), 51);
        let g = RGraph::from_edges(st.n, 2, st.edges.keys().cloned()).unwrap();
        let up: Vec<VSet> = st.upsilon_plus.iter().cloned().collect();
        let um: Vec<VSet> = st.upsilon_minus.iter().cloned().collect();
        assert!(verify_decomposition(&g, &up).is_ok());
        assert!(verify_decomposition(&g, &um).is_ok());
        // signed identity: the second copy's Υ⁺ − Υ⁻ is relabelled through the gluing
        let mut full = map.clone();
        let mut next = 9;
        for v in 1..=9 {
            full.entry(v).or_insert_with(|| {
                next += 1;
                next
            });
        }
        let tr = |c: &VSet| {
            let mut o: VSet = c.iter().map(|v| full[v]).collect();
            o.sort_unstable();
            o
        };
        let mut rhs = old_plus.sub(&old_minus);
        for c in &b.upsilon_plus {
            rhs.add(tr(c), 1);
        }
        for c in &b.upsilon_minus {
            rhs.add(tr(c), -1);
        }
        let lhs = CliqueVec::indicator(&up).sub(&CliqueVec::indicator(&um));
        assert_eq!(lhs, rhs);
        let mut bad = map.clone();
        bad.insert(1, 2);
        assert!(glue(&mut st.clone(), &target, &b, &bad).is_err());
    }

    #[test]
    fn omega_sizes() {
        for (q, r, nv, ne) in [(3, 2, 45, 171), (4, 3, 148, 4468), (4, 2, 212, 1878)] {
            let g = build_omega_qr(q, r);
            assert_eq!((g.graph.n, g.graph.len()), (nv, ne), "q={q} r={r}");
            let rep = validate_omega(&g);
            assert!(rep.ok, "{:?}", rep.violations);
            assert!(pair_view_violations(&g).is_empty());
            let bp = boundary_qr(&CliqueVec::indicator(&g.upsilon_plus), q, r).unwrap();
            let bm = boundary_qr(&CliqueVec::indicator(&g.upsilon_minus), q, r).unwrap();
            assert_eq!(bp, g.graph.indicator());
            assert_eq!(bm, g.graph.indicator());
        }
    }

    #[test]
    fn validator_catches_mutations() {
        let g = build_omega_qr(3, 2);
        let mut m = g.clone();
        m.upsilon_minus.pop();
        let rep = validate_omega(&m);
        assert!(!rep.ok);
        assert!(rep.violations[0].contains("upsilon-"));

        let mut m = g.clone();
        let e = m.ring.keys().next().unwrap().clone();
        let ringset: BTreeSet<VSet> = m.ring.values().cloned().collect();
        let other = m.upsilon_minus.iter().find(|c| !ringset.contains(*c)).unwrap().clone();
        m.ring.insert(e, other);
        let rep = validate_omega(&m);
        assert!(!rep.ok);
        assert!(rep.violations.iter().any(|s| s.starts_with("(i)")));
    }

    #[test]
    fn dump_round_trip() {
        let g = omega_cached(3, 2);
        let t = dump(&g);
        let (graph, up, um, qh, ring) = parse_dump(&t).unwrap();
        assert_eq!(graph, g.graph);
        assert_eq!(up, g.upsilon_plus);
        assert_eq!(um, g.upsilon_minus);
        assert_eq!(qh, g.qhat_plus);
        assert_eq!(ring, g.ring);
        assert!(Arc::ptr_eq(&g, &omega_cached(3, 2)));
        assert_eq!(dump(&build_omega_qr(3, 2)), t);
    }
}
