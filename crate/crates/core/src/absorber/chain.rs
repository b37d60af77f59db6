//! Solve chain of the full integral absorber: Φ ∈ Z^{𝒬₀'} with ∂Φ = J for a
//! divisible J supported in R. Rainbow and monochromatic configurations are
//! found by bounded searches; every stage checks its boundary identity.

use super::colour::{distinct_assignment, ColorSystem};
use super::generate::GeneratorReport;
use crate::decode::{decoder_qr, integral_decompose};
use crate::embed::{extend, Constraints, Template};
use crate::error::{Error, Result};
use crate::exchange::{anchor_pair, anchor_single, AnchorKind, Embedding};
use crate::exchange::gadget_template;
use crate::hypercore::{boundary_qr, for_each_subset, set_minus, CliqueVec, IntVec, VSet};
use crate::omega::{omega_cached, OmegaGadget};
use crate::rng::Rng;
use rand::Rng as _;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

/// The parts of the full construction the solve chain needs.
#[derive(Clone, Debug, Serialize)]
pub struct RandomFragment {
    pub q: usize,
    pub r: usize,
    pub n: u32,
    pub report: GeneratorReport,
    pub colours: ColorSystem,
    /// 𝒬₀ = ⋃ σ_i(Gset).
    pub q0: Vec<VSet>,
    /// Decoder (q+r)-set Z_e for each edge of ⋃𝒬₀.
    #[serde(serialize_with = "super::as_pairs::serialize")]
    pub decoders: BTreeMap<VSet, VSet>,
    /// Focusing clique Q_e for each e ∈ R.
    #[serde(serialize_with = "super::as_pairs::serialize")]
    pub focusing: BTreeMap<VSet, VSet>,
    /// 𝒬₀' = 𝒬₀ ∪ decoder cliques ∪ focusing cliques.
    pub q0prime: Vec<VSet>,
}

/// Sizes of the intermediate vectors of one solve.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ChainTrace {
    pub phi0: usize,
    pub phi1: usize,
    pub phi2: usize,
    pub cancelled_pairs: usize,
    pub phi3: usize,
    pub phi4_terms: usize,
    pub phi5: usize,
    pub phi7: usize,
}

fn stage(name: &str, detail: impl Into<String>) -> Error {
    Error::stage(name, detail)
}

fn edges_of(c: &[u32], r: usize) -> Vec<VSet> {
    let mut v = Vec::new();
    for_each_subset(c, r, |e| v.push(VSet::from_slice(e)));
    v
}

fn check_boundary(name: &str, phi: &CliqueVec, target: &IntVec, q: usize, r: usize) -> Result<()> {
    if boundary_qr(phi, q, r)? != *target {
        return Err(stage(name, "boundary identity fails"));
    }
    Ok(())
}

/// Φ⁰ = Σ J_e·Q_e and J¹ = J − ∂Φ⁰, which must live on coloured edges.
pub fn phi0_focus(frag: &RandomFragment, j: &IntVec) -> Result<(CliqueVec, IntVec)> {
    let mut phi0 = CliqueVec::new();
    for (e, x) in j.iter() {
        let qe = frag
            .focusing
            .get(e)
            .ok_or_else(|| stage("phi0", format!("no focusing clique for edge {e:?}")))?;
        phi0.add(qe.clone(), x);
    }
    let j1 = j.sub(&boundary_qr(&phi0, frag.q, frag.r)?);
    if let Some((e, _)) = j1.iter().find(|(e, _)| !frag.colours.is_coloured(e)) {
        return Err(stage("phi0", format!("J1 is nonzero on uncoloured edge {e:?}")));
    }
    Ok((phi0, j1))
}

/// Colours for the coloured edges of the anchored cliques, one each.
fn anchored_colours(cs: &ColorSystem, anchored: &[VSet]) -> HashSet<usize> {
    let mut out = HashSet::new();
    for e in anchored {
        let cols = cs.colours(e);
        if let Some(c) = cols.iter().find(|c| !out.contains(*c)).or(cols.first()) {
            out.insert(*c);
        }
    }
    out
}

/// A gadget copy on the given anchor whose new edges carry distinct colours
/// avoiding `forbidden`. Returns the embedding and its colour assignment.
#[allow(clippy::too_many_arguments)]
pub fn rainbow_configuration(
    g: &Arc<OmegaGadget>,
    kind: AnchorKind,
    anchor: &[(u32, u32)],
    cs: &ColorSystem,
    forbidden: &HashSet<usize>,
    host_n: u32,
    rng: &mut Rng,
    budget: u64,
) -> Result<(Embedding, Vec<(VSet, usize)>)> {
    let t = gadget_template(g, kind);
    let usable = |e: &[u32]| cs.is_coloured(e);
    let new_edges: Vec<VSet> = t
        .edges
        .iter()
        .filter(|e| !crate::hypercore::is_subset(e, &t.f))
        .cloned()
        .collect();
    let accept = |map: &[u32]| {
        let imgs: Vec<VSet> = new_edges.iter().map(|e| image(map, e)).collect();
        cs.rainbow_assignment(&imgs, forbidden).is_some()
    };
    let c = Constraints {
        usable: &usable,
        accept: Some(&accept),
        vertex_ok: None,
    };
    let ext = extend(&t, anchor, host_n, &c, rng, budget)?;
    let emb = Embedding {
        gadget: g.clone(),
        kind,
        ext,
    };
    let imgs: Vec<VSet> = new_edges.iter().map(|e| emb.image(e)).collect();
    let cols = cs
        .rainbow_assignment(&imgs, forbidden)
        .ok_or_else(|| Error::Exhausted("accepted configuration lost its colouring".into()))?;
    let assignment: Vec<(VSet, usize)> = imgs.into_iter().zip(cols).collect();
    debug_assert!(cs.validate_rainbow(&assignment));
    Ok((emb, assignment))
}

fn image(map: &[u32], s: &[u32]) -> VSet {
    let mut o: VSet = s.iter().map(|&v| map[v as usize - 1]).collect();
    o.sort_unstable();
    o
}

fn add_move(phi: &mut CliqueVec, emb: &Embedding, c: i64) {
    phi.add_scaled(&emb.minus(), c);
    phi.add_scaled(&emb.plus(), -c);
}

/// Φ²: every clique of Φ¹ split through a rainbow gadget copy.
pub fn phi2_rainbow_split(
    frag: &RandomFragment,
    phi1: &CliqueVec,
    rng: &mut Rng,
    budget: u64,
) -> Result<(CliqueVec, Vec<Vec<(VSet, usize)>>)> {
    let g = omega_cached(frag.q, frag.r);
    let mut phi2 = phi1.clone();
    let mut colourings = Vec::new();
    for (c, x) in phi1.iter() {
        let forbidden = anchored_colours(&frag.colours, &edges_of(c, frag.r));
        let anchor = anchor_single(&g, c)?;
        let (emb, cols) =
            rainbow_configuration(&g, AnchorKind::Single, &anchor, &frag.colours, &forbidden, frag.n, rng, budget)
                .map_err(|e| stage("phi2", format!("no rainbow split of {c:?}: {e}")))?;
        add_move(&mut phi2, &emb, x);
        colourings.push(cols);
    }
    Ok((phi2, colourings))
}

/// A clique through `e` meeting `avoid` only in `e`, rainbow off `e`.
fn rainbow_bridge(frag: &RandomFragment, e: &[u32], avoid: &[u32], rng: &mut Rng, attempts: usize) -> Option<VSet> {
    for _ in 0..attempts {
        let mut c: VSet = VSet::from_slice(e);
        while c.len() < frag.q {
            let v = rng.random_range(1..=frag.n);
            if !avoid.contains(&v) && !c.contains(&v) {
                c.push(v);
            }
        }
        c.sort_unstable();
        let others: Vec<VSet> = edges_of(&c, frag.r).into_iter().filter(|f| f.as_slice() != e).collect();
        if frag.colours.rainbow_assignment(&others, &HashSet::new()).is_some() {
            return Some(c);
        }
    }
    None
}

/// Φ³: signed cliques through each uncoloured edge are paired off and
/// cancelled through a rainbow bridge Q' and two rainbow eliminations.
pub fn phi3_cancel(
    frag: &RandomFragment,
    phi2: &CliqueVec,
    rng: &mut Rng,
    budget: u64,
    attempts: usize,
) -> Result<(CliqueVec, usize)> {
    let g = omega_cached(frag.q, frag.r);
    let mut by_edge: BTreeMap<VSet, Vec<(VSet, i64)>> = BTreeMap::new();
    for (c, x) in phi2.iter() {
        for e in edges_of(c, frag.r) {
            if !frag.colours.is_coloured(&e) {
                by_edge.entry(e).or_default().push((c.clone(), x));
            }
        }
    }
    let mut phi3 = phi2.clone();
    let mut pairs = 0;
    for (e, cs) in by_edge {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (c, x) in cs {
            let list = if x > 0 { &mut pos } else { &mut neg };
            list.extend(std::iter::repeat_n(c, x.unsigned_abs() as usize));
        }
        if pos.len() != neg.len() {
            return Err(stage("phi3", format!("uncoloured edge {e:?} carries net weight")));
        }
        for (p, m) in pos.iter().zip(&neg) {
            let avoid: Vec<u32> = p.iter().chain(m.iter()).copied().collect();
            let bridge = rainbow_bridge(frag, &e, &avoid, rng, attempts)
                .ok_or_else(|| stage("phi3", format!("no rainbow bridge through {e:?}")))?;
            for (a, b) in [(p, &bridge), (&bridge, m)] {
                let mut anchored = edges_of(a, frag.r);
                anchored.extend(edges_of(b, frag.r));
                anchored.retain(|f| f.as_slice() != e.as_slice());
                let forbidden = anchored_colours(&frag.colours, &anchored);
                let anchor = anchor_pair(&g, a, b)?;
                let (emb, _) = rainbow_configuration(
                    &g,
                    AnchorKind::Pair,
                    &anchor,
                    &frag.colours,
                    &forbidden,
                    frag.n,
                    rng,
                    budget,
                )
                .map_err(|err| stage("phi3", format!("no rainbow elimination of {a:?}, {b:?}: {err}")))?;
                add_move(&mut phi3, &emb, 1);
            }
            pairs += 1;
        }
    }
    Ok((phi3, pairs))
}

/// Template of Ω rooted at V(Q̂⁺) and the ring cliques.
fn ring_template(g: &OmegaGadget) -> Arc<Template> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Template>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&(g.q, g.r)) {
        return t.clone();
    }
    let mut f: VSet = g.f.clone();
    f.sort_unstable();
    let t = Arc::new(Template::new(g.graph.n, g.r, g.graph.edges().cloned().collect(), f));
    cache.lock().unwrap().entry((g.q, g.r)).or_insert(t).clone()
}

/// A signed monochromatic clique σ_i(P) with P unsaturated in K.
#[derive(Clone, Debug, Serialize)]
pub struct MonoTerm {
    pub clique: VSet,
    pub colour: usize,
    pub coeff: i64,
}

/// Φ⁴: every rainbow clique exchanged for monochromatic unsaturated cliques
/// of distinct colours, the ring clique on edge e taking the colour ψ(e).
pub fn phi4_monochromatic(
    frag: &RandomFragment,
    phi3: &CliqueVec,
    rng: &mut Rng,
    budget: u64,
    attempts: usize,
) -> Result<(CliqueVec, Vec<MonoTerm>)> {
    let g = omega_cached(frag.q, frag.r);
    let t = ring_template(&g);
    let cs = &frag.colours;
    let others: Vec<VSet> = g
        .upsilon_plus
        .iter()
        .chain(&g.upsilon_minus)
        .filter(|c| **c != g.qhat_plus && !g.ring.values().any(|x| x == *c))
        .cloned()
        .collect();
    let mut phi4 = CliqueVec::new();
    let mut terms = Vec::new();
    for (c, x) in phi3.iter() {
        let psi = cs
            .rainbow_clique(c)
            .ok_or_else(|| stage("phi4", format!("clique {c:?} is not rainbow")))?;
        let psi: HashMap<VSet, usize> = psi.into_iter().collect();
        let used: HashSet<usize> = psi.values().copied().collect();
        let mut anchor = anchor_single(&g, c)?;
        let mut taken: HashSet<u32> = c.iter().copied().collect();
        let mut ring_terms = Vec::new();
        for (e0, qe) in &g.ring {
            let host_e = image_pairs(&anchor, e0);
            let colour = psi[&host_e];
            let extra = set_minus(qe, e0);
            let mut found = None;
            for _ in 0..attempts {
                let pick: Vec<u32> = (0..extra.len()).map(|_| rng.random_range(1..=frag.n)).collect();
                let mut distinct = pick.clone();
                distinct.sort_unstable();
                distinct.dedup();
                if distinct.len() != pick.len() || pick.iter().any(|v| taken.contains(v)) {
                    continue;
                }
                let mut img: VSet = host_e.iter().chain(pick.iter()).copied().collect();
                img.sort_unstable();
                if cs.mono_unsaturated(colour, &img) {
                    found = Some((pick, img));
                    break;
                }
            }
            let (pick, img) =
                found.ok_or_else(|| stage("phi4", format!("no ring clique of colour {colour} on {host_e:?}")))?;
            for (&v, &h) in extra.iter().zip(&pick) {
                anchor.push((v, h));
                taken.insert(h);
            }
            ring_terms.push((qe.clone(), img, colour));
        }
        let accept = |map: &[u32]| {
            let opts: Vec<Vec<usize>> = others
                .iter()
                .map(|o| {
                    let img = image(map, o);
                    (0..cs.u).filter(|i| !used.contains(i) && cs.mono_unsaturated(*i, &img)).collect()
                })
                .collect();
            distinct_assignment(&opts).is_some()
        };
        let yes = |_: &[u32]| true;
        let cons = Constraints {
            usable: &yes,
            accept: Some(&accept),
            vertex_ok: None,
        };
        let ext = extend(&t, &anchor, frag.n, &cons, rng, budget)
            .map_err(|e| stage("phi4", format!("no monochromatic configuration on {c:?}: {e}")))?;
        let emb = Embedding {
            gadget: g.clone(),
            kind: AnchorKind::Single,
            ext,
        };
        let opts: Vec<Vec<usize>> = others
            .iter()
            .map(|o| {
                let img = emb.image(o);
                (0..cs.u).filter(|i| !used.contains(i) && cs.mono_unsaturated(*i, &img)).collect()
            })
            .collect();
        let cols = distinct_assignment(&opts).ok_or_else(|| stage("phi4", "colouring vanished"))?;
        let sign_of = |o: &VSet| if g.upsilon_minus.contains(o) { 1 } else { -1 };
        for (o, col) in others.iter().zip(cols) {
            let s = sign_of(o) * x;
            terms.push(MonoTerm {
                clique: emb.image(o),
                colour: col,
                coeff: s,
            });
        }
        for (qe, img, colour) in ring_terms {
            debug_assert_eq!(emb.image(&qe), img);
            terms.push(MonoTerm {
                clique: img,
                colour,
                coeff: sign_of(&qe) * x,
            });
        }
        add_move(&mut phi4, &emb, x);
        phi4.add(c.clone(), x);
    }
    Ok((phi4, terms))
}

fn image_pairs(anchor: &[(u32, u32)], s: &[u32]) -> VSet {
    let mut o: VSet = s
        .iter()
        .map(|v| anchor.iter().find(|(a, _)| a == v).expect("anchored vertex").1)
        .collect();
    o.sort_unstable();
    o
}

/// Φ⁵ ∈ Γ^{𝒬₀}: each monochromatic σ_i(P) rewritten over σ_i(Gset) modulo N.
pub fn phi5_reduce(frag: &RandomFragment, terms: &[MonoTerm]) -> Result<BTreeMap<VSet, u64>> {
    let m = frag.report.modulus;
    let mut cache: HashMap<VSet, Vec<(usize, u64)>> = HashMap::new();
    let mut out: BTreeMap<VSet, u64> = BTreeMap::new();
    for t in terms {
        let p = frag.colours.preimage(t.colour, &t.clique);
        if !cache.contains_key(&p) {
            let lam = frag
                .report
                .express(&p)?
                .ok_or_else(|| stage("phi5", format!("boundary of {p:?} is not generated")))?;
            let sparse = lam.into_iter().enumerate().filter(|(_, x)| *x != 0).collect();
            cache.insert(p.clone(), sparse);
        }
        let c = t.coeff.rem_euclid(m as i64) as u64;
        for &(j, l) in &cache[&p] {
            let key = frag.colours.image(t.colour, &frag.report.gset[j]);
            let slot = out.entry(key).or_insert(0);
            *slot = (*slot + c * l) % m;
        }
    }
    out.retain(|_, x| *x != 0);
    Ok(out)
}

/// Φ⁶ ∈ [N]^{𝒬₀}: each entry replaced by its representative in {1, …, N}.
pub fn phi6_lift(frag: &RandomFragment, phi5: &BTreeMap<VSet, u64>) -> CliqueVec {
    let m = frag.report.modulus;
    let mut out = CliqueVec::new();
    for c in &frag.q0 {
        let x = phi5.get(c).copied().unwrap_or(0) % m;
        out.add(c.clone(), if x == 0 { m as i64 } else { x as i64 });
    }
    out
}

/// Φ⁷ = Σ (J²_e / N)·Ψ^e over the decoder sets.
pub fn phi7_decode(frag: &RandomFragment, j2: &IntVec) -> Result<CliqueVec> {
    let table = decoder_qr(frag.q, frag.r);
    let mut out = CliqueVec::new();
    for (e, x) in j2.iter() {
        if x % table.big_n != 0 {
            return Err(stage("phi7", format!("J2 at {e:?} is {x}, not a multiple of N")));
        }
        let z = frag
            .decoders
            .get(e)
            .ok_or_else(|| stage("phi7", format!("no decoder set for edge {e:?}")))?;
        out.add_scaled(&table.materialize(z, e), x / table.big_n);
    }
    Ok(out)
}

/// Runs Φ⁰ … Φ⁷ and returns Φ = Φ⁰ + Φ⁶ + Φ⁷ ∈ Z^{𝒬₀'} with ∂Φ = J.
pub fn solve_q0prime(
    frag: &RandomFragment,
    j: &IntVec,
    rng: &mut Rng,
    budget: u64,
    attempts: usize,
) -> Result<(CliqueVec, ChainTrace)> {
    let (q, r) = (frag.q, frag.r);
    let mut tr = ChainTrace::default();
    let (phi0, j1) = phi0_focus(frag, j)?;
    tr.phi0 = phi0.len();
    let phi1 = integral_decompose(&j1, q, r, frag.n).map_err(|e| stage("phi1", e.to_string()))?;
    check_boundary("phi1", &phi1, &j1, q, r)?;
    tr.phi1 = phi1.len();
    let (phi2, _) = phi2_rainbow_split(frag, &phi1, rng, budget)?;
    check_boundary("phi2", &phi2, &j1, q, r)?;
    tr.phi2 = phi2.len();
    let (phi3, pairs) = phi3_cancel(frag, &phi2, rng, budget, attempts)?;
    check_boundary("phi3", &phi3, &j1, q, r)?;
    tr.phi3 = phi3.len();
    tr.cancelled_pairs = pairs;
    let (phi4, terms) = phi4_monochromatic(frag, &phi3, rng, budget, attempts)?;
    check_boundary("phi4", &phi4, &j1, q, r)?;
    let mut from_terms = CliqueVec::new();
    for t in &terms {
        from_terms.add(t.clique.clone(), t.coeff);
    }
    if from_terms != phi4 {
        return Err(stage("phi4", "monochromatic terms disagree with the exchanged vector"));
    }
    tr.phi4_terms = terms.len();
    let phi5 = phi5_reduce(frag, &terms)?;
    tr.phi5 = phi5.len();
    let m = frag.report.modulus as i64;
    let mut phi5_int = CliqueVec::new();
    for (c, x) in &phi5 {
        phi5_int.add(c.clone(), *x as i64);
    }
    let diff = j1.sub(&boundary_qr(&phi5_int, q, r)?);
    if let Some((e, x)) = diff.iter().find(|(_, x)| x % m != 0) {
        return Err(stage("phi5", format!("boundary differs from J1 at {e:?} by {x}, not 0 mod N")));
    }
    let phi6 = phi6_lift(frag, &phi5);
    let j2 = j1.sub(&boundary_qr(&phi6, q, r)?);
    let phi7 = phi7_decode(frag, &j2)?;
    check_boundary("phi7", &phi7, &j2, q, r)?;
    tr.phi7 = phi7.len();
    let mut phi = phi0;
    phi.add_scaled(&phi6, 1);
    phi.add_scaled(&phi7, 1);
    check_boundary("phi", &phi, j, q, r)?;
    Ok((phi, tr))
}
