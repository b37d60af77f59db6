//! The absorber book: splitting copies for every clique of 𝒬₁ ∪ 𝒬₂, pair
//! eliminations for near cliques, further eliminations for bad cliques, and
//! the families 𝒬⁺, 𝒬⁻ with A = ∪𝒬⁻.

use super::integral::{integral_absorber, random_superset, rounding_multiplicity_limit, IntegralAbsorber};
use super::{edge_key, max_multiplicity, AbsorberConfig, CopyRule, EdgeSet};
use crate::decode::{decoder_qr, DecoderTable};
use crate::embed::{extend, Constraints};
use crate::error::{Error, Result};
use crate::exchange::{anchor_pair, anchor_single, gadget_template, AnchorKind};
use crate::hypercore::{for_each_subset, intersection_size, is_subset, set_minus, subsets, Params, RGraph, VSet};
use crate::omega::{omega_cached, OmegaGadget};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

pub const BOOK_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditLine {
    pub name: String,
    pub ok: bool,
    /// A failing required line aborts the build.
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Integral,
    Decoder,
}

/// One splitting gadget: Ω anchored with Q̂⁺ ↦ `clique`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitCopy {
    pub clique: VSet,
    pub source: Source,
    pub sign: i8,
    pub copy: u32,
    /// map[v − 1] is the image of gadget vertex v.
    pub map: Vec<u32>,
    /// (edge f of the clique, near clique through f).
    pub near: Vec<(VSet, VSet)>,
}

/// A negative clique of a pair elimination sharing an edge with P⁻ besides f.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BadClique {
    pub clique: VSet,
    pub edge: VSet,
    /// The far positive clique of P⁻'s splitting gadget through `edge`.
    pub target: VSet,
    pub further: usize,
}

/// Elimination gadget for the near pair (P⁺, P⁻) at the edge f.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairGadget {
    pub edge: VSet,
    pub plus: VSet,
    pub minus: VSet,
    pub plus_split: usize,
    pub minus_split: usize,
    pub map: Vec<u32>,
    pub bad: Vec<BadClique>,
}

/// Elimination gadget for (target, bad clique), meeting exactly in `edge`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FurtherGadget {
    pub pair: usize,
    pub plus: VSet,
    pub minus: VSet,
    pub edge: VSet,
    pub map: Vec<u32>,
}

/// Lookups derived from the registries.
#[derive(Clone, Debug, Default)]
pub struct BookIndex {
    pub split_copies: HashMap<(VSet, i8), Vec<usize>>,
    pub pair_of: HashMap<(VSet, VSet), usize>,
    pub q_plus: HashSet<VSet>,
    pub q_minus: HashSet<VSet>,
    /// A = ∪𝒬⁻.
    pub a_edges: EdgeSet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AbsorberBook {
    pub version: u32,
    pub q: usize,
    pub r: usize,
    pub n: u32,
    pub big_n: i64,
    pub reserve: RGraph,
    pub config: AbsorberConfig,
    pub integral: IntegralAbsorber,
    /// Decoder set Z_e for every edge of ∪𝒬₁.
    #[serde(with = "super::as_pairs")]
    pub zsets: BTreeMap<VSet, VSet>,
    pub q2: Vec<VSet>,
    /// Copies (positive, negative) of each clique of 𝒬₁ ∪ 𝒬₂.
    #[serde(with = "super::as_pairs")]
    pub copies: BTreeMap<VSet, (usize, usize)>,
    pub splits: Vec<SplitCopy>,
    pub pairs: Vec<PairGadget>,
    pub further: Vec<FurtherGadget>,
    pub audits: Vec<AuditLine>,
    pub stats: serde_json::Value,
    #[serde(skip)]
    pub index: BookIndex,
}

/// Cliques of Ω by role.
pub(crate) struct Shape {
    pub g: std::sync::Arc<OmegaGadget>,
    pub hp: VSet,
    pub hm: VSet,
    /// Ring cliques Q̂^ê keyed by the edge ê of Q̂⁺.
    pub ring: Vec<(VSet, VSet)>,
    pub plus_rest: Vec<VSet>,
    pub minus_rest: Vec<VSet>,
}

impl Shape {
    pub fn new(q: usize, r: usize) -> Self {
        let g = omega_cached(q, r);
        let (hp, hm, _) = g.pair();
        let (hp, hm) = (hp.clone(), hm.clone());
        let ring = g.ring.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        let plus_rest = g.upsilon_plus.iter().filter(|c| **c != hp).cloned().collect();
        let minus_rest = g.upsilon_minus.iter().filter(|c| **c != hm).cloned().collect();
        Shape {
            g,
            hp,
            hm,
            ring,
            plus_rest,
            minus_rest,
        }
    }
}

pub(crate) fn img(map: &[u32], s: &[u32]) -> VSet {
    let mut o: VSet = s.iter().map(|&v| map[v as usize - 1]).collect();
    o.sort_unstable();
    o
}

fn edges_of(c: &[u32], r: usize) -> Vec<VSet> {
    subsets(c, r)
}

impl AbsorberBook {
    /// Parses a serialized book and rebuilds its index.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut b: AbsorberBook =
            serde_json::from_str(text).map_err(|e| Error::Malformed(format!("absorber book: {e}")))?;
        if b.version != BOOK_VERSION {
            return Err(Error::Malformed(format!(
                "absorber book version {} (expected {BOOK_VERSION})",
                b.version
            )));
        }
        b.rebuild_index();
        Ok(b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("book serializes")
    }

    /// ∪𝒬₁ ∪ ∪𝒬₂.
    pub fn a0_edges(&self) -> EdgeSet {
        let mut s = EdgeSet::new();
        for c in self.integral.q1.iter().chain(&self.q2) {
            s.insert_clique(c, self.r);
        }
        s
    }

    /// The graph A carried by 𝒬⁻, as sorted edges.
    pub fn a_graph(&self) -> RGraph {
        let mut edges = BTreeSet::new();
        for c in &self.index.q_minus {
            for_each_subset(c, self.r, |e| {
                edges.insert(VSet::from_slice(e));
            });
        }
        RGraph::from_edges(self.n, self.r, edges).expect("edges inside [n]")
    }

    pub fn rebuild_index(&mut self) {
        let sh = Shape::new(self.q, self.r);
        let mut ix = BookIndex::default();
        for (i, s) in self.splits.iter().enumerate() {
            ix.split_copies.entry((s.clique.clone(), s.sign)).or_default().push(i);
            let near: HashSet<&VSet> = s.near.iter().map(|(_, c)| c).collect();
            for c in &sh.g.upsilon_minus {
                let x = img(&s.map, c);
                if s.sign > 0 {
                    ix.q_plus.insert(x);
                } else if !near.contains(&x) {
                    ix.q_minus.insert(x);
                }
            }
            for c in &sh.plus_rest {
                let x = img(&s.map, c);
                if s.sign > 0 {
                    ix.q_minus.insert(x);
                } else {
                    ix.q_plus.insert(x);
                }
            }
        }
        for (i, p) in self.pairs.iter().enumerate() {
            ix.pair_of.insert((p.plus.clone(), p.minus.clone()), i);
            let bad: HashSet<&VSet> = p.bad.iter().map(|b| &b.clique).collect();
            for c in &sh.minus_rest {
                ix.q_plus.insert(img(&p.map, c));
            }
            for c in &sh.plus_rest {
                let x = img(&p.map, c);
                if !bad.contains(&x) {
                    ix.q_minus.insert(x);
                }
            }
        }
        for f in &self.further {
            for c in &sh.minus_rest {
                ix.q_plus.insert(img(&f.map, c));
            }
            for c in &sh.plus_rest {
                ix.q_minus.insert(img(&f.map, c));
            }
        }
        for c in &ix.q_minus {
            ix.a_edges.insert_clique(c, self.r);
        }
        self.index = ix;
    }

    pub fn failed_audits(&self) -> Vec<&AuditLine> {
        self.audits.iter().filter(|a| a.required && !a.ok).collect()
    }
}

/// Copies (positive, negative) of a clique under the configured rule.
fn copy_count(rule: CopyRule, dec: &DecoderTable, source: Source, clique: &[u32], e: &[u32]) -> (usize, usize) {
    match rule {
        CopyRule::Uniform => (dec.bound() as usize, dec.bound() as usize),
        CopyRule::Fixed(k) => (k, k),
        // rounded entries lie in (−N/2, N/2]
        CopyRule::Exact => match source {
            Source::Integral => ((dec.big_n / 2) as usize, ((dec.big_n - 1) / 2) as usize),
            Source::Decoder => {
                let k = dec.coeff[set_minus(e, clique).len()].unsigned_abs() as usize;
                (k, k)
            }
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn embed(
    sh: &Shape,
    kind: AnchorKind,
    anchor: &[(u32, u32)],
    n: u32,
    used: &EdgeSet,
    vertex_ok: Option<&(dyn Fn(u32) -> bool + Sync)>,
    rng: &mut Rng,
    budget: u64,
) -> Result<Vec<u32>> {
    let t = gadget_template(&sh.g, kind);
    let usable = |e: &[u32]| !used.contains(e);
    let c = Constraints {
        usable: &usable,
        accept: None,
        vertex_ok,
    };
    Ok(extend(&t, anchor, n, &c, rng, budget)?.map)
}

/// Marks the edges of gadget copy `map` outside the anchored cliques.
fn occupy(sh: &Shape, kind: AnchorKind, map: &[u32], used: &mut EdgeSet) {
    for e in sh.g.graph.edges() {
        let anchored = is_subset(e, &sh.hp) || (kind == AnchorKind::Pair && is_subset(e, &sh.hm));
        if !anchored {
            used.insert(&img(map, e));
        }
    }
}

/// Runs the six construction steps for the reserve R inside K^r_n.
pub fn build_absorber(reserve: &RGraph, p: &Params, cfg: &AbsorberConfig, rng: &mut Rng) -> Result<AbsorberBook> {
    let (q, r, n) = (p.q, p.r, p.n);
    let budget = cfg.embed_budget;
    let dec = decoder_qr(q, r);
    let sh = Shape::new(q, r);
    let mut used = EdgeSet::new();

    // step 1: the integral absorber
    let integral = integral_absorber(reserve, p, cfg, &mut used, rng)?;
    for c in &integral.q1 {
        used.insert_clique(c, r);
    }

    // step 2: decoder sets for every edge of ∪𝒬₁
    let q1_edges: BTreeSet<VSet> = integral.q1.iter().flat_map(|c| edges_of(c, r)).collect();
    let mut zsets = BTreeMap::new();
    let mut q2 = Vec::new();
    let mut origin: Vec<VSet> = Vec::new();
    for e in &q1_edges {
        let z = random_superset(e, q + r, n, &[], &used, false, cfg.attempts, rng, |_| true)
            .ok_or_else(|| Error::stage("decoder sets", format!("no free (q+r)-set through {e:?}")))?;
        used.insert_clique(&z, r);
        for c in subsets(&z, q) {
            q2.push(c);
            origin.push(e.clone());
        }
        zsets.insert(e.clone(), z);
    }

    // step 3: splitting copies, vertex-disjoint for cliques sharing an edge
    let mut copies = BTreeMap::new();
    let mut splits: Vec<SplitCopy> = Vec::new();
    let mut fresh: HashMap<u128, Vec<u32>> = HashMap::new();
    let jobs = integral
        .q1
        .iter()
        .map(|c| (c, Source::Integral, None))
        .chain(q2.iter().zip(&origin).map(|(c, e)| (c, Source::Decoder, Some(e))));
    for (c, source, e) in jobs {
        let (kp, km) = copy_count(cfg.copies, &dec, source, c, e.map_or(&[][..], |e| &e[..]));
        copies.insert(c.clone(), (kp, km));
        let anchor = anchor_single(&sh.g, c)?;
        for (sign, k) in [(1i8, kp), (-1, km)] {
            for copy in 0..k {
                let excl: HashSet<u32> = edges_of(c, r)
                    .iter()
                    .flat_map(|f| fresh.get(&edge_key(f)).into_iter().flatten().copied())
                    .collect();
                let ok = |x: u32| !excl.contains(&x);
                let map = embed(&sh, AnchorKind::Single, &anchor, n, &used, Some(&ok), rng, budget)
                    .map_err(|err| Error::stage("splitting", format!("copy {copy} of {c:?} (sign {sign}): {err}")))?;
                occupy(&sh, AnchorKind::Single, &map, &mut used);
                let new_vertices: Vec<u32> = map.iter().copied().filter(|x| !c.contains(x)).collect();
                for f in edges_of(c, r) {
                    fresh.entry(edge_key(&f)).or_default().extend(&new_vertices);
                }
                let near = sh.ring.iter().map(|(f, rc)| (img(&map, f), img(&map, rc))).collect();
                splits.push(SplitCopy {
                    clique: c.clone(),
                    source,
                    sign,
                    copy: copy as u32,
                    map,
                    near,
                });
            }
        }
    }

    // step 4: eliminate every positive/negative near pair at each edge of A0
    let mut buckets: BTreeMap<VSet, (Vec<(VSet, usize)>, Vec<(VSet, usize)>)> = BTreeMap::new();
    for (i, s) in splits.iter().enumerate() {
        for (f, c) in &s.near {
            let b = buckets.entry(f.clone()).or_default();
            if s.sign > 0 {
                b.0.push((c.clone(), i));
            } else {
                b.1.push((c.clone(), i));
            }
        }
    }
    let mut pairs: Vec<PairGadget> = Vec::new();
    for (f, (pos, neg)) in &buckets {
        for (pm, sm) in neg {
            let gadget_vertices: HashSet<u32> = splits[*sm].map.iter().copied().collect();
            let ok = |x: u32| !gadget_vertices.contains(&x);
            for (pp, sp) in pos {
                let anchor = anchor_pair(&sh.g, pp, pm)
                    .map_err(|err| Error::stage("elimination", format!("near pair at {f:?}: {err}")))?;
                let map = embed(&sh, AnchorKind::Pair, &anchor, n, &used, Some(&ok), rng, budget)
                    .map_err(|err| Error::stage("elimination", format!("pair {pp:?}, {pm:?} at {f:?}: {err}")))?;
                occupy(&sh, AnchorKind::Pair, &map, &mut used);
                let others: Vec<VSet> = edges_of(pm, r).into_iter().filter(|d| d != f).collect();
                let mut bad = Vec::new();
                for t in &sh.plus_rest {
                    let c = img(&map, t);
                    if let Some(d) = others.iter().find(|d| is_subset(d, &c)) {
                        let target = sh
                            .plus_rest
                            .iter()
                            .map(|u| img(&splits[*sm].map, u))
                            .find(|u| is_subset(d, u))
                            .ok_or_else(|| Error::stage("elimination", format!("no far positive clique through {d:?}")))?;
                        bad.push(BadClique {
                            clique: c,
                            edge: d.clone(),
                            target,
                            further: usize::MAX,
                        });
                    }
                }
                pairs.push(PairGadget {
                    edge: f.clone(),
                    plus: pp.clone(),
                    minus: pm.clone(),
                    plus_split: *sp,
                    minus_split: *sm,
                    map,
                    bad,
                });
            }
        }
    }

    // step 5: further eliminations for the bad cliques
    let mut further = Vec::new();
    for (pi, pg) in pairs.iter_mut().enumerate() {
        for b in &mut pg.bad {
            let meet: VSet = b.target.iter().copied().filter(|v| b.clique.contains(v)).collect();
            if meet != b.edge {
                return Err(Error::stage(
                    "further",
                    format!("{:?} and {:?} meet in {meet:?}, not {:?}", b.target, b.clique, b.edge),
                ));
            }
            let anchor = anchor_pair(&sh.g, &b.target, &b.clique)?;
            let map = embed(&sh, AnchorKind::Pair, &anchor, n, &used, None, rng, budget)
                .map_err(|err| Error::stage("further", format!("bad clique {:?}: {err}", b.clique)))?;
            occupy(&sh, AnchorKind::Pair, &map, &mut used);
            b.further = further.len();
            further.push(FurtherGadget {
                pair: pi,
                plus: b.target.clone(),
                minus: b.clique.clone(),
                edge: b.edge.clone(),
                map,
            });
        }
    }

    // step 6: the families and the audits
    let mut book = AbsorberBook {
        version: BOOK_VERSION,
        q,
        r,
        n,
        big_n: dec.big_n,
        reserve: reserve.clone(),
        config: cfg.clone(),
        integral,
        zsets,
        q2,
        copies,
        splits,
        pairs,
        further,
        audits: Vec::new(),
        stats: serde_json::Value::Null,
        index: BookIndex::default(),
    };
    book.rebuild_index();
    book.audits = audit(&book, &sh);
    book.stats = serde_json::json!({
        "q1": book.integral.q1.len(),
        "q1_multiplicity": book.integral.multiplicity,
        "q2": book.q2.len(),
        "splitting_gadgets": book.splits.len(),
        "pair_gadgets": book.pairs.len(),
        "further_gadgets": book.further.len(),
        "q_plus": book.index.q_plus.len(),
        "q_minus": book.index.q_minus.len(),
        "a_edges": book.index.a_edges.len(),
        "occupied_edges": used.len(),
    });
    let failed: Vec<String> = book.failed_audits().iter().map(|a| format!("{}: {}", a.name, a.detail)).collect();
    if !failed.is_empty() {
        return Err(Error::stage("audit", failed.join("; ")));
    }
    Ok(book)
}

fn line(name: &str, required: bool, problems: Vec<String>, ok_detail: String) -> AuditLine {
    let ok = problems.is_empty();
    let detail = if ok {
        ok_detail
    } else {
        let more = problems.len().saturating_sub(3);
        let mut d = problems.into_iter().take(3).collect::<Vec<_>>().join("; ");
        if more > 0 {
            d.push_str(&format!("; {more} more"));
        }
        d
    };
    AuditLine {
        name: name.into(),
        ok,
        required,
        detail,
    }
}

/// Inserts the edges of `c` into `seen`, reporting repeats.
fn disjoint_into(seen: &mut EdgeSet, c: &[u32], r: usize, what: &str, out: &mut Vec<String>) {
    for_each_subset(c, r, |e| {
        if !seen.insert(e) && out.len() < 16 {
            out.push(format!("{what} {c:?} repeats edge {e:?}"));
        }
    });
}

fn audit(b: &AbsorberBook, sh: &Shape) -> Vec<AuditLine> {
    let r = b.r;
    let mut lines = Vec::new();
    let m = b.integral.multiplicity;
    let limit = rounding_multiplicity_limit(b.big_n);
    lines.push(line(
        "integral absorber multiplicity at most 2",
        false,
        if m <= 2 { vec![] } else { vec![format!("multiplicity {m}; rounding tolerates up to {limit}")] },
        format!("multiplicity {m}"),
    ));
    lines.push(line(
        "integral absorber multiplicity within rounding limit",
        true,
        if m <= limit { vec![] } else { vec![format!("multiplicity {m} > {limit}")] },
        format!("multiplicity {m} <= {limit}"),
    ));
    if let Some(f) = &b.integral.flatten {
        lines.push(line("flattening witnesses", true, f.check_witnesses(b.q, r), format!("{} witnesses", f.witnesses.len())));
    }
    lines.push(line(
        "recomputed multiplicity",
        true,
        if max_multiplicity(&b.integral.q1, r) == m { vec![] } else { vec!["stored multiplicity is stale".into()] },
        String::new(),
    ));

    // (ii) far negative splitting cliques, and near cliques per edge
    let mut far_neg = EdgeSet::new();
    let mut p = Vec::new();
    let mut neg_far_list = Vec::new();
    for s in &b.splits {
        let near: HashSet<&VSet> = s.near.iter().map(|(_, c)| c).collect();
        if s.sign < 0 {
            for c in &sh.g.upsilon_minus {
                let x = img(&s.map, c);
                if !near.contains(&x) {
                    neg_far_list.push(x);
                }
            }
        } else {
            for c in &sh.plus_rest {
                neg_far_list.push(img(&s.map, c));
            }
        }
    }
    for c in &neg_far_list {
        disjoint_into(&mut far_neg, c, r, "far negative clique", &mut p);
    }
    lines.push(line(
        "far negative splitting cliques are edge-disjoint",
        true,
        p,
        format!("{} cliques", neg_far_list.len()),
    ));
    let mut p = Vec::new();
    let mut by_edge: HashMap<&VSet, (Vec<&VSet>, usize)> = HashMap::new();
    for s in &b.splits {
        for (f, c) in &s.near {
            let ent = by_edge.entry(f).or_default();
            ent.0.push(c);
            if s.sign < 0 {
                ent.1 += 1;
            }
        }
    }
    let mut expected: HashMap<VSet, usize> = HashMap::new();
    for (c, (_, k)) in &b.copies {
        for f in edges_of(c, r) {
            *expected.entry(f).or_insert(0) += k;
        }
    }
    for (f, (cs, negs)) in &by_edge {
        if expected.get(*f).copied().unwrap_or(0) != *negs {
            p.push(format!("edge {f:?} has {negs} negative near cliques"));
        }
        for (i, a) in cs.iter().enumerate() {
            for c in &cs[i + 1..] {
                if intersection_size(a, c) != r {
                    p.push(format!("near cliques {a:?} and {c:?} meet beyond {f:?}"));
                }
            }
        }
    }
    lines.push(line("near cliques meet exactly in their edge", true, p, format!("{} edges", by_edge.len())));

    // (iii) good negative elimination cliques
    let a0 = b.a0_edges();
    let mut p = Vec::new();
    let mut good = EdgeSet::new();
    let mut count = 0;
    for pg in &b.pairs {
        let bad: HashSet<&VSet> = pg.bad.iter().map(|x| &x.clique).collect();
        for t in &sh.plus_rest {
            let c = img(&pg.map, t);
            if bad.contains(&c) {
                continue;
            }
            count += 1;
            disjoint_into(&mut good, &c, r, "good negative clique", &mut p);
            for_each_subset(&c, r, |e| {
                if (far_neg.contains(e) || a0.contains(e)) && p.len() < 16 {
                    p.push(format!("good negative clique {c:?} uses edge {e:?} of A0 or a far clique"));
                }
            });
        }
    }
    lines.push(line(
        "good negative elimination cliques are edge-disjoint from each other, far cliques and A0",
        true,
        p,
        format!("{count} cliques"),
    ));

    // further targets: one bad edge per far positive clique within a gadget
    let mut p = Vec::new();
    for (t, hits) in further_conflicts(sh) {
        p.push(format!("gadget clique {t:?} carries {hits} ring edges"));
    }
    lines.push(line("further targets are unique per splitting copy", true, p, String::new()));

    // (iv) 𝒬⁻ and A
    let mut p = Vec::new();
    let mut seen = EdgeSet::new();
    let mut qm: Vec<&VSet> = b.index.q_minus.iter().collect();
    qm.sort_unstable();
    for c in &qm {
        disjoint_into(&mut seen, c, r, "negative clique", &mut p);
    }
    lines.push(line("negative family is edge-disjoint", true, p, format!("{} cliques", qm.len())));
    let p: Vec<String> = b
        .reserve
        .edges()
        .filter(|e| b.index.a_edges.contains(e))
        .map(|e| format!("reserve edge {e:?} lies in A"))
        .take(16)
        .collect();
    lines.push(line("A avoids the reserve", true, p, format!("|A| = {}", b.index.a_edges.len())));
    let p: Vec<String> = b
        .index
        .q_plus
        .iter()
        .filter(|c| b.index.q_minus.contains(*c))
        .map(|c| format!("{c:?} has both signs"))
        .take(16)
        .collect();
    lines.push(line("positive and negative families are disjoint", true, p, format!("{} positive", b.index.q_plus.len())));
    lines
}

/// Gadget cliques of Υ⁺ \ Q̂⁺ containing two or more non-key edges of ring
/// cliques: such a clique could be asked to cancel two bad cliques at once.
fn further_conflicts(sh: &Shape) -> Vec<(VSet, usize)> {
    let mut out = Vec::new();
    for t in &sh.plus_rest {
        let hits: usize = sh
            .ring
            .iter()
            .map(|(k, c)| edges_of(c, sh.g.r).iter().filter(|d| *d != k && is_subset(d, t)).count())
            .sum();
        if hits >= 2 {
            out.push((t.clone(), hits));
        }
    }
    out
}
