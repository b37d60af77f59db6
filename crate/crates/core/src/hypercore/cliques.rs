use super::{for_each_subset, RGraph, VSet};
use std::collections::HashMap;

/// Fixed-size bitset over vertex ids 0..=n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
}

impl Bitset {
    pub fn new(nbits: usize) -> Self {
        Bitset {
            words: vec![0; nbits.div_ceil(64)],
        }
    }

    pub fn full(nbits: usize) -> Self {
        let mut b = Bitset::new(nbits);
        for i in 0..nbits {
            b.set(i);
        }
        b
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words.get(i >> 6).is_some_and(|w| w >> (i & 63) & 1 == 1)
    }

    pub fn and_assign(&mut self, other: &Bitset) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= b;
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Clears every bit with index <= i.
    pub fn clear_upto(&mut self, i: usize) {
        let w = i >> 6;
        for x in self.words.iter_mut().take(w) {
            *x = 0;
        }
        if w < self.words.len() {
            let keep = if (i & 63) == 63 { 0 } else { !0u64 << ((i & 63) + 1) };
            self.words[w] &= keep;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }
}

/// Link bitsets of every (r−1)-set of an r-graph; supports clique enumeration
/// by depth-first search over candidate sets.
#[derive(Clone, Debug)]
pub struct CliqueIndex {
    n: u32,
    r: usize,
    links: HashMap<VSet, Bitset>,
    empty: Bitset,
}

impl CliqueIndex {
    pub fn new(g: &RGraph) -> Self {
        let nb = g.n as usize + 1;
        let mut links: HashMap<VSet, Bitset> = HashMap::new();
        let mut tmp: Vec<u32> = Vec::with_capacity(g.r);
        for e in g.edges() {
            for (i, &x) in e.iter().enumerate() {
                tmp.clear();
                tmp.extend(e.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &y)| y));
                links
                    .entry(VSet::from_slice(&tmp))
                    .or_insert_with(|| Bitset::new(nb))
                    .set(x as usize);
            }
        }
        CliqueIndex {
            n: g.n,
            r: g.r,
            links,
            empty: Bitset::new(nb),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Vertices x with f ∪ {x} an edge.
    pub fn link(&self, f: &[u32]) -> &Bitset {
        self.links.get(f).unwrap_or(&self.empty)
    }

    pub fn has_edge(&self, e: &[u32]) -> bool {
        let (last, rest) = e.split_last().expect("nonempty edge");
        self.link(rest).get(*last as usize)
    }

    fn all_vertices(&self) -> Bitset {
        let mut b = Bitset::full(self.n as usize + 1);
        b.clear(0);
        b
    }

    /// Candidate extension vertices of the (sorted) set `s`: x ∉ s with every
    /// r-subset of s ∪ {x} containing x in G.
    pub fn candidates(&self, s: &[u32]) -> Bitset {
        let mut cand = self.all_vertices();
        if s.len() + 1 < self.r {
            for &v in s {
                cand.clear(v as usize);
            }
            return cand;
        }
        for_each_subset(s, self.r - 1, |f| cand.and_assign(self.link(f)));
        for &v in s {
            cand.clear(v as usize);
        }
        cand
    }

    /// Visits every s-clique of G (as sorted slices).
    pub fn for_each_clique(&self, s: usize, f: impl FnMut(&[u32])) {
        self.for_each_clique_containing(&[], s, f);
    }

    /// Visits every s-clique containing `base`, each reported as a sorted slice.
    pub fn for_each_clique_containing(&self, base: &[u32], s: usize, mut f: impl FnMut(&[u32])) {
        if base.len() > s || !self.base_is_clique(base) {
            return;
        }
        self.for_each_extension(base, s, &mut f);
    }

    fn base_is_clique(&self, base: &[u32]) -> bool {
        if base.len() < self.r {
            return true;
        }
        let mut ok = true;
        for_each_subset(base, self.r, |e| ok &= self.has_edge(e));
        ok
    }

    /// Visits every s-set containing `base` whose r-subsets other than those
    /// inside `base` are all edges; `base` itself need not be a clique.
    pub fn for_each_extension(&self, base: &[u32], s: usize, mut f: impl FnMut(&[u32])) {
        if base.len() > s {
            return;
        }
        let cand = self.candidates(base);
        let mut cur: Vec<u32> = base.to_vec();
        cur.sort_unstable();
        self.dfs_ext(&mut cur, cand, s - base.len(), &mut f);
    }

    pub fn count_extensions(&self, base: &[u32], s: usize) -> usize {
        if base.len() > s {
            return 0;
        }
        let cand = self.candidates(base);
        let mut cur: Vec<u32> = base.to_vec();
        cur.sort_unstable();
        self.count_ext(&mut cur, &cand, s - base.len())
    }

    pub fn cliques(&self, s: usize) -> Vec<VSet> {
        let mut out = Vec::new();
        self.for_each_clique(s, |c| out.push(VSet::from_slice(c)));
        out
    }

    pub fn cliques_containing(&self, base: &[u32], s: usize) -> Vec<VSet> {
        let mut out = Vec::new();
        self.for_each_clique_containing(base, s, |c| out.push(VSet::from_slice(c)));
        out
    }

    pub fn count_cliques_containing(&self, base: &[u32], s: usize) -> usize {
        if base.len() > s || !self.base_is_clique(base) {
            return 0;
        }
        if base.len() == s {
            return 1;
        }
        self.count_extensions(base, s)
    }

    /// Restricts `cand` to vertices x such that every r-set made of x, v and
    /// r−2 vertices of `cur` is an edge.
    fn narrow(&self, cur: &[u32], v: u32, cand: &mut Bitset) {
        if self.r < 2 {
            return;
        }
        let mut key: VSet = VSet::new();
        for_each_subset(cur, self.r - 2, |g| {
            key.clear();
            let pos = g.partition_point(|&x| x < v);
            key.extend_from_slice(&g[..pos]);
            key.push(v);
            key.extend_from_slice(&g[pos..]);
            cand.and_assign(self.link(&key));
        });
    }

    fn insert_sorted(cur: &mut Vec<u32>, v: u32) -> usize {
        let pos = cur.partition_point(|&x| x < v);
        cur.insert(pos, v);
        pos
    }

    fn dfs_ext(&self, cur: &mut Vec<u32>, cand: Bitset, need: usize, f: &mut impl FnMut(&[u32])) {
        if need == 0 {
            f(cur);
            return;
        }
        let verts: Vec<usize> = cand.iter().collect();
        for (idx, &v) in verts.iter().enumerate() {
            if verts.len() - idx < need {
                break;
            }
            let mut next = cand.clone();
            next.clear_upto(v);
            if need > 1 {
                self.narrow(cur, v as u32, &mut next);
            }
            let pos = Self::insert_sorted(cur, v as u32);
            self.dfs_ext(cur, next, need - 1, f);
            cur.remove(pos);
        }
    }

    fn count_ext(&self, cur: &mut Vec<u32>, cand: &Bitset, need: usize) -> usize {
        match need {
            0 => return 1,
            1 => return cand.count(),
            _ => {}
        }
        let verts: Vec<usize> = cand.iter().collect();
        let mut total = 0;
        for (idx, &v) in verts.iter().enumerate() {
            if verts.len() - idx < need {
                break;
            }
            let mut next = cand.clone();
            next.clear_upto(v);
            self.narrow(cur, v as u32, &mut next);
            let pos = Self::insert_sorted(cur, v as u32);
            total += self.count_ext(cur, &next, need - 1);
            cur.remove(pos);
        }
        total
    }
}
