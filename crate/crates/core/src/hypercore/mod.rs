//! Core combinatorial types: vertex sets, r-graphs, signed edge and clique
//! vectors, the boundary operator, boundedness and decomposition checks.

mod cliques;
pub mod io;
mod verify;

pub use cliques::{CliqueIndex, Bitset};
pub use verify::{
    bounded_check, common_neighbourhood, typicality_check, typicality_deviation,
    verify_decomposition, BoundedReport, DecompVerdict, TypicalityMode, TypicalityReport,
};

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::collections::{BTreeMap, BTreeSet};

/// A sorted set of 1-based vertex ids. Used for edges, cliques and arbitrary subsets.
pub type VSet = SmallVec<[u32; 8]>;
pub type Edge = VSet;
pub type Clique = VSet;

/// Builds a canonical (sorted, deduplicated) vertex set.
pub fn vset(vs: &[u32]) -> VSet {
    let mut s: VSet = vs.iter().copied().collect();
    s.sort_unstable();
    s.dedup();
    s
}

pub fn is_sorted_set(vs: &[u32]) -> bool {
    vs.windows(2).all(|w| w[0] < w[1])
}

/// `a ⊆ b` for sorted sets.
pub fn is_subset(a: &[u32], b: &[u32]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

pub fn set_minus(a: &[u32], b: &[u32]) -> VSet {
    a.iter().copied().filter(|x| b.binary_search(x).is_err()).collect()
}

pub fn set_union(a: &[u32], b: &[u32]) -> VSet {
    let mut s: VSet = a.iter().chain(b.iter()).copied().collect();
    s.sort_unstable();
    s.dedup();
    s
}

pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Calls `f` on every `s`-subset of the sorted slice `set`, in lexicographic order.
pub fn for_each_subset(set: &[u32], s: usize, mut f: impl FnMut(&[u32])) {
    let m = set.len();
    if s > m {
        return;
    }
    let mut idx: Vec<usize> = (0..s).collect();
    let mut buf: Vec<u32> = vec![0; s];
    loop {
        for (b, &i) in buf.iter_mut().zip(idx.iter()) {
            *b = set[i];
        }
        f(&buf);
        let mut i = s;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - s {
                break;
            }
            if i == 0 && idx[0] == m - s {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..s {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All `s`-subsets of `set` as vertex sets.
pub fn subsets(set: &[u32], s: usize) -> Vec<VSet> {
    let mut out = Vec::new();
    for_each_subset(set, s, |x| out.push(VSet::from_slice(x)));
    out
}

pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn binom_big(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

/// Parameters of a run: clique order q, uniformity r, host size n, and the
/// density exponents rho and alpha.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub q: usize,
    pub r: usize,
    pub n: u32,
    /// C(q, r)
    pub k: u64,
    /// r!·k, the falling factorial (q)_r
    pub big_n: u64,
    pub rho: BigRational,
    pub alpha: BigRational,
    /// Human-readable record of every overridden default.
    pub overrides: Vec<String>,
}

impl Params {
    pub fn new(q: usize, r: usize, n: u32) -> Result<Self> {
        if r < 1 || q <= r {
            return Err(Error::Config(format!("need q > r >= 1, got q={q}, r={r}")));
        }
        if q > 32 {
            return Err(Error::Config(format!("q={q} is outside the supported range (<= 32)")));
        }
        let k = binom(q as u64, r as u64) as u64;
        let big_n = k * factorial(r as u64) as u64;
        let six_k = BigInt::from(6 * k);
        let rho = BigRational::new(BigInt::one(), &six_k * &six_k);
        let two_q_r = BigInt::from(2 * q as u64).pow(r as u32);
        let alpha = &rho / BigRational::from_integer(two_q_r);
        Ok(Params {
            q,
            r,
            n,
            k,
            big_n,
            rho,
            alpha,
            overrides: Vec::new(),
        })
    }

    pub fn with_rho(mut self, rho: BigRational) -> Self {
        self.overrides.push(format!("rho={rho} (default {})", self.rho));
        self.rho = rho;
        self
    }

    pub fn with_alpha(mut self, alpha: BigRational) -> Self {
        self.overrides.push(format!("alpha={alpha} (default {})", self.alpha));
        self.alpha = alpha;
        self
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn rho_f64(&self) -> f64 {
        ratio_to_f64(&self.rho)
    }

    pub fn alpha_f64(&self) -> f64 {
        ratio_to_f64(&self.alpha)
    }

    /// log10 of the threshold n0 = (4q)^(90q/alpha). Documentation only.
    pub fn log10_n0(&self) -> f64 {
        90.0 * self.q as f64 / self.alpha_f64() * (4.0 * self.q as f64).log10()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "q": self.q,
            "r": self.r,
            "n": self.n,
            "k": self.k,
            "N": self.big_n,
            "rho": self.rho.to_string(),
            "alpha": self.alpha.to_string(),
            "log10_n0": self.log10_n0(),
            "overrides": self.overrides,
        })
    }
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses "a/b", an integer, or a decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| Error::Config(format!("bad rational {s}")))?;
        let b: BigInt = b.trim().parse().map_err(|_| Error::Config(format!("bad rational {s}")))?;
        if b.is_zero() {
            return Err(Error::Config(format!("zero denominator in {s}")));
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches('-'), fp);
        let num: BigInt = digits.parse().map_err(|_| Error::Config(format!("bad rational {s}")))?;
        let den = BigInt::from(10u32).pow(fp.len() as u32);
        let r = BigRational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    let a: BigInt = s.parse().map_err(|_| Error::Config(format!("bad rational {s}")))?;
    Ok(BigRational::from_integer(a))
}

/// A sparse integer vector indexed by vertex sets. Zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseVec {
    entries: BTreeMap<VSet, i64>,
}

/// Vector indexed by r-edges.
pub type IntVec = SparseVec;
/// Vector indexed by q-cliques.
pub type CliqueVec = SparseVec;

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn indicator<'a>(sets: impl IntoIterator<Item = &'a VSet>) -> Self {
        let mut v = Self::new();
        for s in sets {
            v.add(s.clone(), 1);
        }
        v
    }

    pub fn singleton(key: VSet, val: i64) -> Self {
        let mut v = Self::new();
        v.add(key, val);
        v
    }

    pub fn add(&mut self, key: VSet, val: i64) {
        if val == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.entries.entry(key) {
            Entry::Vacant(e) => {
                e.insert(val);
            }
            Entry::Occupied(mut e) => {
                let nv = *e.get() + val;
                if nv == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = nv;
                }
            }
        }
    }

    pub fn add_slice(&mut self, key: &[u32], val: i64) {
        if val == 0 {
            return;
        }
        if let Some(x) = self.entries.get_mut(key) {
            *x += val;
            if *x == 0 {
                self.entries.remove(key);
            }
        } else {
            self.entries.insert(VSet::from_slice(key), val);
        }
    }

    pub fn set(&mut self, key: VSet, val: i64) {
        if val == 0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, val);
        }
    }

    pub fn get(&self, key: &[u32]) -> i64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VSet, i64)> {
        self.entries.iter().map(|(k, &v)| (k, v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &VSet> {
        self.entries.keys()
    }

    pub fn add_scaled(&mut self, other: &SparseVec, c: i64) {
        for (k, v) in other.iter() {
            self.add(k.clone(), c * v);
        }
    }

    pub fn scaled(&self, c: i64) -> SparseVec {
        let mut out = SparseVec::new();
        out.add_scaled(self, c);
        out
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        let mut out = self.clone();
        out.add_scaled(other, -1);
        out
    }

    pub fn l1(&self) -> i64 {
        self.entries.values().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> i64 {
        self.entries.values().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Sum of all entries (signed).
    pub fn total(&self) -> i64 {
        self.entries.values().sum()
    }

    /// The largest vertex id used by any key.
    pub fn max_vertex(&self) -> u32 {
        self.entries.keys().filter_map(|k| k.last().copied()).max().unwrap_or(0)
    }

    /// Support vertices.
    pub fn vertices(&self) -> VSet {
        let mut s: BTreeSet<u32> = BTreeSet::new();
        for k in self.entries.keys() {
            s.extend(k.iter().copied());
        }
        s.into_iter().collect()
    }

    /// Relabels vertices through `f`. Keys are re-sorted.
    pub fn relabel(&self, f: impl Fn(u32) -> u32) -> SparseVec {
        let mut out = SparseVec::new();
        for (k, v) in self.iter() {
            let mut nk: VSet = k.iter().map(|&x| f(x)).collect();
            nk.sort_unstable();
            out.add(nk, v);
        }
        out
    }
}

impl FromIterator<(VSet, i64)> for SparseVec {
    fn from_iter<T: IntoIterator<Item = (VSet, i64)>>(iter: T) -> Self {
        let mut v = SparseVec::new();
        for (k, x) in iter {
            v.add(k, x);
        }
        v
    }
}

/// An r-uniform hypergraph on [n]. Edges are canonical and distinct.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RGraph {
    pub n: u32,
    pub r: usize,
    edges: BTreeSet<VSet>,
}

impl RGraph {
    pub fn new(n: u32, r: usize) -> Self {
        RGraph {
            n,
            r,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(n: u32, r: usize) -> Self {
        let verts: Vec<u32> = (1..=n).collect();
        let mut g = RGraph::new(n, r);
        for_each_subset(&verts, r, |e| {
            g.edges.insert(VSet::from_slice(e));
        });
        g
    }

    pub fn from_edges(n: u32, r: usize, edges: impl IntoIterator<Item = VSet>) -> Result<Self> {
        let mut g = RGraph::new(n, r);
        for e in edges {
            g.insert(e)?;
        }
        Ok(g)
    }

    /// Inserts an edge after validating arity, order and range. Returns whether it was new.
    pub fn insert(&mut self, e: VSet) -> Result<bool> {
        self.check_edge(&e)?;
        Ok(self.edges.insert(e))
    }

    pub fn check_edge(&self, e: &[u32]) -> Result<()> {
        if e.len() != self.r {
            return Err(Error::Malformed(format!("edge {e:?} does not have {} vertices", self.r)));
        }
        if !is_sorted_set(e) {
            return Err(Error::Malformed(format!("edge {e:?} is not strictly increasing")));
        }
        if e.first().is_some_and(|&v| v < 1) || e.last().is_some_and(|&v| v > self.n) {
            return Err(Error::Malformed(format!("edge {e:?} leaves [1, {}]", self.n)));
        }
        Ok(())
    }

    pub fn remove(&mut self, e: &[u32]) -> bool {
        self.edges.remove(e)
    }

    pub fn contains(&self, e: &[u32]) -> bool {
        self.edges.contains(e)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = &VSet> {
        self.edges.iter()
    }

    pub fn indicator(&self) -> IntVec {
        IntVec::indicator(self.edges.iter())
    }

    /// Edge density |G| / C(n, r).
    pub fn density(&self) -> BigRational {
        let total = binom_big(self.n as u64, self.r as u64);
        if total.is_zero() {
            return BigRational::zero();
        }
        BigRational::new(BigInt::from(self.len()), total)
    }

    pub fn minus(&self, other: &RGraph) -> RGraph {
        RGraph {
            n: self.n,
            r: self.r,
            edges: self.edges.difference(&other.edges).cloned().collect(),
        }
    }

    pub fn union(&self, other: &RGraph) -> RGraph {
        RGraph {
            n: self.n.max(other.n),
            r: self.r,
            edges: self.edges.union(&other.edges).cloned().collect(),
        }
    }

    /// Degree of each (r−1)-set that lies in some edge.
    pub fn shadow_degrees(&self) -> BTreeMap<VSet, usize> {
        let mut out = BTreeMap::new();
        for e in &self.edges {
            for_each_subset(e, self.r - 1, |f| {
                *out.entry(VSet::from_slice(f)).or_insert(0) += 1;
            });
        }
        out
    }
}

/// The boundary operator: (∂Φ)_e = Σ { Φ_Q : e ⊆ Q }.
pub fn boundary(phi: &CliqueVec, p: &Params) -> Result<IntVec> {
    boundary_qr(phi, p.q, p.r)
}

pub fn boundary_qr(phi: &CliqueVec, q: usize, r: usize) -> Result<IntVec> {
    let mut out = IntVec::new();
    for (c, v) in phi.iter() {
        if c.len() != q || !is_sorted_set(c) {
            return Err(Error::Malformed(format!("clique {c:?} is not a sorted {q}-set")));
        }
        for_each_subset(c, r, |e| out.add_slice(e, v));
    }
    Ok(out)
}

/// Link v(f): the vector on (r−|f|)-sets with v(f)_g = v_{f ∪ g}.
pub fn link(v: &IntVec, f: &[u32], r: usize) -> Result<IntVec> {
    if f.len() >= r {
        return Err(Error::Malformed(format!("link set {f:?} must have fewer than r={r} vertices")));
    }
    let mut out = IntVec::new();
    for (e, x) in v.iter() {
        if is_subset(f, e) {
            out.add(set_minus(e, f), x);
        }
    }
    Ok(out)
}
