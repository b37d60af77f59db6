//! The absorber pipeline: generating cliques over Z/NZ, colour systems, the
//! integral absorber (local or full construction), flattening, the six-step
//! absorber book and the absorb procedure that replays it for a given leave.

pub mod book;
pub mod chain;
pub mod colour;
pub mod flatten;
pub mod generate;
pub mod integral;
pub mod solve;

pub use book::{build_absorber, AbsorberBook, AuditLine};
pub use colour::ColorSystem;
pub use flatten::{flatten, round_multiplicity, FlattenResult};
pub use generate::{generating_cliques, GeneratorReport};
pub use integral::{integral_absorber, IntegralAbsorber};
pub use solve::{absorb_solve, random_divisible_leave, SolveReport};

use crate::error::{Error, Result};
use crate::hypercore::{for_each_subset, VSet};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// How the integral absorber 𝒬₁ is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralMode {
    /// All q-cliques on W ⊇ V(R): their integer span is every divisible
    /// vector on W, solved exactly by integral decomposition.
    Local,
    /// Random host K, generating cliques, colours, focusing, decoders and
    /// flattening, with rainbow searches at solve time.
    Random,
}

/// Copies per sign of each clique of 𝒬₁ ∪ 𝒬₂ in the splitting step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CopyRule {
    /// 2^q·r! for every clique.
    Uniform,
    /// ⌊N/2⌋ positive and ⌈N/2⌉ − 1 negative copies for 𝒬₁ cliques and
    /// |Ψ_Q| of each sign for decoder cliques: the most the absorb procedure
    /// can ask for.
    Exact,
    Fixed(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AbsorberConfig {
    pub mode: IntegralMode,
    pub copies: CopyRule,
    /// Edge probability of the random host K (default n^{−α}).
    pub sample_rate: Option<f64>,
    /// Saturation threshold on (r−1)-sets (default n^{1−0.7α}).
    pub saturation: Option<f64>,
    /// Threshold defining K₀ (default n^{0.85α}·n^{−kα}·C(n, q−r)).
    pub k0_threshold: Option<f64>,
    /// Number of colours (default 20q²α⁻¹|Ω|).
    pub colours: Option<usize>,
    /// Largest colour system (u·n entries) the build will allocate.
    pub colour_cap: usize,
    /// Budget handed to each gadget embedding search.
    pub embed_budget: u64,
    /// Random draws per greedy choice (decoder sets, focusing cliques, new cliques).
    pub attempts: usize,
    /// Skip the disjointness demands on decoder sets and focusing cliques.
    pub relaxed: bool,
}

impl Default for AbsorberConfig {
    fn default() -> Self {
        AbsorberConfig {
            mode: IntegralMode::Local,
            copies: CopyRule::Exact,
            sample_rate: None,
            saturation: None,
            k0_threshold: None,
            colours: None,
            colour_cap: 50_000_000,
            embed_budget: 4,
            attempts: 20_000,
            relaxed: false,
        }
    }
}

/// Serde adapter writing a map with non-string keys as a list of pairs.
pub(crate) mod as_pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer, K: Serialize, V: Serialize>(m: &BTreeMap<K, V>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D, K, V>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        D: Deserializer<'de>,
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
    {
        Ok(Vec::<(K, V)>::deserialize(d)?.into_iter().collect())
    }
}

/// Packs an edge of at most 8 vertices below 2^16 into one key.
#[inline]
pub fn edge_key(e: &[u32]) -> u128 {
    let mut k: u128 = 0;
    for &v in e {
        k = (k << 16) | v as u128;
    }
    k
}

/// Checks that edges of `K^r_n` fit the packed key.
pub fn check_packable(n: u32, r: usize) -> Result<()> {
    if r > 8 || n >= 1 << 16 {
        return Err(Error::Config(format!(
            "absorber bookkeeping supports r <= 8 and n < 65536, got r={r}, n={n}"
        )));
    }
    Ok(())
}

/// A set of r-sets under packed keys.
#[derive(Clone, Debug, Default)]
pub struct EdgeSet {
    set: HashSet<u128>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, e: &[u32]) -> bool {
        self.set.contains(&edge_key(e))
    }

    pub fn insert(&mut self, e: &[u32]) -> bool {
        self.set.insert(edge_key(e))
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Inserts every r-subset of `c`.
    pub fn insert_clique(&mut self, c: &[u32], r: usize) {
        for_each_subset(c, r, |e| {
            self.set.insert(edge_key(e));
        });
    }

    /// True when no r-subset of `c` other than those inside `skip` is present.
    pub fn clique_free(&self, c: &[u32], r: usize, skip: &[u32]) -> bool {
        let mut ok = true;
        for_each_subset(c, r, |e| {
            if ok && !crate::hypercore::is_subset(e, skip) && self.contains(e) {
                ok = false;
            }
        });
        ok
    }
}

/// Edge multiplicities of a clique family.
pub fn multiplicities(cliques: &[VSet], r: usize) -> HashMap<VSet, usize> {
    let mut m: HashMap<VSet, usize> = HashMap::new();
    for c in cliques {
        for_each_subset(c, r, |e| *m.entry(VSet::from_slice(e)).or_insert(0) += 1);
    }
    m
}

pub fn max_multiplicity(cliques: &[VSet], r: usize) -> usize {
    multiplicities(cliques, r).values().copied().max().unwrap_or(0)
}
