//! Colour systems: u random vertex permutations σ_i, colour i being the
//! rotated graph σ_i(K*). An edge may carry no colour or several.

use super::edge_key;
use super::generate::GeneratorReport;
use crate::hypercore::{for_each_subset, RGraph, VSet};
use crate::rng::Rng;
use rand::seq::SliceRandom;
use serde::Serialize;
use std::collections::{HashMap, HashSet};

#[derive(Clone, Debug, Serialize)]
pub struct ColorSystem {
    pub n: u32,
    pub u: usize,
    /// sigma[i][v] is σ_i(v) for v in [n]; index 0 is unused.
    pub sigma: Vec<Vec<u32>>,
    #[serde(skip)]
    inv: Vec<Vec<u32>>,
    #[serde(skip)]
    kstar: HashSet<u128>,
    #[serde(skip)]
    k: HashSet<u128>,
    #[serde(skip)]
    saturated_sets: HashSet<u128>,
    r: usize,
    /// Edges treated as uncoloured regardless of the permutations.
    #[serde(skip)]
    mask: HashSet<u128>,
}

impl ColorSystem {
    pub fn new(n: u32, u: usize, rep: &GeneratorReport, rng: &mut Rng) -> Self {
        let mut sigma = Vec::with_capacity(u);
        let mut inv = Vec::with_capacity(u);
        for _ in 0..u {
            let mut p: Vec<u32> = (1..=n).collect();
            p.shuffle(rng);
            let mut s = vec![0u32; n as usize + 1];
            let mut t = vec![0u32; n as usize + 1];
            for (i, &x) in p.iter().enumerate() {
                s[i + 1] = x;
                t[x as usize] = i as u32 + 1;
            }
            sigma.push(s);
            inv.push(t);
        }
        ColorSystem {
            n,
            u,
            sigma,
            inv,
            kstar: rep.kstar.edges().map(|e| edge_key(e)).collect(),
            k: rep.k.edges().map(|e| edge_key(e)).collect(),
            saturated_sets: rep.saturated_sets.iter().map(|f| edge_key(f)).collect(),
            r: rep.r,
            mask: HashSet::new(),
        }
    }

    /// Treats the given edges as uncoloured.
    pub fn with_mask<'a>(mut self, edges: impl IntoIterator<Item = &'a VSet>) -> Self {
        self.mask.extend(edges.into_iter().map(|e| edge_key(e)));
        self
    }

    pub fn image(&self, i: usize, s: &[u32]) -> VSet {
        let mut o: VSet = s.iter().map(|&v| self.sigma[i][v as usize]).collect();
        o.sort_unstable();
        o
    }

    pub fn preimage(&self, i: usize, s: &[u32]) -> VSet {
        let mut o: VSet = s.iter().map(|&v| self.inv[i][v as usize]).collect();
        o.sort_unstable();
        o
    }

    pub fn has_colour(&self, e: &[u32], i: usize) -> bool {
        !self.mask.contains(&edge_key(e)) && self.kstar.contains(&edge_key(&self.preimage(i, e)))
    }

    /// Colours of e: the i with e ∈ σ_i(K*).
    pub fn colours(&self, e: &[u32]) -> Vec<usize> {
        if self.mask.contains(&edge_key(e)) {
            return Vec::new();
        }
        (0..self.u).filter(|&i| self.has_colour(e, i)).collect()
    }

    pub fn is_coloured(&self, e: &[u32]) -> bool {
        !self.mask.contains(&edge_key(e)) && (0..self.u).any(|i| self.has_colour(e, i))
    }

    /// σ_i(c) is a monochromatic unsaturated clique: σ_i⁻¹(c) ∈ K^r_q(K) \ 𝒮.
    pub fn mono_unsaturated(&self, i: usize, c: &[u32]) -> bool {
        let p = self.preimage(i, c);
        let mut ok = true;
        for_each_subset(&p, self.r, |e| ok &= self.k.contains(&edge_key(e)));
        if ok {
            for_each_subset(&p, self.r - 1, |f| ok &= !self.saturated_sets.contains(&edge_key(f)));
        }
        ok
    }

    /// σ_i(K*).
    pub fn rotated(&self, i: usize, kstar: &RGraph) -> RGraph {
        RGraph::from_edges(self.n, kstar.r, kstar.edges().map(|e| self.image(i, e))).expect("permuted edges")
    }

    /// Every σ_i is a permutation of [n] inverse to the stored inverse.
    pub fn validate(&self) -> bool {
        self.sigma.iter().zip(&self.inv).all(|(s, t)| {
            let mut seen = vec![false; self.n as usize + 1];
            (1..=self.n as usize).all(|v| {
                let x = s[v] as usize;
                let fresh = x >= 1 && x <= self.n as usize && !seen[x];
                if fresh {
                    seen[x] = true;
                }
                fresh && t[x] as usize == v
            })
        })
    }

    /// Distinct colours for `edges`, avoiding `forbidden`: a matching in the
    /// edge–colour incidence graph.
    pub fn rainbow_assignment(&self, edges: &[VSet], forbidden: &HashSet<usize>) -> Option<Vec<usize>> {
        let opts: Vec<Vec<usize>> = edges
            .iter()
            .map(|e| self.colours(e).into_iter().filter(|c| !forbidden.contains(c)).collect())
            .collect();
        distinct_assignment(&opts)
    }

    /// A rainbow injection ψ on the edges of `c`, when one exists.
    pub fn rainbow_clique(&self, c: &[u32]) -> Option<Vec<(VSet, usize)>> {
        let mut edges = Vec::new();
        for_each_subset(c, self.r, |e| edges.push(VSet::from_slice(e)));
        let a = self.rainbow_assignment(&edges, &HashSet::new())?;
        Some(edges.into_iter().zip(a).collect())
    }

    /// Checks that `assignment` gives distinct colours each carried by its edge.
    pub fn validate_rainbow(&self, assignment: &[(VSet, usize)]) -> bool {
        let mut seen = HashSet::new();
        assignment.iter().all(|(e, c)| *c < self.u && seen.insert(*c) && self.has_colour(e, *c))
    }
}

/// One distinct option per item (Kuhn's augmenting paths), or None.
pub fn distinct_assignment(options: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut owner: HashMap<usize, usize> = HashMap::new();
    let mut order: Vec<usize> = (0..options.len()).collect();
    // scarce items first keeps augmenting paths short
    order.sort_by_key(|&i| options[i].len());
    for &i in &order {
        let mut seen = HashSet::new();
        if !augment(i, options, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut out = vec![usize::MAX; options.len()];
    for (c, i) in owner {
        out[i] = c;
    }
    Some(out)
}

fn augment(i: usize, options: &[Vec<usize>], owner: &mut HashMap<usize, usize>, seen: &mut HashSet<usize>) -> bool {
    for &c in &options[i] {
        if !seen.insert(c) {
            continue;
        }
        match owner.get(&c).copied() {
            None => {
                owner.insert(c, i);
                return true;
            }
            Some(j) => {
                if augment(j, options, owner, seen) {
                    owner.insert(c, i);
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorber::generate::generating_cliques;
    use crate::rng::stream;

    #[test]
    fn matching_finds_systems_of_distinct_representatives() {
        assert_eq!(distinct_assignment(&[vec![0, 1], vec![0]]), Some(vec![1, 0]));
        assert_eq!(distinct_assignment(&[vec![0], vec![0]]), None);
        assert_eq!(distinct_assignment(&[]), Some(vec![]));
        let a = distinct_assignment(&[vec![0, 1, 2], vec![0, 1], vec![1]]).unwrap();
        assert_eq!(a, vec![2, 0, 1]);
    }

    #[test]
    fn permutations_and_rotations() {
        let k = RGraph::complete(12, 2);
        let rep = generating_cliques(&k, 3, 6, f64::INFINITY, f64::INFINITY).unwrap();
        let cs = ColorSystem::new(12, 5, &rep, &mut stream(3, "colour"));
        assert!(cs.validate());
        for i in 0..5 {
            assert_eq!(cs.rotated(i, &rep.kstar).len(), 66);
            let e = crate::hypercore::vset(&[2, 7]);
            assert_eq!(cs.preimage(i, &cs.image(i, &e)), e);
        }
        let e = crate::hypercore::vset(&[1, 2]);
        assert_eq!(cs.colours(&e).len(), 5);
        let masked = cs.clone().with_mask([&e]);
        assert!(!masked.is_coloured(&e));
        assert!(cs.mono_unsaturated(0, &[1, 2, 3]));
        let psi = cs.rainbow_clique(&[1, 2, 3]).unwrap();
        assert!(cs.validate_rainbow(&psi));
    }
}
