//! The random greedy (Φ, B)-process, reserve sampling, the cover step and
//! computable concentration bounds with empirical harnesses.

use crate::embed::{extend, Constraints, EmbedMode, Template};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hypercore::{
    bounded_check, factorial, is_subset, subsets, CliqueIndex, IntVec, Params, RGraph, VSet,
};
use crate::rng;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use rand::Rng;
use serde::Serialize;
use std::collections::HashSet;

/// A template H on vertices 1..=v_H with rooted set F.
#[derive(Clone, Debug)]
pub struct ExtensionType {
    pub h: RGraph,
    pub f: VSet,
}

impl ExtensionType {
    pub fn new(h: RGraph, f: VSet) -> Result<Self> {
        if f.iter().any(|&v| v == 0 || v > h.n) {
            return Err(Error::Malformed("F must be a subset of V(H)".into()));
        }
        Ok(ExtensionType { h, f })
    }

    /// (K^r_q, [r]): a q-clique rooted at one edge.
    pub fn clique(q: usize, r: usize) -> Self {
        ExtensionType {
            h: RGraph::complete(q as u32, r),
            f: (1..=r as u32).collect(),
        }
    }

    /// H[F].
    pub fn rooted_edges(&self) -> Vec<VSet> {
        self.h.edges().filter(|e| is_subset(e, &self.f)).cloned().collect()
    }

    fn template(&self) -> Template {
        Template::new(self.h.n, self.h.r, self.h.edges().cloned().collect(), self.f.clone())
    }
}

/// Every edge e ∈ H \ H[F] has e ∩ F inside some rooted edge.
pub fn admissible(t: &ExtensionType) -> bool {
    let rooted = t.rooted_edges();
    t.h.edges().filter(|e| !is_subset(e, &t.f)).all(|e| {
        let inter: VSet = e.iter().copied().filter(|v| t.f.contains(v)).collect();
        rooted.iter().any(|g| is_subset(&inter, g))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeTrace {
    pub edge: VSet,
    pub rooted: bool,
    /// Max (r−1)-degree of ∂^t_e Φ* after the last completed step.
    pub max_degree: i64,
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProcessRun {
    pub seed: u64,
    pub steps: usize,
    pub aborted_at: Option<usize>,
    /// φ*_i as maps (index v − 1 ↦ host vertex).
    pub outcome: Vec<Vec<u32>>,
    pub modes: Vec<EmbedMode>,
    /// Max over template edges of the (r−1)-degree of ∂^i_e Φ*, after each step.
    pub running_max_degree: Vec<i64>,
    pub traces: Vec<EdgeTrace>,
    pub theta: f64,
    /// 2^{r+1} r! θ, the boundedness level every trace is compared with.
    pub bound_level: f64,
    pub all_bounded: bool,
}

fn image(map: &[u32], e: &[u32]) -> VSet {
    let mut o: VSet = e.iter().map(|&v| map[v as usize - 1]).collect();
    o.sort_unstable();
    o
}

/// Runs the (Φ, B)-process. `roots[i]` lists the images of the sorted F.
/// `allowed` restricts non-rooted image edges (the prescribed-set variant).
#[allow(clippy::too_many_arguments)]
pub fn run_process(
    t: &ExtensionType,
    roots: &[Vec<u32>],
    b: &IntVec,
    host_n: u32,
    allowed: Option<&(dyn Fn(&[u32]) -> bool + Sync)>,
    theta: f64,
    seed: u64,
    budget: u64,
) -> Result<ProcessRun> {
    if !admissible(t) {
        return Err(Error::Config("extension type is not admissible".into()));
    }
    let tpl = t.template();
    let mut rng = rng::stream(seed, "process");
    let mut covered: HashSet<VSet> = HashSet::new();
    let mut run = ProcessRun {
        seed,
        steps: roots.len(),
        aborted_at: None,
        outcome: Vec::new(),
        modes: Vec::new(),
        running_max_degree: Vec::new(),
        traces: Vec::new(),
        theta,
        bound_level: (1u64 << (t.h.r + 1)) as f64 * factorial(t.h.r as u64) as f64 * theta,
        all_bounded: true,
    };
    let edges: Vec<VSet> = t.h.edges().cloned().collect();
    let mut deg: Vec<std::collections::HashMap<VSet, i64>> = vec![Default::default(); edges.len()];
    let mut running = 0i64;
    for (i, root) in roots.iter().enumerate() {
        if root.len() != t.f.len() {
            return Err(Error::Malformed(format!("root {i} has {} vertices, F has {}", root.len(), t.f.len())));
        }
        let anchor: Vec<(u32, u32)> = t.f.iter().copied().zip(root.iter().copied()).collect();
        let usable = |e: &[u32]| b.get(e) == 0 && !covered.contains(e) && allowed.is_none_or(|a| a(e));
        let c = Constraints::edges(&usable);
        match extend(&tpl, &anchor, host_n, &c, &mut rng, budget) {
            Ok(ext) => {
                for (k, e) in edges.iter().enumerate() {
                    let img = image(&ext.map, e);
                    for s in subsets(&img, t.h.r - 1) {
                        let d = deg[k].entry(s).or_insert(0);
                        *d += 1;
                        running = running.max(*d);
                    }
                    covered.insert(img);
                }
                run.modes.push(ext.mode);
                run.outcome.push(ext.map);
                run.running_max_degree.push(running);
            }
            Err(Error::Exhausted(_)) => {
                run.aborted_at = Some(i);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let level = run.bound_level * host_n as f64;
    for (k, e) in edges.iter().enumerate() {
        let max_degree = deg[k].values().copied().max().unwrap_or(0);
        let bounded = (max_degree as f64) < level;
        run.all_bounded &= bounded;
        run.traces.push(EdgeTrace {
            edge: e.clone(),
            rooted: is_subset(e, &t.f),
            max_degree,
            bounded,
        });
    }
    Ok(run)
}

/// Recomputes ∂^t_e Φ* for template edge `e` from the outcome.
pub fn trace_of(run: &ProcessRun, e: &[u32]) -> IntVec {
    let mut v = IntVec::new();
    for m in &run.outcome {
        v.add(image(m, e), 1);
    }
    v
}

/// ∂^t_e Φ for a rooted edge, computed from the roots alone.
pub fn root_trace(t: &ExtensionType, roots: &[Vec<u32>], e: &[u32]) -> IntVec {
    let mut v = IntVec::new();
    for root in roots {
        let mut img: VSet = e
            .iter()
            .map(|x| root[t.f.iter().position(|y| y == x).expect("rooted edge")])
            .collect();
        img.sort_unstable();
        v.add(img, 1);
    }
    v
}

/// Re-checks from scratch that no φ*_i uses an edge of B or of an earlier image
/// outside its own rooted part. Returns the first offending step.
pub fn validate_run(t: &ExtensionType, run: &ProcessRun, b: &IntVec) -> Option<usize> {
    let mut covered: HashSet<VSet> = HashSet::new();
    for (i, m) in run.outcome.iter().enumerate() {
        for e in t.h.edges() {
            if is_subset(e, &t.f) {
                continue;
            }
            let img = image(m, e);
            if b.get(&img) != 0 || covered.contains(&img) {
                return Some(i);
            }
        }
        for e in t.h.edges() {
            covered.insert(image(m, e));
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct ReserveCertificate {
    pub rate: f64,
    pub edges: usize,
    pub theta: f64,
    pub bounded: bool,
    pub max_degree: i64,
    pub sampled: usize,
    pub target: f64,
    pub min_count: usize,
    pub mean_count: f64,
    pub below_target: usize,
    pub ok: bool,
}

/// Samples R ∼ K^r_n(rate) (rate n^{−ρ} unless overridden) and certifies
/// 2·rate-boundedness and the clique-extension counts on sampled non-R edges.
pub fn sample_reserve(p: &Params, rate: Option<f64>, seed: u64) -> (RGraph, ReserveCertificate) {
    let n = p.n;
    let rate = rate.unwrap_or_else(|| (n as f64).powf(-p.rho_f64()));
    let mut rg = rng::stream(seed, "reserve");
    let verts: Vec<u32> = (1..=n).collect();
    let mut r_graph = RGraph::new(n, p.r);
    let mut complement = Vec::new();
    for e in subsets(&verts, p.r) {
        if rg.random_bool(rate.clamp(0.0, 1.0)) {
            r_graph.insert(e).unwrap();
        } else {
            complement.push(e);
        }
    }
    let theta = 2.0 * rate;
    let rep = bounded_check(
        &r_graph.indicator(),
        &BigRational::from_f64(theta).unwrap_or_default(),
        n,
        p.r,
    );
    let take = complement.len().min(1000);
    let sample: Vec<VSet> = if complement.len() <= 1000 {
        complement
    } else {
        rand::seq::index::sample(&mut rg, complement.len(), take)
            .into_iter()
            .map(|i| complement[i].clone())
            .collect()
    };
    let idx = CliqueIndex::new(&r_graph);
    let counts: Vec<usize> = Exec::Parallel.map_slice(&sample, |e| idx.count_extensions(e, p.q));
    let target = (n as f64).powf(-(p.k as f64) * p.rho_f64()) * (n as f64).powi((p.q - p.r) as i32);
    let below = counts.iter().filter(|&&c| (c as f64) < target).count();
    let cert = ReserveCertificate {
        rate,
        edges: r_graph.len(),
        theta,
        bounded: rep.ok || rep.max_degree == 0,
        max_degree: rep.max_degree,
        sampled: counts.len(),
        target,
        min_count: counts.iter().copied().min().unwrap_or(0),
        mean_count: if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<usize>() as f64 / counts.len() as f64
        },
        below_target: below,
        ok: (rep.ok || rep.max_degree == 0) && below == 0,
    };
    (r_graph, cert)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverOutcome {
    /// Q_e for the covered prefix of L1, in sorted edge order.
    pub cliques: Vec<VSet>,
    pub aborted_at: Option<usize>,
    pub run: ProcessRun,
}

/// Covers every edge e of L1 by a q-clique Q_e ⊇ e with Q_e \ {e} ⊆ R,
/// edge-disjoint, via the process on (K^r_q, e).
pub fn cover(l1: &RGraph, r_graph: &RGraph, p: &Params, seed: u64, budget: u64) -> Result<CoverOutcome> {
    if let Some(e) = l1.edges().find(|e| r_graph.contains(e)) {
        return Err(Error::Malformed(format!("L1 edge {e:?} lies in R")));
    }
    let t = ExtensionType::clique(p.q, p.r);
    let roots: Vec<Vec<u32>> = l1.edges().map(|e| e.to_vec()).collect();
    let in_r = |e: &[u32]| r_graph.contains(e);
    let n = l1.n.max(r_graph.n);
    let run = run_process(&t, &roots, &IntVec::new(), n, Some(&in_r), 0.0, seed, budget)?;
    let all: Vec<u32> = (1..=p.q as u32).collect();
    let cliques = run.outcome.iter().map(|m| image(m, &all)).collect();
    Ok(CoverOutcome {
        cliques,
        aborted_at: run.aborted_at,
        run,
    })
}

/// 2·exp(−μc²/(2(1+2c)C)).
pub fn chernoff_bound(mu: f64, c: f64, big_c: f64) -> Result<f64> {
    if !(mu > 0.0 && c > 0.0 && big_c > 0.0) {
        return Err(Error::Config("chernoff_bound needs positive parameters".into()));
    }
    Ok(2.0 * (-mu * c * c / (2.0 * (1.0 + 2.0 * c) * big_c)).exp())
}

/// exp(−a²/(2(v + ab))).
pub fn freedman_bound(a: f64, b: f64, v: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && v > 0.0) {
        return Err(Error::Config("freedman_bound needs positive parameters".into()));
    }
    Ok((-a * a / (2.0 * (v + a * b))).exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct HarnessResult {
    pub trials: u64,
    pub hits: u64,
    pub frequency: f64,
    pub bound: f64,
    /// bound + 3σ with σ² = bound(1 − bound)/trials.
    pub threshold: f64,
    pub pass: bool,
}

fn harness_result(trials: u64, hits: u64, bound: f64) -> HarnessResult {
    let b = bound.min(1.0);
    let sigma = (b * (1.0 - b) / trials as f64).sqrt();
    let frequency = hits as f64 / trials as f64;
    HarnessResult {
        trials,
        hits,
        frequency,
        bound,
        threshold: bound + 3.0 * sigma,
        pass: frequency <= bound + 3.0 * sigma,
    }
}

const CHUNK: u64 = 1000;

/// X = sum of m independent Bernoulli(p) coins, μ = mp, C = 1: frequency of
/// |X − μ| > cμ against the Chernoff bound.
pub fn chernoff_harness(trials: u64, m: u32, p: f64, c: f64, seed: u64, exec: Exec) -> Result<HarnessResult> {
    let mu = m as f64 * p;
    let bound = chernoff_bound(mu, c, 1.0)?;
    let chunks = trials.div_ceil(CHUNK) as usize;
    let hits: u64 = exec
        .map(chunks, |k| {
            let mut rg = rng::stream(seed, &format!("chernoff/{k}"));
            let n = CHUNK.min(trials - k as u64 * CHUNK);
            (0..n)
                .filter(|_| {
                    let x = (0..m).filter(|_| rg.random_bool(p)).count() as f64;
                    (x - mu).abs() > c * mu
                })
                .count() as u64
        })
        .into_iter()
        .sum();
    Ok(harness_result(trials, hits, bound))
}

/// Martingale with m steps of ±b (fair), total conditional variance v = m·b²:
/// frequency of reaching a at some time against the Freedman bound.
pub fn freedman_harness(trials: u64, m: u32, b: f64, a: f64, seed: u64, exec: Exec) -> Result<HarnessResult> {
    let v = m as f64 * b * b;
    let bound = freedman_bound(a, b, v)?;
    let chunks = trials.div_ceil(CHUNK) as usize;
    let hits: u64 = exec
        .map(chunks, |k| {
            let mut rg = rng::stream(seed, &format!("freedman/{k}"));
            let n = CHUNK.min(trials - k as u64 * CHUNK);
            (0..n)
                .filter(|_| {
                    let mut x = 0.0;
                    for _ in 0..m {
                        x += if rg.random_bool(0.5) { b } else { -b };
                        if x >= a {
                            return true;
                        }
                    }
                    false
                })
                .count() as u64
        })
        .into_iter()
        .sum();
    Ok(harness_result(trials, hits, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::{intersection_size, vset};

    #[test]
    fn admissibility_examples() {
        assert!(admissible(&ExtensionType::clique(3, 2)));
        assert!(admissible(&ExtensionType::clique(5, 3)));
        let h = RGraph::from_edges(4, 2, [vset(&[1, 2]), vset(&[3, 4])]).unwrap();
        let t = ExtensionType::new(h, vset(&[1, 2, 3])).unwrap();
        assert!(!admissible(&t));
    }

    #[test]
    fn disjoint_roots_complete() {
        let t = ExtensionType::clique(3, 2);
        let roots = vec![vec![1, 2], vec![3, 4], vec![5, 6]];
        let run = run_process(&t, &roots, &IntVec::new(), 100, None, 0.1, 7, 100).unwrap();
        assert_eq!(run.aborted_at, None);
        assert_eq!(run.outcome.len(), 3);
        assert_eq!(validate_run(&t, &run, &IntVec::new()), None);
        for (m, root) in run.outcome.iter().zip(&roots) {
            assert_eq!(&m[..2], &root[..]);
        }
    }

    #[test]
    fn repeated_root_aborts_when_exhausted() {
        // host K²_6, root {1,2} repeated: each step uses {1,x},{2,x}; 4 steps fit
        let t = ExtensionType::clique(3, 2);
        let roots = vec![vec![1, 2]; 6];
        let run = run_process(&t, &roots, &IntVec::new(), 6, None, 0.5, 1, 10).unwrap();
        assert_eq!(run.aborted_at, Some(4));
        assert_eq!(validate_run(&t, &run, &IntVec::new()), None);
        assert_eq!(root_trace(&t, &roots[..4], &[1, 2]), trace_of(&run, &[1, 2]));
    }

    #[test]
    fn cover_examples() {
        let p = Params::new(3, 2, 10).unwrap();
        // single edge with a completion in R
        let l1 = RGraph::from_edges(10, 2, [vset(&[1, 2])]).unwrap();
        let r = RGraph::from_edges(10, 2, [vset(&[1, 5]), vset(&[2, 5])]).unwrap();
        let out = cover(&l1, &r, &p, 3, 10).unwrap();
        assert_eq!(out.cliques, vec![vset(&[1, 2, 5])]);
        // two edges sharing a vertex, R = everything else
        let l1 = RGraph::from_edges(10, 2, [vset(&[1, 2]), vset(&[1, 3])]).unwrap();
        let r = RGraph::complete(10, 2).minus(&l1);
        let out = cover(&l1, &r, &p, 3, 10).unwrap();
        assert_eq!(out.aborted_at, None);
        assert!(intersection_size(&out.cliques[0], &out.cliques[1]) < 2);
        // empty R
        let out = cover(&l1, &RGraph::new(10, 2), &p, 3, 10).unwrap();
        assert_eq!(out.aborted_at, Some(0));
        assert!(cover(&l1, &RGraph::complete(10, 2), &p, 3, 10).is_err());
    }

    #[test]
    fn reserve_extremes() {
        let p = Params::new(3, 2, 100).unwrap();
        let (r, cert) = sample_reserve(&p, Some(1.0), 1);
        assert_eq!(r.len(), 4950);
        assert_eq!(cert.sampled, 0);
        let (r, cert) = sample_reserve(&p, Some(0.0), 1);
        assert!(r.is_empty());
        assert!(cert.bounded);
        assert_eq!(cert.min_count, 0);
        assert!(!cert.ok);
        // rate 1 leaves no complement; drop one edge by hand to check the count
        let mut full = RGraph::complete(100, 2);
        full.remove(&[1, 2]);
        let idx = CliqueIndex::new(&full);
        assert_eq!(idx.count_extensions(&[1, 2], 3), 98);
    }

    #[test]
    fn bound_functions() {
        assert!((freedman_bound(1.0, 1.0, 1.0).unwrap() - (-0.25f64).exp()).abs() < 1e-15);
        let c = chernoff_bound(100.0, 1.0, 1.0).unwrap();
        assert!((c - 2.0 * (-100.0f64 / 6.0).exp()).abs() < 1e-20);
        assert!((c - 1.16e-7).abs() < 0.01e-7);
        assert!(chernoff_bound(0.0, 1.0, 1.0).is_err());
        assert!(freedman_bound(1.0, -1.0, 1.0).is_err());
        for i in 1..20 {
            let x = i as f64;
            assert!(freedman_bound(x + 1.0, 1.0, 5.0).unwrap() < freedman_bound(x, 1.0, 5.0).unwrap());
            assert!(chernoff_bound(x + 1.0, 0.5, 1.0).unwrap() < chernoff_bound(x, 0.5, 1.0).unwrap());
        }
    }
}
