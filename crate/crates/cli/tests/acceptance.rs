//! Acceptance run: one PASS/FAIL line per criterion, each with its time limit.

use rand::seq::SliceRandom;
use rand::Rng as _;
use std::collections::{BTreeSet, HashSet};
use std::path::Path;
use std::time::{Duration, Instant};
use steiner_cli::run;
use steiner_core::absorber::generate::sample_host;
use steiner_core::absorber::solve::round_centered;
use steiner_core::absorber::{absorb_solve, build_absorber, generating_cliques, random_divisible_leave, AbsorberConfig};
use steiner_core::algebra::ModSpan;
use steiner_core::boost::boost_weights;
use steiner_core::decode::{decoder_qr, divisible};
use steiner_core::exchange::{anchor_pair, anchor_single, eliminate_pair, find_embedding, split, AnchorKind};
use steiner_core::exec::Exec;
use steiner_core::hypercore::{
    boundary_qr, for_each_subset, is_subset, verify_decomposition, CliqueIndex, CliqueVec, IntVec,
    Params, RGraph, VSet,
};
use steiner_core::nibble::{check_run, removal_process, trajectory_audit, Stop, TrajectoryModel};
use steiner_core::omega::{build_omega_qr, omega_cached, validate_omega};
use steiner_core::process::{chernoff_harness, cover, sample_reserve};
use steiner_core::rng::stream;

/// Leave fraction ceiling for K²₃₀₀ with all triangles (pilot seeds 0–4
/// observed 0.0383 to 0.0399).
const NIBBLE_LEAVE_MAX: f64 = 0.045;
/// Host size on which the absorber book for R = K²₅ is built.
const ABSORBER_HOST: u32 = 60_000;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn decoder_exactness() -> Verdict {
    let mut worst = String::new();
    for (q, r) in [(3, 2), (4, 2), (4, 3), (5, 2), (5, 4)] {
        let t = decoder_qr(q, r);
        let psi = t.materialize_standard();
        let e: VSet = (1..=r as u32).collect();
        let want = IntVec::singleton(e, t.big_n);
        if boundary_qr(&psi, q, r).unwrap() != want {
            return verdict(false, format!("({q},{r}): boundary is not N·1_e"));
        }
        if t.max_abs() > t.bound() {
            return verdict(false, format!("({q},{r}): max |Ψ| {} > {}", t.max_abs(), t.bound()));
        }
        worst += &format!("({q},{r}) max {} ≤ {}; ", t.max_abs(), t.bound());
    }
    verdict(true, worst.trim_end_matches("; ").to_string())
}

fn omega_validity() -> Verdict {
    let mut sizes = Vec::new();
    for (q, r) in [(3, 2), (4, 2), (4, 3)] {
        let g = build_omega_qr(q, r);
        let rep = validate_omega(&g);
        if !rep.ok {
            return verdict(false, format!("({q},{r}): {:?}", rep.violations));
        }
        sizes.push((q, r, rep.edges, rep.size_bound));
    }
    let (_, _, e32, b32) = sizes[0];
    verdict(e32 == 171 && b32 == 972 && e32 as u128 <= b32, format!("(3,2): |Ω| = {e32} ≤ {b32}; all three valid"))
}

fn exchange_algebra() -> Verdict {
    let g = omega_cached(3, 2);
    let host = 90u32;
    let mut rng = stream(3, "exchange moves");
    let (mut splits, mut elims) = (0, 0);
    for m in 0..500 {
        let mut vs: Vec<u32> = (1..=host).collect();
        vs.shuffle(&mut rng);
        // background cliques so the moves act on a nontrivial Φ
        let mut phi = CliqueVec::new();
        for chunk in vs[5..17].chunks(3) {
            let mut c = VSet::from_slice(chunk);
            c.sort_unstable();
            phi.add(c, if rng.random_bool(0.5) { 1 } else { -1 });
        }
        if m % 2 == 0 {
            let mut q = VSet::from_slice(&vs[..3]);
            q.sort_unstable();
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            phi.add(q.clone(), sign);
            let before = boundary_qr(&phi, 3, 2).unwrap();
            let a = anchor_single(&g, &q).unwrap();
            let emb = find_embedding(&g, AnchorKind::Single, &a, host, &IntVec::new(), None, &mut rng, 100).unwrap();
            let out = split(&phi, &q, sign, &emb).unwrap();
            if boundary_qr(&out, 3, 2).unwrap() != before || out.get(&q) != 0 {
                return verdict(false, format!("split move {m} broke the boundary"));
            }
            splits += 1;
        } else {
            let mut qp = VSet::from_slice(&vs[..3]);
            let mut qm = VSet::from_slice(&[vs[0], vs[1], vs[3]]);
            qp.sort_unstable();
            qm.sort_unstable();
            phi.add(qp.clone(), 1);
            phi.add(qm.clone(), -1);
            let before_pair = boundary_qr(&phi, 3, 2).unwrap();
            let a = anchor_pair(&g, &qp, &qm).unwrap();
            let emb = find_embedding(&g, AnchorKind::Pair, &a, host, &IntVec::new(), None, &mut rng, 100).unwrap();
            let out = eliminate_pair(&phi, &qp, &qm, &emb).unwrap();
            if boundary_qr(&out, 3, 2).unwrap() != before_pair {
                return verdict(false, format!("elimination move {m} broke the boundary"));
            }
            let mut shared = VSet::from_slice(&vs[..2]);
            shared.sort_unstable();
            let changed = out.sub(&phi);
            if changed.keys().any(|c| *c != qp && *c != qm && is_subset(&shared, c)) {
                return verdict(false, format!("elimination move {m} reused the shared edge"));
            }
            elims += 1;
        }
    }
    verdict(true, format!("{splits} splits and {elims} eliminations, boundary exact, shared edge never reused"))
}

fn divisibility() -> Verdict {
    for n in 1..=100u32 {
        let ok = divisible(&RGraph::complete(n, 2).indicator(), 3, 2).is_ok();
        if ok != matches!(n % 6, 1 | 3) {
            return verdict(false, format!("n = {n}: divisible() = {ok}"));
        }
    }
    verdict(true, "yes exactly for n ≡ 1, 3 (mod 6), n ≤ 100")
}

fn boost_half_sum() -> Verdict {
    let n = 60;
    let mut g = RGraph::complete(n, 2);
    for i in (1..n).step_by(2) {
        g.remove(&[i, i + 1]);
    }
    let p = Params::new(3, 2, n).unwrap();
    let w = boost_weights(&g, &p, Exec::Parallel).unwrap();
    let mut edges: Vec<VSet> = g.edges().cloned().collect();
    edges.shuffle(&mut stream(5, "half sum edges"));
    for e in &edges[..50] {
        let s = w.half_sum(e);
        if s.to_string() != "1/2" {
            return verdict(false, format!("edge {e:?}: sum {s}"));
        }
    }
    verdict(true, "50 sampled edges of K²₆₀ minus a perfect matching sum to exactly 1/2")
}

fn nibble_behaviour() -> Verdict {
    let g = RGraph::complete(300, 2);
    let h = CliqueIndex::new(&g).cliques(3);
    let m = TrajectoryModel::fitted(&g, 3, h.len(), 1.0 / 3.0);
    let mut fractions = Vec::new();
    for seed in 0..5 {
        let run = removal_process(&g, 3, &h, Stop::Exhaustion, seed).unwrap();
        if let Some(v) = check_run(&g, &h, &run) {
            return verdict(false, format!("seed {seed}: {v}"));
        }
        let audit = trajectory_audit(&run, &m);
        if let Some(x) = audit.first_exit {
            return verdict(false, format!("seed {seed}: envelope exit {x:?}"));
        }
        if run.samples.first().map(|s| s.i) != Some(0) {
            return verdict(false, format!("seed {seed}: no i = 0 sample"));
        }
        let f = run.leave_fraction();
        if f >= NIBBLE_LEAVE_MAX {
            return verdict(false, format!("seed {seed}: leave fraction {f:.4} ≥ {NIBBLE_LEAVE_MAX}"));
        }
        fractions.push(format!("{f:.4}"));
    }
    verdict(true, format!("exact on 5 seeds, leave fractions [{}] < {NIBBLE_LEAVE_MAX}, no envelope exit", fractions.join(", ")))
}

fn cover_validity() -> Verdict {
    let (n, rate) = (150u32, 0.6f64);
    let rho = format!("{}", -(rate.ln()) / (n as f64).ln());
    let p = Params::new(3, 2, n)
        .unwrap()
        .with_rho(steiner_core::hypercore::parse_rational(&rho[..rho.len().min(12)]).unwrap());
    let mut certified = 0;
    for seed in 0..6 {
        let (r_graph, cert) = sample_reserve(&p, Some(rate), seed);
        if !cert.ok {
            continue;
        }
        certified += 1;
        let mut outside: Vec<VSet> = RGraph::complete(n, 2).edges().filter(|e| !r_graph.contains(e)).cloned().collect();
        outside.shuffle(&mut stream(seed, "L1"));
        // sparse L1: vertex-disjoint edges
        let mut used = HashSet::new();
        let l1: Vec<VSet> = outside
            .into_iter()
            .filter(|e| {
                let free = e.iter().all(|v| !used.contains(v));
                if free {
                    used.extend(e.iter().copied());
                }
                free
            })
            .take(40)
            .collect();
        let l1 = RGraph::from_edges(n, 2, l1).unwrap();
        let out = cover(&l1, &r_graph, &p, seed, 16).unwrap();
        if out.aborted_at.is_some() || out.cliques.len() != l1.len() {
            return verdict(false, format!("seed {seed}: cover aborted at {:?}", out.aborted_at));
        }
        let mut seen = HashSet::new();
        for (root, c) in l1.edges().zip(&out.cliques) {
            if !is_subset(root, c) {
                return verdict(false, format!("{c:?} misses its root {root:?}"));
            }
            let mut bad = None;
            for_each_subset(c, 2, |e| {
                if !seen.insert(VSet::from_slice(e)) {
                    bad = Some(format!("edge {e:?} used twice"));
                } else if e != root.as_slice() && !r_graph.contains(e) {
                    bad = Some(format!("edge {e:?} of {c:?} is outside R"));
                }
            });
            if let Some(b) = bad {
                return verdict(false, b);
            }
        }
    }
    verdict(certified > 0, format!("{certified} certified reserves, every sparse L1 of 40 edges covered and validated"))
}

/// All elements of the subgroup of (Z/N)^dim generated by `gens`.
fn brute_span(modulus: i64, dim: usize, gens: &[Vec<i64>]) -> HashSet<Vec<i64>> {
    let mut span: HashSet<Vec<i64>> = HashSet::from([vec![0; dim]]);
    let mut frontier = vec![vec![0; dim]];
    while let Some(v) = frontier.pop() {
        for g in gens {
            let w: Vec<i64> = v.iter().zip(g).map(|(a, b)| (a + b).rem_euclid(modulus)).collect();
            if span.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    span
}

fn modular_span() -> Verdict {
    let mut rng = stream(8, "howell cases");
    let cases = 1200;
    for case in 0..cases {
        let dim = rng.random_range(1..=3);
        let k = rng.random_range(0..=4);
        let gens: Vec<Vec<i64>> = (0..k).map(|_| (0..dim).map(|_| rng.random_range(0..6)).collect()).collect();
        let mut span = ModSpan::new(6, dim);
        for g in &gens {
            span.insert(g).unwrap();
        }
        let brute = brute_span(6, dim, &gens);
        let mut all = vec![vec![]];
        for _ in 0..dim {
            all = all.into_iter().flat_map(|v: Vec<i64>| (0..6).map(move |x| [v.clone(), vec![x]].concat())).collect();
        }
        for v in &all {
            if span.member(v).unwrap() != brute.contains(v) {
                return verdict(false, format!("case {case}: membership of {v:?} disagrees"));
            }
        }
        if span.order() != brute.len() as u128 {
            return verdict(false, format!("case {case}: order {} vs {}", span.order(), brute.len()));
        }
    }
    verdict(true, format!("{cases} random cases, N = 6, dim ≤ 3, all memberships agree"))
}

fn generator_completeness() -> Verdict {
    let n = 30;
    let k = sample_host(n, 2, 0.4, &RGraph::new(n, 2), &mut stream(9, "host"));
    let rep = generating_cliques(&k, 3, 6, f64::INFINITY, f64::INFINITY).unwrap();
    let triangles = CliqueIndex::new(&k).cliques(3);
    for c in &triangles {
        let v = rep.boundary_vector(c).expect("triangle of K");
        if !rep.span.member(&v).unwrap() {
            return verdict(false, format!("∂{c:?} is outside span(Gset)"));
        }
    }
    verdict(
        rep.saturated.is_empty() && rep.audit().is_empty(),
        format!("{} triangles of K (|K| = {}) all in span of {} generators", triangles.len(), k.len(), rep.gset.len()),
    )
}

fn absorb_algebra() -> Verdict {
    // mandatory stage checks: rounding law
    for x in -60..=60 {
        let y = round_centered(x, 6);
        if !(-3 < y && y <= 3 && (x - y) % 6 == 0) {
            return verdict(false, format!("rounding law fails at {x}"));
        }
    }
    let p = Params::new(3, 2, ABSORBER_HOST).unwrap();
    let verts = [11u32, 12, 13, 14, 15];
    let mut reserve = RGraph::new(ABSORBER_HOST, 2);
    for i in 0..5 {
        for j in i + 1..5 {
            reserve.insert(VSet::from_slice(&[verts[i], verts[j]])).unwrap();
        }
    }
    let book = match build_absorber(&reserve, &p, &AbsorberConfig::default(), &mut stream(2024, "absorber book")) {
        Ok(b) => b,
        Err(e) => return verdict(false, format!("build failed: {e}")),
    };
    // splitting and elimination invariants are the book's required audits
    let failed = book.failed_audits();
    if !failed.is_empty() {
        return verdict(false, format!("audits failed: {failed:?}"));
    }
    let mut seen = BTreeSet::new();
    let mut solved = 0;
    for seed in 0..40 {
        let leave = random_divisible_leave(&book.reserve, 3, &mut stream(seed, "leave"));
        if leave.is_empty() || !seen.insert(leave.edges().cloned().collect::<Vec<_>>()) {
            continue;
        }
        let (d, rep) = match absorb_solve(&book, &leave, &mut stream(seed, "solve")) {
            Ok(x) => x,
            Err(e) => return verdict(false, format!("solve failed: {e}")),
        };
        let mut host = book.a_graph();
        for e in leave.edges() {
            host.insert(e.clone()).unwrap();
        }
        if !rep.verified || !verify_decomposition(&host, &d).is_ok() {
            return verdict(false, format!("leave {seed}: A ∪ L not decomposed"));
        }
        solved += 1;
        if solved == 3 {
            break;
        }
    }
    verdict(
        solved == 3,
        format!("R = K²₅ on n = {ABSORBER_HOST}: {solved} divisible leaves absorbed, |𝒬⁻| = {}", book.index.q_minus.len()),
    )
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["steiner"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn small_designs() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut lines = Vec::new();
    for n in [7u32, 9, 13, 15] {
        let path = dir.path().join(format!("sts{n}.txt"));
        let p = path.to_str().unwrap();
        let ns = n.to_string();
        let (code, _, err) = cli(&["build", "--mode", "small", "--n", &ns, "--seeds", "10", "--out", p]);
        if code != 0 {
            return verdict(false, format!("STS({n}): build exit {code}: {err}"));
        }
        let (code, _, err) = cli(&["verify", "--n", &ns, "--decomposition", p]);
        if code != 0 {
            return verdict(false, format!("STS({n}): verify exit {code}: {err}"));
        }
        lines.push(format!("STS({n})"));
    }
    verdict(true, format!("{} built and verified", lines.join(", ")))
}

fn chernoff() -> Verdict {
    let mut worst = 0.0f64;
    for (m, p, c) in [(100u32, 0.5, 0.2), (200, 0.1, 0.5), (50, 0.3, 0.4), (400, 0.05, 0.6)] {
        let h = chernoff_harness(100_000, m, p, c, 12, Exec::Parallel).unwrap();
        if !h.pass {
            return verdict(false, format!("m={m} p={p} c={c}: frequency {} > {}", h.frequency, h.threshold));
        }
        worst = worst.max(h.frequency / h.threshold);
    }
    verdict(true, format!("4 settings × 10⁵ trials, worst frequency/threshold {worst:.3}"))
}

/// Runs `args` twice in fresh copies of the same paths and compares stdout and
/// every file written.
fn twice(dir: &Path, name: &str, args: &[String]) -> Result<(), String> {
    let work = dir.join("work");
    let mut snapshots = Vec::new();
    for round in 0..2 {
        if work.exists() {
            std::fs::remove_dir_all(&work).unwrap();
        }
        std::fs::create_dir_all(&work).unwrap();
        let mut argv: Vec<String> = vec!["--report-dir".into(), work.join("reports").to_str().unwrap().into()];
        argv.extend(args.iter().map(|a| a.replace("{w}", work.to_str().unwrap()).replace("{d}", dir.to_str().unwrap())));
        let refs: Vec<&str> = argv.iter().map(|s| s.as_str()).collect();
        let (code, out, err) = cli(&refs);
        if code != 0 && !name.ends_with("(fails)") {
            return Err(format!("{name}: exit {code} in round {round}: {err}"));
        }
        let mut files = Vec::new();
        for entry in walk(&work) {
            files.push((entry.clone(), std::fs::read(&entry).unwrap()));
        }
        files.sort();
        snapshots.push((code, out, files));
    }
    if snapshots[0] != snapshots[1] {
        return Err(format!("{name}: outputs differ between runs"));
    }
    if snapshots[0].2.is_empty() {
        return Err(format!("{name}: no artifacts written"));
    }
    Ok(())
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("k9.txt"), steiner_core::hypercore::io::write_graph(&RGraph::complete(9, 2))).unwrap();
    std::fs::write(d.join("vec.txt"), "+1: 1 2\n+1: 1 3\n+1: 2 3\n+1: 4 5\n+1: 4 6\n+1: 5 6\n").unwrap();
    std::fs::write(d.join("fano.txt"), "1 2 3\n1 4 5\n1 6 7\n2 4 6\n2 5 7\n3 4 7\n3 5 6\n").unwrap();
    let mut k30 = RGraph::complete(16, 2);
    for i in (1..16).step_by(2) {
        k30.remove(&[i, i + 1]);
    }
    std::fs::write(d.join("g16.txt"), steiner_core::hypercore::io::write_graph(&k30)).unwrap();
    let reserve = "2 60000\n1 2\n1 3\n2 3\n";
    std::fs::write(d.join("r.txt"), reserve).unwrap();
    std::fs::write(d.join("l.txt"), reserve).unwrap();
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("build", vec!["build", "--n", "13", "--seed", "3", "--out", "{w}/d.txt"]),
        ("verify", vec!["verify", "--n", "7", "--decomposition", "{d}/fano.txt"]),
        ("simulate nibble", vec!["--format", "csv", "simulate", "nibble", "--n", "300", "--seed", "1", "--out", "{w}/t.csv"]),
        ("simulate process", vec!["simulate", "process", "--type", "cover", "--n", "40", "--seed", "2"]),
        ("simulate process clique", vec!["simulate", "process", "--type", "clique", "--n", "40", "--seed", "2"]),
        ("simulate reserve", vec!["simulate", "reserve", "--n", "200", "--rho", "0.0278", "--seed", "7", "--out", "{w}/r.txt"]),
        ("decode table", vec!["decode", "table", "4", "2"]),
        ("decode check", vec!["decode", "check", "{d}/vec.txt", "--out", "{w}/phi.txt"]),
        ("omega build", vec!["omega", "build", "3", "2", "--out", "{w}/omega.txt"]),
        ("boost", vec!["boost", "--graph", "{d}/g16.txt", "--seed", "4", "--out", "{w}/h.txt"]),
        ("absorber build", vec!["absorber", "build", "--reserve", "{d}/r.txt", "--seed", "1", "--out", "{w}/book.json"]),
    ];
    let mut names = Vec::new();
    for (name, args) in &commands {
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        if let Err(e) = twice(d, name, &args) {
            return verdict(false, e);
        }
        if *name == "absorber build" {
            std::fs::copy(d.join("work/book.json"), d.join("book.json")).unwrap();
        }
        names.push(*name);
    }
    let solve: Vec<String> = ["absorber", "solve", "--book", "{d}/book.json", "--leave", "{d}/l.txt", "--seed", "1", "--out", "{w}/D.txt"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Err(e) = twice(d, "absorber solve", &solve) {
        return verdict(false, e);
    }
    names.push("absorber solve");
    verdict(true, format!("{} commands byte-identical across reruns", names.len()))
}

/// Runs without the libtest harness so every verdict line reaches stdout.
fn main() {
    type Criterion = (u32, &'static str, u64, fn() -> Verdict);
    let criteria: [Criterion; 13] = [
        (1, "decoder exactness", 5, decoder_exactness),
        (2, "omega gadget validity", 30, omega_validity),
        (3, "exchange algebra", 60, exchange_algebra),
        (4, "divisibility", 1, divisibility),
        (5, "boost half-sum", 60, boost_half_sum),
        (6, "nibble behaviour", 120, nibble_behaviour),
        (7, "cover", 60, cover_validity),
        (8, "modular span", 10, modular_span),
        (9, "generator completeness", 60, generator_completeness),
        (10, "absorb algebra", 300, absorb_algebra),
        (11, "end-to-end small designs", 300, small_designs),
        (12, "concentration harness", 60, chernoff),
        (13, "determinism", 600, determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let ok = v.ok && in_time;
        println!(
            "[{}] {id:>2} {name}: {} ({:.2}s, limit {limit}s)",
            if ok { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
        if !ok {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
