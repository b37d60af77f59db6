//! Command-line front end: small Steiner constructions, verification,
//! simulations, gadget and decoder dumps, boosting and the absorber.
//!
//! Every command writes a JSON report holding the full configuration, the
//! seed, the artifact version and the effective parameters. Reports go to
//! `--report-dir` (or `STEINER_REPORT_DIR`) when set, and to stdout with
//! `--format json`. Wall-clock time is recorded only with `--timing`, so that
//! repeated runs with one seed produce byte-identical files.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use steiner_core::absorber::{absorb_solve, build_absorber, AbsorberBook, AbsorberConfig};
use steiner_core::boost::{boost_weights, sample_h};
use steiner_core::decode::{decoder_qr, divisible, integral_decompose};
use steiner_core::exec::Exec;
use steiner_core::hypercore::io::{parse_cliques, parse_graph, parse_signed, write_cliques, write_graph, write_signed};
use steiner_core::hypercore::{boundary_qr, parse_rational, verify_decomposition, CliqueIndex, Params, RGraph, VSet};
use steiner_core::nibble::{removal_process, trajectory_audit, trajectory_csv, Stop, TrajectoryModel};
use steiner_core::omega::{build_omega_qr, dump, validate_omega};
use steiner_core::process::{cover, run_process, sample_reserve, ExtensionType};
use steiner_core::rng::{self, child_seed};
use steiner_core::steiner::{build_full, build_small, SmallConfig};
use steiner_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIVISIBILITY: i32 = 2;
pub const EXIT_STAGE: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_CONFIG: i32 = 5;

/// Artifact version: package version plus the git revision at build time.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("STEINER_GIT_REV"));

#[derive(Parser, Debug, Serialize)]
#[command(name = "steiner", version = VERSION, about = "Clique decompositions of complete hypergraphs at desk scale")]
pub struct Cli {
    /// Stdout format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Directory receiving `<command>.json` reports.
    #[arg(long, global = true, env = "STEINER_REPORT_DIR")]
    pub report_dir: Option<PathBuf>,
    /// Record wall-clock time in the report (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Construct a K^r_q-decomposition of K^r_n.
    Build(BuildArgs),
    /// Check a decomposition of a graph.
    Verify(VerifyArgs),
    /// Run a random process and emit its report.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Local decoder tables and divisible-vector decomposition.
    #[command(subcommand)]
    Decode(Decode),
    /// Exchange gadget construction.
    #[command(subcommand)]
    Omega(Omega),
    /// Sample a boosted clique family H of a graph.
    Boost(BoostArgs),
    /// Build an absorber book or absorb a leave with it.
    #[command(subcommand)]
    Absorber(Absorber),
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct Qr {
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Small,
    Full,
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    #[command(flatten)]
    pub qr: Qr,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Small)]
    pub mode: Mode,
    /// Node budget of one exact-completion search (small mode).
    #[arg(long, default_value_t = 200_000)]
    pub budget: u64,
    /// Seeds tried before giving up (small mode).
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Reserve edge probability (small mode default 0.25, full mode n^{−ρ}).
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Decomposition output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Graph file; omit to verify against K^r_n given by --n and --r.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// Clique order; inferred from the first block when omitted.
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub decomposition: PathBuf,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Simulate {
    /// Clique removal process on K^r_n with all q-cliques.
    Nibble(NibbleArgs),
    /// The extension process (cover or plain clique extensions).
    Process(ProcessArgs),
    /// Reserve sampling and its certificate.
    Reserve(ReserveArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StopArg {
    Horizon,
    Exhaustion,
}

#[derive(Args, Debug, Serialize)]
pub struct NibbleArgs {
    #[command(flatten)]
    pub qr: Qr,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = StopArg::Horizon)]
    pub stop: StopArg,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub eps: f64,
    /// Trajectory CSV output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessType {
    /// Cover random edges outside a reserve R using R.
    Cover,
    /// Extend random root edges to edge-disjoint q-cliques of K^r_n.
    Clique,
}

#[derive(Args, Debug, Serialize)]
pub struct ProcessArgs {
    #[command(flatten)]
    pub qr: Qr,
    #[arg(long = "type", value_enum, default_value_t = ProcessType::Cover)]
    pub kind: ProcessType,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reserve edge probability for the cover process (0 gives an empty R).
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
    /// Number of root edges.
    #[arg(long, default_value_t = 10)]
    pub roots: usize,
    #[arg(long, default_value_t = 16)]
    pub budget: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ReserveArgs {
    #[command(flatten)]
    pub qr: Qr,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Density exponent ρ (rate n^{−ρ}), as a decimal or fraction.
    #[arg(long)]
    pub rho: Option<String>,
    /// Explicit edge probability, overriding ρ.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Reserve graph output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Decode {
    /// Coefficients x(t) of the decoder on K^r_{q+r}.
    Table {
        q: usize,
        r: usize,
    },
    /// Divisibility check and integral decomposition of a signed edge vector.
    Check {
        vector: PathBuf,
        #[command(flatten)]
        qr: Qr,
        /// Output file for the signed clique vector Φ.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Omega {
    /// Build and validate the gadget, dumping it as text.
    Build {
        q: usize,
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct BoostArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub qr: Qr,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output clique file for H.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Absorber {
    /// Build a book for the reserve graph R on a host of --n vertices.
    Build {
        #[arg(long)]
        reserve: PathBuf,
        #[command(flatten)]
        qr: Qr,
        /// Host vertex count (default: the reserve file's n).
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose A ∪ L for a divisible leave L inside the book's reserve.
    Solve {
        #[arg(long)]
        book: PathBuf,
        #[arg(long)]
        leave: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub report: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotDivisible { .. } => EXIT_DIVISIBILITY,
            Error::Stage { .. } | Error::Exhausted(_) | Error::Overflow(_) => EXIT_STAGE,
            Error::Parse { .. } | Error::Malformed(_) | Error::Io(_) => EXIT_PARSE,
            Error::Config(_) => EXIT_CONFIG,
        };
        Failure {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: msg.into(),
        report: None,
    }
}

type Outcome = std::result::Result<Value, Failure>;

/// What a command hands back: the result section of its report plus the
/// text shown on stdout in text/csv format.
struct Done {
    result: Value,
    text: String,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_PARSE,
        message: format!("cannot read {}: {e}", path.display()),
        report: None,
    })
}

fn write(path: &Path, content: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| config(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, content).map_err(|e| config(format!("cannot write {}: {e}", path.display())))
}

fn params(q: usize, r: usize, n: u32, rho: &Option<String>, alpha: &Option<String>) -> Result<Params, Failure> {
    let mut p = Params::new(q, r, n)?;
    if let Some(x) = rho {
        p = p.with_rho(parse_rational(x)?);
    }
    if let Some(x) = alpha {
        p = p.with_alpha(parse_rational(x)?);
    }
    Ok(p)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Build(_) => "build",
        Command::Verify(_) => "verify",
        Command::Simulate(Simulate::Nibble(_)) => "simulate-nibble",
        Command::Simulate(Simulate::Process(_)) => "simulate-process",
        Command::Simulate(Simulate::Reserve(_)) => "simulate-reserve",
        Command::Decode(Decode::Table { .. }) => "decode-table",
        Command::Decode(Decode::Check { .. }) => "decode-check",
        Command::Omega(_) => "omega-build",
        Command::Boost(_) => "boost",
        Command::Absorber(Absorber::Build { .. }) => "absorber-build",
        Command::Absorber(Absorber::Solve { .. }) => "absorber-solve",
    }
}

fn cmd_build(a: &BuildArgs) -> Result<Done, Failure> {
    let p = params(a.qr.q, a.qr.r, a.n, &a.rho, &a.alpha)?;
    let (d, report) = match a.mode {
        Mode::Small => {
            let cfg = SmallConfig {
                reserve_rate: a.rate.unwrap_or(SmallConfig::default().reserve_rate),
                node_budget: a.budget,
                seeds: a.seeds,
                ..SmallConfig::default()
            };
            let (d, rep) = build_small(&p, &cfg, a.seed)?;
            (d, json!({ "small": cfg, "run": rep }))
        }
        Mode::Full => {
            let cfg = AbsorberConfig::default();
            let (d, rep) = build_full(&p, &cfg, a.rate, a.seed, 16)?;
            (d, json!({ "absorber": cfg, "run": rep }))
        }
    };
    if let Some(out) = &a.out {
        write(out, &write_cliques(&d))?;
    }
    let text = match &a.out {
        Some(out) => format!("ok: {} blocks written to {}\n", d.len(), out.display()),
        None => write_cliques(&d),
    };
    Ok(Done {
        result: json!({ "params": p.to_json(), "blocks": d.len(), "report": report }),
        text,
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Done, Failure> {
    let g = match (&a.graph, a.n) {
        (Some(path), _) => parse_graph(&read(path)?)?,
        (None, Some(n)) => RGraph::complete(n, a.r),
        (None, None) => return Err(config("verify needs --graph or --n")),
    };
    let d = parse_cliques(&read(&a.decomposition)?, a.q)?;
    let q = a.q.or_else(|| d.first().map(|c| c.len()));
    let div = match q {
        Some(q) if q > g.r => Some(divisible(&g.indicator(), q, g.r).map_err(|e| e.to_string())),
        _ => None,
    };
    let verdict = verify_decomposition(&g, &d);
    let result = json!({
        "edges": g.len(),
        "blocks": d.len(),
        "verdict": verdict,
        "graph_divisible": div.as_ref().map(|x| x.is_ok()),
        "divisibility_witness": div.and_then(|x| x.err()),
    });
    if !verdict.is_ok() {
        return Err(Failure {
            code: EXIT_STAGE,
            message: format!("not a decomposition: {verdict:?}"),
            report: Some(result),
        });
    }
    Ok(Done {
        result,
        text: format!("ok: {} blocks decompose {} edges\n", d.len(), g.len()),
    })
}

fn cmd_nibble(a: &NibbleArgs, format: Format) -> Result<Done, Failure> {
    let p = Params::new(a.qr.q, a.qr.r, a.n)?;
    let g = RGraph::complete(a.n, p.r);
    let h = CliqueIndex::new(&g).cliques(p.q);
    let model = TrajectoryModel::fitted(&g, p.q, h.len(), a.eps);
    let stop = match a.stop {
        StopArg::Horizon => Stop::Horizon(model.horizon()),
        StopArg::Exhaustion => Stop::Exhaustion,
    };
    let run = removal_process(&g, p.q, &h, stop, a.seed)?;
    let audit = trajectory_audit(&run, &model);
    let csv = trajectory_csv(&run, &model);
    if let Some(out) = &a.out {
        write(out, &csv)?;
    }
    let result = json!({
        "params": p.to_json(),
        "stop": stop,
        "horizon": model.horizon(),
        "selected": run.selected.len(),
        "leave_edges": run.leave.len(),
        "leave_fraction": run.leave_fraction(),
        "samples": run.samples.len(),
        "audit": audit,
    });
    let text = if format == Format::Csv && a.out.is_none() {
        csv
    } else {
        format!(
            "selected {} cliques, leave {} edges ({:.4})\n",
            run.selected.len(),
            run.leave.len(),
            run.leave_fraction()
        )
    };
    Ok(Done { result, text })
}

fn random_edges(n: u32, r: usize, count: usize, avoid: &RGraph, seed: u64) -> RGraph {
    use rand::seq::SliceRandom;
    let mut all: Vec<VSet> = RGraph::complete(n, r).edges().filter(|e| !avoid.contains(e)).cloned().collect();
    all.shuffle(&mut rng::stream(seed, "roots"));
    all.truncate(count);
    RGraph::from_edges(n, r, all).expect("edges of K_n")
}

fn cmd_process(a: &ProcessArgs) -> Result<Done, Failure> {
    let p = Params::new(a.qr.q, a.qr.r, a.n)?;
    match a.kind {
        ProcessType::Cover => {
            let (reserve, cert) = sample_reserve(&p, Some(a.rate), child_seed(a.seed, "reserve"));
            let l1 = random_edges(a.n, p.r, a.roots, &reserve, child_seed(a.seed, "roots"));
            let out = cover(&l1, &reserve, &p, child_seed(a.seed, "cover"), a.budget)?;
            let text = match out.aborted_at {
                Some(i) => format!("cover aborted at root {i} of {}\n", l1.len()),
                None => format!("covered {} roots\n", l1.len()),
            };
            Ok(Done {
                result: json!({
                    "params": p.to_json(),
                    "reserve": cert,
                    "roots": l1.edges().collect::<Vec<_>>(),
                    "cliques": out.cliques,
                    "aborted_at": out.aborted_at,
                    "all_bounded": out.run.all_bounded,
                }),
                text,
            })
        }
        ProcessType::Clique => {
            let t = ExtensionType::clique(p.q, p.r);
            let roots: Vec<Vec<u32>> = random_edges(a.n, p.r, a.roots, &RGraph::new(a.n, p.r), child_seed(a.seed, "roots"))
                .edges()
                .map(|e| e.to_vec())
                .collect();
            let b = steiner_core::hypercore::IntVec::new();
            let run = run_process(&t, &roots, &b, a.n, None, 0.0, child_seed(a.seed, "process"), a.budget)?;
            let text = match run.aborted_at {
                Some(i) => format!("process aborted at step {i} of {}\n", roots.len()),
                None => format!("process completed {} steps\n", roots.len()),
            };
            Ok(Done {
                result: json!({ "params": p.to_json(), "run": run }),
                text,
            })
        }
    }
}

fn cmd_reserve(a: &ReserveArgs) -> Result<Done, Failure> {
    let p = params(a.qr.q, a.qr.r, a.n, &a.rho, &None)?;
    let (reserve, cert) = sample_reserve(&p, a.rate, a.seed);
    if let Some(out) = &a.out {
        write(out, &write_graph(&reserve))?;
    }
    let text = format!(
        "reserve: {} edges at rate {:.4}, bounded {}, certificate {}\n",
        reserve.len(),
        cert.rate,
        cert.bounded,
        if cert.ok { "ok" } else { "failed" }
    );
    Ok(Done {
        result: json!({ "params": p.to_json(), "certificate": cert }),
        text,
    })
}

fn cmd_decode(d: &Decode) -> Result<Done, Failure> {
    match d {
        Decode::Table { q, r } => {
            Params::new(*q, *r, (*q + *r) as u32)?;
            let t = decoder_qr(*q, *r);
            let mut text = format!("q={q} r={r} N={}\n", t.big_n);
            for (i, x) in t.coeff.iter().enumerate() {
                text.push_str(&format!("x({i}) = {x}\n"));
            }
            Ok(Done {
                result: json!({ "table": t, "bound": t.bound(), "max_abs": t.max_abs() }),
                text,
            })
        }
        Decode::Check { vector, qr, out } => {
            let j = parse_signed(&read(vector)?)?;
            if let Some((e, _)) = j.iter().find(|(e, _)| e.len() != qr.r) {
                return Err(Failure::from(Error::Malformed(format!("entry {e:?} is not an {}-set", qr.r))));
            }
            Params::new(qr.q, qr.r, j.max_vertex().max(1))?;
            divisible(&j, qr.q, qr.r)?;
            let n = j.max_vertex().max((qr.q + qr.r) as u32);
            let phi = integral_decompose(&j, qr.q, qr.r, n)?;
            let ok = boundary_qr(&phi, qr.q, qr.r)? == j;
            if !ok {
                return Err(Failure::from(Error::stage("decode", "boundary of the decomposition differs")));
            }
            if let Some(o) = out {
                write(o, &write_signed(&phi))?;
            }
            Ok(Done {
                result: json!({ "entries": j.len(), "divisible": true, "support": phi.len(), "l1": phi.l1(), "boundary_ok": ok }),
                text: format!("divisible; Φ has {} cliques, boundary verified\n", phi.len()),
            })
        }
    }
}

fn cmd_omega(o: &Omega) -> Result<Done, Failure> {
    let Omega::Build { q, r, out } = o;
    Params::new(*q, *r, 1)?;
    let g = build_omega_qr(*q, *r);
    let rep = validate_omega(&g);
    let text = dump(&g);
    if let Some(path) = out {
        write(path, &text)?;
    }
    if !rep.ok {
        return Err(Failure {
            code: EXIT_STAGE,
            message: format!("gadget validation failed: {:?}", rep.violations),
            report: Some(json!({ "validation": rep })),
        });
    }
    Ok(Done {
        result: json!({ "validation": rep }),
        text: if out.is_some() {
            format!("ok: {} vertices, {} edges\n", rep.vertices, rep.edges)
        } else {
            text
        },
    })
}

fn cmd_boost(a: &BoostArgs) -> Result<Done, Failure> {
    let g = parse_graph(&read(&a.graph)?)?;
    if g.r != a.qr.r {
        return Err(config(format!("graph is {}-uniform, --r is {}", g.r, a.qr.r)));
    }
    let p = Params::new(a.qr.q, a.qr.r, g.n)?;
    let w = boost_weights(&g, &p, Exec::Parallel)?;
    let s = sample_h(&w, a.seed, Exec::Parallel)?;
    if let Some(out) = &a.out {
        write(out, &write_cliques(&s.h))?;
    }
    Ok(Done {
        result: json!({ "params": p.to_json(), "h_size": s.h.len(), "positivity": s.positivity, "degrees": s.degrees }),
        text: format!(
            "H: {} cliques; |H(e)| in [{}, {}], target {:.2}\n",
            s.h.len(),
            s.degrees.min,
            s.degrees.max,
            s.degrees.target
        ),
    })
}

fn cmd_absorber(a: &Absorber) -> Result<Done, Failure> {
    match a {
        Absorber::Build { reserve, qr, n, seed, out } => {
            let mut r_graph = parse_graph(&read(reserve)?)?;
            if r_graph.r != qr.r {
                return Err(config(format!("reserve is {}-uniform, --r is {}", r_graph.r, qr.r)));
            }
            let host = n.unwrap_or(r_graph.n);
            if host < r_graph.n {
                return Err(config(format!("host has {host} vertices, reserve needs {}", r_graph.n)));
            }
            r_graph = RGraph::from_edges(host, qr.r, r_graph.edges().cloned())?;
            let p = Params::new(qr.q, qr.r, host)?;
            let cfg = AbsorberConfig::default();
            let book = build_absorber(&r_graph, &p, &cfg, &mut rng::stream(*seed, "absorber"))?;
            write(out, &book.to_json())?;
            Ok(Done {
                result: json!({ "params": p.to_json(), "config": cfg, "audits": book.audits, "stats": book.stats }),
                text: format!("book written to {}\n", out.display()),
            })
        }
        Absorber::Solve { book, leave, seed, out } => {
            let b = AbsorberBook::from_json(&read(book)?)?;
            let l = parse_graph(&read(leave)?)?;
            let l = RGraph::from_edges(b.n, l.r, l.edges().cloned())?;
            let (d, rep) = absorb_solve(&b, &l, &mut rng::stream(*seed, "absorb"))?;
            if let Some(o) = out {
                write(o, &write_cliques(&d))?;
            }
            Ok(Done {
                result: json!({ "report": rep }),
                text: format!("ok: {} blocks decompose A ∪ L\n", d.len()),
            })
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Done, Failure> {
    match &cli.cmd {
        Command::Build(a) => cmd_build(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(Simulate::Nibble(a)) => cmd_nibble(a, cli.format),
        Command::Simulate(Simulate::Process(a)) => cmd_process(a),
        Command::Simulate(Simulate::Reserve(a)) => cmd_reserve(a),
        Command::Decode(d) => cmd_decode(d),
        Command::Omega(o) => cmd_omega(o),
        Command::Boost(a) => cmd_boost(a),
        Command::Absorber(a) => cmd_absorber(a),
    }
}

/// Runs the command line `args` (including the program name), writing
/// stdout output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if code == EXIT_OK { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let start = Instant::now();
    let outcome: Outcome;
    let mut text = String::new();
    let code = match dispatch(&cli) {
        Ok(done) => {
            text = done.text;
            outcome = Ok(done.result);
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            let c = f.code;
            outcome = Err(f);
            c
        }
    };
    let mut report = json!({
        "command": command_name(&cli.cmd),
        "version": VERSION,
        "config": &cli,
        "exit_code": code,
    });
    match outcome {
        Ok(v) => report["result"] = v,
        Err(f) => {
            report["error"] = json!(f.message);
            if let Some(v) = f.report {
                report["result"] = v;
            }
        }
    }
    if cli.timing {
        report["wall_clock_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    }
    let rendered = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    if let Some(dir) = &cli.report_dir {
        let path = dir.join(format!("{}.json", command_name(&cli.cmd)));
        if let Err(f) = write(&path, &rendered) {
            let _ = writeln!(err, "error: {}", f.message);
            return if code == EXIT_OK { f.code } else { code };
        }
    }
    let _ = match cli.format {
        Format::Json => out.write_all(rendered.as_bytes()),
        _ => out.write_all(text.as_bytes()),
    };
    code
}
