use serde_json::Value;
use std::fs;
use steiner_cli::{run, EXIT_CONFIG, EXIT_DIVISIBILITY, EXIT_OK, EXIT_PARSE, EXIT_STAGE};

const FANO: &str = "1 2 3\n1 4 5\n1 6 7\n2 4 6\n2 5 7\n3 4 7\n3 5 6\n";

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["steiner"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(out: &str) -> Value {
    serde_json::from_str(out).unwrap()
}

#[test]
fn build_sts7_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("sts7.txt");
    let (code, _, err) = cli(&["build", "--q", "3", "--r", "2", "--n", "7", "--mode", "small", "--out", d.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(fs::read_to_string(&d).unwrap().lines().count(), 7);
    let (code, out, _) = cli(&["--format", "json", "verify", "--n", "7", "--decomposition", d.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["result"]["verdict"], "Ok");
    assert_eq!(v["result"]["edges"], 21);
    assert_eq!(v["result"]["graph_divisible"], true);
}

#[test]
fn build_sts15_within_ten_seeds() {
    let (code, out, err) = cli(&["--format", "json", "build", "--n", "15", "--seeds", "10", "--seed", "42"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&out);
    assert_eq!(v["result"]["blocks"], 35);
    assert_eq!(v["result"]["report"]["run"]["verified"], true);
    assert!(v["result"]["report"]["run"]["attempts"].as_array().unwrap().len() <= 10);
}

#[test]
fn non_divisible_order_is_rejected() {
    let (code, _, err) = cli(&["build", "--n", "8"]);
    assert_eq!(code, EXIT_DIVISIBILITY);
    assert!(err.contains("not divisible"), "{err}");
}

#[test]
fn full_mode_reports_a_stage() {
    let (code, out, err) = cli(&["--format", "json", "build", "--n", "13", "--mode", "full", "--rate", "0.3"]);
    assert_eq!(code, EXIT_STAGE, "{err}");
    assert!(json(&out)["error"].as_str().unwrap().contains("stage"));
}

#[test]
fn verify_fano_variants() {
    let dir = tempfile::tempdir().unwrap();
    let fano = dir.path().join("fano.txt");
    fs::write(&fano, FANO).unwrap();
    let (code, _, _) = cli(&["verify", "--n", "7", "--decomposition", fano.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);

    let dup = dir.path().join("dup.txt");
    fs::write(&dup, format!("{FANO}1 2 3\n")).unwrap();
    let (code, _, err) = cli(&["verify", "--n", "7", "--decomposition", dup.to_str().unwrap()]);
    assert_eq!(code, EXIT_STAGE);
    assert!(err.contains("DoublyCoveredEdge([1, 2])"), "{err}");

    let cut = dir.path().join("cut.txt");
    fs::write(&cut, "1 2 3\n1 4 5\n1 6\n").unwrap();
    let (code, _, err) = cli(&["verify", "--n", "7", "--decomposition", cut.to_str().unwrap()]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("line 3"), "{err}");

    let graph = dir.path().join("k7.txt");
    fs::write(&graph, steiner_core::hypercore::io::write_graph(&steiner_core::hypercore::RGraph::complete(7, 2))).unwrap();
    let (code, _, _) = cli(&["verify", "--graph", graph.to_str().unwrap(), "--decomposition", fano.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn configuration_errors() {
    assert_eq!(cli(&["build"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["build", "--n", "7", "--q", "2", "--r", "2"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["verify", "--decomposition", "x"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["frobnicate"]).0, EXIT_CONFIG);
    assert_eq!(cli(&["verify", "--n", "7", "--decomposition", "/nonexistent/file"]).0, EXIT_PARSE);
    assert_eq!(cli(&["--help"]).0, EXIT_OK);
}

#[test]
fn nibble_csv_is_deterministic() {
    let a = cli(&["--format", "csv", "simulate", "nibble", "--n", "300", "--q", "3", "--r", "2", "--seed", "1"]);
    let b = cli(&["--format", "csv", "simulate", "nibble", "--n", "300", "--q", "3", "--r", "2", "--seed", "1"]);
    assert_eq!(a.0, EXIT_OK);
    assert!(a.1.starts_with("i,p,H_size,"));
    assert_eq!(a.1, b.1);
}

#[test]
fn reserve_certificate() {
    let (code, out, _) = cli(&["--format", "json", "simulate", "reserve", "--n", "200", "--rho", "0.0278", "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    let c = &json(&out)["result"]["certificate"];
    assert_eq!(c["bounded"], true);
    assert_eq!(c["sampled"], 1000);
    assert!(c["mean_count"].as_f64().unwrap() > 100.0);
}

#[test]
fn cover_with_empty_reserve_records_abort() {
    let (code, out, _) = cli(&["--format", "json", "simulate", "process", "--type", "cover", "--n", "20", "--rate", "0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["result"]["aborted_at"], 0);
}

#[test]
fn decode_commands() {
    let (code, out, _) = cli(&["decode", "table", "3", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "q=3 r=2 N=6\nx(0) = 2\nx(1) = -1\nx(2) = 2\n");
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.txt");
    fs::write(&v, "+1: 1 2\n+1: 1 3\n+1: 2 3\n").unwrap();
    let phi = dir.path().join("phi.txt");
    let (code, _, err) = cli(&["decode", "check", v.to_str().unwrap(), "--out", phi.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let phi = steiner_core::hypercore::io::parse_signed(&fs::read_to_string(&phi).unwrap()).unwrap();
    assert_eq!(steiner_core::hypercore::boundary_qr(&phi, 3, 2).unwrap().len(), 3);
    fs::write(&v, "+1: 1 2\n").unwrap();
    assert_eq!(cli(&["decode", "check", v.to_str().unwrap()]).0, EXIT_DIVISIBILITY);
    fs::write(&v, "+1: 1 2 3\n").unwrap();
    assert_eq!(cli(&["decode", "check", v.to_str().unwrap()]).0, EXIT_PARSE);
}

#[test]
fn omega_dump_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("omega.txt");
    let (code, _, _) = cli(&["omega", "build", "3", "2", "--out", o.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let (g, plus, minus, _, ring) = steiner_core::omega::parse_dump(&fs::read_to_string(&o).unwrap()).unwrap();
    assert_eq!((g.n, g.len(), plus.len(), minus.len(), ring.len()), (45, 171, 57, 57, 3));
}

#[test]
fn boost_command() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, steiner_core::hypercore::io::write_graph(&steiner_core::hypercore::RGraph::complete(14, 2))).unwrap();
    let h = dir.path().join("h.txt");
    let (code, out, err) = cli(&["--format", "json", "boost", "--graph", g.to_str().unwrap(), "--seed", "3", "--out", h.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&out);
    assert_eq!(v["result"]["positivity"]["ok"], true);
    assert_eq!(fs::read_to_string(&h).unwrap().lines().count() as u64, v["result"]["h_size"].as_u64().unwrap());
}

#[test]
fn report_dir_from_environment_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let rd = dir.path().join("reports");
    let (code, _, _) = cli(&["--report-dir", rd.to_str().unwrap(), "decode", "table", "4", "3"]);
    assert_eq!(code, EXIT_OK);
    let rep: Value = serde_json::from_str(&fs::read_to_string(rd.join("decode-table.json")).unwrap()).unwrap();
    assert_eq!(rep["command"], "decode-table");
    assert_eq!(rep["version"], steiner_cli::VERSION);
    assert!(rep["config"]["cmd"]["Decode"]["Table"]["q"] == 4);
    assert!(rep.get("wall_clock_ms").is_none());
    let (_, out, _) = cli(&["--format", "json", "--timing", "decode", "table", "4", "3"]);
    assert!(json(&out)["wall_clock_ms"].as_f64().is_some());

    // the env var is read by the real binary
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_steiner"))
        .args(["decode", "table", "3", "2"])
        .env("STEINER_REPORT_DIR", dir.path().join("env"))
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(dir.path().join("env/decode-table.json").exists());
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_steiner")).args(["build", "--n", "8"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_DIVISIBILITY));
}

#[test]
fn absorber_build_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("r.txt");
    fs::write(&r, "2 60000\n1 2\n1 3\n2 3\n").unwrap();
    let book = dir.path().join("book.json");
    let (code, _, err) = cli(&["absorber", "build", "--reserve", r.to_str().unwrap(), "--out", book.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let d = dir.path().join("d.txt");
    let (code, out, err) = cli(&["--format", "json", "absorber", "solve", "--book", book.to_str().unwrap(), "--leave", r.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(json(&out)["result"]["report"]["verified"], true);
    // a non-divisible leave is a configuration error
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2 60000\n1 2\n").unwrap();
    let (code, _, _) = cli(&["absorber", "solve", "--book", book.to_str().unwrap(), "--leave", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    // too small a host fails at a named stage
    fs::write(&r, "2 500\n1 2\n1 3\n2 3\n").unwrap();
    let (code, _, err) = cli(&["absorber", "build", "--reserve", r.to_str().unwrap(), "--out", book.to_str().unwrap()]);
    assert_eq!(code, EXIT_STAGE);
    assert!(err.contains("stage splitting"), "{err}");
}
