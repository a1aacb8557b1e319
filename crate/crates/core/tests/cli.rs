//! End-to-end checks of the command-line interface: output envelopes,
//! exit codes, config-file precedence, and the optional count cache.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_matchstat")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("matchstat-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin()).args(args).output().expect("spawn");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn results(stdout: &str) -> serde_json::Value {
    let doc: serde_json::Value = serde_json::from_str(stdout).expect("valid JSON");
    assert!(doc.get("config").is_some(), "missing config echo");
    assert!(doc.get("version").is_some(), "missing version");
    doc["results"].clone()
}

#[test]
fn count_reads_graph_file() {
    let dir = scratch("count");
    let path = dir.join("c4.txt");
    std::fs::write(&path, "4 4\n0 1\n0 3\n1 2\n2 3\n").unwrap();
    let (code, stdout, _) = run(&["count", "--input", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = results(&stdout);
    assert_eq!(r["counts"], serde_json::json!(["1", "4", "2"]));
}

#[test]
fn count_cache_round_trip() {
    let dir = scratch("cache");
    let path = dir.join("g.txt");
    std::fs::write(&path, "5 2\n0 1\n2 3\n").unwrap();
    let cache = dir.join("cache");
    let envs = [("MATCHSTAT_CACHE_DIR", cache.to_str().unwrap().to_string())];
    let run_cached = || {
        let out = Command::new(bin())
            .args(["count", "--input", path.to_str().unwrap()])
            .envs(envs.iter().cloned())
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8_lossy(&out.stdout).into_owned()
    };
    let first = run_cached();
    assert!(cache.read_dir().unwrap().count() > 0, "cache not populated");
    let second = run_cached();
    assert_eq!(first, second);
}

#[test]
fn formulas_reports_beta() {
    let (code, stdout, _) = run(&["formulas", "--n", "10", "--l", "5", "--p", "0.5"]);
    assert_eq!(code, 0);
    let r = results(&stdout);
    assert_eq!(r["beta"], serde_json::json!("7.45355992500e-1"));
}

#[test]
fn graph_files_round_trip_through_cli() {
    // a graph written by the library re-parses identically via `count`
    let dir = scratch("roundtrip");
    let g = matchstat::graph::gnp_sample(9, 0.5, &matchstat::graph::SeedSpec::new(5, 5));
    let path = dir.join("g.txt");
    std::fs::write(&path, g.to_text()).unwrap();
    let (code, stdout, _) = run(&["count", "--input", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = results(&stdout);
    assert_eq!(r["n"], serde_json::json!(9));
    assert_eq!(r["edges"], serde_json::json!(g.edge_count()));

    // a graph written back by the CLI re-parses to an equal graph
    let echoed = dir.join("echo.txt");
    let (code, _, _) = run(&[
        "count",
        "--input",
        path.to_str().unwrap(),
        "--write-canonical",
        echoed.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let reparsed =
        matchstat::graph::Graph::from_text(&std::fs::read_to_string(&echoed).unwrap()).unwrap();
    assert_eq!(reparsed, g);
}

#[test]
fn exit_codes_follow_error_classes() {
    // unknown flag: clap validation, exit 2
    let (code, _, _) = run(&["count", "--bogus", "x"]);
    assert_eq!(code, 2);
    // precondition violation: exit 2
    let (code, _, stderr) = run(&["formulas", "--n", "10", "--l", "9", "--p", "0.5"]);
    assert_eq!(code, 2, "stderr: {stderr}");
    // cap exceeded: exit 3
    let dir = scratch("codes");
    let path = dir.join("big.txt");
    let g = matchstat::graph::gnp_sample(30, 0.2, &matchstat::graph::SeedSpec::new(1, 1));
    std::fs::write(&path, g.to_text()).unwrap();
    let (code, _, stderr) = run(&["count", "--input", path.to_str().unwrap()]);
    assert_eq!(code, 3, "stderr: {stderr}");
    // i/o failure: exit 4
    let (code, _, _) = run(&["count", "--input", "/nonexistent/graph.txt"]);
    assert_eq!(code, 4);
    // zero-count exclusion above threshold in supercritical mode: exit 2
    let (code, _, stderr) = run(&[
        "mc-dist", "--model", "gnp", "--n", "24", "--l", "12", "--p", "0.2", "--trials", "60",
        "--seed", "3",
    ]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("zero-count exclusion"), "stderr: {stderr}");
}

#[test]
fn config_file_precedence() {
    let dir = scratch("config");
    let cfg = dir.join("cfg.json");
    // file caps the polynomial kernel below the graph size; the flag
    // must win over the file
    std::fs::write(&cfg, r#"{ "caps": { "poly_n_cap": 4 }, "defaults": { "seed": 9 } }"#).unwrap();
    let path = dir.join("g.txt");
    let g = matchstat::graph::gnp_sample(8, 0.5, &matchstat::graph::SeedSpec::new(2, 2));
    std::fs::write(&path, g.to_text()).unwrap();

    let (code, _, _) = run(&[
        "count", "--input", path.to_str().unwrap(), "--config", cfg.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "file cap should apply");

    let (code, stdout, _) = run(&[
        "count", "--input", path.to_str().unwrap(), "--config", cfg.to_str().unwrap(),
        "--poly-n-cap", "28",
    ]);
    assert_eq!(code, 0, "flag should override the file cap");
    // and the seed default from the file lands in the envelope
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(doc["config"]["seed"], serde_json::json!(9));
}

#[test]
fn csv_outputs_have_headers() {
    let (code, stdout, _) = run(&["pairs", "--n", "5", "--l", "2"]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert!(lines.next().unwrap().starts_with("# config:"));
    assert!(lines.next().unwrap().starts_with("# version:"));
    assert_eq!(lines.next().unwrap(), "i,n2,count");
    // and a json rendering is available on request
    let (code, stdout, _) = run(&["pairs", "--n", "5", "--l", "2", "--format", "json"]);
    assert_eq!(code, 0);
    let r = results(&stdout);
    assert_eq!(r["s"], serde_json::json!("15"));
}

#[test]
fn moments_csv_and_exact_dist() {
    let (code, stdout, _) = run(&[
        "moments", "--n", "6", "--l", "2", "--p", "0.3", "--kmax", "3", "--source", "exact",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("k,measured,theory,comparison,std_err"));

    let (code, stdout, _) = run(&["exact-dist", "--n", "4", "--l", "2", "--p", "1/2"]);
    assert_eq!(code, 0);
    let r = results(&stdout);
    assert_eq!(r["mean"], serde_json::json!("3/4"));
    assert_eq!(r["total_probability"], serde_json::json!("1/1"));
}

#[test]
fn verify_switching_reports_equality() {
    let (code, stdout, _) = run(&[
        "verify-switching", "--n", "6", "--l", "2", "--transition", "i:1-0",
    ]);
    assert_eq!(code, 0);
    let r = results(&stdout);
    assert_eq!(r["equal"], serde_json::json!(true));
    assert_eq!(r["lhs"], r["rhs"]);
}

#[test]
fn transition_scan_writes_plot_data() {
    let dir = scratch("plot");
    let plot = dir.join("series");
    let (code, _, _) = run(&[
        "transition-scan", "--n", "12", "--p", "0.4", "--lmin", "1", "--lmax", "3", "--trials",
        "50", "--seed", "2", "--plot-data", plot.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    for name in ["ks_normal.csv", "ks_lognormal.csv", "skewness.csv"] {
        let text = std::fs::read_to_string(plot.join(name)).unwrap();
        assert!(text.starts_with("x,y\n"), "{name} missing header");
    }
}

#[test]
fn stdin_graph_input() {
    use std::io::Write;
    let mut child = Command::new(bin())
        .args(["count", "--input", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"3 3\n0 1\n0 2\n1 2\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let r = results(&String::from_utf8_lossy(&out.stdout));
    assert_eq!(r["counts"], serde_json::json!(["1", "3"]));
}
