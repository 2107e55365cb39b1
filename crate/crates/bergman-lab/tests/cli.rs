use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman-lab")).args(args).output().expect("the binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman-lab")).args(args).env(key, value).output().expect("the binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json", "--no-timestamp"]);
    let o = run(&all);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn trace_on_the_disc() {
    let v = json(&["trace", "--d", "1", "--alpha", "1"]);
    assert!((v["value"].as_f64().unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
    assert!(v["series_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["command"], "trace");
    assert_eq!(v["seed"], 42);
    assert!(v.get("timestamp").is_none());
    // 4(4/π − 1) at α = 1/2
    let v = json(&["trace", "--d", "1", "--alpha", "0.5"]);
    assert!((v["value"].as_f64().unwrap() - 4.0 * (4.0 / std::f64::consts::PI - 1.0)).abs() < 1e-12);
}

#[test]
fn spectrum_on_the_disc() {
    let v = json(&["spectrum", "--d", "1", "--alpha", "1", "--n", "6"]);
    let eig = v["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 6);
    for (j, e) in eig.iter().enumerate() {
        assert_eq!(e["j"], j);
        assert!((e["eigenvalue"].as_f64().unwrap() - 1.0 / (j as f64 + 1.0)).abs() < 1e-15);
    }
    assert_eq!(v["norm"], 1.0);
    assert_eq!(v["monotone_ratio_check"], true);
    // the Bergman projection: every eigenvalue is 1
    let v = json(&["spectrum", "--d", "1", "--alpha", "2", "--n", "3"]);
    assert!(v["eigenvalues"].as_array().unwrap().iter().all(|e| e["eigenvalue"] == 1.0));
}

#[test]
fn classify_text_golden() {
    let o = run(&["classify", "--d", "2", "--alpha", "3", "--p", "2", "--q", "2", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "alpha               3.0
boundary_ambiguous  false
bounded             true
clause              projection:interior
command             classify
compact             false
d                   2
formula_source      projection:interior
inv_p               1/2
inv_q               1/2
method              decimal-rational
p                   2
q                   2
seed                42
"
    );
}

#[test]
fn classify_examples() {
    let cases = [
        (["1", "1", "1", "2"], false, false),
        (["1", "1", "4/3", "4"], true, false),
        (["1", "1", "4/3", "3"], true, true),
        (["1", "2", "inf", "2"], true, true),
        (["1", "5/2", "inf", "2"], false, false),
        (["3", "1", "2", "inf"], true, true),
    ];
    for ([d, alpha, p, q], bounded, compact) in cases {
        let v = json(&["classify", "--d", d, "--alpha", alpha, "--p", p, "--q", q]);
        assert_eq!((v["bounded"].as_bool(), v["compact"].as_bool()), (Some(bounded), Some(compact)), "{d} {alpha} {p} {q}");
    }
    let v = json(&["classify", "--d", "1", "--alpha", "5/2", "--p", "inf", "--q", "1"]);
    assert_eq!(v["method"], "exact-rational");
}

#[test]
fn json_keys_are_sorted() {
    let o = run(&["norm", "--d", "1", "--alpha", "1", "--p", "1", "--q", "1.5", "--format", "json", "--no-timestamp"]);
    let text = stdout(&o);
    let keys: Vec<&str> = text.lines().filter_map(|l| l.trim().strip_prefix('"')?.split('"').next()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["kind"], "exact");
    assert_eq!(v["formula_source"], "sup-kernel-mass");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["trace", "--d", "1", "--alpha", "1"]).status.code(), Some(0));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // domain errors
    let o = run(&["trace", "--d", "1", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not Hilbert–Schmidt"));
    assert_eq!(run(&["norm", "--d", "1", "--alpha", "2", "--p", "1", "--q", "2"]).status.code(), Some(1));
    // usage errors
    assert_eq!(run(&["trace", "--d", "1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--d", "1", "--alpha", "1", "--p", "0.5", "--q", "2"]).status.code(), Some(2));
    assert_eq!(run(&["trace", "--d", "1", "--alpha", "1", "--format", "svg"]).status.code(), Some(2));
    assert_eq!(run_env(&["trace", "--d", "1", "--alpha", "1"], "BERGMAN_LAB_THREADS", "many").status.code(), Some(2));
}

fn svg(d: &str, alpha: &str) -> String {
    let o = run(&["diagram", "--d", d, "--alpha", alpha, "--format", "svg", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    stdout(&o)
}

#[test]
fn svg_is_well_formed_and_reproducible() {
    let text = svg("1", "1");
    let doc = roxmltree::Document::parse(&text).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("viewBox"), Some("0 0 800 800"));
    // pentagon (0,0), (1/2,0), (1,1/2), (1,1), (0,1) on the 620-pixel square
    let bounded = doc.descendants().find(|n| n.attribute("id") == Some("bounded")).unwrap();
    assert_eq!(bounded.attribute("d"), Some("M90.000,710.000 L400.000,710.000 L710.000,400.000 L710.000,90.000 L90.000,90.000 Z"));
    assert!(doc.descendants().any(|n| n.attribute("id") == Some("symmetry-line")));
    assert_eq!(text, svg("1", "1"));
}

#[test]
fn svg_triangle_at_the_bergman_order() {
    let text = svg("1", "2");
    let doc = roxmltree::Document::parse(&text).unwrap();
    let bounded = doc.descendants().find(|n| n.attribute("id") == Some("bounded")).unwrap();
    assert_eq!(bounded.attribute("d"), Some("M90.000,710.000 L710.000,90.000 L90.000,90.000 Z"));
    // the corners (0,0) and (1,1) are excluded, (0,1) is included
    let fills: Vec<&str> = doc.descendants().filter(|n| n.has_tag_name("circle")).filter_map(|n| n.attribute("fill")).collect();
    assert_eq!(fills, ["white", "white", "#08306b"]);
}

#[test]
fn diagram_text_and_csv() {
    let o = run(&["diagram", "--d", "1", "--alpha", "1", "--resolution", "8", "--no-timestamp"]);
    let text = stdout(&o);
    let raster: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(raster, ["CCCCCCCC", "CCCCCCCC", "CCCCCCCC", "CCCCCCCC", "CCCCCCC.", "CCCCCC..", "CCCCC...", "CCCC...."]);

    let o = run(&["diagram", "--d", "1", "--alpha", "2", "--resolution", "8", "--format", "csv", "--no-timestamp"]);
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("inv_p,inv_q,bounded,compact,clause"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 64);
    let diagonal = rows.iter().find(|r| r[0] == "3/7" && r[1] == "3/7").unwrap();
    assert_eq!(&diagonal[2..], ["true", "false", "projection:interior"]);
    // 7 on the column 1/p = 0, then 8 − i on the column 1/p = i/7 for i = 1..6
    assert_eq!(rows.iter().filter(|r| r[2] == "true").count(), 34);
}

#[test]
fn output_file_and_thread_count_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hls.json");
    let args = [
        "verify",
        "--d",
        "1",
        "--alpha",
        "1",
        "--mode",
        "hls",
        "--p",
        "2",
        "--s",
        "2",
        "--trials",
        "8",
        "--format",
        "json",
        "--no-timestamp",
    ];
    let mut with_file = args.to_vec();
    with_file.extend(["-o", path.to_str().unwrap()]);
    let o = run_env(&with_file, "BERGMAN_LAB_THREADS", "1");
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let single = std::fs::read_to_string(&path).unwrap();
    let many = stdout(&run_env(&args, "BERGMAN_LAB_THREADS", "4"));
    assert_eq!(single, many);
    let v: Value = serde_json::from_str(&single).unwrap();
    assert_eq!(v["violations"], 0);
}

#[test]
fn integral_matches_closed_form() {
    let v = json(&["integral", "--d", "2", "--beta", "0", "--r", "0.5"]);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-14);
    let v = json(&["integral", "--d", "1", "--beta", "0.5", "--gamma", "1", "--r", "0.25", "--samples", "100000"]);
    assert!(v["mc_z_score"].as_f64().unwrap().abs() < 4.0);
}
