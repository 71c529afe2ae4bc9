//! End-to-end tests of the `qcm` binary against fixture files.
//!
//! Golden outputs live in `tests/data/*.golden.*`; run with `QCM_BLESS=1` to rewrite them.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qcm_core::dist::{JointDistribution, Variable};
use qcm_core::io::load_distribution;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn qcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcm"))
        .args(args)
        .output()
        .expect("qcm runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tv_from_stdout(o: &Output) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("tv_distance "))
        .expect("tv_distance line")
        .parse()
        .unwrap()
}

fn assert_golden(actual: &str, golden: &str) {
    let path = data(golden);
    if std::env::var_os("QCM_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "output differs from {golden}");
}

#[test]
fn simulate_chain2_golden() {
    let o = qcm(&["simulate", s(&data("chain2.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_golden(&out, "chain2.golden.csv");

    let p = JointDistribution::from_csv(&out).unwrap();
    assert_eq!(p.names(), vec!["Z", "D"]);
    assert_eq!(p.len(), 16);
    for z in 0..4 {
        for d in 0..4 {
            let expect = if z == d { 3.0 / 24.0 } else { 1.0 / 24.0 };
            assert!((p.prob(&[z, d]) - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn simulate_single_node_golden() {
    let o = qcm(&["simulate", s(&data("singlenode.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_golden(&out, "singlenode.golden.csv");
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 4);
    let p = JointDistribution::from_csv(&out).unwrap();
    assert!(p.probabilities().iter().all(|&x| (x - 0.25).abs() < 1e-12));
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let ga = dir.path().join("a.json");
    let gb = dir.path().join("b.json");
    for (out, g) in [(&a, &ga), (&b, &gb)] {
        let o = qcm(&[
            "simulate",
            s(&data("common_cause.json")),
            "--out",
            s(out),
            "--graph-out",
            s(g),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read(&ga).unwrap(), std::fs::read(&gb).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# qcm "));
    assert!(first.contains(" model=sha256:"));
    assert!(first.contains(" seed=model"));
}

#[test]
fn seed_override_changes_output_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    qcm(&["simulate", s(&data("common_cause.json")), "--out", s(&a)]);
    let o = qcm(&["simulate", s(&data("common_cause.json")), "--out", s(&b), "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&b).unwrap();
    assert!(text.lines().next().unwrap().ends_with(" seed=5"));
    let pa = load_distribution(&a).unwrap();
    let pb = load_distribution(&b).unwrap();
    assert!(pa.tv_distance(&pb).unwrap() > 1e-6);
}

fn simulate_to(dir: &Path, model: &str) -> PathBuf {
    let out = dir.join(format!("{model}.csv"));
    let o = qcm(&["simulate", s(&data(&format!("{model}.json"))), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

#[test]
fn markov_passes_for_graph_and_inverse() {
    let dir = tempfile::tempdir().unwrap();
    let table = simulate_to(dir.path(), "common_cause");
    for g in ["common_cause_graph.json", "common_cause_inverted.json"] {
        let report = dir.path().join("report.json");
        let o = qcm(&["markov", s(&table), s(&data(g)), "--out", s(&report)]);
        assert_eq!(o.status.code(), Some(0), "{g}: {}", stderr(&o));
        let text = std::fs::read_to_string(&report).unwrap();
        let body = qcm_core::io::strip_header(&text);
        let v: serde_json::Value = serde_json::from_str(body).unwrap();
        let keys: std::collections::BTreeSet<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            std::collections::BTreeSet::from([
                "nodes",
                "edges",
                "tolerance",
                "triples",
                "separated_triples",
                "worst_residual",
                "violations",
                "pass"
            ])
        );
        let triple = &v["triples"][0];
        for k in ["u", "v", "w", "separated", "paths", "residual"] {
            assert!(triple.get(k).is_some(), "triple field {k}");
        }
        assert_eq!(v["pass"], serde_json::Value::Bool(true));
    }
}

#[test]
fn markov_fails_on_broken_independence_and_names_triple() {
    let dir = tempfile::tempdir().unwrap();
    // C uniform and independent; A = B perfectly correlated, so A ⊥ B | ∅ fails.
    let vars = vec![Variable::new("C", 4), Variable::new("A", 4), Variable::new("B", 4)];
    let probs = (0..64)
        .map(|i| if (i / 4) % 4 == i % 4 { 1.0 / 16.0 } else { 0.0 })
        .collect();
    let p = JointDistribution::new(vars, probs).unwrap();
    let table = dir.path().join("broken.csv");
    std::fs::write(&table, p.to_csv()).unwrap();
    let o = qcm(&[
        "markov",
        s(&table),
        s(&data("common_cause_graph.json")),
        "--out",
        s(&dir.path().join("r.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(r#"fail: ["A"] ⊥ ["B"] | []"#), "{}", stderr(&o));
}

#[test]
fn markov_signature_mismatch_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let table = simulate_to(dir.path(), "chain2");
    let o = qcm(&["markov", s(&table), s(&data("common_cause_graph.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unmeasure_chain2_both_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("um");
    let o = qcm(&["unmeasure", s(&data("chain2.json")), "--node", "Z", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(tv_from_stdout(&o) < 1e-9);
    let d = load_distribution(&out.join("formula.csv")).unwrap();
    assert_eq!(d.names(), vec!["D"]);
    assert!(d.probabilities().iter().all(|&x| (x - 0.25).abs() < 1e-12));
    assert!(out.join("surgery.csv").exists());
    assert!(out.join("summary.json").exists());
}

#[test]
fn intervene_common_effect_variants() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("am");
    let o = qcm(&[
        "intervene",
        s(&data("common_effect.json")),
        "--node",
        "C",
        "--value",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(tv_from_stdout(&o) < 1e-9);

    let out = dir.path().join("ap");
    let o = qcm(&[
        "intervene",
        s(&data("common_effect.json")),
        "--node",
        "C",
        "--value",
        "2",
        "--variant",
        "as-printed",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(tv_from_stdout(&o) > 1e-3);
    assert!(stderr(&o).contains("documented divergence"));
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(qcm_core::io::strip_header(&summary)).unwrap();
    assert_eq!(v["agree"], serde_json::Value::Bool(false));
    assert!(v["documented_divergence"].is_string());
    assert_eq!(v["formula"]["value"], 2);
    assert_eq!(v["formula"]["variant"], "as-printed");
}

#[test]
fn intervene_formula_on_distribution_needs_graph() {
    let dir = tempfile::tempdir().unwrap();
    let table = simulate_to(dir.path(), "common_cause");
    let out = dir.path().join("x");
    let o = qcm(&[
        "intervene",
        s(&table),
        "--node",
        "A",
        "--value",
        "1",
        "--method",
        "formula",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = qcm(&[
        "intervene",
        s(&table),
        "--node",
        "A",
        "--value",
        "1",
        "--method",
        "formula",
        "--graph",
        s(&data("common_cause_graph.json")),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("formula.csv").exists());
    assert!(!out.join("surgery.csv").exists());
}

#[test]
fn invert_then_simulate_matches_original() {
    let dir = tempfile::tempdir().unwrap();
    for model in ["chain2", "common_cause", "common_effect"] {
        let original = simulate_to(dir.path(), model);
        let reversed = dir.path().join(format!("{model}.rev.json"));
        let graph = dir.path().join(format!("{model}.rev.graph.json"));
        let o = qcm(&[
            "invert",
            s(&data(&format!("{model}.json"))),
            "--out",
            s(&reversed),
            "--graph-out",
            s(&graph),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let rev_table = dir.path().join(format!("{model}.rev.csv"));
        let o = qcm(&["simulate", s(&reversed), "--out", s(&rev_table)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let o = qcm(&["diff", s(&original), s(&rev_table)]);
        assert_eq!(o.status.code(), Some(0));
        assert!(tv_from_stdout(&o) < 1e-9);
        let o = qcm(&[
            "markov",
            s(&original),
            s(&graph),
            "--out",
            s(&dir.path().join("r.json")),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
}

#[test]
fn sic_dim3_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let fid = dir.path().join("f3.txt");
    let report = dir.path().join("r.json");
    let o = qcm(&["sic", "--dim", "3", "--out", s(&fid), "--report", s(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&report).unwrap();
    let v: serde_json::Value = serde_json::from_str(qcm_core::io::strip_header(&text)).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    assert_eq!(v["tolerance"], 1e-10);
    let f = qcm_core::sic::Fiducial::load(&fid).unwrap();
    assert_eq!(f, qcm_core::sic::known_fiducial(3).unwrap());
}

#[test]
fn infer_common_cause_lists_fork_and_collider() {
    let dir = tempfile::tempdir().unwrap();
    let table = simulate_to(dir.path(), "common_cause");
    let o = qcm(&["infer", s(&table)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains(r#""edges":[["C","A"],["C","B"]]"#), "{out}");
    assert!(out.contains(r#""edges":[["A","C"],["B","C"]]"#), "{out}");
}

#[test]
fn exit_code_contract() {
    let dir = tempfile::tempdir().unwrap();

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(qcm(&["simulate", s(&bad)]).status.code(), Some(2));
    assert_eq!(
        qcm(&["simulate", s(&data("chain2.json")), "--unknown-flag"])
            .status
            .code(),
        Some(2)
    );

    let wires: Vec<String> = (0..10).map(|i| format!(r#"{{"id": "q{i}", "dim": 2}}"#)).collect();
    let gates: Vec<String> = (0..10)
        .map(|i| format!(r#"{{"measure": {{"node": "N{i}", "wire": "q{i}", "sic": "sic2"}}}}"#))
        .collect();
    let big = dir.path().join("big.json");
    std::fs::write(
        &big,
        format!(r#"{{"wires": [{}], "gates": [{}]}}"#, wires.join(","), gates.join(",")),
    )
    .unwrap();
    assert_eq!(qcm(&["simulate", s(&big)]).status.code(), Some(3));

    // P(Z = 2) = 0
    let vars = vec![Variable::new("Z", 4), Variable::new("D", 4)];
    let probs = (0..16).map(|i| if i / 4 == 1 { 0.0 } else { 1.0 / 12.0 }).collect();
    let table = dir.path().join("zero.csv");
    std::fs::write(&table, JointDistribution::new(vars, probs).unwrap().to_csv()).unwrap();
    let graph = dir.path().join("zd.json");
    std::fs::write(&graph, r#"{"nodes": [["Z", 2], ["D", 2]], "edges": [["Z", "D"]]}"#).unwrap();
    let out = dir.path().join("o");
    let args = |v: &'static str| {
        vec![
            "intervene".to_string(),
            s(&table).to_string(),
            "--node".into(),
            "Z".into(),
            "--value".into(),
            v.into(),
            "--method".into(),
            "formula".into(),
            "--graph".into(),
            s(&graph).to_string(),
            "--out".into(),
            s(&out).to_string(),
        ]
    };
    let run = |a: Vec<String>| qcm(&a.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(run(args("2")).status.code(), Some(4));
    assert_eq!(run(args("1")).status.code(), Some(0));

    let tri_vars = vec![Variable::new("A", 4), Variable::new("B", 4), Variable::new("C", 4)];
    let tri_table = dir.path().join("tri.csv");
    std::fs::write(&tri_table, JointDistribution::uniform(tri_vars).to_csv()).unwrap();
    let tri = dir.path().join("tri.json");
    std::fs::write(
        &tri,
        r#"{"nodes": [["A", 2], ["B", 2], ["C", 2]], "edges": [["A", "B"], ["B", "C"], ["A", "C"]]}"#,
    )
    .unwrap();
    let o = qcm(&[
        "intervene",
        s(&tri_table),
        "--node",
        "B",
        "--value",
        "1",
        "--method",
        "formula",
        "--graph",
        s(&tri),
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(5));

    let surgered = dir.path().join("surgered.json");
    std::fs::write(
        &surgered,
        r#"{"wires": [{"id": "q", "dim": 2}], "gates": [
            {"discard": {"wire": "q"}},
            {"prepare": {"node": "W", "wire": "q", "sic": "sic2", "outcome": 1}}]}"#,
    )
    .unwrap();
    let o = qcm(&["invert", s(&surgered), "--out", s(&dir.path().join("r.json"))]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn help_documents_every_flag() {
    let expected: &[(&str, &[&str])] = &[
        ("simulate", &["--out", "--graph-out", "--seed"]),
        ("markov", &["--tol", "--out"]),
        (
            "intervene",
            &["--node", "--value", "--method", "--variant", "--graph", "--out"],
        ),
        ("unmeasure", &["--node", "--method", "--graph", "--out"]),
        ("invert", &["--out", "--graph-out"]),
        ("sic", &["--dim", "--seed", "--tol", "--max-iter", "--out", "--report"]),
        ("infer", &["--tol", "--max-nodes", "--out"]),
        ("diff", &[]),
    ];
    for (cmd, flags) in expected {
        let o = qcm(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let help = stdout(&o);
        for f in *flags {
            assert!(help.contains(f), "{cmd} --help lacks {f}");
        }
        assert!(!help.contains("[default: ]"));
    }
}
