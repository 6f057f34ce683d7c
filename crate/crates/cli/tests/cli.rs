use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use histopush::pushforward::{default_width, predicted_accounting};
use histopush::relunet::sawtooth;
use histopush::{BuildReport, Histogram2D, ReluNet};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_histopush"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("histopush-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic_and_loadable() {
    let d = scratch("gen");
    let (a, b) = (d.join("a.json"), d.join("b.json"));
    assert!(run(&["gen", "--n", "4", "--seed", "1", "--out", s(&a)]).status.success());
    assert!(run(&["gen", "--n", "4", "--seed", "1", "--out", s(&b)]).status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    Histogram2D::from_json(&text).unwrap();

    let flat = stdout(&run(&["gen", "--n", "3", "--spread", "0"]));
    assert_eq!(Histogram2D::from_json(&flat).unwrap(), Histogram2D::uniform(3));
}

#[test]
fn build_reports_and_variants() {
    let d = scratch("build");
    let h = d.join("h.json");
    assert!(run(&["gen", "--n", "5", "--seed", "3", "--out", s(&h)]).status.success());
    let mut reports = Vec::new();
    for variant in ["deep", "baseline"] {
        let (net, rep) = (d.join(format!("{variant}.json")), d.join(format!("{variant}.report.json")));
        let o = run(&[
            "build", "--hist", s(&h), "--epsilon", "0.05", "--variant", variant, "--out-net", s(&net), "--out-report",
            s(&rep),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let report: BuildReport = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
        assert!(report.guarantee <= 0.05);
        reports.push((ReluNet::from_json(&std::fs::read_to_string(&net).unwrap()).unwrap(), report));
    }
    let (deep, base) = predicted_accounting(5, 0.05, default_width(5)).unwrap();
    assert_eq!((reports[0].1.size, reports[0].1.depth), (deep.size, deep.depth));
    assert_eq!((reports[1].1.size, reports[1].1.depth), (base.size, base.depth));
    for k in 0..=100 {
        let x = k as f64 / 100.0;
        let (u, v) = (reports[0].0.eval1(x), reports[1].0.eval1(x));
        assert!((u[0] - v[0]).abs() < 1e-8 && (u[1] - v[1]).abs() < 1e-8);
    }

    let o = run(&["distance", "--hist", s(&h), "--net", s(&d.join("deep.json")), "--r", "4", "--m", "1000"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["method"], "exact");
}

#[test]
fn eval_examples() {
    let d = scratch("eval");
    let id = d.join("id.json");
    std::fs::write(&id, ReluNet::identity().to_json()).unwrap();
    assert_eq!(stdout(&run(&["eval", "--net", s(&id), "--x", "0.5"])), "0.5\n");
    let saw = d.join("saw.json");
    std::fs::write(&saw, sawtooth(2).to_json()).unwrap();
    assert_eq!(stdout(&run(&["eval", "--net", s(&saw), "--x", "0.25"])), "1\n");
    assert_eq!(stdout(&run(&["eval", "--net", s(&saw), "--grid", "5"])).lines().count(), 5);
}

#[test]
fn pieces_report() {
    let d = scratch("pieces");
    let saw = d.join("saw.json");
    std::fs::write(&saw, sawtooth(3).to_json()).unwrap();
    for exact in ["0", "1"] {
        let o = bin().args(["pieces", "--net", s(&saw)]).env("HISTOPUSH_EXACT", exact).output().unwrap();
        let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(doc["zeta"], 8);
        assert!(doc["zeta"].as_f64().unwrap() <= doc["zeta_cap"].as_f64().unwrap());
    }
    let csv = stdout(&run(&["pieces", "--net", s(&saw), "--format", "csv"]));
    assert_eq!(csv.lines().count(), 9);
    assert_eq!(csv.lines().next().unwrap(), "lo,hi,slope0,intercept0");
}

#[test]
fn bounds_and_table() {
    let doc: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["bounds", "--n", "10", "--epsilon", "1e-5", "--L", "2", "--d", "2"]))).unwrap();
    assert!((doc["lower_size"].as_f64().unwrap() - 59.87).abs() < 0.05);
    assert!((doc["c_d"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

    let d = scratch("table");
    let cases = d.join("cases.csv");
    std::fs::write(&cases, "n,epsilon\n4,0.1\n16,0.01\n").unwrap();
    let out = stdout(&run(&["table", "--cases", s(&cases)]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,epsilon,deep_N,deep_L,base_N,base_L,lb_at_deep_L,lb_at_base_L,guarantee");
    assert_eq!(lines.len(), 3);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["gen"]).status.code(), Some(1));
    assert_eq!(run(&["gen", "--n", "0"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--net", "/nonexistent/net.json", "--x", "0"]).status.code(), Some(2));
    assert_eq!(run(&["bounds", "--n", "4", "--epsilon", "0.1", "--L", "2", "--d", "1"]).status.code(), Some(1));
    let d = scratch("codes");
    let bad = d.join("bad.json");
    std::fs::write(&bad, "{\"n\": 2, \"weights\": [[1, 1], [1, -1]]}").unwrap();
    let o = run(&["build", "--hist", s(&bad), "--epsilon", "0.1", "--out-net", s(&d.join("x.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!d.join("x.json").exists());
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sampling_is_seeded() {
    let d = scratch("sample");
    let h = d.join("h.json");
    assert!(run(&["gen", "--n", "3", "--seed", "2", "--out", s(&h)]).status.success());
    let a = stdout(&run(&["sample", "--hist", s(&h), "--count", "20", "--seed", "9"]));
    assert_eq!(a, stdout(&run(&["sample", "--hist", s(&h), "--count", "20", "--seed", "9"])));
    assert_ne!(a, stdout(&run(&["sample", "--hist", s(&h), "--count", "20", "--seed", "10"])));
    assert_eq!(a.lines().count(), 20);
}
