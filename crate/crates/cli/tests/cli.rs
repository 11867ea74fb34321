use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use frobtwist::io::{self, ChainMapFile, ComplexFile, IsoReport, OracleReport, ViolationFile, WeightFile};
use frobtwist::{parse_pd, ChainComplex, ChainMap, ViolationReport};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobtwist")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn trefoil() -> frobtwist::LinkDiagram {
    parse_pd(&fs::read_to_string(corpus().join("trefoil.pd")).unwrap()).unwrap()
}

#[test]
fn weight_on_trefoil() {
    let out = run(&["weight", "trefoil", "--json"]);
    assert_eq!(code(&out), 0);
    let file: WeightFile = serde_json::from_value(json(&out)).unwrap();
    assert_eq!(file.states.len(), 8);
    let d = trefoil();
    let nu = io::weight_from_file(&d, &file).unwrap();
    assert_eq!(io::weight_to_file(&d, &nu).unwrap(), file);
}

#[test]
fn weight_on_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.pd");
    fs::write(&path, "").unwrap();
    let out = run(&["weight", path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out), serde_json::json!({"states":[{"bits":"","circles":[]}]}));
}

fn kink_chain(n: usize) -> String {
    (1..=n)
        .map(|k| {
            let next = if k == n { 1 } else { 2 * k + 1 };
            format!("X {} {} {} {}\n", 2 * k - 1, 2 * k, 2 * k, next)
        })
        .collect()
}

#[test]
fn crossing_cap() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.pd");
    fs::write(&path, kink_chain(17)).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&run(&["weight", p])), 3);
    assert_eq!(code(&run(&["oracle", p, "--max-crossings", "20"])), 3);

    let small = dir.path().join("small.pd");
    fs::write(&small, kink_chain(3)).unwrap();
    let s = small.to_str().unwrap();
    assert_eq!(code(&run(&["weight", s, "--max-crossings", "2"])), 3);
    assert_eq!(code(&run(&["oracle", s, "--oracle-cap", "2"])), 3);
    assert_eq!(code(&run(&["oracle", s])), 0);
}

#[test]
fn malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pd");
    fs::write(&path, "X 1 1 2 2\nX 2 3 3 1\n").unwrap();
    assert_eq!(code(&run(&["weight", path.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["weight", "no_such_diagram"])), 2);
}

#[test]
fn check_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    assert_eq!(code(&run(&["weight", "trefoil", "--out", good.to_str().unwrap()])), 0);
    let out = run(&["check", "trefoil", good.to_str().unwrap(), "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out), serde_json::json!({"violations": []}));

    let mut zero: Value = serde_json::from_str(&fs::read_to_string(&good).unwrap()).unwrap();
    for state in zero["states"].as_array_mut().unwrap() {
        for circle in state["circles"].as_array_mut().unwrap() {
            circle["nu"] = Value::from(0);
        }
    }
    let zero_path = dir.path().join("zero.json");
    fs::write(&zero_path, zero.to_string()).unwrap();
    let out = run(&["check", "trefoil", zero_path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&out), 1);
    let file: ViolationFile = serde_json::from_value(json(&out)).unwrap();
    let report = ViolationReport::try_from(&file).unwrap();
    assert!(report.violations.iter().any(|v| v.kind == frobtwist::ViolationKind::Split));
    assert_eq!(ViolationFile::from(&report), file);

    assert_eq!(code(&run(&["check", "figure_eight", good.to_str().unwrap()])), 2);
}

#[test]
fn oracle_outcomes() {
    let out = run(&["oracle", "trefoil", "--pins", "trefoil_fig2_pins.json", "--json"]);
    assert_eq!(code(&out), 1);
    let report: OracleReport = serde_json::from_value(json(&out)).unwrap();
    assert_eq!(report.status, "infeasible");

    let out = run(&["oracle", "trefoil", "--pins", "trefoil_fig2_pins_swapped.json", "--json"]);
    assert_eq!(code(&out), 0);
    let report: OracleReport = serde_json::from_value(json(&out)).unwrap();
    let d = trefoil();
    let nu = io::weight_from_file(&d, &report.weight.unwrap()).unwrap();
    assert!(frobtwist::check_weight(&d, &nu).unwrap().is_empty());

    assert_eq!(code(&run(&["oracle", "trefoil"])), 0);
}

#[test]
fn iso_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("iso.json");
    let out = run(&["iso", "trefoil", "--algebra", "kh", "--theta", "1,1", "--json", "--dump", dump.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: IsoReport = serde_json::from_value(json(&out)).unwrap();
    assert!(report.chain_map && report.iso && report.homology_equal);
    let file: ChainMapFile = serde_json::from_str(&fs::read_to_string(&dump).unwrap()).unwrap();
    let f = ChainMap::from(&file);
    assert!(frobtwist::verify_iso(&f).unwrap());
    assert_eq!(ChainMapFile::from(&f), file);

    assert_eq!(code(&run(&["iso", "trefoil", "--algebra", "lee", "--theta", "0,1"])), 0);
    assert_eq!(code(&run(&["iso", "trefoil", "--algebra", "kh", "--theta", "0,1"])), 2);
    assert_eq!(code(&run(&["iso", "trefoil", "--algebra", "kh", "--theta", "1,1,0"])), 2);
    assert_eq!(code(&run(&["iso", "trefoil", "--algebra", "kh", "--theta", "-1,0"])), 0);
    assert_eq!(code(&run(&["iso", "trefoil", "--algebra", "nonexistent.json", "--theta", "1,1"])), 2);
}

#[test]
fn algebra_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lee.json");
    let lee = frobtwist::FrobeniusAlgebra::builtin("lee").unwrap();
    fs::write(&path, serde_json::to_string(&io::AlgebraFile::from(&lee)).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&run(&["iso", "hopf", "--algebra", p, "--theta", "0,-1"])), 0);

    let mut broken = io::AlgebraFile::from(&lee);
    broken.counit = vec![0, 0];
    fs::write(&path, serde_json::to_string(&broken).unwrap()).unwrap();
    assert_eq!(code(&run(&["homology", "hopf", "--algebra", p])), 2);
}

#[test]
fn homology_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("complex.json");
    let out = run(&["homology", "unknot", "--algebra", "kh", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out), serde_json::json!([{"degree":0,"rank":2,"torsion":[]}]));

    let out = run(&["homology", "trefoil", "--algebra", "kh", "--json", "--dump", dump.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let plain = io::homology_from_json(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap();
    assert_eq!(plain.iter().map(|h| h.rank).collect::<Vec<_>>(), vec![2, 0, 1, 1]);
    assert_eq!(plain[3].torsion, vec![2]);
    let file: ComplexFile = serde_json::from_str(&fs::read_to_string(&dump).unwrap()).unwrap();
    assert_eq!(ChainComplex::from(&file).ranks, vec![4, 6, 12, 8]);

    let twisted = run(&["homology", "trefoil", "--algebra", "kh", "--theta", "1,1", "--json"]);
    assert_eq!(io::homology_from_json(&String::from_utf8(twisted.stdout).unwrap()).unwrap(), plain);
}

#[test]
fn corpus_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("mine.pd"), "X 1 2 2 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_frobtwist"))
        .args(["weight", "mine"])
        .env("FROBTWIST_CORPUS", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let out = Command::new(env!("CARGO_BIN_EXE_frobtwist"))
        .args(["weight", "trefoil"])
        .env("FROBTWIST_CORPUS", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn every_corpus_diagram_runs() {
    for name in ["unknot", "kink", "hopf", "trefoil", "figure_eight", "cinquefoil", "granny", "trefoil_unknot", "r2_unlink"] {
        assert_eq!(code(&run(&["weight", name])), 0, "{name}");
        assert_eq!(code(&run(&["iso", name, "--algebra", "lee", "--theta", "0,1"])), 0, "{name}");
    }
}
