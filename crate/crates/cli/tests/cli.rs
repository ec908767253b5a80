use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lmpso_cli::config::RunConfig;
use lmpso_cli::report::{self, TspResult};
use lmpso_core::swarm::RunTrace;
use lmpso_core::symreg::{load_csv, parse_expr};
use lmpso_core::tsp::{held_karp, TspInstance};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn lmpso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmpso")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = lmpso(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn baselines_only_at_ten_cities() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&["tsp", "--methods", "nn,ni,fi,ri", "--layouts", "3", "--seed", "4", "--out", path_str(&out)]);
    let rows = csv_rows(&out.join("gaps.csv"));
    let methods: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(methods, ["NN", "NI", "FI", "RI"]);
    for r in &rows {
        assert_eq!(r[1], "10");
        assert_eq!(r[2], "3");
        assert!(r[3].parse::<f64>().unwrap() >= -1e-12);
    }
    let results: Vec<TspResult> = report::read_jsonl(&out.join("results.jsonl")).unwrap();
    assert_eq!(results.len(), 12);
    for r in &results {
        let inst = TspInstance::load(&report::instance_path(&out, &r.instance)).unwrap();
        let (opt, _) = held_karp(&inst).unwrap();
        assert_eq!(inst.reference_optimum, Some(opt));
        assert!(r.length >= opt - 1e-9);
    }
}

#[test]
fn mock_swarm_run_and_report_regeneration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let script = repo().join("configs/mock/tsp10.json");
    let args =
        ["tsp", "--mock-script", path_str(&script), "--iters", "5", "--particles", "4", "--layouts", "2", "--out", path_str(&out)];
    ok(&args);
    let gaps = fs::read(out.join("gaps.csv")).unwrap();
    let runs = fs::read(out.join("tsp_runs.csv")).unwrap();
    let trace = fs::read_to_string(out.join("traces/lmpso-layout-0.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 5);
    assert!(RunTrace::read_jsonl(trace.as_bytes()).unwrap().is_non_increasing());

    fs::remove_file(out.join("gaps.csv")).unwrap();
    fs::write(out.join("tsp_runs.csv"), "stale").unwrap();
    let check = lmpso(&["report", path_str(&out), "--check"]);
    assert!(!check.status.success());
    assert!(String::from_utf8_lossy(&check.stderr).contains("gaps.csv"));
    ok(&["report", path_str(&out)]);
    assert_eq!(fs::read(out.join("gaps.csv")).unwrap(), gaps);
    assert_eq!(fs::read(out.join("tsp_runs.csv")).unwrap(), runs);
    ok(&["report", path_str(&out), "--check"]);

    // a second run with the same seed reproduces every artifact
    let again = dir.path().join("again");
    let mut args2 = args;
    args2[10] = path_str(&again);
    ok(&args2);
    assert_eq!(fs::read(again.join("gaps.csv")).unwrap(), gaps);
    assert_eq!(fs::read_to_string(again.join("traces/lmpso-layout-0.jsonl")).unwrap(), trace);
}

#[test]
fn large_instances_need_no_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let fail = lmpso(&["tsp", "--cities", "30", "--layouts", "1", "--methods", "fi", "--out", path_str(&out)]);
    assert!(!fail.status.success());
    assert!(String::from_utf8_lossy(&fail.stderr).contains("--no-gap"));
    ok(&["tsp", "--cities", "30", "--layouts", "1", "--methods", "fi,nn", "--no-gap", "--out", path_str(&out)]);
    let rows = csv_rows(&out.join("lengths.csv"));
    assert_eq!(rows.len(), 2);
    assert!(!out.join("gaps.csv").exists());
}

#[test]
fn symreg_report_matches_trace_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = repo().join("configs/symreg.json");
    let script = repo().join("configs/mock/symreg.json");
    ok(&[
        "symreg",
        "--config",
        path_str(&cfg),
        "--mock-script",
        path_str(&script),
        "--iters",
        "7",
        "--particles",
        "6",
        "--out",
        path_str(&out),
    ]);
    let data = load_csv(&repo().join("data/symreg_2d.csv")).unwrap();
    let trace = report::read_trace(&out.join("trace.jsonl")).unwrap();
    let rows = csv_rows(&out.join("symreg.csv"));
    assert_eq!(rows.len(), 7);
    let mut best = f64::INFINITY;
    for (rec, row) in trace.iterations.iter().zip(&rows) {
        for (text, score) in rec.initial.iter().map(|p| (p.text.as_str(), p.score)).chain(
            rec.events.iter().filter_map(|e| Some((e.text.as_deref()?, e.score?))),
        ) {
            let e = parse_expr(text, data.dim).unwrap();
            let pred = data.predict(&e);
            let mae = pred.iter().zip(&data.y).map(|(p, y)| (p - y).abs()).sum::<f64>() / data.y.len() as f64;
            assert_eq!(mae, score);
            best = best.min(mae);
        }
        assert_eq!(row[1].parse::<f64>().unwrap(), best, "iteration {}", rec.iter);
    }
    let table = csv_rows(&out.join("best_solutions.csv"));
    let iters: Vec<&str> = table.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(iters, ["1", "5", "7"]);
    let run: RunConfig = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!((run.iterations, run.particles, run.max_new_tokens), (Some(7), Some(6), Some(200)));
    ok(&["report", path_str(&out), "--check"]);
}

#[test]
fn table_defaults_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let script = repo().join("configs/mock/tsp10.json");
    ok(&["tsp", "--methods", "fi", "--layouts", "1", "--mock-script", path_str(&script), "--out", path_str(&out)]);
    let run: RunConfig = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run.iterations, Some(100));
    assert_eq!(run.particles, Some(10));
    assert_eq!(run.max_new_tokens, Some(50));
    assert_eq!(run.temperature, Some(0.9));
}

#[test]
fn oracle_solves_and_appends() {
    let dir = tempfile::tempdir().unwrap();
    let sq = dir.path().join("square.txt");
    fs::write(&sq, "4\n0 0\n10 0\n10 10\n0 10\n").unwrap();
    let out = ok(&["oracle", path_str(&sq), "--append"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("optimum 40"), "{stdout}");
    let inst = TspInstance::load(&sq).unwrap();
    assert_eq!(inst.reference_optimum, Some(40.0));

    let big = dir.path().join("big.txt");
    let coords: String = std::iter::once("16\n".to_string()).chain((0..16).map(|i| format!("{} {}\n", i * 3 % 17, i * 7 % 19))).collect();
    fs::write(&big, coords).unwrap();
    let fail = lmpso(&["oracle", path_str(&big)]);
    assert!(!fail.status.success());
    assert!(String::from_utf8_lossy(&fail.stderr).contains("16"));
}

fn python() -> Option<&'static str> {
    ["python3", "python"]
        .into_iter()
        .find(|p| Command::new(p).arg("--version").output().is_ok_and(|o| o.status.success()))
}

#[test]
fn seed_only_heuristic_run() {
    let Some(py) = python() else {
        eprintln!("python not found; skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let stub = repo().join("crates/core/tests/fixtures/stub_evaluator.py");
    let evaluator = format!("{py} {}", stub.display());
    ok(&[
        "heuristic",
        "--evaluator",
        &evaluator,
        "--seed-only",
        "--cities",
        "20",
        "--instances",
        "2",
        "--out",
        path_str(&out),
    ]);
    let rows = csv_rows(&out.join("seeds.csv"));
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["NN", "NI", "FI", "RI"]);
    for r in &rows {
        let total: f64 = r[1].parse().unwrap();
        let parts: f64 = r[2..].iter().map(|c| c.parse::<f64>().unwrap()).sum();
        assert!((total - parts).abs() < 1e-9);
    }
    ok(&["report", path_str(&out), "--check"]);
}

#[test]
fn missing_evaluator_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let fail = lmpso(&[
        "heuristic",
        "--evaluator",
        "/nonexistent/evaluator",
        "--seed-only",
        "--out",
        path_str(&dir.path().join("run")),
    ]);
    assert!(!fail.status.success());
    let err = String::from_utf8_lossy(&fail.stderr);
    assert!(err.contains("starting evaluator"), "{err}");
}
