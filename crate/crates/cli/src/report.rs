//! Report files. Every report is rendered from the artifacts a run leaves in
//! its output directory, so regenerating reports from stored traces yields
//! the same bytes as the run itself.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lmpso_core::heuristic::extract_code;
use lmpso_core::swarm::RunTrace;
use lmpso_core::symreg::{fit_metrics, load_csv, parse_expr};
use lmpso_core::tsp::{optimality_gap, TspInstance};
use serde::{Deserialize, Serialize};

use crate::config::{Method, Problem, RunConfig};

pub const RUN_FILE: &str = "run.json";
pub const TSP_RESULTS: &str = "results.jsonl";
pub const TRACE_FILE: &str = "trace.jsonl";
pub const SEEDS_FILE: &str = "seeds.jsonl";
/// Iteration spacing of the best-solution table.
pub const TABLE_STRIDE: usize = 5;

/// One method's tour on one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspResult {
    pub layout: usize,
    pub instance: String,
    pub method: Method,
    pub length: f64,
    pub tour: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedScore {
    pub seed: String,
    pub lengths: Vec<f64>,
    pub total: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn instance_path(dir: &Path, name: &str) -> PathBuf {
    dir.join("instances").join(format!("{name}.json"))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), i + 1)))
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

pub fn read_trace(path: &Path) -> Result<RunTrace> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    RunTrace::read_jsonl(BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render every report for the run stored in `dir`, as (file name, contents).
pub fn render(dir: &Path) -> Result<Vec<(String, String)>> {
    let run_path = dir.join(RUN_FILE);
    let text = fs::read_to_string(&run_path).with_context(|| format!("reading {}", run_path.display()))?;
    let cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", run_path.display()))?;
    match &cfg.problem {
        Problem::Tsp(t) => render_tsp(dir, t.no_gap),
        Problem::Symreg(s) => render_symreg(dir, &s.dataset),
        Problem::Heuristic(h) => render_heuristic(dir, h.seed_only),
    }
}

/// Render and write every report; returns the written paths.
pub fn write_all(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for (name, body) in render(dir)? {
        let p = dir.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        out.push(p);
    }
    Ok(out)
}

/// Names of report files whose stored contents differ from a fresh render.
pub fn check(dir: &Path) -> Result<Vec<String>> {
    let mut stale = Vec::new();
    for (name, body) in render(dir)? {
        if fs::read_to_string(dir.join(&name)).ok().as_deref() != Some(body.as_str()) {
            stale.push(name);
        }
    }
    Ok(stale)
}

fn render_tsp(dir: &Path, no_gap: bool) -> Result<Vec<(String, String)>> {
    let results: Vec<TspResult> = read_jsonl(&dir.join(TSP_RESULTS))?;
    let mut optima: BTreeMap<String, Option<f64>> = BTreeMap::new();
    for r in &results {
        if !optima.contains_key(&r.instance) {
            let inst = TspInstance::load(&instance_path(dir, &r.instance))?;
            optima.insert(r.instance.clone(), inst.reference_optimum);
        }
    }
    let cities = |r: &TspResult| r.tour.len();

    let mut runs = Vec::new();
    let mut by_method: BTreeMap<(Method, usize), Vec<(f64, Option<f64>)>> = BTreeMap::new();
    for r in &results {
        let opt = if no_gap { None } else { optima[&r.instance] };
        let gap = match opt {
            Some(o) => Some(optimality_gap(r.length, o)?),
            None if no_gap => None,
            None => bail!("instance {} has no optimum; rerun with --no-gap", r.instance),
        };
        runs.push(vec![
            r.layout.to_string(),
            r.instance.clone(),
            r.method.label().to_string(),
            r.length.to_string(),
            opt_cell(opt),
            opt_cell(gap.map(|g| g.fraction)),
            opt_cell(gap.map(|g| g.percent)),
        ]);
        by_method.entry((r.method, cities(r))).or_default().push((r.length, gap.map(|g| g.fraction)));
    }
    let mut files = vec![(
        "tsp_runs.csv".to_string(),
        csv_string(&["layout", "instance", "method", "length", "optimum", "gap", "gap_percent"], runs)?,
    )];

    let mut rows = Vec::new();
    for ((method, n), vals) in &by_method {
        if no_gap {
            let lengths: Vec<f64> = vals.iter().map(|v| v.0).collect();
            let (m, s) = mean_std(&lengths);
            rows.push(vec![
                method.label().to_string(),
                n.to_string(),
                vals.len().to_string(),
                m.to_string(),
                s.to_string(),
                format!("{m:.2} ± {s:.2}"),
            ]);
        } else {
            let gaps: Vec<f64> = vals.iter().map(|v| v.1.expect("gap present")).collect();
            let (m, s) = mean_std(&gaps);
            rows.push(vec![
                method.label().to_string(),
                n.to_string(),
                vals.len().to_string(),
                m.to_string(),
                s.to_string(),
                (m * 100.0).to_string(),
                (s * 100.0).to_string(),
                format!("{m:.2} ± {s:.2}"),
            ]);
        }
    }
    if no_gap {
        files.push((
            "lengths.csv".into(),
            csv_string(&["method", "cities", "layouts", "mean_length", "std_length", "summary"], rows)?,
        ));
    } else {
        files.push((
            "gaps.csv".into(),
            csv_string(
                &["method", "cities", "layouts", "mean_gap", "std_gap", "mean_gap_percent", "std_gap_percent", "summary"],
                rows,
            )?,
        ));
    }
    Ok(files)
}

fn render_symreg(dir: &Path, dataset: &Path) -> Result<Vec<(String, String)>> {
    let data = load_csv(dataset)?;
    let trace = read_trace(&dir.join(TRACE_FILE))?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let last = trace.iterations.last().map_or(0, |r| r.iter);
    for rec in &trace.iterations {
        let expr = parse_expr(&rec.gbest_text, data.dim)
            .with_context(|| format!("iteration {}: stored best `{}`", rec.iter, rec.gbest_text))?;
        let fit = fit_metrics(&expr, &data);
        rows.push(vec![
            rec.iter.to_string(),
            fit.mae.to_string(),
            opt_cell(fit.r2),
            fit.length.to_string(),
            rec.gbest_text.clone(),
        ]);
        if rec.iter == 1 || rec.iter % TABLE_STRIDE == 0 || rec.iter == last {
            table.push(vec![rec.iter.to_string(), rec.gbest_text.clone(), fit.mae.to_string()]);
        }
    }
    let best = trace.iterations.last().map(|r| format!("{}\n", r.gbest_text)).unwrap_or_default();
    Ok(vec![
        ("symreg.csv".into(), csv_string(&["iter", "best_mae", "best_r2", "best_length", "best_expr"], rows)?),
        ("best_solutions.csv".into(), csv_string(&["iteration", "best_solution", "mae"], table)?),
        ("best_expression.txt".into(), best),
    ])
}

fn render_heuristic(dir: &Path, seed_only: bool) -> Result<Vec<(String, String)>> {
    if seed_only {
        let seeds: Vec<SeedScore> = read_jsonl(&dir.join(SEEDS_FILE))?;
        let width = seeds.first().map_or(0, |s| s.lengths.len());
        let mut header = vec!["seed".to_string(), "total_distance".to_string()];
        header.extend((0..width).map(|i| format!("instance_{i}")));
        let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = seeds
            .iter()
            .map(|s| {
                let mut row = vec![s.seed.clone(), s.total.to_string()];
                row.extend(s.lengths.iter().map(|l| l.to_string()));
                row
            })
            .collect();
        return Ok(vec![("seeds.csv".into(), csv_string(&header_ref, rows)?)]);
    }
    let trace = read_trace(&dir.join(TRACE_FILE))?;
    let rows = trace
        .iterations
        .iter()
        .map(|r| vec![r.iter.to_string(), r.gbest_score.to_string()])
        .collect();
    let best = trace.iterations.last().map(|r| format!("{}\n", extract_code(&r.gbest_text))).unwrap_or_default();
    Ok(vec![
        ("heuristic.csv".into(), csv_string(&["iter", "total_distance"], rows)?),
        ("best_heuristic.py".into(), best),
    ])
}
