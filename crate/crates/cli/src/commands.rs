use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lmpso_core::heuristic::{EvaluatorCommand, EvaluatorPool, HeuristicAdapter, SeedKind};
use lmpso_core::llm::{ChatBackend, HttpBackend, HttpConfig, MockBackend, Script};
use lmpso_core::seed::{derive_seed, substream};
use lmpso_core::swarm::{run, RunTrace};
use lmpso_core::symreg::{load_csv, SymregAdapter};
use lmpso_core::tsp::{
    generate_instance, held_karp, insertion_heuristic, nearest_neighbor, reference_optimum, swap_pso,
    InsertionMode, SwapPsoConfig, TspAdapter, TspError, TspInstance,
};

use crate::config::{BackendKind, Method, Problem, RunConfig};
use crate::report::{self, SeedScore, TspResult, RUN_FILE, SEEDS_FILE, TRACE_FILE, TSP_RESULTS};

pub fn make_backend(cfg: &RunConfig) -> Result<Box<dyn ChatBackend>> {
    match cfg.backend {
        BackendKind::Mock => {
            let path = cfg.mock_script.as_ref().context("the mock backend needs --mock-script")?;
            let script = Script::load(path).with_context(|| format!("loading mock script {}", path.display()))?;
            Ok(Box::new(MockBackend::new(script)))
        }
        BackendKind::Http => Ok(Box::new(HttpBackend::new(HttpConfig::from_env()?)?)),
    }
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone();
    fs::create_dir_all(dir.join("instances")).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_run_file(dir: &Path, cfg: &RunConfig) -> Result<()> {
    fs::write(dir.join(RUN_FILE), serde_json::to_string_pretty(cfg)? + "\n")?;
    Ok(())
}

fn write_trace(path: &Path, trace: &RunTrace) -> Result<()> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p)?;
    }
    fs::write(path, trace.to_jsonl()).with_context(|| format!("writing {}", path.display()))
}

/// Baselines and swarm runs over a set of layouts; returns written reports.
pub fn cmd_tsp(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let Problem::Tsp(t) = &cfg.problem else { bail!("not a TSP config") };
    let dir = prepare_out(&cfg)?;

    let instances: Vec<TspInstance> = if t.instances.is_empty() {
        (0..t.layouts)
            .map(|k| generate_instance(t.cities, &mut substream(cfg.seed, "instances", k as u64), format!("layout-{k}")))
            .collect()
    } else {
        t.instances.iter().map(|p| TspInstance::load(p)).collect::<Result<_, _>>()?
    };

    let mut methods = t.methods.clone();
    methods.sort();
    methods.dedup();
    let params = cfg.sampling();
    let mut results = Vec::new();
    for (k, inst) in instances.into_iter().enumerate() {
        let inst = if t.no_gap {
            inst
        } else {
            let opt = reference_optimum(&inst).map_err(|e| match e {
                TspError::MissingOptimum(_) => anyhow::anyhow!("{e}; pass --no-gap to report raw lengths"),
                other => other.into(),
            })?;
            inst.with_optimum(opt)
        };
        fs::write(report::instance_path(&dir, &inst.name), inst.to_json_string() + "\n")?;
        let k64 = k as u64;
        for &m in &methods {
            let tour = match m {
                Method::Nn => nearest_neighbor(&inst, 0).into_inner(),
                Method::Ni => insertion_heuristic(&inst, InsertionMode::Nearest, &mut substream(cfg.seed, "ni", k64)).into_inner(),
                Method::Fi => {
                    insertion_heuristic(&inst, InsertionMode::Farthest, &mut substream(cfg.seed, "fi", k64)).into_inner()
                }
                Method::Ri => insertion_heuristic(&inst, InsertionMode::Random, &mut substream(cfg.seed, "ri", k64)).into_inner(),
                Method::SwapPso => {
                    let mut sc = SwapPsoConfig::new(cfg.particles.expect("resolved"), cfg.iterations.expect("resolved"));
                    sc.alpha = t.swap_alpha;
                    sc.beta = t.swap_beta;
                    let out = swap_pso(&inst, &sc, &mut substream(cfg.seed, "swap_pso", k64));
                    write_trace(&dir.join("traces").join(format!("swap_pso-{}.jsonl", inst.name)), &out.trace)?;
                    out.best.into_inner()
                }
                Method::Lmpso => {
                    let backend = make_backend(&cfg)?;
                    let adapter = TspAdapter::new(inst.clone());
                    let out = run(&adapter, backend.as_ref(), &params, &cfg.swarm(derive_seed(cfg.seed, "swarm", k64)))?;
                    write_trace(&dir.join("traces").join(format!("lmpso-{}.jsonl", inst.name)), &out.trace)?;
                    log::info!("{}: LMPSO used {} position queries", inst.name, out.stats.position_queries);
                    out.gbest.decoded.into_inner()
                }
            };
            let length = inst.distance_matrix().cycle_length(&tour);
            results.push(TspResult { layout: k, instance: inst.name.clone(), method: m, length, tour });
        }
    }
    report::write_jsonl(&dir.join(TSP_RESULTS), &results)?;
    write_run_file(&dir, &cfg)?;
    report::write_all(&dir)
}

pub fn cmd_symreg(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let mut cfg = cfg.resolved();
    let Problem::Symreg(s) = &mut cfg.problem else { bail!("not a symbolic-regression config") };
    s.dataset = fs::canonicalize(&s.dataset).with_context(|| format!("dataset {}", s.dataset.display()))?;
    let data = load_csv(&s.dataset)?;
    let dir = prepare_out(&cfg)?;
    let adapter = SymregAdapter::new(data);
    let backend = make_backend(&cfg)?;
    let out = run(&adapter, backend.as_ref(), &cfg.sampling(), &cfg.swarm(derive_seed(cfg.seed, "swarm", 0)))?;
    log::info!("position queries: {}", out.stats.position_queries);
    write_trace(&dir.join(TRACE_FILE), &out.trace)?;
    write_run_file(&dir, &cfg)?;
    report::write_all(&dir)
}

pub fn cmd_heuristic(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let cfg = cfg.resolved();
    let Problem::Heuristic(h) = &cfg.problem else { bail!("not a heuristic config") };
    let dir = prepare_out(&cfg)?;
    let instances: Vec<TspInstance> = (0..h.instances)
        .map(|k| generate_instance(h.cities, &mut substream(cfg.seed, "instances", k as u64), format!("city{}-{k}", h.cities)))
        .collect();
    for inst in &instances {
        fs::write(report::instance_path(&dir, &inst.name), inst.to_json_string() + "\n")?;
    }
    let cmd = EvaluatorCommand::new(&h.evaluator[0], h.evaluator[1..].iter().cloned());
    let pool = EvaluatorPool::spawn(&cmd, cfg.concurrency)
        .with_context(|| format!("starting evaluator `{}`", h.evaluator.join(" ")))?;
    let adapter = HeuristicAdapter::new(instances, pool).with_instance_timeout(h.instance_timeout_s);

    if h.seed_only {
        let mut scores = Vec::new();
        for kind in SeedKind::ALL {
            let lengths = adapter
                .lengths(kind.source())
                .map_err(|v| anyhow::anyhow!("seed {} failed: {v}", kind.short_name()))?;
            let total = lengths.iter().sum();
            scores.push(SeedScore { seed: kind.short_name().into(), lengths, total });
        }
        report::write_jsonl(&dir.join(SEEDS_FILE), &scores)?;
    } else {
        let backend = make_backend(&cfg)?;
        let out = run(&adapter, backend.as_ref(), &cfg.sampling(), &cfg.swarm(derive_seed(cfg.seed, "swarm", 0)))?;
        log::info!(
            "{} probes, {} full evaluations",
            adapter.probe_count(),
            adapter.full_evaluation_count()
        );
        write_trace(&dir.join(TRACE_FILE), &out.trace)?;
    }
    write_run_file(&dir, &cfg)?;
    report::write_all(&dir)
}

/// Exact optimum of an instance file; optionally records it in the file.
pub fn cmd_oracle(path: &Path, append: bool) -> Result<(f64, Vec<usize>)> {
    let inst = TspInstance::load(path)?;
    let (opt, tour) = held_karp(&inst)?;
    if append {
        let updated = inst.with_optimum(opt);
        let text = fs::read_to_string(path)?;
        let body = if text.trim_start().starts_with('{') {
            updated.to_json_string() + "\n"
        } else {
            updated.to_text()
        };
        fs::write(path, body)?;
    }
    Ok((opt, tour.into_inner()))
}
