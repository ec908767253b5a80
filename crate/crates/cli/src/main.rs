use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use lmpso_cli::commands;
use lmpso_cli::config::{BackendKind, HeuristicSection, Method, Overrides, Problem, RunConfig, SymregSection, TspSection};
use lmpso_cli::report;

#[derive(Parser)]
#[command(name = "lmpso", version, about = "Language-model particle swarm optimization")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,
    /// Scripted replies for the mock backend (implies --backend mock).
    #[arg(long, global = true)]
    mock_script: Option<PathBuf>,
    #[arg(long, global = true)]
    iters: Option<usize>,
    #[arg(long, global = true)]
    particles: Option<usize>,
    #[arg(long, global = true)]
    max_tokens: Option<u32>,
    #[arg(long, global = true)]
    temperature: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Global {
    fn overrides(&self, no_gap: bool) -> Overrides {
        Overrides {
            seed: self.seed,
            backend: self.backend,
            mock_script: self.mock_script.clone(),
            iterations: self.iters,
            particles: self.particles,
            max_new_tokens: self.max_tokens,
            temperature: self.temperature,
            out: self.out.clone(),
            no_gap,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Traveling salesman: baselines, swap PSO and the language-model swarm.
    Tsp {
        #[arg(long)]
        cities: Option<usize>,
        #[arg(long)]
        layouts: Option<usize>,
        #[arg(long, value_enum, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Instance file (repeatable); replaces random layouts.
        #[arg(long = "instance")]
        instances: Vec<PathBuf>,
        /// Report raw lengths instead of optimality gaps.
        #[arg(long)]
        no_gap: bool,
    },
    /// Symbolic regression on a CSV dataset.
    Symreg {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Heuristic-program evolution against an external evaluator.
    Heuristic {
        /// Evaluator command line, e.g. "python3 evaluator.py".
        #[arg(long)]
        evaluator: Option<String>,
        #[arg(long)]
        cities: Option<usize>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        instance_timeout: Option<f64>,
        /// Score the four seed programs and stop.
        #[arg(long)]
        seed_only: bool,
    },
    /// Exact optimum of a small instance.
    Oracle {
        instance: PathBuf,
        /// Write the optimum back into the instance file.
        #[arg(long)]
        append: bool,
    },
    /// Regenerate the reports of a finished run.
    Report {
        dir: PathBuf,
        /// Only verify that stored reports match a fresh render.
        #[arg(long)]
        check: bool,
    },
}

fn base_config(global: &Global, fallback: impl FnOnce() -> Result<Problem>) -> Result<RunConfig> {
    match &global.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::new(fallback()?)),
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    let g = &cli.global;
    match cli.command {
        Cmd::Tsp { cities, layouts, methods, instances, no_gap } => {
            let mut cfg = base_config(g, || Ok(Problem::Tsp(TspSection::default())))?;
            let Problem::Tsp(t) = &mut cfg.problem else { bail!("config is not a tsp config") };
            if let Some(v) = cities {
                t.cities = v;
            }
            if let Some(v) = layouts {
                t.layouts = v;
            }
            if let Some(v) = methods {
                t.methods = v;
            }
            if !instances.is_empty() {
                t.instances = instances;
            }
            cfg.apply(&g.overrides(no_gap));
            print_written(&commands::cmd_tsp(&cfg)?);
        }
        Cmd::Symreg { dataset } => {
            let mut cfg = base_config(g, || match &dataset {
                Some(d) => Ok(Problem::Symreg(SymregSection { dataset: d.clone() })),
                None => bail!("give --dataset or --config"),
            })?;
            let Problem::Symreg(s) = &mut cfg.problem else { bail!("config is not a symreg config") };
            if let Some(d) = dataset {
                s.dataset = d;
            }
            cfg.apply(&g.overrides(false));
            print_written(&commands::cmd_symreg(&cfg)?);
        }
        Cmd::Heuristic { evaluator, cities, instances, instance_timeout, seed_only } => {
            let split = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
            let mut cfg = base_config(g, || match &evaluator {
                Some(e) => Ok(Problem::Heuristic(HeuristicSection {
                    evaluator: split(e),
                    cities: 100,
                    instances: 5,
                    instance_timeout_s: lmpso_core::heuristic::DEFAULT_INSTANCE_TIMEOUT_S,
                    seed_only: false,
                })),
                None => bail!("give --evaluator or --config"),
            })?;
            let Problem::Heuristic(h) = &mut cfg.problem else { bail!("config is not a heuristic config") };
            if let Some(e) = evaluator {
                h.evaluator = split(&e);
            }
            if let Some(v) = cities {
                h.cities = v;
            }
            if let Some(v) = instances {
                h.instances = v;
            }
            if let Some(v) = instance_timeout {
                h.instance_timeout_s = v;
            }
            h.seed_only |= seed_only;
            cfg.apply(&g.overrides(false));
            print_written(&commands::cmd_heuristic(&cfg)?);
        }
        Cmd::Oracle { instance, append } => {
            let (opt, tour) = commands::cmd_oracle(&instance, append)?;
            println!("optimum {opt}");
            println!("tour {}", tour.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "));
        }
        Cmd::Report { dir, check } => {
            if check {
                let stale = report::check(&dir)?;
                if !stale.is_empty() {
                    bail!("stale reports: {}", stale.join(", "));
                }
                println!("reports up to date");
            } else {
                print_written(&report::write_all(&dir)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
