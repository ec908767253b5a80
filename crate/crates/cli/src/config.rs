//! Run configuration: a JSON file with per-field flag overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lmpso_core::llm::{ProblemKind, SamplingParams, DEFAULT_TEMPERATURE, ENV_MODEL};
use lmpso_core::swarm::SwarmConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nn,
    Ni,
    Fi,
    Ri,
    SwapPso,
    Lmpso,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Nn, Method::Ni, Method::Fi, Method::Ri, Method::SwapPso, Method::Lmpso];

    pub fn label(self) -> &'static str {
        match self {
            Method::Nn => "NN",
            Method::Ni => "NI",
            Method::Fi => "FI",
            Method::Ri => "RI",
            Method::SwapPso => "PSO",
            Method::Lmpso => "LMPSO",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TspSection {
    #[serde(default = "default_cities")]
    pub cities: usize,
    #[serde(default = "default_layouts")]
    pub layouts: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Instance files used instead of random layouts.
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    #[serde(default)]
    pub no_gap: bool,
    #[serde(default = "default_half")]
    pub swap_alpha: f64,
    #[serde(default = "default_half")]
    pub swap_beta: f64,
}

fn default_cities() -> usize {
    10
}
fn default_layouts() -> usize {
    5
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_half() -> f64 {
    0.5
}

impl Default for TspSection {
    fn default() -> Self {
        Self {
            cities: default_cities(),
            layouts: default_layouts(),
            methods: default_methods(),
            instances: Vec::new(),
            no_gap: false,
            swap_alpha: 0.5,
            swap_beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymregSection {
    pub dataset: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicSection {
    /// Evaluator program followed by its arguments.
    pub evaluator: Vec<String>,
    #[serde(default = "default_heuristic_cities")]
    pub cities: usize,
    #[serde(default = "default_layouts")]
    pub instances: usize,
    #[serde(default = "default_timeout")]
    pub instance_timeout_s: f64,
    /// Score the four seed programs and stop.
    #[serde(default)]
    pub seed_only: bool,
}

fn default_heuristic_cities() -> usize {
    100
}
fn default_timeout() -> f64 {
    lmpso_core::heuristic::DEFAULT_INSTANCE_TIMEOUT_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    Tsp(TspSection),
    Symreg(SymregSection),
    Heuristic(HeuristicSection),
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self {
            Problem::Tsp(_) => "tsp",
            Problem::Symreg(_) => "symreg",
            Problem::Heuristic(_) => "heuristic",
        }
    }

    /// Budget row whose defaults apply. TSP sizes without their own row
    /// use the 10-city settings.
    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::Tsp(t) => ProblemKind::for_cities(t.cities).unwrap_or(ProblemKind::Tsp10),
            Problem::Symreg(_) => ProblemKind::Symreg,
            Problem::Heuristic(_) => ProblemKind::Heuristic,
        }
    }
}

/// Experiment description as stored in a config file. Unset swarm and
/// sampling fields take the problem kind's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default)]
    pub particles: Option<usize>,
    #[serde(default = "default_retry")]
    pub retry_limit: u32,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub max_new_tokens: Option<u32>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_backend")]
    pub backend: BackendKind,
    #[serde(default)]
    pub mock_script: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_retry() -> u32 {
    3
}
fn default_concurrency() -> usize {
    1
}
fn default_backend() -> BackendKind {
    BackendKind::Http
}
fn default_out() -> PathBuf {
    PathBuf::from("runs")
}

/// Flag values that replace config fields when given.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub backend: Option<BackendKind>,
    pub mock_script: Option<PathBuf>,
    pub iterations: Option<usize>,
    pub particles: Option<usize>,
    pub max_new_tokens: Option<u32>,
    pub temperature: Option<f64>,
    pub out: Option<PathBuf>,
    pub no_gap: bool,
}

impl RunConfig {
    pub fn new(problem: Problem) -> Self {
        Self {
            problem,
            seed: 0,
            iterations: None,
            particles: None,
            retry_limit: default_retry(),
            concurrency: default_concurrency(),
            temperature: None,
            max_new_tokens: None,
            model: None,
            backend: default_backend(),
            mock_script: None,
            out: default_out(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // relative paths inside a config are relative to the config file
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(s) = self.mock_script.as_mut() {
            fix(s);
        }
        match &mut self.problem {
            Problem::Tsp(t) => t.instances.iter_mut().for_each(fix),
            Problem::Symreg(s) => fix(&mut s.dataset),
            Problem::Heuristic(_) => {}
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.backend {
            self.backend = v;
        }
        if let Some(v) = &o.mock_script {
            self.mock_script = Some(v.clone());
            if o.backend.is_none() {
                self.backend = BackendKind::Mock;
            }
        }
        if let Some(v) = o.iterations {
            self.iterations = Some(v);
        }
        if let Some(v) = o.particles {
            self.particles = Some(v);
        }
        if let Some(v) = o.max_new_tokens {
            self.max_new_tokens = Some(v);
        }
        if let Some(v) = o.temperature {
            self.temperature = Some(v);
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if o.no_gap {
            if let Problem::Tsp(t) = &mut self.problem {
                t.no_gap = true;
            }
        }
    }

    /// Fill every unset field from the problem kind's defaults.
    pub fn resolved(&self) -> Self {
        let budget = self.problem.kind().budget();
        let mut r = self.clone();
        r.iterations.get_or_insert(budget.iterations);
        r.particles.get_or_insert(budget.particles);
        r.max_new_tokens.get_or_insert(budget.max_new_tokens);
        r.temperature.get_or_insert(DEFAULT_TEMPERATURE);
        if r.model.is_none() {
            r.model = Some(std::env::var(ENV_MODEL).unwrap_or_else(|_| "default".into()));
        }
        r
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.resolved();
        if r.backend == BackendKind::Mock && r.mock_script.is_none() {
            bail!("the mock backend needs a script (--mock-script)");
        }
        if r.iterations == Some(0) || r.particles == Some(0) {
            bail!("iterations and particles must be positive");
        }
        match &r.problem {
            Problem::Tsp(t) => {
                if t.instances.is_empty() && (t.cities < 2 || t.layouts == 0) {
                    bail!("need at least 2 cities and 1 layout");
                }
                if t.methods.is_empty() {
                    bail!("no methods selected");
                }
            }
            Problem::Heuristic(h) if h.evaluator.is_empty() => bail!("no evaluator command configured"),
            _ => {}
        }
        Ok(())
    }

    pub fn sampling(&self) -> SamplingParams {
        let r = self.resolved();
        SamplingParams::new(
            r.temperature.expect("resolved"),
            r.max_new_tokens.expect("resolved"),
            r.model.expect("resolved"),
        )
    }

    pub fn swarm(&self, rng_seed: u64) -> SwarmConfig {
        let r = self.resolved();
        let mut s = SwarmConfig::new(r.particles.expect("resolved"), r.iterations.expect("resolved"));
        s.retry_limit = r.retry_limit;
        s.concurrency = r.concurrency;
        s.rng_seed = rng_seed;
        s
    }
}
