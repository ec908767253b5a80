use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::seq::index;
use regex::Regex;

use super::dataset::Dataset;
use super::eval::{eval_with_notes, EvalNotes};
use super::expr::Expr;
use super::metrics::mean_absolute_error;
use super::parser::parse_expr;
use super::SymregError;
use crate::llm::{ChatBackend, LlmError, MetaPrompt, SamplingParams};
use crate::seed::StreamRng;
use crate::swarm::{Candidate, PromptInputs, ProblemAdapter, VelocityPrompt, Violation, BOOTSTRAP_VELOCITY};

/// Rows shown to the model per prompt.
pub const SAMPLE_SIZE: usize = 20;
pub const MAX_DEPTH: usize = 30;
pub const MAX_NODES: usize = 500;
const PROBE_ROWS: usize = 5;

/// Operator vocabulary listed in the prompt.
pub const ADVERTISED_OPERATORS: &str = "addition (a + b), subtraction (a - b), multiplication (a * b), \
division (a / b), log(a), sqrt(a), abs(a), neg (-a), inv(a), max(a, b) and min(a, b)";

fn fence_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```[^\n]*\n(.*?)```").expect("static regex"))
}

fn clean_line(line: &str) -> &str {
    let mut s = line.trim();
    if let Some(i) = s.rfind(['=', ':']) {
        s = &s[i + 1..];
    }
    s.trim_start_matches(|c: char| c == '`' || c == '$' || c.is_whitespace())
        .trim_end_matches(|c: char| matches!(c, '`' | '$' | '.' | ';') || c.is_whitespace())
}

fn is_out_of_range_var(e: &SymregError) -> bool {
    match e {
        SymregError::UnknownVariable { name, .. } => {
            let n = name.to_ascii_lowercase();
            n.strip_prefix('x').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        }
        _ => false,
    }
}

fn last_parsing_line<'a>(lines: impl DoubleEndedIterator<Item = &'a str>, dim: usize, errors: &mut Vec<SymregError>) -> Option<Expr> {
    for line in lines.rev() {
        let cand = clean_line(line);
        if cand.is_empty() {
            continue;
        }
        match parse_expr(cand, dim) {
            Ok(e) => return Some(e),
            Err(e) => errors.push(e),
        }
    }
    None
}

/// Pull an expression out of a free-form reply: the last parseable line of
/// any fenced block, else the last parseable line of the whole reply.
pub fn extract_expression(reply: &str, dim: usize) -> Result<Expr, SymregError> {
    let mut errors = Vec::new();
    let fenced: Vec<&str> = fence_re()
        .captures_iter(reply)
        .flat_map(|c| c.get(1).map_or("", |m| m.as_str()).lines())
        .collect();
    if let Some(e) = last_parsing_line(fenced.into_iter(), dim, &mut errors) {
        return Ok(e);
    }
    if let Some(e) = last_parsing_line(reply.lines(), dim, &mut errors) {
        return Ok(e);
    }
    if let Some(e) = errors.iter().find(|e| is_out_of_range_var(e)) {
        return Err(e.clone());
    }
    Err(errors.into_iter().next().unwrap_or(SymregError::Parse {
        position: 0,
        expected: "an expression, found empty reply".into(),
    }))
}

/// Swarm adapter fitting an expression to a dataset by MAE.
pub struct SymregAdapter {
    data: Dataset,
    sample_size: usize,
    probe_rows: Vec<usize>,
}

impl SymregAdapter {
    pub fn new(data: Dataset) -> Self {
        let n = data.len();
        let k = PROBE_ROWS.min(n);
        let probe_rows = (0..k).map(|i| i * n / k).collect();
        Self { data, sample_size: SAMPLE_SIZE, probe_rows }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    /// Sorted indices of the rows shown in one prompt.
    pub fn sample_rows(&self, rng: &mut StreamRng) -> Vec<usize> {
        let n = self.data.len();
        if n <= self.sample_size {
            return (0..n).collect();
        }
        let mut rows = index::sample(rng, n, self.sample_size).into_vec();
        rows.sort_unstable();
        rows
    }

    pub fn format_row(&self, i: usize) -> String {
        let mut s = String::from("(");
        for (j, v) in self.data.x[i].iter().enumerate() {
            if j > 0 {
                s.push_str(", ");
            }
            write!(s, "x{j}={v}").expect("writing to a String cannot fail");
        }
        write!(s, ") -> y={}", self.data.y[i]).expect("writing to a String cannot fail");
        s
    }

    /// System turn with a fresh data sample.
    pub fn system_prompt(&self, rng: &mut StreamRng) -> String {
        let mut s = self.describe();
        s.push_str("\nData points:\n");
        for i in self.sample_rows(rng) {
            s.push_str(&self.format_row(i));
            s.push('\n');
        }
        s
    }

    pub fn mae(&self, expr: &Expr) -> f64 {
        mean_absolute_error(&self.data.predict(expr), &self.data.y)
    }
}

impl ProblemAdapter for SymregAdapter {
    type Solution = Expr;

    fn describe(&self) -> String {
        let vars: Vec<String> = (0..self.data.dim).map(|j| format!("x{j}")).collect();
        format!(
            "Find a mathematical expression that predicts y from the variables {}. \
             Use these operators if necessary: {ADVERTISED_OPERATORS}. Constants are decimal numbers. \
             Answer with one expression on its own line, for example 2*x0 + abs(x0 - 3). \
             Explore diverse expressions. Shorter expressions are preferable. \
             Expressions are scored by mean absolute error over the whole dataset; lower is better.",
            vars.join(", ")
        )
    }

    fn initial_position(
        &self,
        backend: &dyn ChatBackend,
        params: &SamplingParams,
        rng: &mut StreamRng,
    ) -> Result<String, LlmError> {
        backend.complete(&MetaPrompt::bootstrap(self.system_prompt(rng), BOOTSTRAP_VELOCITY), params)
    }

    fn construct_velocity(&self, pbest: &Candidate<Expr>, gbest: &Candidate<Expr>, _rng: &mut StreamRng) -> VelocityPrompt {
        VelocityPrompt::new(format!(
            "Your best expression so far is {} (MAE {:.6}). The best expression found by the swarm is {} (MAE {:.6}). \
             Generate a new expression influenced by both with a lower MAE. Keep it concise.",
            pbest.decoded, pbest.score, gbest.decoded, gbest.score
        ))
    }

    fn position_text(&self, candidate: &Candidate<Expr>) -> String {
        candidate.decoded.to_string()
    }

    fn render(&self, inputs: &PromptInputs<'_, Expr>, rng: &mut StreamRng) -> MetaPrompt {
        MetaPrompt::swarm(
            self.system_prompt(rng),
            inputs.previous_velocity.text(),
            self.position_text(inputs.position),
            inputs.next_velocity.text(),
        )
    }

    fn parse_and_validate(&self, text: &str) -> Result<Expr, Violation> {
        let expr = extract_expression(text, self.data.dim).map_err(|e| {
            if is_out_of_range_var(&e) {
                Violation::constraint(e.to_string())
            } else {
                Violation::parse(e.to_string())
            }
        })?;
        if expr.depth() > MAX_DEPTH {
            return Err(Violation::constraint(format!("depth {} exceeds {MAX_DEPTH}", expr.depth())));
        }
        if expr.node_count() > MAX_NODES {
            return Err(Violation::constraint(format!("{} nodes exceeds {MAX_NODES}", expr.node_count())));
        }
        let all_fell_back = self.probe_rows.iter().all(|&i| {
            let mut notes = EvalNotes::default();
            eval_with_notes(&expr, &self.data.x[i], &mut notes);
            notes.fallbacks() > 0
        });
        if all_fell_back {
            return Err(Violation::probe("every probe row hit a protected-operator fallback"));
        }
        Ok(expr)
    }

    fn evaluate(&self, expr: &Expr) -> Result<f64, Violation> {
        Ok(self.mae(expr))
    }
}
