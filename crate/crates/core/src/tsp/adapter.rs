use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use regex::Regex;

use super::{check_permutation, DistanceMatrix, Tour, TspInstance};
use crate::llm::{ChatBackend, LlmError, SamplingParams};
use crate::seed::StreamRng;
use crate::swarm::{Candidate, ProblemAdapter, VelocityPrompt, Violation};

/// Velocity instruction. `{pbest}`, `{Lp}`, `{gbest}` and `{Lg}` are filled
/// with the personal-best route, its length, the global-best route and its
/// length.
pub const VELOCITY_TEMPLATE: &str = "Your best route so far is {pbest} (length {Lp}). \
The best route found by the swarm is {gbest} (length {Lg}). \
Generate a new route that is influenced by both and shorter than your current route.";

/// `[c0, c1, ..., c(n-1)]`
pub fn format_route(order: &[usize]) -> String {
    let mut s = String::from("[");
    for (i, c) in order.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        write!(s, "{c}").expect("writing to a String cannot fail");
    }
    s.push(']');
    s
}

fn bracket_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[([^\[\]]*)\]").expect("static regex"))
}

fn parse_int_list(body: &str) -> Option<Vec<usize>> {
    let items: Vec<&str> = body
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return None;
    }
    items.iter().map(|s| s.parse::<usize>().ok()).collect()
}

/// The last bracketed list of non-negative integers in `text`, if any.
pub fn extract_route(text: &str) -> Option<Vec<usize>> {
    bracket_re()
        .captures_iter(text)
        .filter_map(|cap| parse_int_list(&cap[1]))
        .last()
}

/// Swarm adapter for a single TSP instance.
pub struct TspAdapter {
    instance: TspInstance,
    distances: DistanceMatrix,
    velocity_template: String,
}

impl TspAdapter {
    pub fn new(instance: TspInstance) -> Self {
        let distances = instance.distance_matrix();
        Self { instance, distances, velocity_template: VELOCITY_TEMPLATE.to_string() }
    }

    pub fn with_velocity_template(mut self, template: impl Into<String>) -> Self {
        self.velocity_template = template.into();
        self
    }

    pub fn instance(&self) -> &TspInstance {
        &self.instance
    }
}

impl ProblemAdapter for TspAdapter {
    type Solution = Tour;

    fn describe(&self) -> String {
        let n = self.instance.len();
        let mut s = String::from("You are given a list of points with coordinates below:\n");
        for (i, (x, y)) in self.instance.coords.iter().enumerate() {
            writeln!(s, "({i}): ({x}, {y})").expect("writing to a String cannot fail");
        }
        write!(
            s,
            "Find the shortest route that visits every point exactly once and returns to the \
             starting point. A route is a list of point indices in brackets, e.g. [0, 1, 2]. \
             It must contain each index from 0 to {} exactly once. Shorter routes are better.",
            n - 1
        )
        .expect("writing to a String cannot fail");
        s
    }

    fn initial_position(
        &self,
        _backend: &dyn ChatBackend,
        _params: &SamplingParams,
        rng: &mut StreamRng,
    ) -> Result<String, LlmError> {
        let mut order: Vec<usize> = (0..self.instance.len()).collect();
        order.shuffle(rng);
        Ok(format_route(&order))
    }

    fn construct_velocity(&self, pbest: &Candidate<Tour>, gbest: &Candidate<Tour>, _rng: &mut StreamRng) -> VelocityPrompt {
        VelocityPrompt::new(
            self.velocity_template
                .replace("{pbest}", &format_route(pbest.decoded.order()))
                .replace("{Lp}", &format!("{:.2}", pbest.score))
                .replace("{gbest}", &format_route(gbest.decoded.order()))
                .replace("{Lg}", &format!("{:.2}", gbest.score)),
        )
    }

    fn position_text(&self, candidate: &Candidate<Tour>) -> String {
        format_route(candidate.decoded.order())
    }

    fn parse_and_validate(&self, text: &str) -> Result<Tour, Violation> {
        let order = extract_route(text).ok_or_else(|| Violation::parse("no bracketed list of city indices"))?;
        check_permutation(&order, self.instance.len()).map_err(|e| Violation::constraint(e.to_string()))?;
        Ok(Tour::new_unchecked(order))
    }

    fn evaluate(&self, tour: &Tour) -> Result<f64, Violation> {
        Ok(self.distances.cycle_length(tour.order()))
    }
}
