//! Instance files.
//!
//! Text form: first line `n`, then `n` lines `x y`, then optionally
//! `OPT <length>`. JSON form: `{"name": ..., "coords": [[x, y], ...], "opt": ...}`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{TspError, TspInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceJson {
    #[serde(default)]
    pub name: String,
    pub coords: Vec<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opt: Option<f64>,
}

impl From<&TspInstance> for InstanceJson {
    fn from(inst: &TspInstance) -> Self {
        Self {
            name: inst.name.clone(),
            coords: inst.coords.iter().map(|&(x, y)| [x, y]).collect(),
            opt: inst.reference_optimum,
        }
    }
}

impl TryFrom<InstanceJson> for TspInstance {
    type Error = TspError;

    fn try_from(j: InstanceJson) -> Result<Self, TspError> {
        let inst = TspInstance {
            name: j.name,
            coords: j.coords.into_iter().map(|[x, y]| (x, y)).collect(),
            reference_optimum: j.opt,
        };
        inst.validate()?;
        Ok(inst)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> TspError {
    TspError::Parse { line, message: message.into() }
}

impl TspInstance {
    pub fn parse_text(name: &str, text: &str) -> Result<Self, TspError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, first) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let n: usize = first.parse().map_err(|_| parse_err(ln, format!("expected city count, got `{first}`")))?;
        let mut coords = Vec::with_capacity(n);
        let mut opt = None;
        for (ln, line) in lines {
            if let Some(rest) = line.strip_prefix("OPT") {
                if coords.len() != n {
                    return Err(parse_err(ln, format!("OPT before all {n} cities were listed")));
                }
                if opt.is_some() {
                    return Err(parse_err(ln, "duplicate OPT line"));
                }
                let v: f64 = rest.trim().parse().map_err(|_| parse_err(ln, "OPT value is not a number"))?;
                opt = Some(v);
                continue;
            }
            if coords.len() == n || opt.is_some() {
                return Err(parse_err(ln, "unexpected trailing line"));
            }
            let mut parts = line.split_whitespace();
            let mut coord = || -> Result<i64, TspError> {
                parts
                    .next()
                    .ok_or_else(|| parse_err(ln, "expected `x y`"))?
                    .parse()
                    .map_err(|_| parse_err(ln, "coordinates must be integers"))
            };
            let (x, y) = (coord()?, coord()?);
            if parts.next().is_some() {
                return Err(parse_err(ln, "expected exactly two coordinates"));
            }
            coords.push((x, y));
        }
        if coords.len() != n {
            return Err(parse_err(0, format!("expected {n} cities, found {}", coords.len())));
        }
        let inst = TspInstance { name: name.to_string(), coords, reference_optimum: opt };
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.len());
        for (x, y) in &self.coords {
            writeln!(s, "{x} {y}").expect("writing to a String cannot fail");
        }
        if let Some(opt) = self.reference_optimum {
            writeln!(s, "OPT {opt}").expect("writing to a String cannot fail");
        }
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self, TspError> {
        let j: InstanceJson = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
        j.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&InstanceJson::from(self)).expect("instance serializes")
    }

    /// Load either form; JSON is recognized by a leading `{`.
    pub fn load(path: &Path) -> Result<Self, TspError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TspError::InvalidInstance(format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
        if text.trim_start().starts_with('{') {
            let mut inst = Self::from_json_str(&text)?;
            if inst.name.is_empty() {
                inst.name = stem.to_string();
            }
            Ok(inst)
        } else {
            Self::parse_text(stem, &text)
        }
    }
}
