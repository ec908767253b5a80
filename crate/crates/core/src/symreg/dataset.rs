use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SymregError;

/// Feature rows and targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub dim: usize,
}

impl Dataset {
    pub fn new(name: impl Into<String>, x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self, SymregError> {
        let dim = x.first().map_or(0, Vec::len);
        let d = Self { name: name.into(), x, y, dim };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), SymregError> {
        let bad = |m: String| Err(SymregError::InvalidDataset(m));
        if self.x.len() != self.y.len() {
            return bad(format!("{} feature rows but {} targets", self.x.len(), self.y.len()));
        }
        if self.x.is_empty() {
            return bad("no rows".into());
        }
        if self.dim == 0 {
            return bad("no feature columns".into());
        }
        for (i, row) in self.x.iter().enumerate() {
            if row.len() != self.dim {
                return bad(format!("row {i} has {} features, expected {}", row.len(), self.dim));
            }
            if row.iter().any(|v| !v.is_finite()) || !self.y[i].is_finite() {
                return bad(format!("row {i} has a non-finite value"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Parse delimited text with a header row; the last column is the target.
/// A tab in the header selects tab delimiting, otherwise commas. Row and
/// column numbers in errors are 1-based file lines and fields.
pub fn parse_csv(name: &str, text: &str) -> Result<Dataset, SymregError> {
    let header = text.lines().next().unwrap_or("");
    let delimiter = if header.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let width = reader
        .headers()
        .map_err(|e| SymregError::Schema { row: 1, col: 0, message: e.to_string() })?
        .len();
    if width < 2 {
        return Err(SymregError::Schema {
            row: 1,
            col: width,
            message: "need at least one feature column and a target column".into(),
        });
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            SymregError::Schema { row, col: 0, message: e.to_string() }
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(SymregError::Schema {
                row,
                col: record.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let mut values = Vec::with_capacity(width);
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| SymregError::Schema {
                row,
                col: c + 1,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(SymregError::Schema { row, col: c + 1, message: format!("`{field}` is not finite") });
            }
            values.push(v);
        }
        y.push(values.pop().expect("width >= 2"));
        x.push(values);
    }
    if x.is_empty() {
        return Err(SymregError::Schema { row: 2, col: 0, message: "no data rows".into() });
    }
    Dataset::new(name, x, y)
}

pub fn load_csv(path: &Path) -> Result<Dataset, SymregError> {
    let text = std::fs::read_to_string(path).map_err(|e| SymregError::Io(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    parse_csv(name, &text)
}
