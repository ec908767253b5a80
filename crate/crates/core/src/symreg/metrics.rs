use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::eval::eval_expr;
use super::expr::Expr;
use super::SymregError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub mae: f64,
    /// Missing when the target is constant.
    pub r2: Option<f64>,
    pub length: usize,
}

pub fn mean_absolute_error(pred: &[f64], y: &[f64]) -> f64 {
    assert_eq!(pred.len(), y.len(), "prediction and target lengths differ");
    if y.is_empty() {
        return 0.0;
    }
    let total: f64 = pred.iter().zip(y).map(|(p, t)| (p - t).abs()).sum();
    total / y.len() as f64
}

/// `1 - SS_res / SS_tot`, with `SS_tot` taken about the mean of `y`.
pub fn r2_score(pred: &[f64], y: &[f64]) -> Result<f64, SymregError> {
    assert_eq!(pred.len(), y.len(), "prediction and target lengths differ");
    if y.is_empty() {
        return Err(SymregError::DegenerateTarget);
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(SymregError::DegenerateTarget);
    }
    let ss_res: f64 = pred.iter().zip(y).map(|(p, t)| (t - p) * (t - p)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn fit_metrics(expr: &Expr, data: &Dataset) -> FitReport {
    let pred = data.predict(expr);
    FitReport {
        mae: mean_absolute_error(&pred, &data.y),
        r2: r2_score(&pred, &data.y).ok(),
        length: expr.node_count(),
    }
}

impl Dataset {
    pub fn predict(&self, expr: &Expr) -> Vec<f64> {
        self.x.iter().map(|row| eval_expr(expr, row)).collect()
    }
}
