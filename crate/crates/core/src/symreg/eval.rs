use super::expr::{BinaryOp, Expr, UnaryOp};

/// Magnitude cap applied to `pow` results.
pub const POW_LIMIT: f64 = 1e150;

/// How often each protection rule fired.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalNotes {
    pub div_by_zero: u32,
    pub log_zero: u32,
    pub inv_zero: u32,
    pub pow_clamped: u32,
    pub non_finite: u32,
}

impl EvalNotes {
    pub fn fallbacks(&self) -> u32 {
        self.div_by_zero + self.log_zero + self.inv_zero + self.pow_clamped + self.non_finite
    }
}

fn finite(v: f64, notes: &mut EvalNotes) -> f64 {
    if v.is_finite() {
        v
    } else {
        notes.non_finite += 1;
        0.0
    }
}

/// Evaluate on one row. Always finite.
pub fn eval_expr(expr: &Expr, row: &[f64]) -> f64 {
    eval_with_notes(expr, row, &mut EvalNotes::default())
}

pub fn eval_with_notes(expr: &Expr, row: &[f64], notes: &mut EvalNotes) -> f64 {
    match expr {
        Expr::Const(c) => finite(*c, notes),
        Expr::Var(i) => finite(row.get(*i).copied().unwrap_or(0.0), notes),
        Expr::Unary(op, c) => {
            let x = eval_with_notes(c, row, notes);
            let v = match op {
                UnaryOp::Log if x == 0.0 => {
                    notes.log_zero += 1;
                    0.0
                }
                UnaryOp::Log => x.abs().ln(),
                UnaryOp::Sqrt => x.abs().sqrt(),
                UnaryOp::Abs => x.abs(),
                UnaryOp::Neg => -x,
                UnaryOp::Inv if x == 0.0 => {
                    notes.inv_zero += 1;
                    1.0
                }
                UnaryOp::Inv => 1.0 / x,
                UnaryOp::Sin => x.sin(),
                UnaryOp::Cos => x.cos(),
                UnaryOp::Exp => x.exp(),
            };
            finite(v, notes)
        }
        Expr::Binary(op, l, r) => {
            let a = eval_with_notes(l, row, notes);
            let b = eval_with_notes(r, row, notes);
            let v = match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div if b == 0.0 => {
                    notes.div_by_zero += 1;
                    1.0
                }
                BinaryOp::Div => a / b,
                BinaryOp::Max => a.max(b),
                BinaryOp::Min => a.min(b),
                BinaryOp::Pow => {
                    let p = a.powf(b);
                    if p.is_nan() {
                        p
                    } else if p.abs() > POW_LIMIT {
                        notes.pow_clamped += 1;
                        POW_LIMIT.copysign(p)
                    } else {
                        p
                    }
                }
            };
            finite(v, notes)
        }
    }
}
