//! Recursive-descent parser for infix expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | var | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `**` is accepted for `^`; `·` and `×` for `*`; `−` for `-`. Names are
//! case-insensitive. Absolute-value bars are rejected.

use super::expr::{BinaryOp, Expr, UnaryOp};
use super::SymregError;

const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn err(position: usize, expected: impl Into<String>) -> SymregError {
    SymregError::Parse { position, expected: expected.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, SymregError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => {
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                    i += 1;
                }
                // exponent part: e/E, optional sign, digits
                if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].1.is_ascii_digit() {
                        while j < chars.len() && chars[j].1.is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let end = chars.get(i).map_or(text.len(), |&(p, _)| p);
                let lit = &text[pos..end];
                let v: f64 = lit.parse().map_err(|_| err(chars[start].0, "a number"))?;
                if !v.is_finite() {
                    return Err(err(pos, "a finite number"));
                }
                out.push((Tok::Num(v), pos));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut name = String::new();
                while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                    name.push(chars[i].1);
                    i += 1;
                }
                out.push((Tok::Ident(name), pos));
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' | '\u{2212}' => Tok::Minus,
                    '*' if chars.get(i + 1).map(|p| p.1) == Some('*') => {
                        i += 1;
                        Tok::Caret
                    }
                    '*' | '\u{00b7}' | '\u{00d7}' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '|' => return Err(err(pos, "abs(...) instead of |...|")),
                    other => return Err(err(pos, format!("an operator or operand, found `{other}`"))),
                };
                out.push((tok, pos));
                i += 1;
            }
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    dim: usize,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SymregError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(err(self.pos(), what))
        }
    }

    fn enter(&mut self) -> Result<(), SymregError> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(err(self.pos(), "less deeply nested expression"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, SymregError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.nesting -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, SymregError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SymregError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                self.enter()?;
                let inner = self.unary()?;
                self.nesting -= 1;
                Ok(Expr::unary(UnaryOp::Neg, inner))
            }
            Tok::Plus => {
                self.bump();
                self.enter()?;
                let inner = self.unary();
                self.nesting -= 1;
                inner
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, SymregError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            self.enter()?;
            let exponent = self.unary()?;
            self.nesting -= 1;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, SymregError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    self.call(&name, pos)
                } else {
                    self.variable(&name, pos)
                }
            }
            Tok::End => Err(err(pos, "an operand, found end of input")),
            _ => Err(err(pos, "an operand")),
        }
    }

    fn variable(&self, name: &str, position: usize) -> Result<Expr, SymregError> {
        let lower = name.to_ascii_lowercase();
        if let Some(digits) = lower.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(i) = digits.parse::<usize>() {
                    if i < self.dim {
                        return Ok(Expr::Var(i));
                    }
                }
            }
        }
        Err(SymregError::UnknownVariable { name: name.to_string(), position })
    }

    fn call(&mut self, name: &str, position: usize) -> Result<Expr, SymregError> {
        let lower = name.to_ascii_lowercase();
        let unary = match lower.as_str() {
            "ln" => Some(UnaryOp::Log),
            s => UnaryOp::ALL.into_iter().find(|op| op.name() == s),
        };
        let binary = BinaryOp::ALL.into_iter().find(|op| op.name() == lower);
        if unary.is_none() && binary.is_none() {
            return Err(SymregError::UnknownFunction { name: name.to_string(), position });
        }
        self.enter()?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        self.nesting -= 1;
        match (unary, binary, args.len()) {
            (Some(op), _, 1) => Ok(Expr::unary(op, args.pop().expect("one argument"))),
            (_, Some(op), 2) => {
                let r = args.pop().expect("two arguments");
                let l = args.pop().expect("two arguments");
                Ok(Expr::binary(op, l, r))
            }
            (Some(_), _, n) => Err(err(position, format!("1 argument to {lower}, got {n}"))),
            (_, _, n) => Err(err(position, format!("2 arguments to {lower}, got {n}"))),
        }
    }
}

/// Parse `text` over variables `x0..x{dim-1}`.
pub fn parse_expr(text: &str, dim: usize) -> Result<Expr, SymregError> {
    if text.trim().is_empty() {
        return Err(err(0, "an expression, found empty input"));
    }
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, dim, nesting: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(err(p.pos(), "an operator or end of input"));
    }
    Ok(e)
}
