//! Sweep grids: explicit values, small arithmetic expressions in the outer
//! grid variables, or geometric ranges.
//!
//! Expressions support `+ - * / ^`, parentheses, numbers, the variables `n`,
//! `N` and `ell`, and the functions `sqrt`, `log` (natural), `exp`, `ceil`,
//! `floor`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One grid entry: a literal or an expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Number(f64),
    Expr(String),
}

/// A grid axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<GridValue>),
    /// `num` geometrically spaced values from `start` to `stop` inclusive.
    Logspace {
        start: f64,
        stop: f64,
        num: usize,
    },
}

/// Values of the outer grid variables visible to an expression.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    pub n: Option<f64>,
    pub big_n: Option<f64>,
    pub ell: Option<f64>,
}

impl Grid {
    pub fn is_empty(&self) -> bool {
        match self {
            Grid::List(values) => values.is_empty(),
            Grid::Logspace { num, .. } => *num == 0,
        }
    }

    /// Evaluates every entry under `env`.
    pub fn resolve(&self, env: &Bindings) -> Result<Vec<f64>> {
        match self {
            Grid::List(values) => values
                .iter()
                .map(|v| match v {
                    GridValue::Number(x) => Ok(*x),
                    GridValue::Expr(src) => eval_expr(src, env),
                })
                .collect(),
            Grid::Logspace { start, stop, num } => {
                if !(*start > 0.0 && *stop > 0.0) {
                    return Err(Error::ConfigInvalid(format!("logspace bounds must be positive, got {start}..{stop}")));
                }
                Ok(match num {
                    0 => Vec::new(),
                    1 => vec![*start],
                    _ => {
                        let (a, b) = (start.ln(), stop.ln());
                        let step = (b - a) / (*num - 1) as f64;
                        (0..*num)
                            .map(|i| match i {
                                0 => *start,
                                _ if i + 1 == *num => *stop,
                                _ => (a + step * i as f64).exp(),
                            })
                            .collect()
                    }
                })
            }
        }
    }
}

/// Evaluates an arithmetic expression.
pub fn eval_expr(src: &str, env: &Bindings) -> Result<f64> {
    let mut parser = Parser { src: src.as_bytes(), pos: 0, env };
    let value = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.src.len() {
        return Err(parser.error("trailing input"));
    }
    if !value.is_finite() {
        return Err(Error::ConfigInvalid(format!("`{src}` evaluates to {value}")));
    }
    Ok(value)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    env: &'a Bindings,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::ConfigInvalid(format!("{what} at offset {} in `{}`", self.pos, String::from_utf8_lossy(self.src)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<f64> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == b'+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<f64> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<f64> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    /// Right-associative, binding tighter than unary minus on its left.
    fn power(&mut self) -> Result<f64> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(base.powf(exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if self.peek() == Some(b'(') {
                    let arg = self.atom()?;
                    return match name {
                        "sqrt" => Ok(arg.sqrt()),
                        "log" | "ln" => Ok(arg.ln()),
                        "exp" => Ok(arg.exp()),
                        "ceil" => Ok(arg.ceil()),
                        "floor" => Ok(arg.floor()),
                        _ => Err(self.error(&format!("unknown function `{name}`"))),
                    };
                }
                let bound = match name {
                    "n" => self.env.n,
                    "N" => self.env.big_n,
                    "ell" | "l" => self.env.ell,
                    "e" => Some(std::f64::consts::E),
                    _ => return Err(self.error(&format!("unknown variable `{name}`"))),
                };
                bound.ok_or_else(|| self.error(&format!("`{name}` is not bound here")))
            }
            _ => Err(self.error("expected a value")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii")
            .parse()
            .map_err(|_| self.error("malformed number"))
    }
}
