//! Arithmetic on command-line numbers: `pi/4`, `sqrt(n)`, `0.1*sqrt(n)`.
//!
//! Grammar: `+ - * /`, parentheses, unary minus, decimal literals, the
//! constant `pi`, the photon number `n` and `sqrt(..)`. All arithmetic is
//! floating point, so `1/4*pi` means what it looks like.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("cannot parse `{input}`: {reason}")]
    Syntax { input: String, reason: String },
    #[error("`{0}` uses `n`, which is not defined here")]
    NeedsPhotonNumber(String),
    #[error("`{input}` evaluates to {value}")]
    NotFinite { input: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Pi,
    N,
    Neg(Box<Node>),
    Sqrt(Box<Node>),
    Bin(Box<Node>, char, Box<Node>),
}

impl Node {
    fn eval(&self, n: Option<f64>) -> Option<f64> {
        Some(match self {
            Node::Num(v) => *v,
            Node::Pi => std::f64::consts::PI,
            Node::N => n?,
            Node::Neg(a) => -a.eval(n)?,
            Node::Sqrt(a) => a.eval(n)?.sqrt(),
            Node::Bin(a, op, b) => {
                let (a, b) = (a.eval(n)?, b.eval(n)?);
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    _ => a / b,
                }
            }
        })
    }

    fn uses_n(&self) -> bool {
        match self {
            Node::N => true,
            Node::Num(_) | Node::Pi => false,
            Node::Neg(a) | Node::Sqrt(a) => a.uses_n(),
            Node::Bin(a, _, b) => a.uses_n() || b.uses_n(),
        }
    }
}

/// A parsed expression that remembers its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn number(v: f64) -> Self {
        Self {
            source: format!("{v}"),
            root: Node::Num(v),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn uses_n(&self) -> bool {
        self.root.uses_n()
    }

    /// Value with `n` bound to the photon number.
    pub fn eval(&self, n: usize) -> Result<f64, ExprError> {
        self.finite(self.root.eval(Some(n as f64)))
    }

    /// Value of an expression that must not mention `n`.
    pub fn constant(&self) -> Result<f64, ExprError> {
        if self.uses_n() {
            return Err(ExprError::NeedsPhotonNumber(self.source.clone()));
        }
        self.finite(self.root.eval(None))
    }

    fn finite(&self, v: Option<f64>) -> Result<f64, ExprError> {
        let v = v.expect("n is bound or absent");
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::NotFinite {
                input: self.source.clone(),
                value: v,
            })
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn fail<T>(&self, reason: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            input: self.src.to_string(),
            reason: reason.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(Box::new(lhs), c as char, Box::new(self.product()?));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(Box::new(lhs), c as char, Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            None => self.fail("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.literal(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    "pi" => Ok(Node::Pi),
                    "n" | "N" => Ok(Node::N),
                    "sqrt" => {
                        self.expect(b'(')?;
                        let inner = self.sum()?;
                        self.expect(b')')?;
                        Ok(Node::Sqrt(Box::new(inner)))
                    }
                    name => self.fail(format!("unknown name `{name}`")),
                }
            }
            Some(c) => self.fail(format!("unexpected `{}`", c as char)),
        }
    }

    fn literal(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.bytes.len() && (p.bytes[p.pos].is_ascii_digit() || p.bytes[p.pos] == b'.') {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            self.pos += 1;
            if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            digits(self);
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Num(v)),
            Err(_) => self.fail(format!("bad number `{text}`")),
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{}`", c as char))
        }
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            src: s,
            bytes: s.as_bytes(),
            pos: 0,
        };
        let root = p.sum()?;
        if p.peek().is_some() {
            return p.fail(format!("trailing input at byte {}", p.pos));
        }
        Ok(Self {
            source: s.trim().to_string(),
            root,
        })
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Expr::number(v as f64)),
            Raw::Float(v) => Ok(Expr::number(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Comma-separated list of expressions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ExprList(pub Vec<Expr>);

impl FromStr for ExprList {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',').map(str::parse).collect::<Result<Vec<_>, _>>().map(ExprList)
    }
}

impl<'de> Deserialize<'de> for ExprList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<Expr>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(ExprList(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn val(s: &str) -> f64 {
        s.parse::<Expr>().unwrap().eval(4).unwrap()
    }

    #[test]
    fn arithmetic() {
        assert_eq!(val("pi/4"), PI / 4.0);
        assert_eq!(val("1/4*pi"), PI / 4.0);
        assert_eq!(val("sqrt(n)"), 2.0);
        assert_eq!(val("0.1*sqrt(n)"), 0.1 * 2.0);
        assert_eq!(val("-2.2"), -2.2);
        assert_eq!(val("2-3-4"), -5.0);
        assert_eq!(val("-(1+2)*3"), -9.0);
        assert_eq!(val(" 1e-3 "), 1e-3);
        assert_eq!(val("2.5E+1"), 25.0);
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "pi/", "sqrt 2", "2 3", "x", "(1", "1.2.3", "--"] {
            assert!(s.parse::<Expr>().is_err(), "{s:?}");
        }
        assert!(matches!(
            "sqrt(n)".parse::<Expr>().unwrap().constant(),
            Err(ExprError::NeedsPhotonNumber(_))
        ));
        assert!("1/0".parse::<Expr>().unwrap().constant().is_err());
        assert!("sqrt(-1)".parse::<Expr>().unwrap().constant().is_err());
    }

    #[test]
    fn lists() {
        let l: ExprList = "0, 0.1*sqrt(n),pi".parse().unwrap();
        let v: Vec<f64> = l.0.iter().map(|e| e.eval(4).unwrap()).collect();
        assert_eq!(v, vec![0.0, 0.2, PI]);
    }
}
