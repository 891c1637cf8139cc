//! Arithmetic expressions over ambient coordinates, used for density fields.
//!
//! Grammar: `x1..xp`, numeric literals, `+ - * / ^`, unary minus, `exp(..)`
//! and parentheses. `^` binds tighter than unary minus and is right
//! associative, so `-x1^2` is `-(x1^2)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unexpected character '{0}' at offset {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("unexpected token {0} at offset {1}")]
    UnexpectedToken(String, usize),
    #[error("coordinate x{0} out of range (valid: x1..x{1})")]
    CoordinateOutOfRange(usize, usize),
    #[error("unknown identifier '{0}'")]
    UnknownIdent(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Coord(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Exp(Box<Node>),
}

/// A parsed expression, evaluated against a coordinate slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
    max_coord: usize,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' | '^' => {
                out.push((Tok::Op(c), i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part, e.g. 1e-3
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v = text
                    .parse::<f64>()
                    .map_err(|_| ExprError::UnexpectedToken(text.to_string(), start))?;
                out.push((Tok::Num(v), start));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or(c);
                return Err(ExprError::UnexpectedChar(ch, i));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    max_coord: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or(ExprError::UnexpectedEnd)?;
        self.pos += 1;
        Ok(t)
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let (tok, at) = self.next()?;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) if name == "exp" => {
                match self.next()? {
                    (Tok::LParen, _) => {}
                    (t, at) => return Err(ExprError::UnexpectedToken(format!("{t:?}"), at)),
                }
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(Node::Exp(Box::new(inner)))
            }
            Tok::Ident(name) => {
                let idx = name
                    .strip_prefix('x')
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| ExprError::UnknownIdent(name.clone()))?;
                self.max_coord = self.max_coord.max(idx);
                Ok(Node::Coord(idx - 1))
            }
            t => Err(ExprError::UnexpectedToken(format!("{t:?}"), at)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        match self.next()? {
            (Tok::RParen, _) => Ok(()),
            (t, at) => Err(ExprError::UnexpectedToken(format!("{t:?}"), at)),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let toks = tokenize(src)?;
        let mut p = Parser {
            toks,
            pos: 0,
            max_coord: 0,
        };
        let root = p.expr()?;
        if let Some((t, at)) = p.toks.get(p.pos) {
            return Err(ExprError::UnexpectedToken(format!("{t:?}"), *at));
        }
        Ok(Self {
            source: src.trim().to_string(),
            root,
            max_coord: p.max_coord,
        })
    }

    /// Parses and checks that only `x1..x{dim}` are referenced.
    pub fn parse_for_dim(src: &str, dim: usize) -> Result<Self, ExprError> {
        let e = Self::parse(src)?;
        if e.max_coord > dim {
            return Err(ExprError::CoordinateOutOfRange(e.max_coord, dim));
        }
        Ok(e)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        eval(&self.root, x)
    }
}

fn eval(n: &Node, x: &[f64]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Coord(k) => x[*k],
        Node::Neg(a) => -eval(a, x),
        Node::Add(a, b) => eval(a, x) + eval(b, x),
        Node::Sub(a, b) => eval(a, x) - eval(b, x),
        Node::Mul(a, b) => eval(a, x) * eval(b, x),
        Node::Div(a, b) => eval(a, x) / eval(b, x),
        Node::Pow(a, b) => {
            let base = eval(a, x);
            let e = eval(b, x);
            if e.fract() == 0.0 && e.abs() < 64.0 {
                base.powi(e as i32)
            } else {
                base.powf(e)
            }
        }
        Node::Exp(a) => eval(a, x).exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let x = [2.0, 3.0, 0.5];
        assert_eq!(Expr::parse("1 + 0.5*x3").unwrap().eval(&x), 1.25);
        assert_eq!(Expr::parse("2^3^2").unwrap().eval(&x), 512.0);
        assert_eq!(Expr::parse("-x1^2").unwrap().eval(&x), -4.0);
        assert_eq!(Expr::parse("(1+x1)*x2/3").unwrap().eval(&x), 3.0);
        assert_eq!(Expr::parse("10 - 4 - 3").unwrap().eval(&x), 3.0);
        assert_eq!(Expr::parse("1/2").unwrap().eval(&x), 0.5);
        assert!((Expr::parse("exp(x3*2)").unwrap().eval(&x) - 1f64.exp()).abs() < 1e-15);
        assert_eq!(Expr::parse("1e-1*x1").unwrap().eval(&x), 0.2);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("(1").is_err());
        assert!(Expr::parse("y1").is_err());
        assert!(Expr::parse("x0").is_err());
        assert!(Expr::parse("1 $ 2").is_err());
        assert!(Expr::parse("1 2").is_err());
        assert!(matches!(
            Expr::parse_for_dim("x4", 3),
            Err(ExprError::CoordinateOutOfRange(4, 3))
        ));
    }
}
