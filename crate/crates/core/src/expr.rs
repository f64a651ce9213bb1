//! A small arithmetic grammar for user-supplied candidate solutions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '·' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'x' | 't' | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | tanh | tan | sqrt
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{Jet2, Scalar};
use crate::pde::{Rect, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Tanh,
    Tan,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Exp, Func::Log, Func::Tanh, Func::Tan, Func::Sqrt];

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Tanh => "tanh",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    T,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    fn depends_on_xt(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::X | Expr::T => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on_xt(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on_xt() || b.depends_on_xt()
            }
        }
    }

    /// Value of a subtree free of `x` and `t`.
    fn constant(&self) -> Option<f64> {
        if self.depends_on_xt() {
            None
        } else {
            self.eval(0.0, 0.0).ok()
        }
    }

    pub fn eval<S: Scalar>(&self, x: S, t: S) -> Result<S> {
        let out = match self {
            Expr::Num(v) => S::cst(*v),
            Expr::X => x,
            Expr::T => t,
            Expr::Neg(e) => -e.eval(x, t)?,
            Expr::Add(a, b) => a.eval(x, t)? + b.eval(x, t)?,
            Expr::Sub(a, b) => a.eval(x, t)? - b.eval(x, t)?,
            Expr::Mul(a, b) => a.eval(x, t)? * b.eval(x, t)?,
            Expr::Div(a, b) => {
                let d = b.eval(x, t)?;
                if d.value() == 0.0 {
                    return Err(Error::DomainViolation("division by zero".into()));
                }
                a.eval(x, t)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval(x, t)?;
                match b.constant() {
                    Some(e) => {
                        if base.value() <= 0.0 && e.fract() != 0.0 {
                            return Err(Error::DomainViolation(format!(
                                "fractional power of non-positive base {}",
                                base.value()
                            )));
                        }
                        base.powf(e)
                    }
                    None => {
                        if base.value() <= 0.0 {
                            return Err(Error::DomainViolation("variable power of non-positive base".into()));
                        }
                        (b.eval(x, t)? * base.ln()).exp()
                    }
                }
            }
            Expr::Call(f, a) => {
                let arg = a.eval(x, t)?;
                match f {
                    Func::Exp => arg.exp(),
                    Func::Log => {
                        if arg.value() <= 0.0 {
                            return Err(Error::DomainViolation("log of non-positive value".into()));
                        }
                        arg.ln()
                    }
                    Func::Sqrt => {
                        if arg.value() <= 0.0 {
                            return Err(Error::DomainViolation("sqrt of non-positive value".into()));
                        }
                        arg.sqrt()
                    }
                    Func::Tanh => arg.tanh(),
                    Func::Tan => {
                        if arg.value().cos().abs() < 1e-12 {
                            return Err(Error::DomainViolation("tan pole".into()));
                        }
                        arg.tan()
                    }
                }
            }
        };
        if !out.value().is_finite() {
            return Err(Error::DomainViolation("non-finite value".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "({v:?})")
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::X => f.write_str("x"),
            Expr::T => f.write_str("t"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat("-") || self.eat("−") {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat("*") || self.eat("·") {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat("/") {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat("-") || self.eat("−") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat("^") {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.eat("(") {
            let e = self.expr()?;
            if !self.eat(")") {
                return Err(self.err("expected `)`"));
            }
            return Ok(e);
        }
        let rest = self.rest();
        let first = rest.chars().next().ok_or_else(|| self.err("unexpected end of input"))?;
        if first.is_ascii_digit() || first == '.' {
            return self.number();
        }
        if first.is_ascii_alphabetic() {
            let len = rest.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(rest.len());
            let word = &rest[..len];
            let start = self.pos;
            self.pos += len;
            return match word {
                "x" => Ok(Expr::X),
                "t" => Ok(Expr::T),
                _ => {
                    let f = Func::from_name(word).ok_or(Error::Parse {
                        pos: start,
                        msg: format!("unknown identifier `{word}`"),
                    })?;
                    if !self.eat("(") {
                        return Err(self.err("expected `(` after function name"));
                    }
                    let arg = self.expr()?;
                    if !self.eat(")") {
                        return Err(self.err("expected `)`"));
                    }
                    Ok(Expr::Call(f, Box::new(arg)))
                }
            };
        }
        Err(self.err(&format!("unexpected character `{first}`")))
    }

    fn number(&mut self) -> Result<Expr> {
        let rest = self.rest();
        let mut len = 0;
        let bytes = rest.as_bytes();
        while len < bytes.len() && (bytes[len].is_ascii_digit() || bytes[len] == b'.') {
            len += 1;
        }
        if len < bytes.len() && (bytes[len] == b'e' || bytes[len] == b'E') {
            let mut k = len + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                len = k;
            }
        }
        let v: f64 = rest[..len].parse().map_err(|_| self.err("malformed number"))?;
        self.pos += len;
        Ok(Expr::Num(v))
    }
}

/// A parsed expression viewed as a field over a declared region.
#[derive(Debug, Clone)]
pub struct ExprField {
    pub source: String,
    pub expr: Expr,
    pub domain: Rect,
}

impl ExprField {
    pub fn parse(source: &str, domain: Rect) -> Result<Self> {
        Ok(Self { source: source.to_string(), expr: Expr::parse(source)?, domain })
    }
}

impl ScalarField for ExprField {
    fn eval_jet(&self, x: Jet2, t: Jet2) -> Result<Jet2> {
        self.expr.eval(x, t)
    }
    fn domain(&self) -> Rect {
        self.domain
    }
    fn label(&self) -> String {
        format!("ansatz:u={}", self.source)
    }
}
