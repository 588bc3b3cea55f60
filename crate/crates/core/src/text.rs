//! Expression grammar, parser, and canonical renderings.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' exp)?
//! exp    := int | '-' int | '(' '-'? int ')'
//! atom   := int | 'z' | 'x' | 'y' | '(' expr ')'
//! ```
//!
//! Multiplication is explicit and order-preserving. Division and negative
//! powers are only allowed on letter-free subexpressions.

use std::fmt::Write as _;

use num_bigint::BigInt;
use thiserror::Error;

use crate::commutative::{CommEndo, CommPoly};
use crate::freealg::{Letter, NCElement};
use crate::scalar::{Poly, Rat, RatFunc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("division by an expression containing letters at position {pos}")]
    NoncommutativeDivision { pos: usize },
    #[error("negative power of an expression containing letters at position {pos}")]
    NegativeLetterPower { pos: usize },
    #[error("division by zero at position {pos}")]
    DivisionByZero { pos: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Noncommutative,
    Commutative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Z,
    Letter(Letter),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Divisor position is kept for error reporting.
    Div(Box<Expr>, Box<Expr>, usize),
    /// Exponent position is kept for error reporting.
    Pow(Box<Expr>, i64, usize),
}

impl Expr {
    pub fn has_letters(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Z => false,
            Expr::Letter(_) => true,
            Expr::Neg(a) | Expr::Pow(a, _, _) => a.has_letters(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, _) => {
                a.has_letters() || b.has_letters()
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::SyntaxError {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = if self.eat(b'-') {
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(b'-') {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
            } else if self.peek() == Some(b'/') {
                self.pos += 1;
                let at = self.pos;
                acc = Expr::Div(Box::new(acc), Box::new(self.factor()?), at);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), e, at));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        self.skip_ws();
        let n = match self.int()? {
            Some(n) => n,
            None => return self.err("expected an integer exponent"),
        };
        let n: i64 = match i64::try_from(n) {
            Ok(n) => n,
            Err(_) => return self.err("exponent too large"),
        };
        if paren && !self.eat(b')') {
            return self.err("expected ')'");
        }
        Ok(if neg { -n } else { n })
    }

    fn int(&mut self) -> Result<Option<BigInt>, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(Some(digits.parse().unwrap()))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                Ok(Expr::Letter(Letter::X))
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(Expr::Letter(Letter::Y))
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(Expr::Z)
            }
            Some(c) if c.is_ascii_digit() => Ok(Expr::Int(self.int()?.unwrap())),
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    check_divisions(&e)?;
    Ok(e)
}

fn check_divisions(e: &Expr) -> Result<(), ParseError> {
    match e {
        Expr::Int(_) | Expr::Z | Expr::Letter(_) => Ok(()),
        Expr::Neg(a) => check_divisions(a),
        Expr::Pow(a, n, at) => {
            if *n < 0 && a.has_letters() {
                return Err(ParseError::NegativeLetterPower { pos: *at });
            }
            check_divisions(a)
        }
        Expr::Div(a, b, at) => {
            if a.has_letters() || b.has_letters() {
                return Err(ParseError::NoncommutativeDivision { pos: *at });
            }
            check_divisions(a)?;
            check_divisions(b)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            check_divisions(a)?;
            check_divisions(b)
        }
    }
}

/// Evaluates a letter-free expression.
pub fn eval_coefficient(e: &Expr) -> Result<RatFunc, ParseError> {
    Ok(match e {
        Expr::Int(n) => RatFunc::constant(Rat::from_integer(n.clone())),
        Expr::Z => RatFunc::z(),
        Expr::Letter(_) => unreachable!("letters are rejected before evaluation"),
        Expr::Neg(a) => -eval_coefficient(a)?,
        Expr::Add(a, b) => &eval_coefficient(a)? + &eval_coefficient(b)?,
        Expr::Sub(a, b) => &eval_coefficient(a)? - &eval_coefficient(b)?,
        Expr::Mul(a, b) => &eval_coefficient(a)? * &eval_coefficient(b)?,
        Expr::Div(a, b, at) => eval_coefficient(a)?
            .checked_div(&eval_coefficient(b)?)
            .map_err(|_| ParseError::DivisionByZero { pos: *at })?,
        Expr::Pow(a, n, at) => {
            let base = eval_coefficient(a)?;
            if base.is_zero() && *n < 0 {
                return Err(ParseError::DivisionByZero { pos: *at });
            }
            base.pow(*n)
        }
    })
}

pub fn eval_nc(e: &Expr) -> Result<NCElement, ParseError> {
    if !e.has_letters() {
        return Ok(NCElement::scalar(eval_coefficient(e)?));
    }
    Ok(match e {
        Expr::Letter(l) => NCElement::letter(*l),
        Expr::Neg(a) => eval_nc(a)?.neg(),
        Expr::Add(a, b) => eval_nc(a)?.add(&eval_nc(b)?),
        Expr::Sub(a, b) => eval_nc(a)?.sub(&eval_nc(b)?),
        Expr::Mul(a, b) => eval_nc(a)?.mul(&eval_nc(b)?),
        Expr::Pow(a, n, at) => {
            if *n < 0 {
                return Err(ParseError::NegativeLetterPower { pos: *at });
            }
            eval_nc(a)?.pow(*n as u32)
        }
        Expr::Div(_, _, at) => return Err(ParseError::NoncommutativeDivision { pos: *at }),
        Expr::Int(_) | Expr::Z => unreachable!(),
    })
}

pub fn eval_comm(e: &Expr) -> Result<CommPoly, ParseError> {
    if !e.has_letters() {
        return Ok(CommPoly::constant(eval_coefficient(e)?));
    }
    Ok(match e {
        Expr::Letter(Letter::X) => CommPoly::x(),
        Expr::Letter(Letter::Y) => CommPoly::y(),
        Expr::Neg(a) => eval_comm(a)?.neg(),
        Expr::Add(a, b) => eval_comm(a)?.add(&eval_comm(b)?),
        Expr::Sub(a, b) => eval_comm(a)?.sub(&eval_comm(b)?),
        Expr::Mul(a, b) => eval_comm(a)?.mul(&eval_comm(b)?),
        Expr::Pow(a, n, at) => {
            if *n < 0 {
                return Err(ParseError::NegativeLetterPower { pos: *at });
            }
            eval_comm(a)?.pow(*n as u32)
        }
        Expr::Div(_, _, at) => return Err(ParseError::NoncommutativeDivision { pos: *at }),
        Expr::Int(_) | Expr::Z => unreachable!(),
    })
}

pub fn parse_nc(src: &str) -> Result<NCElement, ParseError> {
    eval_nc(&parse_expr(src)?)
}

pub fn parse_comm(src: &str) -> Result<CommPoly, ParseError> {
    eval_comm(&parse_expr(src)?)
}

pub fn parse_ratfunc(src: &str) -> Result<RatFunc, ParseError> {
    let e = parse_expr(src)?;
    if e.has_letters() {
        return Err(ParseError::SyntaxError {
            pos: 0,
            msg: "expected a coefficient in z only".into(),
        });
    }
    eval_coefficient(&e)
}

/// A coefficient as a single factor, parenthesized unless it is one token.
pub fn render_slot(r: &RatFunc) -> String {
    let s = r.to_string();
    if s.bytes().any(|c| b" +-*/^".contains(&c)) && !is_plain_power(&s) {
        format!("({s})")
    } else {
        s
    }
}

fn is_plain_power(s: &str) -> bool {
    s.strip_prefix("z^").is_some_and(|e| e.bytes().all(|c| c.is_ascii_digit()))
}

pub fn render_nc(a: &NCElement) -> String {
    let terms = a.terms();
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (n, w) in terms.iter().enumerate() {
        if n > 0 {
            out.push_str(" + ");
        }
        let mut parts: Vec<String> = Vec::new();
        for (i, slot) in w.slots.iter().enumerate() {
            if !slot.is_one() || w.letters.is_empty() {
                parts.push(render_slot(slot));
            }
            if let Some(l) = w.letters.get(i) {
                parts.push(l.name().to_string());
            }
        }
        out.push_str(&parts.join(" * "));
    }
    out
}

pub fn render_comm(p: &CommPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (n, ((i, j), c)) in p.terms().collect::<Vec<_>>().into_iter().rev().enumerate() {
        if n > 0 {
            out.push_str(" + ");
        }
        let mut parts: Vec<String> = Vec::new();
        if !c.is_one() || i + j == 0 {
            parts.push(render_slot(c));
        }
        for (v, e) in [("x", *i), ("y", *j)] {
            match e {
                0 => {}
                1 => parts.push(v.to_string()),
                _ => parts.push(format!("{v}^{e}")),
            }
        }
        let _ = write!(out, "{}", parts.join(" * "));
    }
    out
}

impl serde::Serialize for RatFunc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for RatFunc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratfunc(&s).map_err(serde::de::Error::custom)
    }
}

impl serde::Serialize for CommEndo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Repr {
            image_x: String,
            image_y: String,
        }
        Repr {
            image_x: render_comm(&self.image_x),
            image_y: render_comm(&self.image_y),
        }
        .serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for CommEndo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        struct Repr {
            image_x: String,
            image_y: String,
        }
        let r = Repr::deserialize(d)?;
        let p = |s: &str| parse_comm(s).map_err(serde::de::Error::custom);
        Ok(CommEndo::new(p(&r.image_x)?, p(&r.image_y)?))
    }
}

pub mod rat_string {
    use super::*;

    pub fn serialize<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.trim().parse().map_err(serde::de::Error::custom)
    }
}

pub mod poly_string {
    use super::*;

    pub fn serialize<S: serde::Serializer>(p: &Poly, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&p.to_string())
    }
}
