//! Text, LaTeX and JSON forms of superfunctions, operators and symbols.
//!
//! Function grammar:
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := rational | 'x' ['^' uint] | 'xi1' | 'xi2' | '(' expr ')'
//! ```

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::diffop::{Mono, SuperDiffOp};
use crate::error::{Error, Result};
use crate::grassmann::{Parity, Sector, SuperFunction};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::symbol::Symbol;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            offset: self.pos,
            message: message.into(),
        })
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn expr(&mut self) -> Result<SuperFunction> {
        let mut acc = SuperFunction::zero();
        let mut negative = false;
        if self.eat(b'-') {
            negative = true;
        } else {
            self.eat(b'+');
        }
        loop {
            let t = self.term()?;
            if negative {
                acc -= &t;
            } else {
                acc += &t;
            }
            if self.eat(b'+') {
                negative = false;
            } else if self.eat(b'-') {
                negative = true;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SuperFunction> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<SuperFunction> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.digits().unwrap();
                let lit = if self.src.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    match self.digits() {
                        Some(den) if den.bytes().any(|b| b != b'0') => format!("{num}/{den}"),
                        Some(_) => return self.err("zero denominator"),
                        None => return self.err("expected denominator digits"),
                    }
                } else {
                    num.to_string()
                };
                Ok(SuperFunction::constant(parse_rational(&lit)?))
            }
            Some(b'x') => {
                self.pos += 1;
                if self.src[self.pos..].starts_with(b"i1") {
                    self.pos += 2;
                    return Ok(SuperFunction::xi1());
                }
                if self.src[self.pos..].starts_with(b"i2") {
                    self.pos += 2;
                    return Ok(SuperFunction::xi2());
                }
                if self.src.get(self.pos) == Some(&b'^') {
                    self.pos += 1;
                    let Some(d) = self.digits() else {
                        return self.err("expected exponent after `^`");
                    };
                    let d: u32 = match d.parse() {
                        Ok(d) => d,
                        Err(_) => return self.err("exponent too large"),
                    };
                    return Ok(SuperFunction::monomial(Sector::One, d, Rational::one()));
                }
                Ok(SuperFunction::x())
            }
            Some(c) => self.err(format!("unexpected character `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse_function(src: &str) -> Result<SuperFunction> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let f = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(f)
}

fn monomial_text(sector: Sector, degree: u32) -> Vec<String> {
    let mut parts = Vec::new();
    match degree {
        0 => {}
        1 => parts.push("x".to_string()),
        d => parts.push(format!("x^{d}")),
    }
    match sector {
        Sector::One => {}
        Sector::Xi1 => parts.push("xi1".into()),
        Sector::Xi2 => parts.push("xi2".into()),
        Sector::Xi12 => parts.extend(["xi1".to_string(), "xi2".to_string()]),
    }
    parts
}

/// Canonical text, sectors `1, ξ1, ξ2, ξ1ξ2` and ascending degree, e.g. `3/2*x^2*xi1*xi2`.
pub fn function_to_text(f: &SuperFunction) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (sector, degree, c)) in f.terms().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut parts = monomial_text(sector, degree);
        if !mag.is_one() || parts.is_empty() {
            parts.insert(0, format_rational(&mag));
        }
        out.push_str(&parts.join("*"));
    }
    out
}

fn mono_text(m: Mono) -> Vec<String> {
    let mut parts = Vec::new();
    match m.l {
        0 => {}
        1 => parts.push("dx".to_string()),
        l => parts.push(format!("dx^{l}")),
    }
    if m.m == 1 {
        parts.push("Db1".into());
    }
    if m.n == 1 {
        parts.push("Db2".into());
    }
    parts
}

/// `dx^2*Db1`; the identity monomial prints as `1`.
pub fn mono_to_text(m: Mono) -> String {
    let parts = mono_text(m);
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Plain text such as `(x^2)*dx^2 + (xi1)*Db1`.
pub fn op_to_text(op: &SuperDiffOp) -> String {
    if op.is_zero() {
        return "0".into();
    }
    op.terms()
        .map(|(m, c)| {
            let mut parts = vec![format!("({})", function_to_text(c))];
            parts.extend(mono_text(m));
            parts.join("*")
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub(crate) fn latex_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", r.numer(), r.denom())
    }
}

pub fn function_to_latex(f: &SuperFunction) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (sector, degree, c)) in f.terms().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut body = String::new();
        match degree {
            0 => {}
            1 => body.push('x'),
            d => body.push_str(&format!("x^{{{d}}}")),
        }
        body.push_str(match sector {
            Sector::One => "",
            Sector::Xi1 => "\\xi_1",
            Sector::Xi2 => "\\xi_2",
            Sector::Xi12 => "\\xi_1\\xi_2",
        });
        if !mag.is_one() || body.is_empty() {
            out.push_str(&latex_rational(&mag));
        }
        out.push_str(&body);
    }
    out
}

fn mono_latex(m: Mono) -> String {
    let mut s = String::new();
    match m.l {
        0 => {}
        1 => s.push_str("\\partial_x"),
        l => s.push_str(&format!("\\partial_x^{{{l}}}")),
    }
    if m.m == 1 {
        s.push_str("\\bar{D}_1");
    }
    if m.n == 1 {
        s.push_str("\\bar{D}_2");
    }
    s
}

fn coefficient_latex(c: &SuperFunction, mono: &str) -> String {
    let body = function_to_latex(c);
    if mono.is_empty() {
        return body;
    }
    if c == &SuperFunction::one() {
        return mono.to_string();
    }
    if c == &-&SuperFunction::one() {
        return format!("-{mono}");
    }
    if c.terms().count() == 1 {
        format!("{body}{mono}")
    } else {
        format!("\\left({body}\\right){mono}")
    }
}

pub fn op_to_latex(op: &SuperDiffOp) -> String {
    if op.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in op.terms().enumerate() {
        let t = coefficient_latex(c, &mono_latex(m));
        if i > 0 {
            match t.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(&t);
                }
            }
        } else {
            out.push_str(&t);
        }
    }
    out
}

pub fn symbol_to_latex(s: &Symbol) -> String {
    format!(
        "\\left({},\\; {}\\right)_{{k={}}}",
        function_to_latex(&s.f1),
        function_to_latex(&s.f2),
        latex_rational(&s.grade())
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTermJson {
    pub l: u32,
    pub m: u8,
    pub n: u8,
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub lambda: String,
    pub mu: String,
    pub terms: Vec<OpTermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolJson {
    pub k2: u32,
    pub parity: String,
    #[serde(rename = "F1")]
    pub f1: String,
    #[serde(rename = "F2")]
    pub f2: String,
    pub lambda: String,
    pub mu: String,
}

pub fn operator_to_json(op: &SuperDiffOp) -> OperatorJson {
    OperatorJson {
        lambda: format_rational(&op.lambda),
        mu: format_rational(&op.mu),
        terms: op
            .terms()
            .map(|(m, c)| OpTermJson {
                l: m.l,
                m: m.m,
                n: m.n,
                coeff: function_to_text(c),
            })
            .collect(),
    }
}

pub fn operator_from_json(j: &OperatorJson) -> Result<SuperDiffOp> {
    let mut op = SuperDiffOp::zero(parse_rational(&j.lambda)?, parse_rational(&j.mu)?);
    for t in &j.terms {
        if t.m > 1 || t.n > 1 {
            return Err(Error::Invalid(format!(
                "D̄ exponents must be 0 or 1, got m = {}, n = {}",
                t.m, t.n
            )));
        }
        op.add_term(Mono::new(t.l, t.m, t.n), &parse_function(&t.coeff)?);
    }
    Ok(op)
}

pub fn parse_parity(s: &str) -> Result<Parity> {
    match s {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        other => Err(Error::Invalid(format!(
            "parity must be `even` or `odd`, got `{other}`"
        ))),
    }
}

pub fn symbol_to_json(s: &Symbol) -> SymbolJson {
    SymbolJson {
        k2: s.k2,
        parity: s.parity.name().into(),
        f1: function_to_text(&s.f1),
        f2: function_to_text(&s.f2),
        lambda: format_rational(&s.lambda),
        mu: format_rational(&s.mu),
    }
}

pub fn symbol_from_json(j: &SymbolJson) -> Result<Symbol> {
    Symbol::with_parity(
        parse_function(&j.f1)?,
        parse_function(&j.f2)?,
        j.k2,
        parse_rational(&j.lambda)?,
        parse_rational(&j.mu)?,
        parse_parity(&j.parity)?,
    )
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn from_json_str<T: for<'de> Deserialize<'de>>(src: &str) -> Result<T> {
    serde_json::from_str(src).map_err(|e| Error::Parse {
        offset: e.column(),
        message: format!("line {}: {e}", e.line()),
    })
}
