//! Text front end for map definitions.
//!
//! Input format: an optional header `vars: X, Y` (defaults to the single
//! variable `X` when there is exactly one definition), then one
//! `Fi = expression` line per component. `#` starts a comment, whitespace
//! is insignificant, lines end in LF or CRLF.
//!
//! Grammar:
//! ```text
//! map    := line+
//! line   := ident "=" expr
//! expr   := ("+"|"-")? term (("+"|"-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ("^" nat)?
//! atom   := int | int "/" int | ident | "(" expr ")" | func "(" expr ")"
//! ```
//! There is no division operator: `/` only forms rational literals.
//! Implicit multiplication is not accepted. Registered functions
//! (`sin`, `cos`, `exp`, `log1p`) expand to exact Maclaurin series and
//! are available over Q only.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::series::{SeriesMap, TruncatedSeries};

/// Elementary functions with built-in Maclaurin expansions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Log1p,
}

impl Elementary {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Elementary::Sin),
            "cos" => Some(Elementary::Cos),
            "exp" => Some(Elementary::Exp),
            "log1p" => Some(Elementary::Log1p),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Exp => "exp",
            Elementary::Log1p => "log1p",
        }
    }
}

/// Expression tree of one component definition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Expr {
    Int(BigInt),
    Ratio(BigInt, BigInt),
    /// Resolved variable index (0-based).
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Elementary, Box<Expr>),
}

/// Parsed map source: ordered variables plus one expression per component.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MapSource {
    pub variables: Vec<String>,
    /// (0-based component index, expression), sorted by index.
    pub definitions: Vec<(usize, Expr)>,
}

/// Parse and evaluate a map definition at the given field and precision.
pub fn parse_map(text: &str, spec: FieldSpec, max_degree: u32) -> Result<SeriesMap> {
    let source = parse_source(text)?;
    evaluate(&source, spec, max_degree)
}

/// Parse a map definition into its syntax tree without evaluating.
pub fn parse_source(text: &str) -> Result<MapSource> {
    let mut lines: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no_comment = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = no_comment.trim();
        if !trimmed.is_empty() {
            lines.push((i + 1, trimmed.to_string()));
        }
    }
    if lines.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty map definition".into(),
        });
    }

    let mut variables: Option<Vec<String>> = None;
    let mut defs: Vec<(usize, String)> = Vec::new();
    for (idx, (line_no, content)) in lines.iter().enumerate() {
        if let Some(rest) = header_payload(content) {
            if idx != 0 {
                return Err(Error::Parse {
                    line: *line_no,
                    column: 1,
                    message: "'vars:' header must be the first line".into(),
                });
            }
            variables = Some(parse_header(rest, *line_no)?);
        } else {
            defs.push((*line_no, content.clone()));
        }
    }

    let variables = match variables {
        Some(v) => v,
        None if defs.len() == 1 => vec!["X".to_string()],
        None => {
            return Err(Error::Parse {
                line: defs.first().map(|d| d.0).unwrap_or(1),
                column: 1,
                message: "a multi-component map needs a 'vars:' header".into(),
            })
        }
    };
    let n = variables.len();
    if defs.len() != n {
        return Err(Error::Parse {
            line: defs.last().map(|d| d.0).unwrap_or(1),
            column: 1,
            message: format!("{} variables but {} component definitions", n, defs.len()),
        });
    }

    let mut slots: Vec<Option<Expr>> = vec![None; n];
    for (line_no, content) in &defs {
        let tokens = tokenize(content, *line_no)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            line: *line_no,
            variables: &variables,
        };
        let (index, expr) = parser.definition(n)?;
        if slots[index].is_some() {
            return Err(Error::Parse {
                line: *line_no,
                column: 1,
                message: format!("duplicate definition for component {}", index + 1),
            });
        }
        slots[index] = Some(expr);
    }
    let definitions = slots
        .into_iter()
        .enumerate()
        .map(|(i, slot)| {
            slot.map(|e| (i, e)).ok_or_else(|| Error::Parse {
                line: lines.last().unwrap().0,
                column: 1,
                message: format!("missing definition for component {}", i + 1),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MapSource {
        variables,
        definitions,
    })
}

/// Evaluate a parsed source bottom-up into a square series map.
pub fn evaluate(source: &MapSource, spec: FieldSpec, max_degree: u32) -> Result<SeriesMap> {
    let n = source.variables.len();
    let components = source
        .definitions
        .iter()
        .map(|(_, expr)| eval_expr(expr, n, spec, max_degree))
        .collect::<Result<Vec<_>>>()?;
    SeriesMap::new(components)
}

fn eval_expr(expr: &Expr, nvars: usize, spec: FieldSpec, w: u32) -> Result<TruncatedSeries> {
    Ok(match expr {
        Expr::Int(n) => TruncatedSeries::constant(spec.bigint(n), nvars, w),
        Expr::Ratio(num, den) => {
            let c = FieldElement::from_ratio(num.clone(), den.clone(), spec)?;
            TruncatedSeries::constant(c, nvars, w)
        }
        Expr::Var(i) => TruncatedSeries::variable(*i, nvars, w, spec)?,
        Expr::Add(a, b) => eval_expr(a, nvars, spec, w)?.add(&eval_expr(b, nvars, spec, w)?)?,
        Expr::Sub(a, b) => eval_expr(a, nvars, spec, w)?.sub(&eval_expr(b, nvars, spec, w)?)?,
        Expr::Neg(a) => eval_expr(a, nvars, spec, w)?.neg(),
        Expr::Mul(a, b) => eval_expr(a, nvars, spec, w)?.mul(&eval_expr(b, nvars, spec, w)?)?,
        Expr::Pow(a, e) => eval_expr(a, nvars, spec, w)?.pow(*e),
        Expr::Call(func, arg) => {
            let series = expand_named(*func, w, spec)?;
            let arg = eval_expr(arg, nvars, spec, w)?;
            series.compose(&[arg])?
        }
    })
}

/// Maclaurin series of a registered elementary function with exact
/// rational coefficients, through `max_degree`. Q only: the factorial
/// denominators vanish in positive characteristic.
pub fn expand_elementary(name: &str, max_degree: u32, spec: FieldSpec) -> Result<TruncatedSeries> {
    let func = Elementary::from_name(name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown elementary function '{name}'")))?;
    expand_named(func, max_degree, spec)
}

fn expand_named(func: Elementary, max_degree: u32, spec: FieldSpec) -> Result<TruncatedSeries> {
    if !spec.is_rationals() {
        return Err(Error::UnsupportedField(format!(
            "{}() requires characteristic zero",
            func.name()
        )));
    }
    let mut terms: Vec<(Vec<u32>, FieldElement)> = Vec::new();
    let mut push = |d: u32, num: BigInt, den: BigInt| -> Result<()> {
        terms.push((vec![d], FieldElement::from_ratio(num, den, spec)?));
        Ok(())
    };
    match func {
        Elementary::Sin => {
            let mut fact = BigInt::one();
            let mut k = 1u32;
            let mut j = 0u32;
            while 2 * j < max_degree {
                while k < 2 * j + 1 {
                    k += 1;
                    fact *= k;
                }
                let sign = if j.is_multiple_of(2) { 1 } else { -1 };
                push(2 * j + 1, BigInt::from(sign), fact.clone())?;
                j += 1;
            }
        }
        Elementary::Cos => {
            let mut fact = BigInt::one();
            let mut k = 0u32;
            let mut j = 0u32;
            while 2 * j <= max_degree {
                while k < 2 * j {
                    k += 1;
                    fact *= k;
                }
                let sign = if j.is_multiple_of(2) { 1 } else { -1 };
                push(2 * j, BigInt::from(sign), fact.clone())?;
                j += 1;
            }
        }
        Elementary::Exp => {
            let mut fact = BigInt::one();
            for j in 0..=max_degree {
                if j > 0 {
                    fact *= j;
                }
                push(j, BigInt::one(), fact.clone())?;
            }
        }
        Elementary::Log1p => {
            for j in 1..=max_degree {
                let sign = if j.is_multiple_of(2) { -1 } else { 1 };
                push(j, BigInt::from(sign), BigInt::from(j))?;
            }
        }
    }
    TruncatedSeries::from_terms(1, max_degree, spec, terms)
}

/// Canonical text form: terms in graded order with an explicit
/// O(vars)^{max_degree+1} remainder marker.
pub fn format_series(f: &TruncatedSeries, names: &[&str]) -> String {
    let mut out = format_polynomial(f, names);
    let _ = write!(out, " + O({})^{}", names.join(", "), f.max_degree() + 1);
    out
}

/// The stored terms without the remainder marker. The output parses back
/// via the map grammar (used for round trips); the zero series prints "0".
pub fn format_polynomial(f: &TruncatedSeries, names: &[&str]) -> String {
    assert_eq!(names.len(), f.nvars(), "one name per variable");
    if f.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in f.terms().enumerate() {
        let negative = c.is_negative();
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else if negative {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let magnitude = if negative { -c } else { c.clone() };
        match (format_monomial(m.exponents(), names), magnitude.is_one()) {
            (Some(mono), true) => out.push_str(&mono),
            (Some(mono), false) => {
                let _ = write!(out, "{magnitude}*{mono}");
            }
            (None, _) => {
                let _ = write!(out, "{magnitude}");
            }
        }
    }
    out
}

/// One line per component: `F1 = ...`. Parses back through `parse_map`.
pub fn format_map_source(map: &SeriesMap, names: &[&str]) -> String {
    let mut out = format!("vars: {}\n", names.join(", "));
    for (i, component) in map.components().iter().enumerate() {
        let _ = writeln!(out, "F{} = {}", i + 1, format_polynomial(component, names));
    }
    out
}

fn format_monomial(exponents: &[u32], names: &[&str]) -> Option<String> {
    let mut parts = Vec::new();
    for (name, &e) in names.iter().zip(exponents) {
        match e {
            0 => {}
            1 => parts.push(name.to_string()),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    if parts.is_empty() {
        None
    } else {
        Some(parts.join("*"))
    }
}

// ---------------------------------------------------------------------------
// Lexer and recursive-descent parser
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Equals,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    column: usize,
}

fn header_payload(line: &str) -> Option<&str> {
    line.strip_prefix("vars")
        .and_then(|rest| rest.trim_start().strip_prefix(':'))
}

fn parse_header(payload: &str, line_no: usize) -> Result<Vec<String>> {
    let mut vars = Vec::new();
    for piece in payload.split(',') {
        let name = piece.trim();
        if name.is_empty() || !is_ident(name) {
            return Err(Error::Parse {
                line: line_no,
                column: 1,
                message: format!("invalid variable name {name:?} in header"),
            });
        }
        if vars.iter().any(|v| v == name) {
            return Err(Error::Parse {
                line: line_no,
                column: 1,
                message: format!("variable '{name}' declared twice"),
            });
        }
        vars.push(name.to_string());
    }
    Ok(vars)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn tokenize(line: &str, line_no: usize) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '=' => Tok::Equals,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                tokens.push(Token {
                    tok: Tok::Int(text.parse().expect("digit run")),
                    column,
                });
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                tokens.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    column,
                });
                continue;
            }
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    column,
                    message: format!("unexpected character {c:?}"),
                })
            }
        };
        tokens.push(Token { tok, column });
        i += 1;
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    line: usize,
    variables: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn column(&self) -> usize {
        match self.tokens.get(self.pos) {
            Some(t) => t.column,
            None => self.tokens.last().map(|t| t.column + 1).unwrap_or(1),
        }
    }

    fn advance(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column(),
            message: message.into(),
        }
    }

    /// `ident "=" expr` with the component index read from the trailing
    /// digits of the left-hand identifier ("F2" defines component 2; a
    /// digitless name is accepted for single-component maps).
    fn definition(&mut self, ncomponents: usize) -> Result<(usize, Expr)> {
        let name = match self.advance() {
            Some(Tok::Ident(name)) => name,
            _ => return Err(self.error("expected a component name")),
        };
        let index = component_index(&name, ncomponents).ok_or_else(|| Error::Parse {
            line: self.line,
            column: 1,
            message: format!(
                "cannot read a component index from '{name}' (expected e.g. F1..F{ncomponents})"
            ),
        })?;
        match self.advance() {
            Some(Tok::Equals) => {}
            _ => return Err(self.error("expected '=' after the component name")),
        }
        let expr = self.expr()?;
        if self.peek().is_some() {
            return Err(self.error("unexpected trailing input after the expression"));
        }
        Ok((index, expr))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.advance();
                Expr::Neg(Box::new(self.term()?))
            }
            Some(Tok::Plus) => {
                self.advance();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.advance();
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.advance();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.advance();
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.advance();
            let exp = match self.advance() {
                Some(Tok::Int(n)) => n.to_u32().ok_or_else(|| self.error("exponent too large"))?,
                Some(Tok::Minus) => {
                    return Err(self.error("exponents must be non-negative integers"))
                }
                _ => return Err(self.error("expected a natural exponent after '^'")),
            };
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.advance() {
            Some(Tok::Int(n)) => {
                if self.peek() == Some(&Tok::Slash) {
                    self.advance();
                    match self.advance() {
                        Some(Tok::Int(d)) => {
                            if d.is_zero() {
                                return Err(self.error("zero denominator in rational literal"));
                            }
                            Ok(Expr::Ratio(n, d))
                        }
                        _ => Err(self.error("expected an integer denominator after '/'")),
                    }
                } else {
                    Ok(Expr::Int(n))
                }
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let func = Elementary::from_name(&name)
                        .ok_or_else(|| self.error(format!("unknown function '{name}'")))?;
                    self.advance();
                    let arg = self.expr()?;
                    match self.advance() {
                        Some(Tok::RParen) => Ok(Expr::Call(func, Box::new(arg))),
                        _ => Err(self.error("expected ')' to close the function call")),
                    }
                } else {
                    match self.variables.iter().position(|v| v == &name) {
                        Some(i) => Ok(Expr::Var(i)),
                        None => Err(self.error(format!("unknown identifier '{name}'"))),
                    }
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.advance() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(self.error("expected ')'")),
                }
            }
            _ => Err(self.error("expected a number, variable, or parenthesized expression")),
        }
    }
}

/// Trailing digits of the left-hand identifier give the 1-based component
/// index; a digitless name means component 1 of a univariate map.
fn component_index(name: &str, ncomponents: usize) -> Option<usize> {
    let digits_at = name
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_digit())
        .map(|(i, _)| i)
        .last();
    match digits_at {
        Some(start) if start > 0 => {
            let index: usize = name[start..].parse().ok()?;
            if (1..=ncomponents).contains(&index) {
                Some(index - 1)
            } else {
                None
            }
        }
        _ if ncomponents == 1 => Some(0),
        _ => None,
    }
}
