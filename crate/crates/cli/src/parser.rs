//! Problem-file dialect: chart declarations, named bindings, and the shared
//! expression grammar for scalars and differential forms.
//!
//! Scalars follow `expr := ['-'] term (('+'|'-') term)*`, `term := factor
//! ('*' factor)*`, `factor := atom ('^' natural)?` with rationals, declared
//! coordinate names, and brace subscripts for derivatives. The form dialect
//! adds `dx(..)`, `theta(..)`, `dy(..)` atoms and reuses `^` as the wedge
//! whenever either operand is a form.

use std::collections::BTreeMap;

use jetvar_core::forms::{from_holonomic, Form};
use jetvar_core::jetalg::{Expr, JetSpec};
use jetvar_core::multiindex::MultiIndex;
use num::BigRational;

use crate::error::{CliError, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Number(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Underscore,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut column = 0usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 0;
            }
            '#' => {
                while let Some(&k) = chars.peek() {
                    if k == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            _ if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            _ if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(&k) = chars.peek() {
                    if k.is_ascii_digit() {
                        digits.push(k);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Number(digits),
                    pos,
                });
            }
            _ if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(&k) = chars.peek() {
                    if k.is_ascii_alphanumeric() {
                        name.push(k);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Ident(name),
                    pos,
                });
            }
            _ => {
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '_' => Tok::Underscore,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    other => {
                        return Err(ParseError::new(
                            line,
                            column,
                            format!("unexpected character '{other}'"),
                        ))
                    }
                };
                chars.next();
                column += 1;
                out.push(Token { tok, pos });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column },
    });
    Ok(out)
}

/// A parsed right-hand side: either a jet-polynomial scalar or a form.
/// Degree-zero forms and scalars convert freely into each other.
#[derive(Debug, Clone)]
pub enum Value {
    Scalar(Expr),
    Differential(Form),
}

impl Value {
    pub fn into_scalar(self) -> Option<Expr> {
        match self {
            Value::Scalar(e) => Some(e),
            Value::Differential(f) if f.degree() == 0 => Some(f.coefficient(&[])),
            Value::Differential(_) => None,
        }
    }

    pub fn into_form(self) -> Option<Form> {
        match self {
            Value::Differential(f) => Some(f),
            Value::Scalar(_) => None,
        }
    }
}

/// Fully resolved problem file. `source` always holds `m` components once
/// any component was given; unset components are zero.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: JetSpec,
    pub lagrangian: Option<Expr>,
    pub source: Option<Vec<Expr>>,
    pub alpha: Option<Form>,
}

const RESERVED: &[&str] = &[
    "base",
    "fiber",
    "let",
    "lagrangian",
    "source",
    "alpha",
    "dx",
    "dy",
    "theta",
    "L",
    "E",
];

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    spec: Option<JetSpec>,
    bindings: BTreeMap<String, Value>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser {
            tokens,
            at: 0,
            spec: None,
            bindings: BTreeMap::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_ahead(&self, k: usize) -> &Tok {
        let at = (self.at + k).min(self.tokens.len() - 1);
        &self.tokens[at].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError::new(pos.line, pos.column, message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.err(self.pos(), format!("expected {what}")))
        }
    }

    fn spec(&self, pos: Pos) -> Result<&JetSpec, ParseError> {
        self.spec
            .as_ref()
            .ok_or_else(|| self.err(pos, "declare base and fiber variables first"))
    }

    // ---------- expression grammar ----------

    fn value(&mut self) -> Result<Value, ParseError> {
        let negate = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let mut v = self.term()?;
        if negate {
            v = neg_value(v);
        }
        loop {
            match self.peek() {
                Tok::Plus => {
                    let pos = self.bump().pos;
                    let rhs = self.term()?;
                    v = add_value(v, rhs, pos, false).map_err(|m| self.err(pos, m))?;
                }
                Tok::Minus => {
                    let pos = self.bump().pos;
                    let rhs = self.term()?;
                    v = add_value(v, rhs, pos, true).map_err(|m| self.err(pos, m))?;
                }
                _ => break,
            }
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<Value, ParseError> {
        let mut v = self.factor()?;
        while *self.peek() == Tok::Star {
            let pos = self.bump().pos;
            let rhs = self.factor()?;
            v = mul_value(v, rhs).map_err(|m| self.err(pos, m))?;
        }
        Ok(v)
    }

    fn factor(&mut self) -> Result<Value, ParseError> {
        let mut v = self.atom()?;
        while *self.peek() == Tok::Caret {
            let caret = self.bump().pos;
            match self.peek().clone() {
                Tok::Number(digits) => {
                    let pos = self.bump().pos;
                    let k: u32 = digits
                        .parse()
                        .map_err(|_| self.err(pos, "exponent too large"))?;
                    v = pow_value(v, k).map_err(|m| self.err(caret, m))?;
                }
                Tok::Eof => {
                    return Err(self.err(caret, "expected an exponent after '^'"));
                }
                _ => {
                    let rhs = self.atom()?;
                    v = wedge_value(v, rhs).map_err(|m| self.err(caret, m))?;
                }
            }
        }
        Ok(v)
    }

    fn atom(&mut self) -> Result<Value, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(digits) => {
                self.bump();
                let numerator: num::BigInt = digits.parse().expect("digit string");
                if *self.peek() == Tok::Slash {
                    self.bump();
                    let dpos = self.pos();
                    let den = match self.bump().tok {
                        Tok::Number(d) => d,
                        _ => return Err(self.err(dpos, "expected a denominator")),
                    };
                    let denominator: num::BigInt = den.parse().expect("digit string");
                    if denominator == num::BigInt::from(0) {
                        return Err(self.err(dpos, "zero denominator"));
                    }
                    Ok(Value::Scalar(Expr::constant(BigRational::new(
                        numerator,
                        denominator,
                    ))))
                } else {
                    Ok(Value::Scalar(Expr::constant(BigRational::from_integer(
                        numerator,
                    ))))
                }
            }
            Tok::LParen => {
                self.bump();
                let v = self.value()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(v)
            }
            Tok::Ident(name) => match name.as_str() {
                "dx" => {
                    self.bump();
                    self.expect(Tok::LParen, "'(' after dx")?;
                    let lambda = self.base_ref()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Value::Differential(Form::dx(lambda)))
                }
                "theta" | "dy" => {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let field = self.fiber_ref()?;
                    let index = if *self.peek() == Tok::Semi {
                        self.bump();
                        self.subscript_names()?
                    } else {
                        let n = self.spec(pos)?.n();
                        MultiIndex::zero(n)
                    };
                    self.expect(Tok::RParen, "')'")?;
                    if name == "theta" {
                        Ok(Value::Differential(Form::theta(field, index)))
                    } else {
                        Ok(Value::Differential(from_holonomic(field, &index)))
                    }
                }
                _ => {
                    self.bump();
                    if let Some(binding) = self.bindings.get(&name) {
                        if *self.peek() == Tok::Underscore {
                            return Err(self.err(
                                self.pos(),
                                "derivative subscripts apply to fiber variables, not bindings",
                            ));
                        }
                        return Ok(binding.clone());
                    }
                    let spec = self.spec(pos)?.clone();
                    if let Some(lambda) = spec.base_index(&name) {
                        if *self.peek() == Tok::Underscore {
                            return Err(self
                                .err(self.pos(), "base variables have no derivative subscript"));
                        }
                        return Ok(Value::Scalar(Expr::base_var(lambda)));
                    }
                    if let Some(field) = spec.fiber_index(&name) {
                        let index = if *self.peek() == Tok::Underscore {
                            self.bump();
                            self.expect(Tok::LBrace, "'{' after '_'")?;
                            let index = self.subscript_names()?;
                            self.expect(Tok::RBrace, "'}'")?;
                            index
                        } else {
                            MultiIndex::zero(spec.n())
                        };
                        return Ok(Value::Scalar(Expr::field_var(field, index)));
                    }
                    Err(self.err(pos, format!("unknown identifier '{name}'")))
                }
            },
            _ => Err(self.err(pos, "expected an expression")),
        }
    }

    /// Comma-separated declared base names; repetition encodes the entries.
    fn subscript_names(&mut self) -> Result<MultiIndex, ParseError> {
        let spec = self
            .spec
            .clone()
            .ok_or_else(|| self.err(self.pos(), "declare base and fiber variables first"))?;
        let mut entries = vec![0u32; spec.n()];
        loop {
            let pos = self.pos();
            match self.bump().tok {
                Tok::Ident(name) => match spec.base_index(&name) {
                    Some(lambda) => entries[lambda] += 1,
                    None => {
                        return Err(self.err(
                            pos,
                            format!("derivative subscript '{name}' is not a base variable"),
                        ))
                    }
                },
                _ => {
                    return Err(
                        self.err(pos, "derivative subscripts are base-variable names")
                    )
                }
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok(MultiIndex::from_entries(entries))
    }

    /// Base direction, by declared name or 1-based position.
    fn base_ref(&mut self) -> Result<usize, ParseError> {
        let pos = self.pos();
        let spec = self.spec(pos)?.clone();
        match self.bump().tok {
            Tok::Ident(name) => spec
                .base_index(&name)
                .ok_or_else(|| self.err(pos, format!("unknown base variable '{name}'"))),
            Tok::Number(digits) => {
                let k: usize = digits
                    .parse()
                    .map_err(|_| self.err(pos, "index too large"))?;
                if k >= 1 && k <= spec.n() {
                    Ok(k - 1)
                } else {
                    Err(self.err(pos, format!("base index {k} out of range 1..={}", spec.n())))
                }
            }
            _ => Err(self.err(pos, "expected a base variable")),
        }
    }

    fn fiber_ref(&mut self) -> Result<usize, ParseError> {
        let pos = self.pos();
        let spec = self.spec(pos)?.clone();
        match self.bump().tok {
            Tok::Ident(name) => spec
                .fiber_index(&name)
                .ok_or_else(|| self.err(pos, format!("unknown fiber variable '{name}'"))),
            Tok::Number(digits) => {
                let k: usize = digits
                    .parse()
                    .map_err(|_| self.err(pos, "index too large"))?;
                if k >= 1 && k <= spec.m() {
                    Ok(k - 1)
                } else {
                    Err(self.err(
                        pos,
                        format!("fiber index {k} out of range 1..={}", spec.m()),
                    ))
                }
            }
            _ => Err(self.err(pos, "expected a fiber variable")),
        }
    }

    // ---------- statements ----------

    fn name_list(&mut self) -> Result<Vec<(String, Pos)>, ParseError> {
        let mut names = Vec::new();
        loop {
            let pos = self.pos();
            match self.bump().tok {
                Tok::Ident(name) => names.push((name, pos)),
                _ => return Err(self.err(pos, "expected a coordinate name")),
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok(names)
    }

    fn check_fresh_name(&self, name: &str, pos: Pos) -> Result<(), ParseError> {
        if RESERVED.contains(&name) {
            return Err(self.err(pos, format!("'{name}' is a reserved word")));
        }
        if self.bindings.contains_key(name) {
            return Err(self.err(pos, format!("'{name}' is already bound")));
        }
        if let Some(spec) = &self.spec {
            if spec.base_index(name).is_some() || spec.fiber_index(name).is_some() {
                return Err(self.err(pos, format!("'{name}' is already a coordinate")));
            }
        }
        Ok(())
    }

    fn problem(&mut self) -> Result<Problem, ParseError> {
        let mut base: Option<Vec<String>> = None;
        let mut fiber: Option<Vec<String>> = None;
        let mut lagrangian: Option<Expr> = None;
        let mut source_list: Option<Vec<Expr>> = None;
        let mut source_sugar: BTreeMap<usize, (Expr, Pos)> = BTreeMap::new();
        let mut alpha: Option<Form> = None;

        while *self.peek() != Tok::Eof {
            let pos = self.pos();
            let head = match self.peek().clone() {
                Tok::Ident(name) => name,
                _ => {
                    return Err(self.err(
                        pos,
                        "expected a statement (base, fiber, let, lagrangian, source, alpha)",
                    ))
                }
            };
            match head.as_str() {
                "base" | "fiber" => {
                    self.bump();
                    let slot = if head == "base" { &mut base } else { &mut fiber };
                    if slot.is_some() {
                        return Err(
                            self.err(pos, format!("{head} variables already declared"))
                        );
                    }
                    let names = self.name_list()?;
                    self.expect(Tok::Semi, "';'")?;
                    let mut list = Vec::new();
                    for (name, npos) in names {
                        self.check_fresh_name(&name, npos)?;
                        list.push((name, npos));
                    }
                    *slot = Some(list.iter().map(|(n, _)| n.clone()).collect());
                    if let (Some(b), Some(f)) = (&base, &fiber) {
                        match JetSpec::with_names(b.clone(), f.clone()) {
                            Ok(spec) => self.spec = Some(spec),
                            Err(e) => return Err(self.err(pos, e.to_string())),
                        }
                    }
                }
                "let" => {
                    self.bump();
                    let npos = self.pos();
                    let name = match self.bump().tok {
                        Tok::Ident(n) => n,
                        _ => return Err(self.err(npos, "expected a binding name")),
                    };
                    self.check_fresh_name(&name, npos)?;
                    self.expect(Tok::Eq, "'='")?;
                    let v = self.value()?;
                    self.expect(Tok::Semi, "';'")?;
                    self.bindings.insert(name, v);
                }
                "lagrangian" | "L" => {
                    self.bump();
                    if lagrangian.is_some() {
                        return Err(self.err(pos, "lagrangian already set"));
                    }
                    self.expect(Tok::Eq, "'='")?;
                    let v = self.value()?;
                    self.expect(Tok::Semi, "';'")?;
                    match v.into_scalar() {
                        Some(e) => lagrangian = Some(e),
                        None => {
                            return Err(
                                self.err(pos, "the lagrangian must be a scalar density")
                            )
                        }
                    }
                }
                "source" => {
                    self.bump();
                    if source_list.is_some() || !source_sugar.is_empty() {
                        return Err(self.err(pos, "source components already given"));
                    }
                    self.expect(Tok::Eq, "'='")?;
                    let mut components = Vec::new();
                    loop {
                        let cpos = self.pos();
                        let v = self.value()?;
                        match v.into_scalar() {
                            Some(e) => components.push(e),
                            None => {
                                return Err(
                                    self.err(cpos, "source components must be scalars")
                                )
                            }
                        }
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::Semi, "';'")?;
                    let m = self.spec(pos)?.m();
                    if components.len() != m {
                        return Err(self.err(
                            pos,
                            format!("expected {m} source components, got {}", components.len()),
                        ));
                    }
                    source_list = Some(components);
                }
                "E" => {
                    // component statement `E_k = expr;`, 1-based k
                    if *self.peek_ahead(1) != Tok::Underscore {
                        return Err(self.err(pos, "expected 'E_<k> = ...;'"));
                    }
                    self.bump();
                    self.bump();
                    let kpos = self.pos();
                    let k: usize = match self.bump().tok {
                        Tok::Number(digits) => digits
                            .parse()
                            .map_err(|_| self.err(kpos, "component index too large"))?,
                        _ => return Err(self.err(kpos, "expected a component number")),
                    };
                    let m = self.spec(pos)?.m();
                    if k < 1 || k > m {
                        return Err(self.err(
                            kpos,
                            format!("component {k} out of range 1..={m}"),
                        ));
                    }
                    if source_list.is_some() {
                        return Err(self.err(pos, "source components already given"));
                    }
                    if source_sugar.contains_key(&(k - 1)) {
                        return Err(self.err(pos, format!("component E_{k} already set")));
                    }
                    self.expect(Tok::Eq, "'='")?;
                    let v = self.value()?;
                    self.expect(Tok::Semi, "';'")?;
                    match v.into_scalar() {
                        Some(e) => {
                            source_sugar.insert(k - 1, (e, pos));
                        }
                        None => {
                            return Err(self.err(pos, "source components must be scalars"))
                        }
                    }
                }
                "alpha" => {
                    self.bump();
                    if alpha.is_some() {
                        return Err(self.err(pos, "alpha already set"));
                    }
                    self.expect(Tok::Eq, "'='")?;
                    let v = self.value()?;
                    self.expect(Tok::Semi, "';'")?;
                    match v.into_form() {
                        Some(f) => alpha = Some(f),
                        None => {
                            return Err(self.err(pos, "alpha must be a differential form"))
                        }
                    }
                }
                _ => {
                    return Err(self.err(
                        pos,
                        format!(
                            "unknown statement '{head}' (expected base, fiber, let, \
                             lagrangian, source, alpha)"
                        ),
                    ))
                }
            }
        }

        let spec = self
            .spec
            .clone()
            .ok_or_else(|| self.err(self.pos(), "the file declares no base/fiber chart"))?;
        let source = if let Some(list) = source_list {
            Some(list)
        } else if !source_sugar.is_empty() {
            let mut components = vec![Expr::zero(); spec.m()];
            for (k, (e, _)) in source_sugar {
                components[k] = e;
            }
            Some(components)
        } else {
            None
        };
        Ok(Problem {
            spec,
            lagrangian,
            source,
            alpha,
        })
    }
}

// ---------- value arithmetic ----------

fn neg_value(v: Value) -> Value {
    match v {
        Value::Scalar(e) => Value::Scalar(-&e),
        Value::Differential(f) => Value::Differential(-&f),
    }
}

fn add_value(a: Value, b: Value, _pos: Pos, subtract: bool) -> Result<Value, String> {
    let b = if subtract { neg_value(b) } else { b };
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(&x + &y)),
        (Value::Scalar(x), Value::Differential(f)) | (Value::Differential(f), Value::Scalar(x)) => {
            if f.degree() == 0 {
                Ok(Value::Scalar(&x + &f.coefficient(&[])))
            } else {
                Err(format!(
                    "cannot add a scalar and a {}-form",
                    f.degree()
                ))
            }
        }
        (Value::Differential(f), Value::Differential(g)) => {
            if f.degree() == g.degree() {
                Ok(Value::Differential(&f + &g))
            } else {
                Err(format!(
                    "cannot add a {}-form and a {}-form",
                    f.degree(),
                    g.degree()
                ))
            }
        }
    }
}

fn mul_value(a: Value, b: Value) -> Result<Value, String> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(&x * &y)),
        (Value::Scalar(x), Value::Differential(f)) | (Value::Differential(f), Value::Scalar(x)) => {
            Ok(Value::Differential(f.scale(&x)))
        }
        (Value::Differential(f), Value::Differential(g)) => {
            if f.degree() == 0 {
                Ok(Value::Differential(g.scale(&f.coefficient(&[]))))
            } else if g.degree() == 0 {
                Ok(Value::Differential(f.scale(&g.coefficient(&[]))))
            } else {
                Err("'*' multiplies by scalars; use '^' for the wedge product".into())
            }
        }
    }
}

fn wedge_value(a: Value, b: Value) -> Result<Value, String> {
    match (a, b) {
        (Value::Scalar(_), Value::Scalar(_)) => {
            Err("expected a natural exponent or a form after '^'".into())
        }
        (Value::Scalar(x), Value::Differential(f)) | (Value::Differential(f), Value::Scalar(x)) => {
            Ok(Value::Differential(f.scale(&x)))
        }
        (Value::Differential(f), Value::Differential(g)) => Ok(Value::Differential(f.wedge(&g))),
    }
}

fn pow_value(v: Value, k: u32) -> Result<Value, String> {
    let scalar = match v {
        Value::Scalar(e) => e,
        Value::Differential(f) if f.degree() == 0 => f.coefficient(&[]),
        Value::Differential(f) => {
            return Err(format!(
                "a {}-form cannot be raised to a power; '^' between forms is the wedge",
                f.degree()
            ))
        }
    };
    Ok(Value::Scalar(scalar.pow(k)))
}

// ---------- entry points ----------

/// Parse a whole problem file.
pub fn parse_problem(text: &str) -> Result<Problem, CliError> {
    let tokens = lex(text)?;
    let mut parser = Parser::new(tokens);
    Ok(parser.problem()?)
}

/// Parse a single expression or form against a fixed chart.
pub fn parse_value(text: &str, spec: &JetSpec) -> Result<Value, CliError> {
    let tokens = lex(text)?;
    let mut parser = Parser::new(tokens);
    parser.spec = Some(spec.clone());
    let v = parser.value()?;
    if *parser.peek() != Tok::Eof {
        let pos = parser.pos();
        return Err(parser.err(pos, "trailing input after the expression").into());
    }
    Ok(v)
}

/// Parse a single scalar expression against a fixed chart.
pub fn parse_scalar(text: &str, spec: &JetSpec) -> Result<Expr, CliError> {
    let pos_err = || CliError::Usage {
        message: "expected a scalar expression".into(),
    };
    parse_value(text, spec)?.into_scalar().ok_or_else(pos_err)
}
