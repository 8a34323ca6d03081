//! Expression parser for rational functions over GF(2^k) and job files.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! atom    := integer | 'x' | 'g' | '(' sum ')'
//! ```
//!
//! Subtraction is addition in characteristic 2. Integer literals are read
//! modulo 2. `g` is the class of the field generator and only exists for k > 1.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use thiserror::Error;
use toml::{Table, Value};

use crate::gf2k::{FieldCtx, FieldElem, FieldError};
use crate::kleinrep::{KleinModule, RepError};
use crate::linalg::Matrix;
use crate::polyrat::{Poly, PolyError, RatFun, DEFAULT_SEED};
use crate::ramdata::{BranchPoint, Location, RamError, Subgroup};

/// Largest degree of numerator or denominator the parser will build.
pub const MAX_EXPR_DEGREE: i64 = 1 << 14;
const MAX_DEPTH: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at {pos}")]
    UnknownSymbol { pos: usize, name: String },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("expected a constant, found an expression in x")]
    NotConstant,
}

fn syntax(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError::SyntaxError { pos, msg: msg.into() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Integer literal reduced mod 2.
    Const(u64),
    Var,
    Gen,
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(String),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                out.push((pos, Tok::Int(s)));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                out.push((pos, Tok::Ident(s)));
            }
            '+' | '*' | '/' | '^' | '(' | ')' | '-' => {
                out.push((pos, Tok::Sym(c)));
                i += 1;
            }
            '\u{2212}' => {
                out.push((pos, Tok::Sym('-')));
                i += 1;
            }
            '\u{b7}' => {
                out.push((pos, Tok::Sym('*')));
                i += 1;
            }
            _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    depth: usize,
    var: &'a str,
    gen: Option<&'a str>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.pos(), "expression nested too deeply"));
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut e = self.product()?;
        loop {
            if self.eat('+') || self.eat('-') {
                let r = self.product()?;
                e = Expr::Add(Box::new(e), Box::new(r));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(e)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                let r = self.unary()?;
                e = Expr::Mul(Box::new(e), Box::new(r));
            } else if self.eat('/') {
                let r = self.unary()?;
                e = Expr::Div(Box::new(e), Box::new(r));
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            self.enter()?;
            let e = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(e)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            if self.peek() == Some(&Tok::Sym('^')) {
                return Err(syntax(self.pos(), "chained exponents need parentheses"));
            }
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = self.eat('(');
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let pos = self.pos();
        let n = match self.peek() {
            Some(Tok::Int(s)) => {
                let s = s.clone();
                self.at += 1;
                s.parse::<i64>().map_err(|_| syntax(pos, "exponent out of range"))?
            }
            _ => return Err(syntax(pos, "expected an integer exponent")),
        };
        if paren && !self.eat(')') {
            return Err(syntax(self.pos(), "expected `)`"));
        }
        Ok(if neg { -n } else { n })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(s)) => {
                self.at += 1;
                let last = s.as_bytes()[s.len() - 1] - b'0';
                Ok(Expr::Const(u64::from(last % 2)))
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                if name == self.var {
                    Ok(Expr::Var)
                } else if Some(name.as_str()) == self.gen {
                    Ok(Expr::Gen)
                } else {
                    Err(ParseError::UnknownSymbol { pos, name })
                }
            }
            Some(Tok::Sym('(')) => {
                self.at += 1;
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(syntax(self.pos(), "expected `)`"));
                }
                Ok(e)
            }
            Some(Tok::Sym(c)) => Err(syntax(pos, format!("unexpected `{c}`"))),
            None => Err(syntax(pos, "unexpected end of input")),
        }
    }
}

fn parse_with(text: &str, var: &str, gen: Option<&str>) -> Result<Expr, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0, end: text.len(), depth: 0, var, gen };
    let e = p.sum()?;
    if p.at != p.toks.len() {
        return Err(syntax(p.pos(), "trailing input"));
    }
    Ok(e)
}

/// Parses an expression in `x` (and `g` when the field has degree > 1).
pub fn parse_ast(text: &str, ctx: FieldCtx) -> Result<Expr, ParseError> {
    parse_with(text, "x", (ctx.degree() > 1).then_some("g"))
}

fn degree_of(h: &RatFun) -> i64 {
    h.num().deg().max(h.den().deg())
}

fn too_large() -> ParseError {
    syntax(0, format!("expression degree exceeds {MAX_EXPR_DEGREE}"))
}

impl Expr {
    pub fn eval(&self, ctx: FieldCtx) -> Result<RatFun, ParseError> {
        Ok(match self {
            Expr::Const(c) => RatFun::constant(ctx, *c),
            Expr::Var => RatFun::x(ctx),
            Expr::Gen => RatFun::constant(ctx, ctx.generator().bits()),
            Expr::Neg(e) => e.eval(ctx)?,
            Expr::Add(a, b) => {
                let (a, b) = (a.eval(ctx)?, b.eval(ctx)?);
                if degree_of(&a) + degree_of(&b) > MAX_EXPR_DEGREE {
                    return Err(too_large());
                }
                a.add(&b)
            }
            Expr::Mul(a, b) => {
                let (a, b) = (a.eval(ctx)?, b.eval(ctx)?);
                if degree_of(&a) + degree_of(&b) > MAX_EXPR_DEGREE {
                    return Err(too_large());
                }
                a.mul(&b)
            }
            Expr::Div(a, b) => {
                let (a, b) = (a.eval(ctx)?, b.eval(ctx)?);
                if degree_of(&a) + degree_of(&b) > MAX_EXPR_DEGREE {
                    return Err(too_large());
                }
                a.div(&b).map_err(|_| ParseError::ZeroDenominator)?
            }
            Expr::Pow(b, e) => {
                let b = b.eval(ctx)?;
                if b.is_zero() {
                    return match e {
                        0 => Ok(RatFun::one(ctx)),
                        e if *e < 0 => Err(ParseError::ZeroDenominator),
                        _ => Ok(b),
                    };
                }
                if degree_of(&b).max(0).saturating_mul(e.saturating_abs()) > MAX_EXPR_DEGREE {
                    return Err(too_large());
                }
                let e = if b.is_constant() { e % ((ctx.order() - 1) as i64).max(1) } else { *e };
                b.pow(e).map_err(|_| ParseError::ZeroDenominator)?
            }
        })
    }
}

pub fn parse_expr(text: &str, ctx: FieldCtx) -> Result<RatFun, ParseError> {
    parse_ast(text, ctx)?.eval(ctx)
}

/// A field element written as a polynomial in `g`.
pub fn parse_field_literal(text: &str, ctx: FieldCtx) -> Result<FieldElem, ParseError> {
    let h = parse_expr(text, ctx)?;
    if !h.is_constant() {
        return Err(ParseError::NotConstant);
    }
    Ok(ctx.elem(h.num().coeff(0)))
}

/// A modulus given either as a bit string (highest degree first, e.g. `"111"`)
/// or as a polynomial in `g` over GF(2) (e.g. `"g^2 + g + 1"`).
pub fn parse_modulus(text: &str) -> Result<u128, ParseError> {
    let t = text.trim();
    if !t.is_empty() && t.chars().all(|c| c == '0' || c == '1') {
        if t.len() > 128 {
            return Err(syntax(0, "modulus has more than 128 bits"));
        }
        return Ok(u128::from_str_radix(t, 2).unwrap());
    }
    let gf2 = FieldCtx::gf2();
    let h = parse_with(t, "g", None)?.eval(gf2)?;
    let p = h.as_poly().ok_or_else(|| syntax(0, "modulus must be a polynomial in g"))?;
    if p.deg() >= 128 {
        return Err(syntax(0, "modulus degree above 127"));
    }
    Ok(p.raw().iter().enumerate().fold(0u128, |acc, (i, &c)| acc | (u128::from(c as u8) << i)))
}

// ---------------------------------------------------------------------------
// Matrix exchange format

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleTextError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Entry { line: usize, source: ParseError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Module(#[from] RepError),
}

/// Reads `n k`, then `n` rows of S, then `n` rows of T (entries are field
/// literals separated by whitespace). Blank lines and `#` comments are skipped.
/// `modulus` overrides the default modulus of GF(2^k).
pub fn parse_module_text(text: &str, modulus: Option<u128>) -> Result<KleinModule, ModuleTextError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let fmt_err = |line: usize, msg: &str| ModuleTextError::Format { line, msg: msg.to_string() };
    let Some(&(hline, header)) = lines.first() else {
        return Err(fmt_err(1, "empty input"));
    };
    let nums: Vec<&str> = header.split_whitespace().collect();
    let (n, k) = match nums.as_slice() {
        [n, k] => (
            n.parse::<usize>().map_err(|_| fmt_err(hline, "bad dimension"))?,
            k.parse::<u32>().map_err(|_| fmt_err(hline, "bad field degree"))?,
        ),
        _ => return Err(fmt_err(hline, "header must be `n k`")),
    };
    if lines.len() != 1 + 2 * n {
        return Err(fmt_err(hline, &format!("expected {} matrix rows, found {}", 2 * n, lines.len() - 1)));
    }
    let ctx = FieldCtx::new(k, modulus)?;
    let mut rows = Vec::with_capacity(2 * n);
    for &(line, l) in &lines[1..] {
        let entries: Vec<&str> = tokens_of_row(l);
        if entries.len() != n {
            return Err(fmt_err(line, &format!("expected {n} entries, found {}", entries.len())));
        }
        let mut row = Vec::with_capacity(n);
        for e in entries {
            let v = parse_field_literal(e, ctx).map_err(|source| ModuleTextError::Entry { line, source })?;
            row.push(v.bits());
        }
        rows.push(row);
    }
    let s = Matrix::from_rows(ctx, &rows[..n]);
    let t = Matrix::from_rows(ctx, &rows[n..]);
    if n == 0 {
        return Ok(KleinModule::zero(ctx));
    }
    Ok(KleinModule::new(s, t)?)
}

// Splits a row on whitespace, except inside parentheses, so that entries like
// `(g + 1)` stay whole. Entries written without spaces need no parentheses.
fn tokens_of_row(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = None;
    for (i, c) in line.char_indices() {
        match c {
            '(' => {
                depth += 1;
                start.get_or_insert(i);
            }
            ')' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => {
                if let Some(s) = start.take() {
                    out.push(&line[s..i]);
                }
            }
            _ => {
                start.get_or_insert(i);
            }
        }
    }
    if let Some(s) = start {
        out.push(&line[s..]);
    }
    out
}

// ---------------------------------------------------------------------------
// Jobs

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Global,
    Hkg,
    Abstract,
    Module,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "global" | "analyze" => Some(Mode::Global),
            "hkg" => Some(Mode::Hkg),
            "abstract" => Some(Mode::Abstract),
            "module" => Some(Mode::Module),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Emit {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CheckMode {
    Formula,
    Oracle,
    Both,
}

impl CheckMode {
    pub fn oracle(self) -> bool {
        self != CheckMode::Formula
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawBranch {
    pub class: String,
    pub bprime: Option<String>,
    pub m: Option<i64>,
    pub big_m: Option<i64>,
}

/// Unvalidated job data, filled from a job file and/or command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawJob {
    pub mode: Option<String>,
    pub k: Option<i64>,
    pub modulus: Option<String>,
    pub h0: Option<String>,
    pub h1: Option<String>,
    pub has_abstract: bool,
    pub g_y: Option<i64>,
    pub condition_b: Option<bool>,
    pub branches: Vec<RawBranch>,
    pub module_path: Option<PathBuf>,
    pub module_text: Option<String>,
    pub seed: Option<i64>,
    pub max_field_degree: Option<i64>,
    pub emit: Option<String>,
    pub check: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CoverInput {
    pub h0_text: String,
    pub h1_text: String,
    pub h0: RatFun,
    pub h1: RatFun,
}

#[derive(Clone, Debug)]
pub struct AbstractInput {
    pub g_y: u32,
    pub condition_b: bool,
    pub branches: Vec<BranchPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JobOptions {
    pub seed: u64,
    pub max_field_degree: u32,
    pub emit: Emit,
    /// `None` means the per-mode default.
    pub check: Option<CheckMode>,
}

impl Default for JobOptions {
    fn default() -> Self {
        JobOptions { seed: DEFAULT_SEED, max_field_degree: 64, emit: Emit::Json, check: None }
    }
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub field: FieldCtx,
    pub mode: Mode,
    pub cover: Option<CoverInput>,
    pub abstract_data: Option<AbstractInput>,
    pub module: Option<KleinModule>,
    pub options: JobOptions,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JobError {
    #[error("job schema error at `{key}`: {reason}")]
    SchemaError { key: String, reason: String },
    #[error("cannot parse `{key}`: {source}")]
    Expr { key: String, source: ParseError },
    #[error("module input: {0}")]
    ModuleText(#[from] ModuleTextError),
    #[error("branch entry {index}: {source}")]
    Branch { index: usize, source: RamError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

impl JobError {
    pub fn key(&self) -> Option<&str> {
        match self {
            JobError::SchemaError { key, .. } | JobError::Expr { key, .. } => Some(key),
            _ => None,
        }
    }
}

fn schema(key: &str, reason: impl Into<String>) -> JobError {
    JobError::SchemaError { key: key.to_string(), reason: reason.into() }
}

fn check_keys(t: &Table, allowed: &[&str]) -> Result<(), JobError> {
    let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
    match t.keys().find(|k| !allowed.contains(k.as_str())) {
        Some(k) => Err(schema(k, "unknown key")),
        None => Ok(()),
    }
}

fn get_table<'a>(t: &'a Table, key: &str) -> Result<Option<&'a Table>, JobError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Table(x)) => Ok(Some(x)),
        Some(_) => Err(schema(key, "expected a table")),
    }
}

fn get_str(t: &Table, key: &str) -> Result<Option<String>, JobError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(schema(key, "expected a string")),
    }
}

fn get_int(t: &Table, key: &str) -> Result<Option<i64>, JobError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) => Ok(Some(*i)),
        Some(_) => Err(schema(key, "expected an integer")),
    }
}

fn get_bool(t: &Table, key: &str) -> Result<Option<bool>, JobError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Boolean(b)) => Ok(Some(*b)),
        Some(_) => Err(schema(key, "expected a boolean")),
    }
}

impl RawJob {
    /// Reads a TOML job document. Relative module paths are resolved against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<RawJob, JobError> {
        let doc: Table = text.parse().map_err(|e: toml::de::Error| {
            let msg = e.message().to_string();
            schema("document", msg)
        })?;
        check_keys(&doc, &["mode", "field", "cover", "abstract", "module", "options"])?;
        let mut raw = RawJob { mode: get_str(&doc, "mode")?, ..RawJob::default() };
        if let Some(f) = get_table(&doc, "field")? {
            check_keys(f, &["k", "modulus"])?;
            raw.k = get_int(f, "k")?;
            raw.modulus = get_str(f, "modulus")?;
            if raw.k.is_none() {
                return Err(schema("k", "missing in [field]"));
            }
        }
        if let Some(c) = get_table(&doc, "cover")? {
            check_keys(c, &["h0", "h1"])?;
            raw.h0 = get_str(c, "h0")?;
            raw.h1 = get_str(c, "h1")?;
            if raw.h0.is_none() {
                return Err(schema("h0", "missing in [cover]"));
            }
            if raw.h1.is_none() {
                return Err(schema("h1", "missing in [cover]"));
            }
        }
        if let Some(a) = get_table(&doc, "abstract")? {
            check_keys(a, &["g_y", "condition_b", "branch"])?;
            raw.has_abstract = true;
            raw.g_y = get_int(a, "g_y")?;
            raw.condition_b = get_bool(a, "condition_b")?;
            match a.get("branch") {
                None => {}
                Some(Value::Array(items)) => {
                    for item in items {
                        let Value::Table(b) = item else {
                            return Err(schema("branch", "expected a table"));
                        };
                        check_keys(b, &["class", "bprime", "m", "M"])?;
                        let class = get_str(b, "class")?.ok_or_else(|| schema("class", "missing in branch entry"))?;
                        raw.branches.push(RawBranch {
                            class,
                            bprime: get_str(b, "bprime")?,
                            m: get_int(b, "m")?,
                            big_m: get_int(b, "M")?,
                        });
                    }
                }
                Some(_) => return Err(schema("branch", "expected an array of tables")),
            }
        }
        if let Some(m) = get_table(&doc, "module")? {
            check_keys(m, &["path", "matrices"])?;
            raw.module_path = get_str(m, "path")?.map(|p| match base {
                Some(b) if Path::new(&p).is_relative() => b.join(p),
                _ => PathBuf::from(p),
            });
            raw.module_text = get_str(m, "matrices")?;
            if raw.module_path.is_some() == raw.module_text.is_some() {
                return Err(schema("module", "give exactly one of `path` and `matrices`"));
            }
        }
        if let Some(o) = get_table(&doc, "options")? {
            check_keys(o, &["seed", "max_field_degree", "emit", "check"])?;
            raw.seed = get_int(o, "seed")?;
            raw.max_field_degree = get_int(o, "max_field_degree")?;
            raw.emit = get_str(o, "emit")?;
            raw.check = get_str(o, "check")?;
        }
        Ok(raw)
    }

    fn infer_mode(&self) -> Result<Mode, JobError> {
        if let Some(m) = &self.mode {
            return Mode::parse(m).ok_or_else(|| schema("mode", format!("unknown mode `{m}`")));
        }
        let cover = self.h0.is_some() || self.h1.is_some();
        let abs = self.has_abstract || !self.branches.is_empty() || self.g_y.is_some();
        let module = self.module_path.is_some() || self.module_text.is_some();
        match (cover, abs, module) {
            (true, false, false) => Ok(Mode::Global),
            (false, true, false) => Ok(Mode::Abstract),
            (false, false, true) => Ok(Mode::Module),
            (false, false, false) => Err(schema("mode", "no [cover], [abstract] or [module] data")),
            _ => Err(schema("mode", "several kinds of input given; set `mode`")),
        }
    }

    pub fn resolve(&self) -> Result<JobSpec, JobError> {
        let mode = self.infer_mode()?;
        let mut options = JobOptions::default();
        if let Some(s) = self.seed {
            options.seed = u64::try_from(s).map_err(|_| schema("seed", "must be nonnegative"))?;
        }
        if let Some(d) = self.max_field_degree {
            options.max_field_degree = u32::try_from(d)
                .ok()
                .filter(|&d| (1..=crate::gf2k::MAX_DEGREE).contains(&d))
                .ok_or_else(|| schema("max_field_degree", "must lie in 1..=64"))?;
        }
        if let Some(e) = &self.emit {
            options.emit = match e.as_str() {
                "json" => Emit::Json,
                "text" => Emit::Text,
                _ => return Err(schema("emit", "expected `json` or `text`")),
            };
        }
        if let Some(c) = &self.check {
            options.check = Some(match c.as_str() {
                "formula" => CheckMode::Formula,
                "oracle" => CheckMode::Oracle,
                "both" => CheckMode::Both,
                _ => return Err(schema("check", "expected `formula`, `oracle` or `both`")),
            });
        }

        let modulus = match &self.modulus {
            Some(m) => Some(parse_modulus(m).map_err(|source| JobError::Expr { key: "modulus".into(), source })?),
            None => None,
        };
        if modulus.is_some() && self.k.is_none() {
            return Err(schema("k", "a modulus needs the field degree"));
        }
        let k = match self.k {
            Some(k) => Some(u32::try_from(k).map_err(|_| schema("k", "must be a positive integer"))?),
            None => None,
        };

        let uses_cover = matches!(mode, Mode::Global | Mode::Hkg);
        if !uses_cover && (self.h0.is_some() || self.h1.is_some()) {
            return Err(schema("cover", "not used in this mode"));
        }
        if mode != Mode::Abstract && (self.has_abstract || !self.branches.is_empty() || self.g_y.is_some()) {
            return Err(schema("abstract", "not used in this mode"));
        }
        if mode != Mode::Module && (self.module_path.is_some() || self.module_text.is_some()) {
            return Err(schema("module", "not used in this mode"));
        }

        if mode == Mode::Module {
            let text = match (&self.module_text, &self.module_path) {
                (Some(t), _) => t.clone(),
                (None, Some(p)) => std::fs::read_to_string(p)
                    .map_err(|e| JobError::Io { path: p.display().to_string(), msg: e.to_string() })?,
                (None, None) => return Err(schema("module", "missing matrices")),
            };
            let module = parse_module_text(&text, modulus)?;
            if let Some(k) = k {
                if k != module.ctx().degree() {
                    return Err(schema("k", format!("job says k = {k} but the matrices are over GF(2^{})", module.ctx().degree())));
                }
            }
            return Ok(JobSpec { field: module.ctx(), mode, cover: None, abstract_data: None, module: Some(module), options });
        }

        let field = FieldCtx::with_cap(k.unwrap_or(1), modulus, options.max_field_degree)?;
        let mut spec = JobSpec { field, mode, cover: None, abstract_data: None, module: None, options };
        if uses_cover {
            let h0_text = self.h0.clone().ok_or_else(|| schema("h0", "missing"))?;
            let h1_text = self.h1.clone().ok_or_else(|| schema("h1", "missing"))?;
            let h0 = parse_expr(&h0_text, field).map_err(|source| JobError::Expr { key: "h0".into(), source })?;
            let h1 = parse_expr(&h1_text, field).map_err(|source| JobError::Expr { key: "h1".into(), source })?;
            spec.cover = Some(CoverInput { h0_text, h1_text, h0, h1 });
        } else {
            let g_y = u32::try_from(self.g_y.ok_or_else(|| schema("g_y", "missing in [abstract]"))?)
                .map_err(|_| schema("g_y", "must be nonnegative"))?;
            if self.branches.is_empty() {
                return Err(schema("branch", "abstract mode needs at least one branch entry"));
            }
            let mut branches = Vec::new();
            for (i, b) in self.branches.iter().enumerate() {
                branches.push(resolve_branch(i, b)?);
            }
            spec.abstract_data = Some(AbstractInput { g_y, condition_b: self.condition_b.unwrap_or(true), branches });
        }
        Ok(spec)
    }
}

fn resolve_branch(i: usize, b: &RawBranch) -> Result<BranchPoint, JobError> {
    let cls = Subgroup::parse(&b.class).ok_or_else(|| schema("class", format!("unknown class `{}`", b.class)))?;
    let big_m = b.big_m.ok_or_else(|| schema("M", format!("missing in branch entry {}", i + 1)))?;
    let m = match (cls, b.m) {
        (_, Some(m)) => m,
        (Subgroup::V4, None) => return Err(schema("m", format!("missing in V4 branch entry {}", i + 1))),
        (_, None) => 1,
    };
    let bprime = match (&b.bprime, cls) {
        (Some(s), _) => Subgroup::parse(s).ok_or_else(|| schema("bprime", format!("unknown label `{s}`")))?,
        (None, Subgroup::V4) if m == big_m => Subgroup::V4,
        (None, Subgroup::V4) => return Err(schema("bprime", format!("missing in V4 branch entry {}", i + 1))),
        (None, h) => h,
    };
    let to_u32 = |key: &str, v: i64| u32::try_from(v).map_err(|_| schema(key, "must be a positive odd integer"));
    let (m, big_m) = (to_u32("m", m)?, to_u32("M", big_m)?);
    BranchPoint::new(Location::Named(format!("P{}", i + 1)), cls, bprime, m, big_m)
        .map_err(|source| JobError::Branch { index: i + 1, source })
}

pub fn load_job(text: &str) -> Result<JobSpec, JobError> {
    RawJob::from_toml(text, None)?.resolve()
}

pub fn load_job_file(path: &Path) -> Result<JobSpec, JobError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| JobError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    RawJob::from_toml(&text, path.parent())?.resolve()
}

/// Printed form that [`parse_expr`] reads back to the same value.
pub fn print_ratfun(h: &RatFun) -> String {
    h.to_string()
}

pub fn poly_from_str(text: &str, ctx: FieldCtx) -> Result<Poly, ParseError> {
    let h = parse_expr(text, ctx)?;
    h.as_poly().cloned().ok_or_else(|| syntax(0, "expected a polynomial"))
}

impl From<PolyError> for ParseError {
    fn from(_: PolyError) -> Self {
        ParseError::ZeroDenominator
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_examples() {
        let gf2 = FieldCtx::gf2();
        let h = parse_expr("x^3 + x + 1/(x-1)^7", gf2).unwrap();
        assert_eq!(h.ord_at(gf2.one()), -7);
        assert_eq!(h.num().divrem(h.den()).0, Poly::from_raw(gf2, vec![0, 1, 0, 1]));
        assert!(parse_expr("x + x", gf2).unwrap().is_zero());

        let gf4 = FieldCtx::new(2, None).unwrap();
        let h = parse_expr("g*x^2 + (g+1)", gf4).unwrap();
        let g = gf4.generator().bits();
        assert_eq!(h.as_poly().unwrap().raw(), &[g ^ 1, 0, g]);
        assert_eq!(parse_expr(&print_ratfun(&h), gf4).unwrap(), h);
    }

    #[test]
    fn precedence_and_signs() {
        let gf2 = FieldCtx::gf2();
        let p = |s| parse_expr(s, gf2).unwrap();
        assert_eq!(p("-x^2"), p("x^2"));
        assert_eq!(p("x^-2"), p("1/x^2"));
        assert_eq!(p("x^(-2)"), p("1/x^2"));
        assert_eq!(p("2*x + 3"), p("1"));
        assert_eq!(p("x/x*x"), p("x"));
        assert_eq!(p("x − 1"), p("x + 1"));
    }

    #[test]
    fn expression_errors() {
        let gf2 = FieldCtx::gf2();
        assert!(matches!(parse_expr("g*x", gf2), Err(ParseError::UnknownSymbol { pos: 0, .. })));
        assert!(matches!(parse_expr("y", gf2), Err(ParseError::UnknownSymbol { .. })));
        assert_eq!(parse_expr("1/(x+x)", gf2), Err(ParseError::ZeroDenominator));
        assert!(matches!(parse_expr("x +", gf2), Err(ParseError::SyntaxError { pos: 3, .. })));
        assert!(matches!(parse_expr("(x", gf2), Err(ParseError::SyntaxError { .. })));
        assert!(matches!(parse_expr("x^100000", gf2), Err(ParseError::SyntaxError { .. })));
        assert!(matches!(parse_expr(&"(".repeat(1000), gf2), Err(ParseError::SyntaxError { .. })));
    }

    #[test]
    fn literals_and_moduli() {
        let gf4 = FieldCtx::new(2, None).unwrap();
        assert_eq!(parse_field_literal("g + 1", gf4).unwrap(), gf4.generator() + gf4.one());
        assert_eq!(parse_field_literal("x", gf4), Err(ParseError::NotConstant));
        assert_eq!(parse_modulus("111").unwrap(), 0b111);
        assert_eq!(parse_modulus("g^8 + g^4 + g^3 + g + 1").unwrap(), 0x11b);
    }

    #[test]
    fn module_text() {
        let text = "2 2\n1 g\n0 1\n1 0\n0 1\n";
        let m = parse_module_text(text, None).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.ctx().degree(), 2);
        let back = parse_module_text(&m.to_text(), None).unwrap();
        assert_eq!(back, m);
        let bad = "2 1\n1 1\n0 1\n1 0\n1 1\n";
        assert!(matches!(parse_module_text(bad, None), Err(ModuleTextError::Module(RepError::NotCommuting))));
        let spaced = "1 2\n(g + 1)\n1\n";
        assert!(matches!(parse_module_text(spaced, None), Err(ModuleTextError::Module(RepError::NotInvolution("S")))));
    }

    #[test]
    fn job_examples() {
        let j = load_job("[field]\nk = 1\n[cover]\nh0 = \"x^3\"\nh1 = \"x^5\"\n").unwrap();
        assert_eq!(j.mode, Mode::Global);

        let text = r#"
[abstract]
g_y = 1
[[abstract.branch]]
class = "Hinf"
M = 21
[[abstract.branch]]
class = "V4"
bprime = "H0"
m = 9
M = 15
"#;
        let j = load_job(text).unwrap();
        assert_eq!(j.mode, Mode::Abstract);
        let a = j.abstract_data.unwrap();
        assert_eq!(a.g_y, 1);
        assert_eq!(a.branches[1].d, 42);

        let err = load_job("[field]\nk = 1\n[cover]\nh0 = \"x^3\"\n").unwrap_err();
        assert_eq!(err.key(), Some("h1"));
        let err = load_job("[field]\nk = 1\nextra = 2\n[cover]\nh0 = \"x\"\nh1 = \"x^3\"\n").unwrap_err();
        assert_eq!(err.key(), Some("extra"));
        let err = load_job("mode = \"hkg\"\n[abstract]\ng_y = 0\n").unwrap_err();
        assert_eq!(err.key(), Some("abstract"));
    }
}
