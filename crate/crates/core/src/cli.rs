//! Batch front end: problem files, the `solve`/`reduce`/`oracle`/`check`
//! commands, and set operations on automaton files.
//!
//! A problem file is a sequence of `[section]` headers followed by
//! `key = value` lines; `#` starts a comment. Values in braces may span
//! several lines.
//!
//! ```text
//! [ring]
//! p = 2
//! vars = X1, X2
//!
//! [module]
//! rank = 1
//! relations = { X1 + X2 + 1 }
//!
//! [task]
//! kind = knapsack
//! factors = { (0 | 1, 0) ; (1 + X2 | 0, 1) ; (0 | 1, 0) ; (0 | 0, 1) }
//! target = (1 | 0, 0)
//! ```
//!
//! Group elements are written `(y_1, ..., y_d | a_1, ..., a_n)`. S-unit
//! tasks list `constants = { c_0 ; c_1 ; ... }` and optionally
//! `unknowns = k` with `exponents = { M_1 ; M_2 ; ... }`, where `M_i` has one
//! row per ring variable (rows separated by `/`) and one column per unknown.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::digitset::{DigitAutomaton, Status};
use crate::group::{GroupContext, GroupElement};
use crate::laurent::{LaurentPoly, Prime};
use crate::modcalc::{FreeModuleElement, ModulePresentation, Ring};
use crate::oracle::{bfs_submonoid, brute_knapsack, brute_sunit, window_compare, Comparison, SearchBudget, SearchOutcome};
use crate::reduction::{
    decide_submonoid, group_product_to_knapsack, knapsack_to_sunit, solve_knapsack, submonoid_to_group_products, GroupProductOutcome, KnapsackInstance,
    PieceBody, ReductionError, SubmonoidInstance, Verdict,
};
use crate::sunit::{self, SUnitError, SUnitInstance, SolveOptions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("line {line}, column {col}: {msg} (expected {expected})")]
    Syntax { line: usize, col: usize, msg: String, expected: String },
    #[error("line {line}: {msg}")]
    Semantic { line: usize, msg: String },
    #[error("[{stage}] {msg}")]
    Stage { stage: &'static str, msg: String },
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> CliError {
    move |e| CliError::Stage { stage, msg: e.to_string() }
}

// ---------------------------------------------------------------------
// Problem files

/// Limits used by the commands; every field can be set in `[budget]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// validation box of `solve` and comparison box of `oracle`/`check`
    pub window: i64,
    pub max_states: usize,
    pub kernel_depth: usize,
    /// cap on bounded words in the first reduction step
    pub max_len: Option<usize>,
    /// word length of the breadth-first oracle
    pub oracle_len: usize,
    pub oracle_support: i64,
    pub oracle_window: i64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            window: 8,
            max_states: 4000,
            kernel_depth: 64,
            max_len: None,
            oracle_len: 12,
            oracle_support: 8,
            oracle_window: 8,
        }
    }
}

impl Budget {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            window: self.window,
            max_states: self.max_states,
            kernel_depth: self.kernel_depth,
        }
    }

    pub fn search(&self) -> SearchBudget {
        SearchBudget {
            max_len: self.oracle_len,
            support: self.oracle_support,
            window: self.oracle_window,
        }
    }
}

/// A group element as written in the file: lamp coordinates and translation.
pub type ElementSpec = (FreeModuleElement, Vec<i64>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Task {
    Submonoid { generators: Vec<ElementSpec>, target: ElementSpec },
    Knapsack { factors: Vec<ElementSpec>, target: ElementSpec },
    SUnit {
        constants: Vec<FreeModuleElement>,
        /// `None`: every block has its own exponent vector
        exponents: Option<(usize, Vec<Vec<Vec<i64>>>)>,
    },
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Submonoid { .. } => "submonoid_membership",
            Task::Knapsack { .. } => "knapsack",
            Task::SUnit { .. } => "sunit",
        }
    }
}

/// Optional decomposition hints for S-unit tasks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    /// relation lists of the components
    pub components: Vec<Vec<FreeModuleElement>>,
    /// polynomials whose factors are split off first
    pub known: Vec<LaurentPoly>,
}

impl Decomposition {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty() && self.known.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub module: ModulePresentation,
    pub task: Task,
    pub decomposition: Decomposition,
    pub budget: Budget,
}

impl ProblemFile {
    pub fn ring(&self) -> &Ring {
        &self.module.ring
    }

    fn context(&self) -> Result<Arc<GroupContext>, CliError> {
        GroupContext::new(self.module.clone()).map_err(stage("group"))
    }

    fn elements(ctx: &GroupContext, specs: &[ElementSpec]) -> Result<Vec<GroupElement>, CliError> {
        specs
            .iter()
            .map(|(y, a)| ctx.element(y.clone(), a.clone()).map_err(stage("group")))
            .collect()
    }

    pub fn submonoid(&self) -> Option<Result<SubmonoidInstance, CliError>> {
        let Task::Submonoid { generators, target } = &self.task else { return None };
        Some((|| {
            let ctx = self.context()?;
            let generators = Self::elements(&ctx, generators)?;
            let target = Self::elements(&ctx, std::slice::from_ref(target))?.remove(0);
            Ok(SubmonoidInstance { ctx, generators, target })
        })())
    }

    pub fn knapsack(&self) -> Option<Result<KnapsackInstance, CliError>> {
        let Task::Knapsack { factors, target } = &self.task else { return None };
        Some((|| {
            let ctx = self.context()?;
            let factors = Self::elements(&ctx, factors)?;
            let target = Self::elements(&ctx, std::slice::from_ref(target))?.remove(0);
            Ok(KnapsackInstance { ctx, factors, target })
        })())
    }

    pub fn sunit(&self) -> Option<Result<SUnitInstance, CliError>> {
        let Task::SUnit { constants, exponents } = &self.task else { return None };
        let r = match exponents {
            None => SUnitInstance::new(self.module.clone(), constants.clone()),
            Some((nx, map)) => SUnitInstance::with_map(self.module.clone(), constants.clone(), map.clone(), *nx),
        };
        Some(r.map_err(stage("sunit")))
    }

    /// Canonical text form; [`parse_problem`] reads it back unchanged.
    pub fn serialize(&self) -> String {
        let ring = self.ring();
        let mut s = String::new();
        writeln!(s, "[ring]").unwrap();
        writeln!(s, "p = {}", ring.p).unwrap();
        writeln!(s, "vars = {}", ring.names.join(", ")).unwrap();
        let poly: Vec<&str> = ring.names.iter().zip(&ring.laurent).filter(|(_, l)| !**l).map(|(n, _)| n.as_str()).collect();
        if !poly.is_empty() {
            writeln!(s, "polynomial = {}", poly.join(", ")).unwrap();
        }
        writeln!(s, "\n[module]").unwrap();
        writeln!(s, "rank = {}", self.module.rank).unwrap();
        writeln!(s, "relations = {}", list(self.module.relations.iter().map(|r| r.show(ring)))).unwrap();
        writeln!(s, "\n[task]").unwrap();
        writeln!(s, "kind = {}", self.task.kind()).unwrap();
        let el = |(y, a): &ElementSpec| format!("({} | {})", y.show(ring), join(a, ", "));
        match &self.task {
            Task::Submonoid { generators, target } => {
                writeln!(s, "generators = {}", list(generators.iter().map(el))).unwrap();
                writeln!(s, "target = {}", el(target)).unwrap();
            }
            Task::Knapsack { factors, target } => {
                writeln!(s, "factors = {}", list(factors.iter().map(el))).unwrap();
                writeln!(s, "target = {}", el(target)).unwrap();
            }
            Task::SUnit { constants, exponents } => {
                writeln!(s, "constants = {}", list(constants.iter().map(|c| c.show(ring)))).unwrap();
                if let Some((nx, map)) = exponents {
                    writeln!(s, "unknowns = {nx}").unwrap();
                    let mat = |m: &Vec<Vec<i64>>| m.iter().map(|r| join(r, ", ")).collect::<Vec<_>>().join(" / ");
                    writeln!(s, "exponents = {}", list(map.iter().map(mat))).unwrap();
                }
            }
        }
        if !self.decomposition.is_empty() {
            writeln!(s, "\n[decomposition]").unwrap();
            for c in &self.decomposition.components {
                writeln!(s, "component = {}", list(c.iter().map(|r| r.show(ring)))).unwrap();
            }
            if !self.decomposition.known.is_empty() {
                writeln!(s, "known = {}", list(self.decomposition.known.iter().map(|f| ring.show(f)))).unwrap();
            }
        }
        let b = &self.budget;
        writeln!(s, "\n[budget]").unwrap();
        writeln!(s, "window = {}", b.window).unwrap();
        writeln!(s, "max_states = {}", b.max_states).unwrap();
        writeln!(s, "kernel_depth = {}", b.kernel_depth).unwrap();
        if let Some(l) = b.max_len {
            writeln!(s, "max_len = {l}").unwrap();
        }
        writeln!(s, "oracle_len = {}", b.oracle_len).unwrap();
        writeln!(s, "oracle_support = {}", b.oracle_support).unwrap();
        writeln!(s, "oracle_window = {}", b.oracle_window).unwrap();
        s
    }
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn list<I: Iterator<Item = String>>(items: I) -> String {
    let v: Vec<String> = items.collect();
    if v.is_empty() {
        "{ }".into()
    } else {
        format!("{{ {} }}", v.join(" ; "))
    }
}

/// Text with the source position of every byte.
#[derive(Clone, Debug)]
struct Span {
    text: String,
    at: Vec<(usize, usize)>,
    end: (usize, usize),
}

#[derive(Clone, Copy)]
struct Piece<'a> {
    span: &'a Span,
    lo: usize,
    hi: usize,
}

impl<'a> Piece<'a> {
    fn whole(span: &'a Span) -> Self {
        Piece { span, lo: 0, hi: span.text.len() }.trim()
    }

    fn text(&self) -> &'a str {
        &self.span.text[self.lo..self.hi]
    }

    fn loc(&self, off: usize) -> (usize, usize) {
        self.span.at.get(off).copied().unwrap_or(self.span.end)
    }

    fn line(&self) -> usize {
        self.loc(self.lo).0
    }

    fn trim(self) -> Self {
        let t = self.text();
        let lo = self.lo + (t.len() - t.trim_start().len());
        let hi = self.hi - (t.len() - t.trim_end().len());
        Piece { span: self.span, lo, hi: hi.max(lo) }
    }

    fn syntax(&self, at: usize, msg: &str, expected: &str) -> CliError {
        let (line, col) = self.loc(at);
        CliError::Syntax {
            line,
            col,
            msg: msg.into(),
            expected: expected.into(),
        }
    }

    fn semantic(&self, msg: String) -> CliError {
        CliError::Semantic { line: self.line(), msg }
    }

    /// Split at `sep` outside parentheses and braces.
    fn split(&self, sep: u8) -> Vec<Piece<'a>> {
        let b = self.span.text.as_bytes();
        let mut out = Vec::new();
        let mut depth = 0i32;
        let mut start = self.lo;
        for i in self.lo..self.hi {
            match b[i] {
                b'(' | b'{' => depth += 1,
                b')' | b'}' => depth -= 1,
                c if c == sep && depth == 0 => {
                    out.push(Piece { span: self.span, lo: start, hi: i }.trim());
                    start = i + 1;
                }
                _ => {}
            }
        }
        out.push(Piece { span: self.span, lo: start, hi: self.hi }.trim());
        out
    }

    fn delimited(&self, open: u8, close: u8, what: &str) -> Result<Piece<'a>, CliError> {
        let t = self.text().as_bytes();
        if t.first() != Some(&open) {
            return Err(self.syntax(self.lo, &format!("{what} must start with '{}'", open as char), &format!("'{}'", open as char)));
        }
        if t.len() < 2 || t[t.len() - 1] != close {
            return Err(self.syntax(self.hi, &format!("unterminated {what}"), &format!("'{}'", close as char)));
        }
        Ok(Piece {
            span: self.span,
            lo: self.lo + 1,
            hi: self.hi - 1,
        }
        .trim())
    }

    fn list(&self) -> Result<Vec<Piece<'a>>, CliError> {
        let inner = self.delimited(b'{', b'}', "list")?;
        if inner.text().is_empty() {
            return Ok(Vec::new());
        }
        Ok(inner.split(b';'))
    }

    fn int(&self) -> Result<i64, CliError> {
        self.text().parse().map_err(|_| self.syntax(self.lo, &format!("`{}` is not an integer", self.text()), "integer"))
    }

    fn count(&self) -> Result<usize, CliError> {
        let v = self.int()?;
        usize::try_from(v).map_err(|_| self.syntax(self.lo, "negative count", "nonnegative integer"))
    }

    fn ints(&self, sep: u8) -> Result<Vec<i64>, CliError> {
        if self.text().is_empty() {
            return Ok(Vec::new());
        }
        self.split(sep).iter().map(|p| p.int()).collect()
    }

    fn poly(&self, ring: &Ring) -> Result<LaurentPoly, CliError> {
        if self.text().is_empty() {
            return Err(self.syntax(self.lo, "empty polynomial", "polynomial"));
        }
        let f = ring.parse(self.text()).map_err(|e| self.syntax(self.lo + e.col.saturating_sub(1), &e.msg, "polynomial syntax"))?;
        if !ring.admits(&f) {
            return Err(self.semantic(format!("`{}` has a negative power of a polynomial variable", self.text())));
        }
        Ok(f)
    }

    fn vector(&self, ring: &Ring, rank: usize) -> Result<FreeModuleElement, CliError> {
        let parts = self.split(b',');
        if parts.len() != rank {
            return Err(self.semantic(format!("`{}` has {} coordinates, module rank is {rank}", self.text(), parts.len())));
        }
        Ok(FreeModuleElement::new(parts.iter().map(|p| p.poly(ring)).collect::<Result<_, _>>()?))
    }

    fn element(&self, ring: &Ring, rank: usize) -> Result<ElementSpec, CliError> {
        let inner = self.delimited(b'(', b')', "group element")?;
        let parts = inner.split(b'|');
        if parts.len() != 2 {
            return Err(inner.syntax(inner.hi, "group element needs one '|'", "'(lamps | translation)'"));
        }
        let y = parts[0].vector(ring, rank)?;
        let a = parts[1].ints(b',')?;
        if a.len() != ring.nvars() {
            return Err(parts[1].semantic(format!("translation has length {}, ring has {} variables", a.len(), ring.nvars())));
        }
        Ok((y, a))
    }
}

struct Entry {
    key: String,
    line: usize,
    value: Span,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 5] = ["ring", "module", "task", "decomposition", "budget"];

fn sections(src: &str) -> Result<Vec<Section>, CliError> {
    let mut out: Vec<Section> = Vec::new();
    let lines: Vec<&str> = src.lines().collect();
    let mut i = 0;
    let syntax = |line: usize, col: usize, msg: &str, expected: &str| CliError::Syntax {
        line,
        col,
        msg: msg.into(),
        expected: expected.into(),
    };
    while i < lines.len() {
        let ln = i + 1;
        let raw = lines[i].split('#').next().unwrap_or("");
        i += 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        let col0 = raw.len() - raw.trim_start().len() + 1;
        if let Some(rest) = t.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(syntax(ln, col0 + t.len(), "unterminated section header", "']'"));
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(syntax(ln, col0 + 1, &format!("unknown section `{name}`"), &SECTIONS.join(", ")));
            }
            if out.iter().any(|s| s.name == name) {
                return Err(CliError::Semantic {
                    line: ln,
                    msg: format!("section `{name}` appears twice"),
                });
            }
            out.push(Section {
                name: name.into(),
                line: ln,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(sec) = out.last_mut() else {
            return Err(syntax(ln, col0, "entry outside any section", "'[section]'"));
        };
        let Some(eq) = raw.find('=') else {
            return Err(syntax(ln, col0 + t.len(), "missing '='", "'key = value'"));
        };
        let key = raw[..eq].trim().to_string();
        if key.is_empty() || !key.bytes().all(|c| c.is_ascii_lowercase() || c == b'_') {
            return Err(syntax(ln, col0, &format!("bad key `{key}`"), "lowercase key"));
        }
        // collect the value, following braces across lines
        let mut span = Span {
            text: String::new(),
            at: Vec::new(),
            end: (ln, raw.len() + 1),
        };
        let mut depth = 0i32;
        let push = |span: &mut Span, depth: &mut i32, line: usize, text: &str, col0: usize| {
            for (k, c) in text.bytes().enumerate() {
                match c {
                    b'{' => *depth += 1,
                    b'}' => *depth -= 1,
                    _ => {}
                }
                span.at.push((line, col0 + k));
            }
            span.text.push_str(text);
            span.end = (line, col0 + text.len());
        };
        push(&mut span, &mut depth, ln, &raw[eq + 1..], eq + 2);
        while depth > 0 {
            if i >= lines.len() {
                return Err(syntax(ln, eq + 2, "unterminated '{'", "'}'"));
            }
            let raw2 = lines[i].split('#').next().unwrap_or("");
            span.text.push(' ');
            span.at.push(span.end);
            i += 1;
            push(&mut span, &mut depth, i, raw2, 1);
        }
        sec.entries.push(Entry {
            key,
            line: ln,
            value: span,
        });
    }
    Ok(out)
}

fn find<'s>(secs: &'s [Section], name: &str) -> Option<&'s Section> {
    secs.iter().find(|s| s.name == name)
}

/// Look up `key` in a section, rejecting unknown and repeated keys.
struct Keys<'s> {
    sec: Option<&'s Section>,
    map: HashMap<&'s str, Vec<&'s Entry>>,
}

impl<'s> Keys<'s> {
    fn new(sec: Option<&'s Section>, allowed: &[&str], repeatable: &[&str]) -> Result<Self, CliError> {
        let mut map: HashMap<&str, Vec<&Entry>> = HashMap::new();
        if let Some(s) = sec {
            for e in &s.entries {
                if !allowed.contains(&e.key.as_str()) {
                    return Err(CliError::Syntax {
                        line: e.line,
                        col: 1,
                        msg: format!("unknown key `{}` in [{}]", e.key, s.name),
                        expected: allowed.join(", "),
                    });
                }
                let v = map.entry(e.key.as_str()).or_default();
                if !v.is_empty() && !repeatable.contains(&e.key.as_str()) {
                    return Err(CliError::Semantic {
                        line: Piece::whole(&e.value).line(),
                        msg: format!("key `{}` given twice", e.key),
                    });
                }
                v.push(e);
            }
        }
        Ok(Keys { sec, map })
    }

    fn get(&self, key: &str) -> Option<Piece<'s>> {
        self.map.get(key).and_then(|v| v.first()).map(|e| Piece::whole(&e.value))
    }

    fn all(&self, key: &str) -> Vec<Piece<'s>> {
        self.map.get(key).map(|v| v.iter().map(|e| Piece::whole(&e.value)).collect()).unwrap_or_default()
    }

    fn need(&self, key: &str, name: &str) -> Result<Piece<'s>, CliError> {
        self.get(key).ok_or_else(|| CliError::Semantic {
            line: self.sec.map(|s| s.line).unwrap_or(1),
            msg: format!("[{name}] needs `{key}`"),
        })
    }
}

fn identifiers(p: &Piece) -> Result<Vec<String>, CliError> {
    if p.text().is_empty() {
        return Ok(Vec::new());
    }
    p.split(b',')
        .iter()
        .map(|q| {
            let t = q.text();
            let ok = t.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_') && t.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if ok {
                Ok(t.to_string())
            } else {
                Err(q.syntax(q.lo, &format!("bad variable name `{t}`"), "identifier"))
            }
        })
        .collect()
}

fn parse_ring(secs: &[Section]) -> Result<Ring, CliError> {
    let sec = find(secs, "ring").ok_or(CliError::Semantic {
        line: 1,
        msg: "missing [ring] section".into(),
    })?;
    let k = Keys::new(Some(sec), &["p", "vars", "polynomial"], &[])?;
    let pp = k.need("p", "ring")?;
    let p = pp.int()?;
    let p = Prime::new(p.max(0) as u64).map_err(|e| pp.semantic(e.to_string()))?.get();
    let vp = k.need("vars", "ring")?;
    let names = identifiers(&vp)?;
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(vp.semantic(format!("variable `{n}` listed twice")));
        }
    }
    let mut laurent = vec![true; names.len()];
    if let Some(pp) = k.get("polynomial") {
        for n in identifiers(&pp)? {
            let Some(i) = names.iter().position(|m| *m == n) else {
                return Err(pp.semantic(format!("`{n}` is not a ring variable")));
            };
            laurent[i] = false;
        }
    }
    Ok(Ring {
        p,
        names,
        laurent,
    })
}

fn parse_decomposition(secs: &[Section], ring: &Ring, rank: usize) -> Result<Decomposition, CliError> {
    let k = Keys::new(find(secs, "decomposition"), &["component", "known"], &["component"])?;
    let mut d = Decomposition::default();
    for c in k.all("component") {
        d.components.push(c.list()?.iter().map(|r| r.vector(ring, rank)).collect::<Result<_, _>>()?);
    }
    if let Some(kp) = k.get("known") {
        d.known = kp.list()?.iter().map(|f| f.poly(ring)).collect::<Result<_, _>>()?;
    }
    Ok(d)
}

fn parse_budget(secs: &[Section]) -> Result<Budget, CliError> {
    let k = Keys::new(
        find(secs, "budget"),
        &["window", "max_states", "kernel_depth", "max_len", "oracle_len", "oracle_support", "oracle_window"],
        &[],
    )?;
    let mut b = Budget::default();
    if let Some(p) = k.get("window") {
        b.window = p.count()? as i64;
    }
    if let Some(p) = k.get("max_states") {
        b.max_states = p.count()?;
    }
    if let Some(p) = k.get("kernel_depth") {
        b.kernel_depth = p.count()?;
    }
    if let Some(p) = k.get("max_len") {
        b.max_len = Some(p.count()?);
    }
    if let Some(p) = k.get("oracle_len") {
        b.oracle_len = p.count()?;
    }
    if let Some(p) = k.get("oracle_support") {
        b.oracle_support = p.count()? as i64;
    }
    if let Some(p) = k.get("oracle_window") {
        b.oracle_window = p.count()? as i64;
    }
    Ok(b)
}

fn parse_task(secs: &[Section], ring: &Ring, rank: usize) -> Result<Task, CliError> {
    let sec = find(secs, "task").ok_or(CliError::Semantic {
        line: 1,
        msg: "missing [task] section".into(),
    })?;
    if sec.entries.is_empty() {
        return Err(CliError::Semantic {
            line: sec.line,
            msg: "[task] is empty".into(),
        });
    }
    let k = Keys::new(Some(sec), &["kind", "generators", "factors", "target", "constants", "unknowns", "exponents"], &[])?;
    let kind = k.need("kind", "task")?;
    let els = |key: &str| -> Result<Vec<ElementSpec>, CliError> { k.need(key, "task")?.list()?.iter().map(|e| e.element(ring, rank)).collect() };
    let allow_only = |keys: &[&str]| -> Result<(), CliError> {
        for (key, es) in &k.map {
            if *key != "kind" && !keys.contains(key) {
                return Err(Piece::whole(&es[0].value).semantic(format!("`{key}` does not apply to kind `{}`", kind.text())));
            }
        }
        Ok(())
    };
    match kind.text() {
        "submonoid_membership" => {
            allow_only(&["generators", "target"])?;
            let generators = els("generators")?;
            let target = k.need("target", "task")?.element(ring, rank)?;
            Ok(Task::Submonoid { generators, target })
        }
        "knapsack" => {
            allow_only(&["factors", "target"])?;
            let factors = els("factors")?;
            let target = k.need("target", "task")?.element(ring, rank)?;
            Ok(Task::Knapsack { factors, target })
        }
        "sunit" => {
            allow_only(&["constants", "unknowns", "exponents"])?;
            let cp = k.need("constants", "task")?;
            let constants: Vec<FreeModuleElement> = cp.list()?.iter().map(|c| c.vector(ring, rank)).collect::<Result<_, _>>()?;
            if constants.is_empty() {
                return Err(cp.semantic("an S-unit equation needs at least the constant c_0".into()));
            }
            let exponents = match (k.get("unknowns"), k.get("exponents")) {
                (None, None) => None,
                (Some(u), None) => return Err(u.semantic("`unknowns` needs `exponents`".into())),
                (None, Some(e)) => return Err(e.semantic("`exponents` needs `unknowns`".into())),
                (Some(u), Some(e)) => {
                    let nx = u.count()?;
                    let blocks = e.list()?;
                    if blocks.len() + 1 != constants.len() {
                        return Err(e.semantic(format!("{} exponent blocks for {} constants", blocks.len(), constants.len())));
                    }
                    let mut map = Vec::new();
                    for b in blocks {
                        let rows: Vec<Vec<i64>> = b.split(b'/').iter().map(|r| r.ints(b',')).collect::<Result<_, _>>()?;
                        if rows.len() != ring.nvars() || rows.iter().any(|r| r.len() != nx) {
                            return Err(b.semantic(format!("exponent block must be {} rows of {nx} entries", ring.nvars())));
                        }
                        map.push(rows);
                    }
                    Some((nx, map))
                }
            };
            Ok(Task::SUnit { constants, exponents })
        }
        other => Err(kind.syntax(kind.lo, &format!("unknown task kind `{other}`"), "submonoid_membership, knapsack, sunit")),
    }
}

/// Parse problem-file text.
pub fn parse_problem(src: &str) -> Result<ProblemFile, CliError> {
    let secs = sections(src)?;
    let ring = parse_ring(&secs)?;
    let mk = Keys::new(find(&secs, "module"), &["rank", "relations"], &[])?;
    let rank = match mk.get("rank") {
        Some(p) => p.count()?,
        None => 1,
    };
    if rank == 0 {
        return Err(mk.get("rank").unwrap().semantic("module rank must be positive".into()));
    }
    let relations = match mk.get("relations") {
        Some(p) => p.list()?.iter().map(|r| r.vector(&ring, rank)).collect::<Result<_, _>>()?,
        None => Vec::new(),
    };
    let module = ModulePresentation::new(ring.clone(), rank, relations).map_err(stage("module"))?;
    let task = parse_task(&secs, &ring, rank)?;
    let decomposition = parse_decomposition(&secs, &ring, rank)?;
    let budget = parse_budget(&secs)?;
    Ok(ProblemFile {
        module,
        task,
        decomposition,
        budget,
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

/// Read and parse a problem file.
pub fn parse(path: &Path) -> Result<ProblemFile, CliError> {
    parse_problem(&read(path)?)
}

/// Read a hint file: a `[decomposition]` section for the given ring.
pub fn parse_hint(src: &str, ring: &Ring, rank: usize) -> Result<Decomposition, CliError> {
    let secs = sections(src)?;
    if let Some(s) = secs.iter().find(|s| s.name != "decomposition") {
        return Err(CliError::Semantic {
            line: s.line,
            msg: "a hint file holds only a [decomposition] section".into(),
        });
    }
    parse_decomposition(&secs, ring, rank)
}

// ---------------------------------------------------------------------
// Commands

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Reduce,
    Oracle,
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Dot,
    Json,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub format: Format,
    /// directory receiving `automaton.aut`, `automaton.dot`, `report.json`
    /// or the intermediate instances of `reduce`
    pub out: Option<PathBuf>,
    pub hint: Option<PathBuf>,
    pub max_states: Option<usize>,
    pub kernel_depth: Option<usize>,
    pub window: Option<i64>,
    /// cap on the words of the first reduction step
    pub max_len: Option<usize>,
    /// breadth-first oracle limits
    pub search: Option<SearchBudget>,
}

/// What a command prints and its exit code: 0 definite answer or pass,
/// 2 unknown, 1 failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub stdout: String,
    pub code: i32,
    pub report: Value,
}

fn status_json(s: Status) -> Value {
    serde_json::to_value(s).expect("serializable")
}

const MAX_REPORTED_POINTS: usize = 4096;

fn window_json(a: &DigitAutomaton, bound: i64) -> Value {
    let pts = a.enumerate_window(bound);
    let truncated = pts.len() > MAX_REPORTED_POINTS;
    json!({
        "bound": bound,
        "count": pts.len(),
        "points": pts.into_iter().take(MAX_REPORTED_POINTS).collect::<Vec<_>>(),
        "truncated": truncated,
    })
}

fn write_out(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: dir.join(name).display().to_string(),
        msg: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(name), body).map_err(io)
}

fn render_automaton(a: &DigitAutomaton, report: &Value, format: Format) -> String {
    match format {
        Format::Text => a.to_text(),
        Format::Dot => a.to_dot(),
        Format::Json => serde_json::to_string_pretty(report).expect("json") + "\n",
    }
}

fn emit_automaton(a: &DigitAutomaton, report: Value, opts: &RunOptions) -> Result<RunOutput, CliError> {
    if let Some(dir) = &opts.out {
        write_out(dir, "automaton.aut", &a.to_text())?;
        write_out(dir, "automaton.dot", &a.to_dot())?;
        write_out(dir, "report.json", &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    }
    Ok(RunOutput {
        stdout: render_automaton(a, &report, opts.format),
        code: 0,
        report,
    })
}

fn emit_report(text: String, code: i32, report: Value, opts: &RunOptions) -> Result<RunOutput, CliError> {
    if let Some(dir) = &opts.out {
        write_out(dir, "report.json", &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    }
    let stdout = match opts.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("json") + "\n",
        _ => text,
    };
    Ok(RunOutput { stdout, code, report })
}

fn reduction_err(e: ReductionError) -> CliError {
    match e {
        ReductionError::SUnit(s) => stage::<SUnitError>("sunit")(s),
        ReductionError::Group(g) => stage("group")(g),
        other => stage("reduction")(other),
    }
}

/// S-unit failures that mean "not decided" rather than "broken input".
fn undecided(e: &SUnitError) -> bool {
    matches!(e, SUnitError::DecompositionUnavailable(_) | SUnitError::KernelBudgetExceeded | SUnitError::NormalizationFailed)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Unknown => 2,
        _ => 0,
    }
}

fn base_report(cmd: &str, pf: &ProblemFile) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!("report/1"));
    m.insert("command".into(), json!(cmd));
    m.insert("kind".into(), json!(pf.task.kind()));
    m.insert("budget".into(), serde_json::to_value(pf.budget).expect("json"));
    m
}

fn sunit_solve(pf: &ProblemFile, inst: &SUnitInstance) -> Result<sunit::SolveResult, SUnitError> {
    let hint = if pf.decomposition.components.is_empty() {
        None
    } else {
        Some(pf.decomposition.components.as_slice())
    };
    sunit::solve(inst, hint, &pf.decomposition.known, &pf.budget.solve_options())
}

/// Outcome of `solve` on a knapsack or S-unit task.
struct SetSolution {
    automaton: DigitAutomaton,
    report: serde_json::Map<String, Value>,
}

fn solve_set(pf: &ProblemFile) -> Result<Result<SetSolution, String>, CliError> {
    let mut m = serde_json::Map::new();
    let b = pf.budget.window;
    if let Some(k) = pf.knapsack() {
        let k = k?;
        let sol = match solve_knapsack(&k, &pf.budget.solve_options()) {
            Ok(s) => s,
            Err(ReductionError::SUnit(e)) if undecided(&e) => return Ok(Err(e.to_string())),
            Err(e) => return Err(reduction_err(e)),
        };
        m.insert("status".into(), status_json(sol.status));
        m.insert("is_empty".into(), json!(sol.automaton.is_empty()));
        m.insert("pieces".into(), serde_json::to_value(&sol.pieces).expect("json"));
        m.insert("window".into(), window_json(&sol.automaton, b));
        return Ok(Ok(SetSolution { automaton: sol.automaton, report: m }));
    }
    let inst = pf.sunit().expect("set task")?;
    let res = match sunit_solve(pf, &inst) {
        Ok(r) => r,
        Err(e) if undecided(&e) => return Ok(Err(e.to_string())),
        Err(e) => return Err(stage("sunit")(e)),
    };
    let comps: Vec<Value> = res
        .components
        .iter()
        .map(|c| {
            let mut v = serde_json::to_value(c).expect("json");
            if let (Some(a), Value::Object(o)) = (&c.automaton, &mut v) {
                o.insert("window".into(), window_json(a, b));
            }
            v
        })
        .collect();
    m.insert("status".into(), status_json(res.status));
    m.insert("is_empty".into(), json!(res.automaton.is_empty()));
    m.insert("components".into(), Value::Array(comps));
    m.insert("window".into(), window_json(&res.automaton, b));
    Ok(Ok(SetSolution { automaton: res.automaton, report: m }))
}

fn cmd_solve(pf: &ProblemFile, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let mut report = base_report("solve", pf);
    if let Some(inst) = pf.submonoid() {
        let inst = inst?;
        let d = decide_submonoid(&inst, &pf.budget.solve_options(), pf.budget.max_len).map_err(reduction_err)?;
        report.insert("verdict".into(), serde_json::to_value(d.verdict).expect("json"));
        report.insert("decision".into(), serde_json::to_value(&d).expect("json"));
        let mut text = format!("{:?}\n", d.verdict);
        for w in &d.words {
            writeln!(text, "  word {:?}: {}", w.word, w.outcome).unwrap();
        }
        return emit_report(text, verdict_code(d.verdict), Value::Object(report), opts);
    }
    match solve_set(pf)? {
        Ok(sol) => {
            report.extend(sol.report);
            report.insert("automaton".into(), sol.automaton.to_json());
            emit_automaton(&sol.automaton, Value::Object(report), opts)
        }
        Err(why) => {
            report.insert("status".into(), json!("Unknown"));
            report.insert("reason".into(), json!(why));
            emit_report(format!("Unknown: {why}\n"), 2, Value::Object(report), opts)
        }
    }
}

fn show_spec(ctx: &GroupContext, g: &GroupElement) -> String {
    format!("({} | {})", g.y.show(ctx.ring()), join(&g.a, ", "))
}

fn knapsack_problem(k: &KnapsackInstance, budget: Budget) -> ProblemFile {
    let spec = |g: &GroupElement| (g.y.clone(), g.a.clone());
    ProblemFile {
        module: k.ctx.module.clone(),
        task: Task::Knapsack {
            factors: k.factors.iter().map(spec).collect(),
            target: spec(&k.target),
        },
        decomposition: Decomposition::default(),
        budget,
    }
}

fn sunit_problem(s: &SUnitInstance, known: &[LaurentPoly], budget: Budget) -> ProblemFile {
    ProblemFile {
        module: s.module.clone(),
        task: Task::SUnit {
            constants: s.constants.clone(),
            exponents: Some((s.nx, s.map.clone())),
        },
        decomposition: Decomposition {
            components: Vec::new(),
            known: known.to_vec(),
        },
        budget,
    }
}

/// Text and JSON description of the knapsack-to-S-unit step; intermediate
/// problem files are collected in `files`.
fn reduce_knapsack(k: &KnapsackInstance, budget: Budget, tag: &str, text: &mut String, files: &mut Vec<(String, String)>) -> Result<Value, CliError> {
    let pieces = knapsack_to_sunit(k).map_err(reduction_err)?;
    let mut out = Vec::new();
    for (j, piece) in pieces.iter().enumerate() {
        let congs: Vec<String> = piece.congruences.iter().map(|c| format!("{:?}.n = {} mod {}", c.coeffs, c.residue, c.modulus)).collect();
        writeln!(text, "  piece {j}: free factors {:?}, congruences [{}]", piece.free, congs.join("; ")).unwrap();
        let body = match &piece.body {
            PieceBody::Trivial(b) => {
                writeln!(text, "    no translating factor left; target reached: {b}").unwrap();
                json!({ "trivial": b })
            }
            PieceBody::SUnit(r) => {
                let s = &r.sunit;
                let ring = s.ring();
                writeln!(text, "    S-unit equation in {} unknowns over {} relation(s)", s.nx, s.module.relations.len()).unwrap();
                for (i, c) in s.constants.iter().enumerate() {
                    writeln!(text, "      c{i} = {}", c.show(ring)).unwrap();
                }
                writeln!(text, "      constraint A n = b: A = {:?}, b = {:?}", r.constraint, r.rhs).unwrap();
                let name = format!("{tag}sunit-{j}.problem");
                files.push((name.clone(), sunit_problem(s, &r.known, budget).serialize()));
                json!({
                    "file": name,
                    "unknowns": s.nx,
                    "relations": s.module.relations.iter().map(|x| x.show(ring)).collect::<Vec<_>>(),
                    "constants": s.constants.iter().map(|x| x.show(ring)).collect::<Vec<_>>(),
                    "exponents": s.map,
                    "constraint": r.constraint,
                    "rhs": r.rhs,
                })
            }
        };
        out.push(json!({ "free": piece.free, "congruences": piece.congruences, "body": body }));
    }
    Ok(Value::Array(out))
}

fn cmd_reduce(pf: &ProblemFile, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let mut report = base_report("reduce", pf);
    let mut text = String::new();
    let mut files: Vec<(String, String)> = Vec::new();
    if let Some(inst) = pf.submonoid() {
        let inst = inst?;
        let ctx = &inst.ctx;
        let s1 = submonoid_to_group_products(&inst, pf.budget.max_len);
        writeln!(text, "cone split: kernel generators {:?}, strict generators {:?}", s1.split.kernel, s1.split.strict).unwrap();
        writeln!(text, "separating vector {:?}, bound {}", s1.split.v, s1.bound).unwrap();
        if s1.separated {
            writeln!(text, "target lies strictly on the negative side: not a member").unwrap();
        }
        if s1.truncated {
            writeln!(text, "word enumeration truncated at length {:?}", pf.budget.max_len).unwrap();
        }
        let mut insts = Vec::new();
        for (i, gp) in s1.instances.iter().enumerate() {
            let word: Vec<String> = gp.word.iter().map(|g| format!("g{}", g + 1)).collect();
            writeln!(text, "instance {i}: word {}", if word.is_empty() { "(empty)".into() } else { word.join(" ") }).unwrap();
            writeln!(text, "  target {}", show_spec(ctx, &gp.target)).unwrap();
            let conj: Vec<String> = gp.conjugators.iter().map(|q| show_spec(ctx, q)).collect();
            let names: Vec<String> = (0..=gp.word.len())
                .map(|l| if l == 0 { "e".to_string() } else { word[..l].join(" ") })
                .collect();
            writeln!(text, "  conjugators {}: {}", names.join(", "), conj.join(", ")).unwrap();
            let sub: Vec<String> = gp.subgroup.iter().map(|q| show_spec(ctx, q)).collect();
            writeln!(text, "  subgroup {}", sub.join(", ")).unwrap();
            let mut entry = json!({
                "word": gp.word,
                "target": show_spec(ctx, &gp.target),
                "conjugators": conj,
                "conjugator_words": names,
                "subgroup": sub,
            });
            match group_product_to_knapsack(gp).map_err(reduction_err)? {
                GroupProductOutcome::Decided(b, why) => {
                    writeln!(text, "  decided without knapsack: {b} ({why})").unwrap();
                    entry["decided"] = json!({ "member": b, "reason": why });
                }
                GroupProductOutcome::Knapsack(k) => {
                    let name = format!("knapsack-{i}.problem");
                    files.push((name.clone(), knapsack_problem(&k, pf.budget).serialize()));
                    writeln!(text, "  knapsack with {} factors over a module of rank {}", k.factors.len(), k.ctx.rank()).unwrap();
                    for f in &k.factors {
                        writeln!(text, "    factor {}", show_spec(&k.ctx, f)).unwrap();
                    }
                    writeln!(text, "    target {}", show_spec(&k.ctx, &k.target)).unwrap();
                    let pieces = reduce_knapsack(&k, pf.budget, &format!("knapsack-{i}-"), &mut text, &mut files)?;
                    entry["knapsack"] = json!({
                        "file": name,
                        "relations": k.ctx.module.relations.iter().map(|r| r.show(k.ctx.ring())).collect::<Vec<_>>(),
                        "factors": k.factors.iter().map(|f| show_spec(&k.ctx, f)).collect::<Vec<_>>(),
                        "target": show_spec(&k.ctx, &k.target),
                        "pieces": pieces,
                    });
                }
            }
            insts.push(entry);
        }
        report.insert(
            "step1".into(),
            json!({
                "kernel": s1.split.kernel,
                "strict": s1.split.strict,
                "separating_vector": s1.split.v,
                "bound": s1.bound,
                "separated": s1.separated,
                "truncated": s1.truncated,
                "instances": insts,
            }),
        );
    } else if let Some(k) = pf.knapsack() {
        let k = k?;
        writeln!(text, "knapsack with {} factors", k.factors.len()).unwrap();
        let pieces = reduce_knapsack(&k, pf.budget, "", &mut text, &mut files)?;
        report.insert("pieces".into(), pieces);
    } else {
        let inst = pf.sunit().expect("sunit task")?;
        let hint = (!pf.decomposition.components.is_empty()).then_some(pf.decomposition.components.as_slice());
        let comps = sunit::decompose(&inst, hint, &pf.decomposition.known).map_err(stage("sunit"))?;
        let ring = inst.ring();
        let mut out = Vec::new();
        for (i, c) in comps.iter().enumerate() {
            let rels: Vec<String> = c.module.relations.iter().map(|r| r.show(ring)).collect();
            writeln!(text, "component {i} [{}]: relations {{ {} }}{}", c.label, rels.join(" ; "), if c.is_trivial() { " (trivial)" } else { "" }).unwrap();
            let sub = SUnitInstance {
                module: c.module.clone(),
                constants: c.constants.clone(),
                map: inst.map.clone(),
                nx: inst.nx,
            };
            let name = format!("component-{i}.problem");
            files.push((name.clone(), sunit_problem(&sub, &[], pf.budget).serialize()));
            out.push(json!({ "label": c.label, "relations": rels, "trivial": c.is_trivial(), "file": name }));
        }
        report.insert("components".into(), Value::Array(out));
    }
    if let Some(dir) = &opts.out {
        for (name, body) in &files {
            write_out(dir, name, body)?;
        }
    }
    report.insert("files".into(), json!(files.iter().map(|f| &f.0).collect::<Vec<_>>()));
    emit_report(text, 0, Value::Object(report), opts)
}

fn oracle_points(pf: &ProblemFile) -> Result<Vec<Vec<i64>>, CliError> {
    let b = pf.budget.window;
    if let Some(k) = pf.knapsack() {
        let k = k?;
        return Ok(brute_knapsack(&k.ctx, &k.factors, &k.target, b));
    }
    let inst = pf.sunit().expect("set task")?;
    brute_sunit(&inst, b).map_err(stage("oracle"))
}

fn cmd_oracle(pf: &ProblemFile, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let mut report = base_report("oracle", pf);
    if let Some(inst) = pf.submonoid() {
        let inst = inst?;
        let r = bfs_submonoid(&inst.ctx, &inst.generators, &inst.target, &pf.budget.search());
        report.insert("search".into(), serde_json::to_value(pf.budget.search()).expect("json"));
        report.insert("outcome".into(), serde_json::to_value(&r).expect("json"));
        let (text, code) = match &r {
            SearchOutcome::Found(w) => {
                let word: Vec<String> = w.iter().map(|i| format!("g{}", i + 1)).collect();
                (format!("Found: {}\n", if word.is_empty() { "(empty word)".into() } else { word.join(" ") }), 0)
            }
            SearchOutcome::NotFoundWithinBudget => ("NotFoundWithinBudget\n".to_string(), 2),
        };
        return emit_report(text, code, Value::Object(report), opts);
    }
    let pts = oracle_points(pf)?;
    let mut text = String::new();
    for p in &pts {
        writeln!(text, "{}", join(p, " ")).unwrap();
    }
    report.insert("bound".into(), json!(pf.budget.window));
    report.insert("points".into(), json!(pts));
    emit_report(text, 0, Value::Object(report), opts)
}

fn cmd_check(pf: &ProblemFile, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let mut report = base_report("check", pf);
    if let Some(inst) = pf.submonoid() {
        let inst = inst?;
        let d = decide_submonoid(&inst, &pf.budget.solve_options(), pf.budget.max_len).map_err(reduction_err)?;
        let r = bfs_submonoid(&inst.ctx, &inst.generators, &inst.target, &pf.budget.search());
        let found = matches!(r, SearchOutcome::Found(_));
        let (result, code) = match (d.verdict, found) {
            (Verdict::Member, true) | (Verdict::NonMember, false) => ("Pass", 0),
            (Verdict::NonMember, true) => ("Fail", 1),
            _ => ("Inconclusive", 2),
        };
        report.insert("verdict".into(), serde_json::to_value(d.verdict).expect("json"));
        report.insert("oracle".into(), serde_json::to_value(&r).expect("json"));
        report.insert("result".into(), json!(result));
        let text = format!("{result}: pipeline {:?}, oracle {}\n", d.verdict, if found { "found a word" } else { "found no word within budget" });
        return emit_report(text, code, Value::Object(report), opts);
    }
    let sol = match solve_set(pf)? {
        Ok(s) => s,
        Err(why) => {
            report.insert("result".into(), json!("Inconclusive"));
            report.insert("reason".into(), json!(why));
            return emit_report(format!("Inconclusive: {why}\n"), 2, Value::Object(report), opts);
        }
    };
    let base = oracle_points(pf)?;
    let b = pf.budget.window;
    let cmp = window_compare(&sol.automaton, &base, b);
    report.insert("bound".into(), json!(b));
    report.insert("status".into(), sol.report["status"].clone());
    report.insert("comparison".into(), serde_json::to_value(&cmp).expect("json"));
    let (text, code) = match &cmp {
        Comparison::Pass => (format!("Pass: automaton agrees with the oracle on |z| <= {b} ({} points)\n", base.len()), 0),
        Comparison::Fail { point, in_automaton } => (
            format!(
                "Fail: {:?} is {} the automaton but {} the oracle set\n",
                point,
                if *in_automaton { "in" } else { "not in" },
                if *in_automaton { "not in" } else { "in" }
            ),
            1,
        ),
    };
    report.insert("result".into(), json!(if code == 0 { "Pass" } else { "Fail" }));
    emit_report(text, code, Value::Object(report), opts)
}

/// Parse `path`, apply flag overrides and the hint file, and run `cmd`.
pub fn run(path: &Path, cmd: Command, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let mut pf = parse(path)?;
    if let Some(h) = &opts.hint {
        let d = parse_hint(&read(h)?, pf.ring(), pf.module.rank)?;
        if !d.components.is_empty() {
            pf.decomposition.components = d.components;
        }
        pf.decomposition.known.extend(d.known);
    }
    if let Some(v) = opts.max_states {
        pf.budget.max_states = v;
    }
    if let Some(v) = opts.kernel_depth {
        pf.budget.kernel_depth = v;
    }
    if let Some(v) = opts.window {
        pf.budget.window = v;
    }
    if let Some(v) = opts.max_len {
        pf.budget.max_len = Some(v);
    }
    if let Some(s) = opts.search {
        pf.budget.oracle_len = s.max_len;
        pf.budget.oracle_window = s.window;
        pf.budget.oracle_support = s.support;
    }
    run_problem(&pf, cmd, opts)
}

pub fn run_problem(pf: &ProblemFile, cmd: Command, opts: &RunOptions) -> Result<RunOutput, CliError> {
    match cmd {
        Command::Solve => cmd_solve(pf, opts),
        Command::Reduce => cmd_reduce(pf, opts),
        Command::Oracle => cmd_oracle(pf, opts),
        Command::Check => cmd_check(pf, opts),
    }
}

// ---------------------------------------------------------------------
// Automaton files

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AutomatonOp {
    /// re-emit in the requested format
    Show,
    Minimize,
    Complement,
    Union,
    Intersect,
    Difference,
    Equals,
    Subset,
    Empty,
    /// list accepted vectors on the window
    Enumerate,
}

impl AutomatonOp {
    pub fn arity(self) -> usize {
        match self {
            AutomatonOp::Union | AutomatonOp::Intersect | AutomatonOp::Difference | AutomatonOp::Equals | AutomatonOp::Subset => 2,
            _ => 1,
        }
    }
}

pub fn read_automaton(path: &Path) -> Result<DigitAutomaton, CliError> {
    DigitAutomaton::from_text(&read(path)?).map_err(|e| match e {
        crate::digitset::DigitError::Parse { line, msg } => CliError::Syntax {
            line,
            col: 1,
            msg: format!("{}: {msg}", path.display()),
            expected: "automaton text format".into(),
        },
        other => stage("automaton")(other),
    })
}

/// Apply `op` to automaton files.
pub fn run_automaton(op: AutomatonOp, files: &[PathBuf], opts: &RunOptions) -> Result<RunOutput, CliError> {
    if files.len() != op.arity() {
        return Err(CliError::Stage {
            stage: "automaton",
            msg: format!("{op:?} takes {} file(s), got {}", op.arity(), files.len()),
        });
    }
    let autos: Vec<DigitAutomaton> = files.iter().map(|f| read_automaton(f)).collect::<Result<_, _>>()?;
    let a = &autos[0];
    let bin = |r: Result<DigitAutomaton, crate::digitset::DigitError>| r.map_err(stage("automaton"));
    let mut report = serde_json::Map::new();
    report.insert("schema".into(), json!("report/1"));
    report.insert("command".into(), json!("automaton"));
    report.insert("operation".into(), json!(format!("{op:?}").to_lowercase()));
    let answer = |report: &mut serde_json::Map<String, Value>, v: bool| -> Result<RunOutput, CliError> {
        report.insert("answer".into(), json!(v));
        emit_report(format!("{v}\n"), 0, Value::Object(report.clone()), opts)
    };
    let result = match op {
        AutomatonOp::Show => a.clone(),
        AutomatonOp::Minimize => a.minimize(),
        AutomatonOp::Complement => a.complement(),
        AutomatonOp::Union => bin(a.union(&autos[1]))?,
        AutomatonOp::Intersect => bin(a.intersect(&autos[1]))?,
        AutomatonOp::Difference => bin(a.difference(&autos[1]))?,
        AutomatonOp::Equals => {
            let v = a.equals(&autos[1]).map_err(stage("automaton"))?;
            return answer(&mut report, v);
        }
        AutomatonOp::Subset => {
            let v = a.is_subset(&autos[1]).map_err(stage("automaton"))?;
            return answer(&mut report, v);
        }
        AutomatonOp::Empty => return answer(&mut report, a.is_empty()),
        AutomatonOp::Enumerate => {
            let b = opts.window.unwrap_or(Budget::default().window);
            let pts = a.enumerate_window(b);
            let mut text = String::new();
            for p in &pts {
                writeln!(text, "{}", join(p, " ")).unwrap();
            }
            report.insert("bound".into(), json!(b));
            report.insert("points".into(), json!(pts));
            return emit_report(text, 0, Value::Object(report), opts);
        }
    };
    report.insert("status".into(), status_json(result.status));
    report.insert("is_empty".into(), json!(result.is_empty()));
    report.insert("automaton".into(), result.to_json());
    emit_automaton(&result, Value::Object(report), opts)
}
