//! Sparse Laurent polynomials over a prime field.
//!
//! A [`LaurentPoly`] is a finite map from exponent vectors in `Z^n` to
//! nonzero residues mod `p`. Terms live in a `BTreeMap`, so equality and
//! hashing are canonical.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Exponent vector. Entries are `i64`; arithmetic on them is overflow-checked.
pub type ExponentVector = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("ring mismatch: (p={0}, n={1}) vs (p={2}, n={3})")]
    RingMismatch(u32, usize, u32, usize),
    #[error("geometric sum with zero step vector")]
    ZeroStep,
    #[error("exponent overflow")]
    Overflow,
}

/// A prime modulus, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Prime, LaurentError> {
        if p < 2 || p >= (1u64 << 31) || !is_prime(p) {
            return Err(LaurentError::NotPrime(p));
        }
        Ok(Prime(p as u32))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Arithmetic in `F_p` on residues stored as `u32`.
pub mod fp {
    #[inline]
    pub fn add(a: u32, b: u32, p: u32) -> u32 {
        let s = a as u64 + b as u64;
        (s % p as u64) as u32
    }
    #[inline]
    pub fn sub(a: u32, b: u32, p: u32) -> u32 {
        add(a, p - b % p, p)
    }
    #[inline]
    pub fn neg(a: u32, p: u32) -> u32 {
        if a == 0 {
            0
        } else {
            p - a
        }
    }
    #[inline]
    pub fn mul(a: u32, b: u32, p: u32) -> u32 {
        ((a as u64 * b as u64) % p as u64) as u32
    }
    pub fn pow(mut a: u32, mut e: u64, p: u32) -> u32 {
        let mut r = 1 % p;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a, p);
            }
            a = mul(a, a, p);
            e >>= 1;
        }
        r
    }
    /// Inverse of a nonzero residue.
    pub fn inv(a: u32, p: u32) -> u32 {
        assert!(a % p != 0, "inverse of zero in F_{p}");
        pow(a, p as u64 - 2, p)
    }
    /// Reduce a signed integer into `0..p`.
    pub fn from_i64(a: i64, p: u32) -> u32 {
        a.rem_euclid(p as i64) as u32
    }
}

/// Sparse Laurent polynomial in `n` variables over `F_p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    p: u32,
    n: usize,
    terms: BTreeMap<ExponentVector, u32>,
}

fn add_exps(a: &[i64], b: &[i64]) -> ExponentVector {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_add(*y).expect("exponent overflow"))
        .collect()
}

fn scale_exps(a: &[i64], k: i64) -> ExponentVector {
    a.iter()
        .map(|x| x.checked_mul(k).expect("exponent overflow"))
        .collect()
}

impl LaurentPoly {
    pub fn zero(p: u32, n: usize) -> Self {
        LaurentPoly {
            p,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(p: u32, n: usize) -> Self {
        Self::constant(p, n, 1)
    }

    pub fn constant(p: u32, n: usize, c: i64) -> Self {
        Self::monomial(p, vec![0; n], c)
    }

    /// `c * X^e`.
    pub fn monomial(p: u32, e: ExponentVector, c: i64) -> Self {
        let n = e.len();
        let mut f = Self::zero(p, n);
        let c = fp::from_i64(c, p);
        if c != 0 {
            f.terms.insert(e, c);
        }
        f
    }

    /// The variable `X_i` (0-based).
    pub fn var(p: u32, n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(p, e, 1)
    }

    /// Build from `(exponent, coefficient)` pairs, summing duplicates.
    pub fn from_terms<I: IntoIterator<Item = (ExponentVector, i64)>>(p: u32, n: usize, it: I) -> Self {
        let mut f = Self::zero(p, n);
        for (e, c) in it {
            assert_eq!(e.len(), n);
            f.add_term(e, fp::from_i64(c, p));
        }
        f
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&vec![0; self.n]) == Some(&1)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExponentVector, u32)> {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coeff(&self, e: &[i64]) -> u32 {
        self.terms.get(e).copied().unwrap_or(0)
    }

    /// Add `c * X^e` in place.
    pub fn add_term(&mut self, e: ExponentVector, c: u32) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let p = self.p;
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = fp::add(*o.get(), c, p);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<(), LaurentError> {
        if self.p != other.p || self.n != other.n {
            return Err(LaurentError::RingMismatch(self.p, self.n, other.p, other.n));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check(other)?;
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(e.clone(), *c);
        }
        Ok(r)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check(other)?;
        let mut r = Self::zero(self.p, self.n);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                r.add_term(add_exps(e1, e2), fp::mul(*c1, *c2, self.p));
            }
        }
        Ok(r)
    }

    /// Sum; panics on ring mismatch (use [`LaurentPoly::try_add`] to recover).
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("ring mismatch")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("ring mismatch")
    }

    pub fn neg(&self) -> Self {
        self.scale(self.p - 1)
    }

    pub fn scale(&self, c: u32) -> Self {
        let c = c % self.p;
        let mut r = Self::zero(self.p, self.n);
        if c == 0 {
            return r;
        }
        for (e, v) in &self.terms {
            r.terms.insert(e.clone(), fp::mul(*v, c, self.p));
        }
        r
    }

    /// Multiply by the monomial `X^a`.
    pub fn shift(&self, a: &[i64]) -> Self {
        assert_eq!(a.len(), self.n);
        LaurentPoly {
            p: self.p,
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (add_exps(e, a), *c)).collect(),
        }
    }

    /// Nonnegative integer power by repeated squaring.
    pub fn pow(&self, k: u64) -> Self {
        let mut base = self.clone();
        let mut r = Self::one(self.p, self.n);
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        r
    }

    /// `f^(p^k)`, computed termwise.
    pub fn frobenius_pow(&self, k: u32) -> Self {
        let q = (self.p as i64).checked_pow(k).expect("exponent overflow");
        LaurentPoly {
            p: self.p,
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (scale_exps(e, q), *c)).collect(),
        }
    }

    /// `(1 - X^(z a)) / (1 - X^a)` as a Laurent polynomial.
    pub fn geom_sum(p: u32, a: &[i64], z: i64) -> Result<Self, LaurentError> {
        if a.iter().all(|x| *x == 0) {
            return Err(LaurentError::ZeroStep);
        }
        let n = a.len();
        let mut r = Self::zero(p, n);
        if z > 0 {
            for i in 0..z {
                r.add_term(scale_exps(a, i), 1);
            }
        } else {
            for i in z..0 {
                r.add_term(scale_exps(a, i), p - 1);
            }
        }
        Ok(r)
    }

    /// Apply the monomial map `X^e -> X^(e M)`, where `M` has one row per
    /// source variable and `cols` columns.
    pub fn monomial_map(&self, rows: &[Vec<i64>], cols: usize) -> Self {
        assert_eq!(rows.len(), self.n);
        let mut r = Self::zero(self.p, cols);
        for (e, c) in &self.terms {
            let mut t = vec![0i64; cols];
            for (i, ei) in e.iter().enumerate() {
                if *ei != 0 {
                    for j in 0..cols {
                        t[j] = t[j]
                            .checked_add(ei.checked_mul(rows[i][j]).expect("exponent overflow"))
                            .expect("exponent overflow");
                    }
                }
            }
            r.add_term(t, *c);
        }
        r
    }

    /// Componentwise minimum exponent over all terms (`None` for zero).
    pub fn min_exponents(&self) -> Option<ExponentVector> {
        let mut it = self.terms.keys();
        let mut m = it.next()?.clone();
        for e in it {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).min(*b);
            }
        }
        Some(m)
    }

    /// Componentwise maximum exponent over all terms (`None` for zero).
    pub fn max_exponents(&self) -> Option<ExponentVector> {
        let mut it = self.terms.keys();
        let mut m = it.next()?.clone();
        for e in it {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).max(*b);
            }
        }
        Some(m)
    }

    /// True when the polynomial is a single term `c X^e`.
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Divide out the componentwise minimum exponent; returns the shifted
    /// polynomial and the removed exponent.
    pub fn strip_monomial(&self) -> (Self, ExponentVector) {
        match self.min_exponents() {
            None => (self.clone(), vec![0; self.n]),
            Some(m) => {
                let neg: Vec<i64> = m.iter().map(|x| -x).collect();
                (self.shift(&neg), m)
            }
        }
    }

    /// Leading coefficient in the lexicographically largest term.
    pub fn lex_leading(&self) -> Option<(&ExponentVector, u32)> {
        self.terms.iter().next_back().map(|(e, c)| (e, *c))
    }

    /// Make the lexicographically largest coefficient equal to 1.
    pub fn monic(&self) -> Self {
        match self.lex_leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(fp::inv(c, self.p)),
        }
    }

    /// Embed into a ring with `m >= n` variables (new variables get exponent 0).
    pub fn extend_vars(&self, m: usize) -> Self {
        assert!(m >= self.n);
        LaurentPoly {
            p: self.p,
            n: m,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e2 = e.clone();
                    e2.resize(m, 0);
                    (e2, *c)
                })
                .collect(),
        }
    }

    /// Substitute each variable by a Laurent polynomial (which must be a
    /// monomial when it appears with a negative exponent).
    pub fn substitute(&self, images: &[LaurentPoly]) -> Self {
        assert_eq!(images.len(), self.n);
        let m = images.first().map(|f| f.n).unwrap_or(0);
        let mut r = Self::zero(self.p, m);
        for (e, c) in &self.terms {
            let mut t = Self::constant(self.p, m, *c as i64);
            for (i, ei) in e.iter().enumerate() {
                if *ei == 0 {
                    continue;
                }
                let f = if *ei > 0 {
                    images[i].pow(*ei as u64)
                } else {
                    let g = &images[i];
                    assert!(g.is_monomial(), "negative power of a non-monomial");
                    let (ge, gc) = g.terms.iter().next().unwrap();
                    let k = -*ei;
                    LaurentPoly::monomial(self.p, scale_exps(ge, -k), fp::inv(fp::pow(*gc, k as u64, self.p), self.p) as i64)
                };
                t = t.mul(&f);
            }
            r = r.add(&t);
        }
        r
    }

    /// Render with the given variable names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { f: self, names }
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

pub struct PolyDisplay<'a> {
    f: &'a LaurentPoly,
    names: &'a [String],
}

fn write_poly(f: &LaurentPoly, names: &dyn Fn(usize) -> String, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if f.is_zero() {
        return write!(out, "0");
    }
    let mut first = true;
    for (e, c) in f.terms.iter().rev() {
        if !first {
            write!(out, " + ")?;
        }
        first = false;
        let mut parts: Vec<String> = Vec::new();
        if *c != 1 {
            parts.push(c.to_string());
        }
        for (i, ei) in e.iter().enumerate() {
            match *ei {
                0 => {}
                1 => parts.push(names(i)),
                k => parts.push(format!("{}^{}", names(i), k)),
            }
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        write!(out, "{}", parts.join("*"))?;
    }
    Ok(())
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(self.f, &|i| self.names[i].clone(), out)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(self, &|i| format!("X{}", i + 1), out)
    }
}

/// Default variable names `X1..Xn`.
pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

/// Syntax error while reading a polynomial.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("column {col}: {msg}")]
pub struct PolyParseError {
    pub col: usize,
    pub msg: String,
}

/// Parse the textual polynomial syntax: sums and differences of products of
/// integers, variables with optional signed integer exponents, and
/// parenthesized subexpressions raised to nonnegative powers.
pub fn parse_poly(src: &str, names: &[String], p: u32) -> Result<LaurentPoly, PolyParseError> {
    let mut ps = Parser {
        s: src.as_bytes(),
        i: 0,
        names,
        p,
    };
    let f = ps.sum()?;
    ps.ws();
    if ps.i != ps.s.len() {
        return Err(ps.err("unexpected character; expected '+', '-', '*' or end"));
    }
    Ok(f)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    names: &'a [String],
    p: u32,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> PolyParseError {
        PolyParseError {
            col: self.i + 1,
            msg: msg.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn n(&self) -> usize {
        self.names.len()
    }

    fn sum(&mut self) -> Result<LaurentPoly, PolyParseError> {
        let mut neg = false;
        if self.peek() == Some(b'-') {
            self.i += 1;
            neg = true;
        } else if self.peek() == Some(b'+') {
            self.i += 1;
        }
        let t = self.product()?;
        let mut acc = if neg { t.neg() } else { t };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.i += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(b'-') => {
                    self.i += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<LaurentPoly, PolyParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.i += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Result<i64, PolyParseError> {
        self.ws();
        let mut neg = false;
        if self.s.get(self.i) == Some(&b'-') {
            neg = true;
            self.i += 1;
        } else if self.s.get(self.i) == Some(&b'+') {
            self.i += 1;
        }
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return Err(self.err("expected integer"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.i]).unwrap();
        let v: i64 = txt.parse().map_err(|_| self.err("integer out of range"))?;
        Ok(if neg { -v } else { v })
    }

    fn factor(&mut self) -> Result<LaurentPoly, PolyParseError> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.i += 1;
                if self.peek() == Some(b'^') {
                    self.i += 1;
                    let k = self.integer()?;
                    if k < 0 {
                        if inner.is_monomial() {
                            let inv = inner.substitute_inverse_monomial();
                            return Ok(inv.pow((-k) as u64));
                        }
                        return Err(self.err("negative power of a non-monomial"));
                    }
                    return Ok(inner.pow(k as u64));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.integer()?;
                Ok(LaurentPoly::constant(self.p, self.n(), v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.i;
                while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_' || self.s[self.i] == b'\'') {
                    self.i += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                let idx = match self.names.iter().position(|x| x == name) {
                    Some(k) => k,
                    None => {
                        self.i = start;
                        return Err(self.err(&format!("unknown variable '{name}'")));
                    }
                };
                let mut e = 1i64;
                if self.peek() == Some(b'^') {
                    self.i += 1;
                    e = self.integer()?;
                }
                let mut ev = vec![0; self.n()];
                ev[idx] = e;
                Ok(LaurentPoly::monomial(self.p, ev, 1))
            }
            _ => Err(self.err("expected coefficient, variable or '('")),
        }
    }
}

impl LaurentPoly {
    fn substitute_inverse_monomial(&self) -> Self {
        let (e, c) = self.terms.iter().next().expect("monomial");
        LaurentPoly::monomial(self.p, e.iter().map(|x| -x).collect(), fp::inv(*c, self.p) as i64)
    }
}
