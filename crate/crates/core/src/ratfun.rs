//! The rational function field `K = F_p(Y_1, ..., Y_s)`: reduced fractions
//! of polynomials (stored as [`LaurentPoly`] with nonnegative exponents),
//! Frobenius and Cartier operators, and dense linear algebra over `K`.

use crate::laurent::{fp, LaurentPoly};
use crate::upoly::UPoly;

fn deg_in(f: &LaurentPoly, v: usize) -> i64 {
    f.terms().map(|(e, _)| e[v]).max().unwrap_or(-1)
}

fn coeff_in(f: &LaurentPoly, v: usize, k: i64) -> LaurentPoly {
    LaurentPoly::from_terms(
        f.prime(),
        f.nvars(),
        f.terms().filter(|(e, _)| e[v] == k).map(|(e, c)| {
            let mut e2 = e.clone();
            e2[v] = 0;
            (e2, c as i64)
        }),
    )
}

fn var_pow(f: &LaurentPoly, v: usize, k: i64) -> LaurentPoly {
    let mut e = vec![0i64; f.nvars()];
    e[v] = k;
    f.shift(&e)
}

/// Scale so the lex-leading coefficient is 1.
pub fn normalize(f: &LaurentPoly) -> LaurentPoly {
    f.monic()
}

/// Exact quotient `a / b`, if `b` divides `a`.
pub fn div_exact(a: &LaurentPoly, b: &LaurentPoly) -> Option<LaurentPoly> {
    assert!(!b.is_zero());
    let p = a.prime();
    let n = a.nvars();
    let (lb, cb) = {
        let (e, c) = b.lex_leading().unwrap();
        (e.clone(), c)
    };
    let inv = fp::inv(cb, p);
    let mut q = LaurentPoly::zero(p, n);
    let mut r = a.clone();
    while let Some((lr, cr)) = r.lex_leading().map(|(e, c)| (e.clone(), c)) {
        let d: Vec<i64> = lr.iter().zip(&lb).map(|(x, y)| x - y).collect();
        if d.iter().any(|x| *x < 0) {
            return None;
        }
        let t = LaurentPoly::monomial(p, d, fp::mul(cr, inv, p) as i64);
        r = r.sub(&t.mul(b));
        q = q.add(&t);
    }
    Some(q)
}

fn to_upoly(f: &LaurentPoly) -> UPoly {
    let d = deg_in(f, 0).max(0) as usize;
    let mut c = vec![0u32; d + 1];
    for (e, x) in f.terms() {
        c[e[0] as usize] = x;
    }
    UPoly::new(f.prime(), c)
}

fn from_upoly(u: &UPoly, n: usize) -> LaurentPoly {
    LaurentPoly::from_terms(
        u.p,
        n,
        u.c.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| {
            let mut e = vec![0i64; n];
            e[0] = i as i64;
            (e, *c as i64)
        }),
    )
}

/// Pseudo-remainder of `a` by `b` in variable `v`.
fn prem(a: &LaurentPoly, b: &LaurentPoly, v: usize) -> LaurentPoly {
    let db = deg_in(b, v);
    let lb = coeff_in(b, v, db);
    let mut r = a.clone();
    loop {
        let dr = deg_in(&r, v);
        if r.is_zero() || dr < db {
            return r;
        }
        let lr = coeff_in(&r, v, dr);
        r = r.mul(&lb).sub(&var_pow(&b.mul(&lr), v, dr - db));
    }
}

fn content(f: &LaurentPoly, v: usize) -> LaurentPoly {
    let mut g = LaurentPoly::zero(f.prime(), f.nvars());
    for k in 0..=deg_in(f, v) {
        let c = coeff_in(f, v, k);
        if !c.is_zero() {
            g = gcd_vars(&g, &c, v);
            if g.is_one() {
                break;
            }
        }
    }
    g
}

/// gcd of polynomials involving only variables `< nv`.
fn gcd_vars(a: &LaurentPoly, b: &LaurentPoly, nv: usize) -> LaurentPoly {
    let p = a.prime();
    let n = a.nvars();
    if a.is_zero() {
        return normalize(b);
    }
    if b.is_zero() {
        return normalize(a);
    }
    if nv == 0 {
        return LaurentPoly::one(p, n);
    }
    if nv == 1 {
        return from_upoly(&to_upoly(a).gcd(&to_upoly(b)), n);
    }
    let v = nv - 1;
    if deg_in(a, v) == 0 && deg_in(b, v) == 0 {
        return gcd_vars(a, b, v);
    }
    let ca = content(a, v);
    let cb = content(b, v);
    let mut pa = div_exact(a, &ca).unwrap();
    let mut pb = div_exact(b, &cb).unwrap();
    let c = gcd_vars(&ca, &cb, v);
    if deg_in(&pa, v) < deg_in(&pb, v) {
        std::mem::swap(&mut pa, &mut pb);
    }
    let g = loop {
        if deg_in(&pb, v) == 0 {
            break LaurentPoly::one(p, n);
        }
        let r = prem(&pa, &pb, v);
        if r.is_zero() {
            break pb;
        }
        pa = pb;
        let cr = content(&r, v);
        pb = div_exact(&r, &cr).unwrap();
    };
    let g = div_exact(&g, &content(&g, v)).unwrap();
    normalize(&c.mul(&g))
}

/// Normalized gcd of two polynomials.
pub fn gcd(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    gcd_vars(a, b, a.nvars())
}

/// Factors of a polynomial found by repeatedly splitting off contents with
/// respect to single variables. Not a full factorization: an irreducible
/// multivariate factor and a product of several such factors look alike.
pub fn content_factors(f: &LaurentPoly) -> Vec<LaurentPoly> {
    let f = normalize(f);
    for v in 0..f.nvars() {
        if deg_in(&f, v) <= 0 {
            continue;
        }
        let mut g = LaurentPoly::zero(f.prime(), f.nvars());
        for k in 0..=deg_in(&f, v) {
            let c = coeff_in(&f, v, k);
            if !c.is_zero() {
                g = gcd(&g, &c);
            }
        }
        if g.terms().count() > 1 || g.terms().any(|(e, _)| e.iter().any(|x| *x != 0)) {
            let rest = div_exact(&f, &g).unwrap();
            let mut out = content_factors(&g);
            out.extend(content_factors(&rest));
            return out;
        }
    }
    if f.terms().count() > 1 || f.terms().any(|(e, _)| e.iter().any(|x| *x != 0)) {
        vec![f]
    } else {
        Vec::new()
    }
}

/// Reduced fraction with a normalized denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Frac {
    pub num: LaurentPoly,
    pub den: LaurentPoly,
}

impl Frac {
    pub fn zero(p: u32, s: usize) -> Frac {
        Frac {
            num: LaurentPoly::zero(p, s),
            den: LaurentPoly::one(p, s),
        }
    }

    pub fn one(p: u32, s: usize) -> Frac {
        Frac::poly(LaurentPoly::one(p, s))
    }

    pub fn poly(f: LaurentPoly) -> Frac {
        let s = f.nvars();
        Frac {
            num: f.clone(),
            den: LaurentPoly::one(f.prime(), s),
        }
    }

    pub fn constant(p: u32, s: usize, c: u32) -> Frac {
        Frac::poly(LaurentPoly::constant(p, s, c as i64))
    }

    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Frac {
        assert!(!den.is_zero(), "zero denominator");
        let p = num.prime();
        let s = num.nvars();
        if num.is_zero() {
            return Frac::zero(p, s);
        }
        let g = gcd(&num, &den);
        let (mut n, mut d) = if g.is_one() {
            (num, den)
        } else {
            (div_exact(&num, &g).unwrap(), div_exact(&den, &g).unwrap())
        };
        let lc = d.lex_leading().unwrap().1;
        if lc != 1 {
            let k = fp::inv(lc, p);
            n = n.scale(k);
            d = d.scale(k);
        }
        Frac { num: n, den: d }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn prime(&self) -> u32 {
        self.num.prime()
    }

    pub fn add(&self, o: &Frac) -> Frac {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Frac::new(self.num.add(&o.num), self.den.clone());
        }
        Frac::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn neg(&self) -> Frac {
        Frac {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &Frac) -> Frac {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Frac) -> Frac {
        if self.is_zero() || o.is_zero() {
            return Frac::zero(self.prime(), self.num.nvars());
        }
        if self.den.is_one() && o.den.is_one() {
            return Frac::poly(self.num.mul(&o.num));
        }
        Frac::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn inv(&self) -> Frac {
        Frac::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Frac) -> Frac {
        self.mul(&o.inv())
    }

    /// Entrywise `p`-th power.
    pub fn frobenius(&self) -> Frac {
        Frac {
            num: self.num.frobenius_pow(1),
            den: self.den.frobenius_pow(1),
        }
    }

    /// Inverse of [`Frac::frobenius`], if this is a `p`-th power.
    pub fn frobenius_root(&self) -> Option<Frac> {
        let p = self.prime() as i64;
        let root = |f: &LaurentPoly| -> Option<LaurentPoly> {
            let mut terms = Vec::new();
            for (e, c) in f.terms() {
                if e.iter().any(|x| x % p != 0) {
                    return None;
                }
                terms.push((e.iter().map(|x| x / p).collect::<Vec<i64>>(), c as i64));
            }
            Some(LaurentPoly::from_terms(f.prime(), f.nvars(), terms))
        };
        Some(Frac {
            num: root(&self.num)?,
            den: root(&self.den)?,
        })
    }

    /// Cartier operator `Λ_l`: the unique `g_l` with `f = Σ_l Y^l g_l^p`.
    pub fn cartier(&self, l: &[i64]) -> Frac {
        let p = self.prime();
        let pi = p as i64;
        let lifted = self.num.mul(&self.den.pow(p as u64 - 1));
        let terms: Vec<(Vec<i64>, i64)> = lifted
            .terms()
            .filter(|(e, _)| e.iter().zip(l).all(|(x, r)| x.rem_euclid(pi) == *r))
            .map(|(e, c)| (e.iter().zip(l).map(|(x, r)| (x - r) / pi).collect(), c as i64))
            .collect();
        Frac::new(LaurentPoly::from_terms(p, self.num.nvars(), terms), self.den.clone())
    }

    /// Rough size for choosing low-degree generators.
    pub fn weight(&self) -> usize {
        let deg = |f: &LaurentPoly| f.terms().map(|(e, _)| e.iter().sum::<i64>()).max().unwrap_or(0) as usize;
        deg(&self.num) + deg(&self.den) + self.num.len()
    }
}

pub type KVec = Vec<Frac>;
pub type KMat = Vec<Vec<Frac>>;

pub fn identity(p: u32, s: usize, n: usize) -> KMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Frac::one(p, s) } else { Frac::zero(p, s) }).collect())
        .collect()
}

pub fn mat_vec(a: &KMat, v: &[Frac]) -> KVec {
    a.iter()
        .map(|row| {
            let mut acc = Frac::zero(v[0].prime(), v[0].num.nvars());
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    acc = acc.add(&x.mul(y));
                }
            }
            acc
        })
        .collect()
}

pub fn mat_mul(a: &KMat, b: &KMat) -> KMat {
    let n = b.first().map(|r| r.len()).unwrap_or(0);
    let zero = a[0][0].clone().sub(&a[0][0]);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    let mut acc = zero.clone();
                    for (k, x) in row.iter().enumerate() {
                        if !x.is_zero() && !b[k][j].is_zero() {
                            acc = acc.add(&x.mul(&b[k][j]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_pow(a: &KMat, mut e: u64) -> KMat {
    let p = a[0][0].prime();
    let s = a[0][0].num.nvars();
    let mut acc = identity(p, s, a.len());
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul(&acc, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mat_mul(&base, &base);
        }
    }
    acc
}

/// Inverse by Gauss-Jordan; `None` if singular.
pub fn mat_inv(a: &KMat) -> Option<KMat> {
    let n = a.len();
    let p = a[0][0].prime();
    let s = a[0][0].num.nvars();
    let mut m: Vec<Vec<Frac>> = a
        .iter()
        .zip(identity(p, s, n))
        .map(|(r, i)| r.iter().cloned().chain(i).collect())
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|r| !m[*r][c].is_zero())?;
        m.swap(c, piv);
        let inv = m[c][c].inv();
        m[c] = m[c].iter().map(|x| x.mul(&inv)).collect();
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let k = m[r][c].clone();
                let prow = m[c].clone();
                for (x, y) in m[r].iter_mut().zip(&prow) {
                    if !y.is_zero() {
                        *x = x.sub(&k.mul(y));
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Reduced row echelon form of the span of `rows` (zero rows dropped);
/// canonical for the span.
pub fn rref(rows: &[KVec]) -> Vec<KVec> {
    let mut m: Vec<KVec> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut top = 0;
    for c in 0..ncols {
        if top == m.len() {
            break;
        }
        let Some(piv) = (top..m.len()).find(|r| !m[*r][c].is_zero()) else { continue };
        m.swap(top, piv);
        let inv = m[top][c].inv();
        m[top] = m[top].iter().map(|x| x.mul(&inv)).collect();
        for r in 0..m.len() {
            if r != top && !m[r][c].is_zero() {
                let k = m[r][c].clone();
                let prow = m[top].clone();
                for (x, y) in m[r].iter_mut().zip(&prow) {
                    if !y.is_zero() {
                        *x = x.sub(&k.mul(y));
                    }
                }
            }
        }
        top += 1;
    }
    m.truncate(top);
    m
}

/// Incremental echelon basis used to pick independent vectors greedily.
pub struct Echelon {
    rows: Vec<(usize, KVec)>,
}

impl Default for Echelon {
    fn default() -> Self {
        Echelon::new()
    }
}

impl Echelon {
    pub fn new() -> Echelon {
        Echelon { rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v` if it is independent of the vectors seen so far.
    pub fn insert(&mut self, v: &[Frac]) -> bool {
        let mut w = v.to_vec();
        for (c, r) in &self.rows {
            if !w[*c].is_zero() {
                let k = w[*c].clone();
                for (x, y) in w.iter_mut().zip(r) {
                    if !y.is_zero() {
                        *x = x.sub(&k.mul(y));
                    }
                }
            }
        }
        let Some(c) = w.iter().position(|x| !x.is_zero()) else { return false };
        let inv = w[c].inv();
        let w: KVec = w.iter().map(|x| x.mul(&inv)).collect();
        self.rows.push((c, w));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse_poly;

    fn names(s: usize) -> Vec<String> {
        (1..=s).map(|i| format!("Y{i}")).collect()
    }

    fn poly(p: u32, s: usize, t: &str) -> LaurentPoly {
        parse_poly(t, &names(s), p).unwrap()
    }

    #[test]
    fn multivariate_gcd() {
        let p = 3;
        let a = poly(p, 2, "(Y1 + Y2)^2 * (Y1*Y2 + 1)");
        let b = poly(p, 2, "(Y1 + Y2) * (Y1 - Y2^2)");
        assert_eq!(gcd(&a, &b), normalize(&poly(p, 2, "Y1 + Y2")));
        let c = poly(p, 3, "(Y1*Y3 + Y2) * (Y3^2 + Y1)");
        let d = poly(p, 3, "(Y1*Y3 + Y2) * (Y2 + 1)");
        assert_eq!(gcd(&c, &d), normalize(&poly(p, 3, "Y1*Y3 + Y2")));
        assert!(gcd(&poly(p, 2, "Y1"), &poly(p, 2, "Y2")).is_one());
    }

    #[test]
    fn fraction_arithmetic_and_cartier() {
        let p = 2;
        let y = Frac::poly(poly(p, 1, "Y1"));
        let y1 = Frac::poly(poly(p, 1, "Y1 + 1"));
        let f = y.div(&y1).add(&Frac::one(p, 1));
        // y/(y+1) + 1 = 1/(y+1)
        assert_eq!(f, y1.inv());
        // f = Σ Y^l Λ_l(f)^p
        let g = Frac::new(poly(p, 1, "Y1^3 + Y1 + 1"), poly(p, 1, "Y1^2 + Y1 + 1"));
        let back = g.cartier(&[0]).frobenius().add(&y.mul(&g.cartier(&[1]).frobenius()));
        assert_eq!(back, g);
        assert_eq!(y.frobenius().frobenius_root(), Some(y.clone()));
        assert_eq!(y.frobenius_root(), None);
    }

    #[test]
    fn linear_algebra() {
        let p = 5;
        let y = Frac::poly(poly(p, 1, "Y1"));
        let one = Frac::one(p, 1);
        let zero = Frac::zero(p, 1);
        let a = vec![vec![y.clone(), one.clone()], vec![zero.clone(), y.clone()]];
        let ai = mat_inv(&a).unwrap();
        assert_eq!(mat_mul(&a, &ai), identity(p, 1, 2));
        let r1 = rref(&[vec![y.clone(), one.clone()], vec![y.mul(&y), y.clone()]]);
        assert_eq!(r1.len(), 1);
        assert!(r1[0][0].is_one());
        let mut e = Echelon::new();
        assert!(e.insert(&[y.clone(), one.clone()]));
        assert!(!e.insert(&[y.mul(&y), y.clone()]));
        assert!(e.insert(&[zero, one]));
    }
}
