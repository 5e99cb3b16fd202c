//! Dense univariate polynomials over `F_p`: Euclidean arithmetic,
//! factorization (square-free, distinct-degree, Cantor-Zassenhaus) and the
//! Smith normal form of matrices over `F_p[t]`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::laurent::fp;

/// Coefficients from low to high degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UPoly {
    pub p: u32,
    pub c: Vec<u32>,
}

impl UPoly {
    pub fn new(p: u32, mut c: Vec<u32>) -> UPoly {
        for x in c.iter_mut() {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        UPoly { p, c }
    }

    pub fn zero(p: u32) -> UPoly {
        UPoly { p, c: Vec::new() }
    }

    pub fn one(p: u32) -> UPoly {
        UPoly { p, c: vec![1] }
    }

    pub fn constant(p: u32, a: u32) -> UPoly {
        UPoly::new(p, vec![a])
    }

    /// `t^k`
    pub fn monomial(p: u32, k: usize) -> UPoly {
        let mut c = vec![0; k + 1];
        c[k] = 1;
        UPoly { p, c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c == [1]
    }

    /// Degree; `None` for zero.
    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> u32 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|i| fp::add(*self.c.get(i).unwrap_or(&0), *o.c.get(i).unwrap_or(&0), self.p))
            .collect();
        UPoly::new(self.p, c)
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|i| fp::sub(*self.c.get(i).unwrap_or(&0), *o.c.get(i).unwrap_or(&0), self.p))
            .collect();
        UPoly::new(self.p, c)
    }

    pub fn scale(&self, a: u32) -> UPoly {
        UPoly::new(self.p, self.c.iter().map(|x| fp::mul(*x, a, self.p)).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero(self.p);
        }
        let p = self.p as u64;
        let mut acc = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                acc[i + j] = (acc[i + j] + *a as u64 * *b as u64) % p;
            }
        }
        UPoly::new(self.p, acc.into_iter().map(|x| x as u32).collect())
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(fp::inv(self.lc(), self.p))
    }

    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let p = self.p;
        let mut r = self.c.clone();
        let dd = d.c.len() - 1;
        if r.len() <= dd {
            return (UPoly::zero(p), self.clone());
        }
        let inv = fp::inv(d.lc(), p);
        let mut q = vec![0u32; r.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = fp::mul(r[k + dd], inv, p);
            q[k] = coef;
            if coef != 0 {
                for (j, dj) in d.c.iter().enumerate() {
                    r[k + j] = fp::sub(r[k + j], fp::mul(coef, *dj, p), p);
                }
            }
        }
        (UPoly::new(p, q), UPoly::new(p, r))
    }

    pub fn rem(&self, d: &UPoly) -> UPoly {
        self.divrem(d).1
    }

    /// Quotient when `d` divides exactly.
    pub fn div_exact(&self, d: &UPoly) -> Option<UPoly> {
        let (q, r) = self.divrem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Monic gcd (zero iff both are zero).
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s a + t b = g` monic.
    pub fn xgcd(&self, o: &UPoly) -> (UPoly, UPoly, UPoly) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (UPoly::one(p), UPoly::zero(p));
        let (mut t0, mut t1) = (UPoly::zero(p), UPoly::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = std::mem::replace(&mut r1, r);
            let s2 = s0.sub(&q.mul(&s1));
            s0 = std::mem::replace(&mut s1, s2);
            let t2 = t0.sub(&q.mul(&t1));
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let k = fp::inv(r0.lc(), p);
        (r0.scale(k), s0.scale(k), t0.scale(k))
    }

    pub fn derivative(&self) -> UPoly {
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, x)| fp::mul(*x, (i as u64 % self.p as u64) as u32, self.p))
            .collect();
        UPoly::new(self.p, c)
    }

    pub fn pow_mod(&self, mut e: u64, m: &UPoly) -> UPoly {
        let mut base = self.rem(m);
        let mut acc = UPoly::one(self.p).rem(m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m);
            }
            base = base.mul(&base).rem(m);
            e >>= 1;
        }
        acc
    }

    pub fn pow(&self, e: u32) -> UPoly {
        let mut acc = UPoly::one(self.p);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `f(t) = g(t^p)` gives `g` (coefficients are their own p-th roots).
    fn pth_root(&self) -> UPoly {
        let p = self.p as usize;
        UPoly::new(self.p, self.c.iter().step_by(p).copied().collect())
    }

    pub fn eval(&self, x: u32) -> u32 {
        self.c.iter().rev().fold(0, |acc, c| fp::add(fp::mul(acc, x, self.p), *c, self.p))
    }
}

fn squarefree(f: &UPoly) -> Vec<(UPoly, u32)> {
    let p = f.p;
    let mut out = Vec::new();
    if f.deg().unwrap_or(0) == 0 {
        return out;
    }
    let df = f.derivative();
    if df.is_zero() {
        for (g, m) in squarefree(&f.pth_root()) {
            out.push((g, m * p));
        }
        return out;
    }
    let mut c = f.gcd(&df);
    let mut w = f.div_exact(&c).unwrap();
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let z = w.div_exact(&y).unwrap();
        if !z.is_one() {
            out.push((z.monic(), i));
        }
        i += 1;
        w = y;
        c = c.div_exact(&w).unwrap();
    }
    if !c.is_one() && c.deg().unwrap_or(0) > 0 {
        for (g, m) in squarefree(&c.pth_root()) {
            out.push((g, m * p));
        }
    }
    out
}

fn distinct_degree(f: &UPoly) -> Vec<(UPoly, usize)> {
    let p = f.p;
    let x = UPoly::monomial(p, 1);
    let mut out = Vec::new();
    let mut f = f.clone();
    let mut h = x.clone();
    let mut d = 0;
    while f.deg().unwrap_or(0) >= 2 * (d + 1) {
        d += 1;
        h = h.pow_mod(p as u64, &f);
        let g = h.sub(&x).gcd(&f);
        if !g.is_one() {
            out.push((g.clone(), d));
            f = f.div_exact(&g).unwrap();
            h = h.rem(&f);
        }
    }
    if f.deg().unwrap_or(0) > 0 {
        let d = f.deg().unwrap();
        out.push((f, d));
    }
    out
}

fn equal_degree(f: &UPoly, d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<UPoly>) {
    let n = f.deg().unwrap();
    if n == d {
        out.push(f.monic());
        return;
    }
    let p = f.p;
    loop {
        let a = UPoly::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.deg().unwrap_or(0) == 0 {
            continue;
        }
        let b = if p == 2 {
            // trace a + a^2 + ... + a^(2^(d-1))
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.mul(&t).rem(f);
                acc = acc.add(&t);
            }
            acc
        } else {
            // norm a^(1 + p + ... + p^(d-1)) raised to (p-1)/2
            let mut t = a.rem(f);
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.pow_mod(p as u64, f);
                acc = acc.mul(&t).rem(f);
            }
            acc.pow_mod(((p - 1) / 2) as u64, f).sub(&UPoly::one(p))
        };
        let g = b.gcd(f);
        if !g.is_one() && g.deg() != f.deg() {
            let h = f.div_exact(&g).unwrap();
            equal_degree(&g, d, rng, out);
            equal_degree(&h, d, rng, out);
            return;
        }
    }
}

/// Monic irreducible factors with multiplicities, sorted.
pub fn factor(f: &UPoly) -> Vec<(UPoly, u32)> {
    assert!(!f.is_zero());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    for (g, m) in squarefree(&f.monic()) {
        for (h, d) in distinct_degree(&g) {
            let mut parts = Vec::new();
            equal_degree(&h, d, &mut rng, &mut parts);
            out.extend(parts.into_iter().map(|q| (q, m)));
        }
    }
    out.sort();
    out
}

/// Smith form over `F_p[t]` of an `m x n` matrix: monic invariant factors
/// `diag` (length `min(m, n)`, zero where the rank ends) and an invertible
/// column transform `q` such that `x` lies in the row space iff
/// `(x q)_k` is divisible by `diag[k]` for `k < len` and zero beyond.
pub struct PolySmith {
    pub diag: Vec<UPoly>,
    pub q: Vec<Vec<UPoly>>,
}

pub fn smith(a: &[Vec<UPoly>], n: usize, p: u32) -> PolySmith {
    let m = a.len();
    let mut a: Vec<Vec<UPoly>> = a.to_vec();
    let mut q: Vec<Vec<UPoly>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { UPoly::one(p) } else { UPoly::zero(p) }).collect())
        .collect();
    let size = |x: &UPoly| x.deg().map(|d| d as i64).unwrap_or(i64::MAX);
    fn col_axpy(a: &mut [Vec<UPoly>], q: &mut [Vec<UPoly>], j: usize, i: usize, k: &UPoly) {
        // col j -= k * col i
        for r in a.iter_mut() {
            let t = r[i].mul(k);
            r[j] = r[j].sub(&t);
        }
        for r in q.iter_mut() {
            let t = r[i].mul(k);
            r[j] = r[j].sub(&t);
        }
    }
    fn col_swap(a: &mut [Vec<UPoly>], q: &mut [Vec<UPoly>], i: usize, j: usize) {
        for r in a.iter_mut() {
            r.swap(i, j);
        }
        for r in q.iter_mut() {
            r.swap(i, j);
        }
    }
    let mut diag = Vec::new();
    for t in 0..m.min(n) {
        let mut best: Option<(usize, usize)> = None;
        for r in t..m {
            for c in t..n {
                if !a[r][c].is_zero() && best.map(|(br, bc)| size(&a[r][c]) < size(&a[br][bc])).unwrap_or(true) {
                    best = Some((r, c));
                }
            }
        }
        let Some((br, bc)) = best else {
            diag.push(UPoly::zero(p));
            continue;
        };
        a.swap(t, br);
        col_swap(&mut a, &mut q, t, bc);
        loop {
            let mut done = true;
            for r in t + 1..m {
                if !a[r][t].is_zero() {
                    let (k, rem) = a[r][t].divrem(&a[t][t]);
                    let pr: Vec<UPoly> = a[t].iter().map(|x| x.mul(&k)).collect();
                    for (x, y) in a[r].iter_mut().zip(&pr) {
                        *x = x.sub(y);
                    }
                    if !rem.is_zero() {
                        done = false;
                    }
                }
            }
            for c in t + 1..n {
                if !a[t][c].is_zero() {
                    let (k, rem) = a[t][c].divrem(&a[t][t]);
                    col_axpy(&mut a, &mut q, c, t, &k);
                    if !rem.is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                let piv = a[t][t].clone();
                let mut bad = None;
                'outer: for r in t + 1..m {
                    for c in t + 1..n {
                        if !a[r][c].rem(&piv).is_zero() {
                            bad = Some(r);
                            break 'outer;
                        }
                    }
                }
                match bad {
                    None => break,
                    Some(r) => {
                        let pr = a[r].clone();
                        for (x, y) in a[t].iter_mut().zip(&pr) {
                            *x = x.add(y);
                        }
                    }
                }
            }
            let mut best = (t, t);
            for r in t..m {
                if !a[r][t].is_zero() && (a[best.0][best.1].is_zero() || size(&a[r][t]) < size(&a[best.0][best.1])) {
                    best = (r, t);
                }
            }
            for c in t..n {
                if !a[t][c].is_zero() && (a[best.0][best.1].is_zero() || size(&a[t][c]) < size(&a[best.0][best.1])) {
                    best = (t, c);
                }
            }
            if best.0 != t {
                a.swap(t, best.0);
            }
            if best.1 != t {
                col_swap(&mut a, &mut q, t, best.1);
            }
        }
        diag.push(a[t][t].monic());
    }
    PolySmith { diag, q }
}
