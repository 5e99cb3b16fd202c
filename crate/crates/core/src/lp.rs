//! Exact rational linear programming (dense two-phase simplex, Bland's
//! rule) and the cone computations built on it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

type Q = BigRational;

fn q(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// Outcome of [`minimize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal(Vec<Q>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// rows: constraint coefficients followed by the right-hand side
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let k = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                *x -= &k * y;
            }
        }
        self.basis[r] = c;
    }

    /// Minimize `cost` over the columns in `allowed`; `false` if unbounded.
    fn run(&mut self, cost: &[Q], allowed: &[bool]) -> bool {
        loop {
            // reduced costs
            let mut enter = None;
            for c in 0..self.ncols {
                if !allowed[c] || self.basis.contains(&c) {
                    continue;
                }
                let mut rc = cost[c].clone();
                for (r, b) in self.basis.iter().enumerate() {
                    rc -= &cost[*b] * &self.rows[r][c];
                }
                if rc.is_negative() {
                    enter = Some(c);
                    break;
                }
            }
            let Some(c) = enter else { return true };
            let rhs = self.ncols;
            let mut leave: Option<(usize, Q)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[rhs] / &row[c];
                    let better = match &leave {
                        None => true,
                        Some((lr, lq)) => ratio < *lq || (ratio == *lq && self.basis[r] < self.basis[*lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Minimize `c . x` subject to `A x = b`, `x >= 0`.
pub fn minimize(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpResult {
    let m = a.len();
    let n = c.len();
    // phase one with artificials n..n+m
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut r: Vec<Q> = row.iter().map(|x| if flip { -x } else { x.clone() }).collect();
        r.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
        r.push(if flip { -bi } else { bi.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        ncols: n + m,
    };
    let mut cost1 = vec![Q::zero(); n + m];
    cost1[n..].iter_mut().for_each(|x| *x = Q::one());
    t.run(&cost1, &vec![true; n + m]);
    let infeas: Q = t.rows.iter().zip(&t.basis).filter(|(_, b)| **b >= n).map(|(r, _)| r[n + m].clone()).sum();
    if infeas.is_positive() {
        return LpResult::Infeasible;
    }
    // drive remaining artificials out of the basis
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|c| !t.rows[r][*c].is_zero()) {
                t.pivot(r, c);
            }
        }
    }
    let mut cost2 = c.to_vec();
    cost2.extend((0..m).map(|_| Q::zero()));
    let mut allowed = vec![true; n + m];
    allowed[n..].iter_mut().for_each(|x| *x = false);
    if !t.run(&cost2, &allowed) {
        return LpResult::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (r, b) in t.basis.iter().enumerate() {
        if *b < n {
            x[*b] = t.rows[r][n + m].clone();
        }
    }
    LpResult::Optimal(x)
}

/// Whether `target` is a nonnegative rational combination of `gens`.
pub fn in_cone(gens: &[Vec<i64>], target: &[i64]) -> bool {
    let dim = target.len();
    let a: Vec<Vec<Q>> = (0..dim).map(|j| gens.iter().map(|g| q(g[j])).collect()).collect();
    let b: Vec<Q> = target.iter().map(|x| q(*x)).collect();
    matches!(minimize(&a, &b, &vec![Q::zero(); gens.len()]), LpResult::Optimal(_))
}

/// Split of a finite generating set of a cone into generators of its
/// lineality space and the rest, with a separating integer vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSplit {
    pub kernel: Vec<usize>,
    pub strict: Vec<usize>,
    /// vanishes on `kernel` generators, positive on `strict` ones
    pub v: Vec<i64>,
}

fn supports(n: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (1..(1u32 << n)).map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect();
    all.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    all
}

fn primitive(x: &[Q]) -> Vec<i64> {
    let l = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = x.iter().map(|v| (v * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    ints.iter()
        .map(|v| {
            let w = if g.is_zero() { v.clone() } else { v / &g };
            i64::try_from(w).expect("separating vector fits in i64")
        })
        .collect()
}

/// Lineality split of `cone(vectors)`; `v` has the smallest support
/// (lexicographically first among those) and minimal `Σ|v_j|` on it.
pub fn cone_split(vectors: &[Vec<i64>]) -> ConeSplit {
    let n = vectors.first().map(|v| v.len()).unwrap_or(0);
    let mut kernel = Vec::new();
    let mut strict = Vec::new();
    for (i, w) in vectors.iter().enumerate() {
        let neg: Vec<i64> = w.iter().map(|x| -x).collect();
        if w.iter().all(|x| *x == 0) || in_cone(vectors, &neg) {
            kernel.push(i);
        } else {
            strict.push(i);
        }
    }
    if strict.is_empty() {
        return ConeSplit { kernel, strict, v: vec![0; n] };
    }
    for sup in supports(n) {
        // variables v+_j, v-_j for j in sup, then one surplus per strict generator
        let s = sup.len();
        let nv = 2 * s + strict.len();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (k, i) in kernel.iter().chain(strict.iter()).enumerate() {
            let w = &vectors[*i];
            let mut row = vec![Q::zero(); nv];
            for (t, j) in sup.iter().enumerate() {
                row[t] = q(w[*j]);
                row[s + t] = q(-w[*j]);
            }
            if k >= kernel.len() {
                row[2 * s + k - kernel.len()] = q(-1);
                b.push(Q::one());
            } else {
                b.push(Q::zero());
            }
            a.push(row);
        }
        let mut c = vec![Q::one(); 2 * s];
        c.extend((0..strict.len()).map(|_| Q::zero()));
        if let LpResult::Optimal(x) = minimize(&a, &b, &c) {
            let mut v = vec![Q::zero(); n];
            for (t, j) in sup.iter().enumerate() {
                v[*j] = &x[t] - &x[s + t];
            }
            return ConeSplit {
                kernel,
                strict,
                v: primitive(&v),
            };
        }
    }
    unreachable!("a separating vector exists for every cone split")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_split_examples() {
        let s = cone_split(&[vec![2, 0], vec![-2, 0], vec![0, 1]]);
        assert_eq!((s.kernel.clone(), s.strict.clone(), s.v.clone()), (vec![0, 1], vec![2], vec![0, 1]));
        let s = cone_split(&[vec![1, 0], vec![-1, 0]]);
        assert_eq!((s.kernel.len(), s.v.clone()), (2, vec![0, 0]));
        let s = cone_split(&[vec![1, 1]]);
        assert_eq!(s.strict, vec![0]);
        assert!(s.v[0] + s.v[1] > 0);
    }

    #[test]
    fn hidden_lineality() {
        // (1,0), (-1,1), (0,-1) span a plane: every generator is in the lineality space
        let s = cone_split(&[vec![1, 0], vec![-1, 1], vec![0, -1]]);
        assert!(s.strict.is_empty());
        let s = cone_split(&[vec![1, 0], vec![-1, 1], vec![0, 1]]);
        assert_eq!(s.kernel, Vec::<usize>::new());
        for w in [[1i64, 0], [-1, 1], [0, 1]] {
            assert!(w[0] * s.v[0] + w[1] * s.v[1] > 0);
        }
    }

    #[test]
    fn lp_small() {
        // min x + y s.t. x - y = 1
        let r = minimize(&[vec![q(1), q(-1)]], &[q(1)], &[q(1), q(1)]);
        assert_eq!(r, LpResult::Optimal(vec![q(1), q(0)]));
        assert!(!in_cone(&[vec![1, 0]], &[-1, 0]));
    }
}
