//! Integer lattices: Hermite normal form with transforms, coordinates in a
//! basis, and Smith normal form.

use serde::{Deserialize, Serialize};

fn ck(x: i128) -> i64 {
    i64::try_from(x).expect("integer overflow in lattice arithmetic")
}

fn axpy(dst: &mut [i64], k: i64, src: &[i64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = ck(*d as i128 + k as i128 * *s as i128);
    }
}

/// A sublattice of `Z^n`, stored as a row-style Hermite basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub dim: usize,
    pub basis: Vec<Vec<i64>>,
}

/// Result of a Hermite reduction: basis rows, the transform expressing each
/// basis row in the input rows, and pivot columns.
#[derive(Clone, Debug)]
pub struct HermiteForm {
    pub basis: Vec<Vec<i64>>,
    pub transform: Vec<Vec<i64>>,
    pub pivots: Vec<usize>,
}

/// Row-style Hermite normal form of the lattice spanned by `rows` in `Z^dim`.
pub fn hermite(rows: &[Vec<i64>], dim: usize) -> HermiteForm {
    let m = rows.len();
    let mut a: Vec<Vec<i64>> = rows.to_vec();
    let mut u: Vec<Vec<i64>> = (0..m)
        .map(|i| {
            let mut r = vec![0; m];
            r[i] = 1;
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..dim {
        if top >= m {
            break;
        }
        loop {
            // smallest nonzero |entry| at or below `top`
            let mut best: Option<usize> = None;
            for r in top..m {
                if a[r][col] != 0 && best.map(|b| a[r][col].abs() < a[b][col].abs()).unwrap_or(true) {
                    best = Some(r);
                }
            }
            let Some(b) = best else { break };
            a.swap(top, b);
            u.swap(top, b);
            let mut clean = true;
            for r in top + 1..m {
                if a[r][col] != 0 {
                    let q = a[r][col].div_euclid(a[top][col]);
                    let (pa, pu) = (a[top].clone(), u[top].clone());
                    axpy(&mut a[r], -q, &pa);
                    axpy(&mut u[r], -q, &pu);
                    if a[r][col] != 0 {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if top < m && a[top][col] != 0 {
            if a[top][col] < 0 {
                a[top].iter_mut().for_each(|x| *x = -*x);
                u[top].iter_mut().for_each(|x| *x = -*x);
            }
            let piv = a[top][col];
            for r in 0..top {
                let q = a[r][col].div_euclid(piv);
                if q != 0 {
                    let (pa, pu) = (a[top].clone(), u[top].clone());
                    axpy(&mut a[r], -q, &pa);
                    axpy(&mut u[r], -q, &pu);
                }
            }
            pivots.push(col);
            top += 1;
        }
    }
    a.truncate(top);
    u.truncate(top);
    HermiteForm {
        basis: a,
        transform: u,
        pivots,
    }
}

impl Lattice {
    pub fn from_generators(rows: &[Vec<i64>], dim: usize) -> Lattice {
        Lattice {
            dim,
            basis: hermite(rows, dim).basis,
        }
    }

    pub fn full(dim: usize) -> Lattice {
        let rows: Vec<Vec<i64>> = (0..dim)
            .map(|i| {
                let mut r = vec![0; dim];
                r[i] = 1;
                r
            })
            .collect();
        Lattice { dim, basis: rows }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Integer coordinates of `v` in the basis, if `v` lies in the lattice.
    pub fn coords(&self, v: &[i64]) -> Option<Vec<i64>> {
        let mut r = v.to_vec();
        let mut c = Vec::with_capacity(self.basis.len());
        for b in &self.basis {
            let col = b.iter().position(|x| *x != 0)?;
            if r[col] % b[col] != 0 {
                return None;
            }
            let q = r[col] / b[col];
            axpy(&mut r, -q, b);
            c.push(q);
        }
        if r.iter().all(|x| *x == 0) {
            Some(c)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.coords(v).is_some()
    }

    pub fn intersect(&self, other: &Lattice) -> Lattice {
        // kernel of [B; -C] restricted to the first block
        let n = self.dim;
        let rows: Vec<Vec<i64>> = self
            .basis
            .iter()
            .map(|b| {
                let mut r = b.clone();
                r.extend(b.iter().cloned());
                r
            })
            .chain(other.basis.iter().map(|c| {
                let mut r = c.clone();
                r.extend(std::iter::repeat(0).take(n));
                r
            }))
            .collect();
        let h = hermite(&rows, 2 * n);
        let gens: Vec<Vec<i64>> = h
            .basis
            .iter()
            .filter(|r| r[..n].iter().all(|x| *x == 0))
            .map(|r| r[n..].to_vec())
            .collect();
        Lattice::from_generators(&gens, n)
    }
}

/// Smith normal form `P A Q = D` of an `m x n` integer matrix. Returns the
/// diagonal, `Q` and `Q^{-1}` (both `n x n`).
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub diag: Vec<i64>,
    pub q: Vec<Vec<i64>>,
    pub q_inv: Vec<Vec<i64>>,
}

pub fn smith(a: &[Vec<i64>], n: usize) -> SmithForm {
    let m = a.len();
    let mut a: Vec<Vec<i64>> = a.to_vec();
    let ident = |k: usize| -> Vec<Vec<i64>> {
        (0..k)
            .map(|i| {
                let mut r = vec![0; k];
                r[i] = 1;
                r
            })
            .collect()
    };
    let mut q = ident(n);
    let mut qi = ident(n);
    // column op: col j += k * col i  (Q right-multiplied; Q^{-1}: row i -= k * row j)
    fn col_add(a: &mut [Vec<i64>], q: &mut [Vec<i64>], qi: &mut [Vec<i64>], j: usize, i: usize, k: i64) {
        for r in a.iter_mut() {
            r[j] = ck(r[j] as i128 + k as i128 * r[i] as i128);
        }
        for r in q.iter_mut() {
            r[j] = ck(r[j] as i128 + k as i128 * r[i] as i128);
        }
        let (rj, ri) = (qi[j].clone(), &mut qi[i]);
        axpy(ri, -k, &rj);
    }
    fn col_swap(a: &mut [Vec<i64>], q: &mut [Vec<i64>], qi: &mut [Vec<i64>], i: usize, j: usize) {
        for r in a.iter_mut() {
            r.swap(i, j);
        }
        for r in q.iter_mut() {
            r.swap(i, j);
        }
        qi.swap(i, j);
    }
    fn col_neg(a: &mut [Vec<i64>], q: &mut [Vec<i64>], qi: &mut [Vec<i64>], i: usize) {
        for r in a.iter_mut() {
            r[i] = -r[i];
        }
        for r in q.iter_mut() {
            r[i] = -r[i];
        }
        qi[i].iter_mut().for_each(|x| *x = -*x);
    }
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // pick the smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for r in t..m {
            for c in t..n {
                if a[r][c] != 0 && best.map(|(br, bc)| a[r][c].abs() < a[br][bc].abs()).unwrap_or(true) {
                    best = Some((r, c));
                }
            }
        }
        let Some((br, bc)) = best else { break };
        a.swap(t, br);
        col_swap(&mut a, &mut q, &mut qi, t, bc);
        loop {
            let mut done = true;
            for r in t + 1..m {
                if a[r][t] != 0 {
                    let k = a[r][t].div_euclid(a[t][t]);
                    let pr = a[t].clone();
                    axpy(&mut a[r], -k, &pr);
                    if a[r][t] != 0 {
                        done = false;
                    }
                }
            }
            for c in t + 1..n {
                if a[t][c] != 0 {
                    let k = a[t][c].div_euclid(a[t][t]);
                    col_add(&mut a, &mut q, &mut qi, c, t, -k);
                    if a[t][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                // divisibility of the trailing block
                let piv = a[t][t];
                let mut bad = None;
                'outer: for r in t + 1..m {
                    for c in t + 1..n {
                        if a[r][c] % piv != 0 {
                            bad = Some(r);
                            break 'outer;
                        }
                    }
                }
                match bad {
                    None => break,
                    Some(r) => {
                        let pr = a[r].clone();
                        axpy(&mut a[t], 1, &pr);
                    }
                }
            }
            // move the smallest entry of row/column t to the pivot
            let mut best: (usize, usize) = (t, t);
            for r in t..m {
                if a[r][t] != 0 && (a[best.0][best.1] == 0 || a[r][t].abs() < a[best.0][best.1].abs()) {
                    best = (r, t);
                }
            }
            for c in t..n {
                if a[t][c] != 0 && (a[best.0][best.1] == 0 || a[t][c].abs() < a[best.0][best.1].abs()) {
                    best = (t, c);
                }
            }
            if best.0 != t {
                a.swap(t, best.0);
            }
            if best.1 != t {
                col_swap(&mut a, &mut q, &mut qi, t, best.1);
            }
        }
        if a[t][t] < 0 {
            col_neg(&mut a, &mut q, &mut qi, t);
        }
        diag.push(a[t][t]);
        t += 1;
    }
    SmithForm { diag, q, q_inv: qi }
}
