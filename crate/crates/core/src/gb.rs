//! Buchberger's algorithm for submodules of free modules over
//! `F_p[x_1..x_k]` (nonnegative exponents).
//!
//! Terms are packed into comparison keys: slot 0 holds the inverted
//! position (position-over-term, lower positions dominate), then each
//! variable block contributes its total degree followed by its exponents.
//! Comparing keys lexicographically therefore realises POT with a block
//! order that is graded-lex inside every block. Optionally, positions from
//! some index on share slot 0 and are compared only after the leading
//! blocks, which makes those blocks eliminable across positions.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::laurent::fp;

pub type Key = Box<[u32]>;

/// A vector of the free module: terms sorted by decreasing key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vector {
    pub terms: Vec<(Key, u32)>,
}

impl Vector {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead(&self) -> Option<&Key> {
        self.terms.first().map(|t| &t.0)
    }
}

/// Term order and arithmetic context.
#[derive(Clone, Debug)]
pub struct Engine {
    p: u32,
    nvars: usize,
    /// key slot of each variable
    slot: Vec<usize>,
    /// (degree slot, variables of the block)
    blocks: Vec<(usize, Vec<usize>)>,
    keylen: usize,
    /// `(split, slot)`: positions `>= split` are ordered by `slot`
    late: Option<(usize, usize)>,
}

impl Engine {
    /// `blocks` partitions `0..nvars`; earlier blocks dominate.
    pub fn new(p: u32, nvars: usize, blocks: Vec<Vec<usize>>) -> Engine {
        Engine::build(p, nvars, blocks, None)
    }

    /// Like [`Engine::new`], but positions `>= split` are compared after the
    /// first `after` blocks (counting empty ones) instead of first.
    pub fn with_late_positions(p: u32, nvars: usize, blocks: Vec<Vec<usize>>, split: usize, after: usize) -> Engine {
        Engine::build(p, nvars, blocks, Some((split, after)))
    }

    fn build(p: u32, nvars: usize, blocks: Vec<Vec<usize>>, late: Option<(usize, usize)>) -> Engine {
        let mut slot = vec![usize::MAX; nvars];
        let mut out = Vec::new();
        let mut k = 1;
        let mut late_slot = None;
        for (bi, b) in blocks.into_iter().enumerate() {
            if let Some((split, after)) = late {
                if bi == after {
                    late_slot = Some((split, k));
                    k += 1;
                }
            }
            if b.is_empty() {
                continue;
            }
            let deg = k;
            k += 1;
            for &v in &b {
                assert!(slot[v] == usize::MAX, "variable {v} in two blocks");
                slot[v] = k;
                k += 1;
            }
            out.push((deg, b));
        }
        if let (Some((split, _)), None) = (late, late_slot) {
            late_slot = Some((split, k));
            k += 1;
        }
        assert!(slot.iter().all(|s| *s != usize::MAX), "every variable needs a block");
        Engine {
            p,
            nvars,
            slot,
            blocks: out,
            keylen: k,
            late: late_slot,
        }
    }

    /// POT with plain graded-lex on all variables.
    pub fn grlex(p: u32, nvars: usize) -> Engine {
        Engine::new(p, nvars, vec![(0..nvars).collect()])
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn term(&self, pos: usize, exps: &[u32]) -> Key {
        debug_assert_eq!(exps.len(), self.nvars);
        let mut k = vec![0u32; self.keylen];
        k[0] = u32::MAX - pos as u32;
        if let Some((split, ls)) = self.late {
            k[ls] = u32::MAX - pos as u32;
            if pos >= split {
                k[0] = u32::MAX - split as u32;
            }
        }
        for (degslot, vars) in &self.blocks {
            let mut d = 0u32;
            for &v in vars {
                k[self.slot[v]] = exps[v];
                d += exps[v];
            }
            k[*degslot] = d;
        }
        k.into_boxed_slice()
    }

    pub fn pos(&self, k: &[u32]) -> usize {
        match self.late {
            Some((_, ls)) => (u32::MAX - k[ls]) as usize,
            None => (u32::MAX - k[0]) as usize,
        }
    }

    fn is_pos_slot(&self, i: usize) -> bool {
        i == 0 || self.late.is_some_and(|(_, ls)| ls == i)
    }

    pub fn exps(&self, k: &[u32]) -> Vec<u32> {
        self.slot.iter().map(|s| k[*s]).collect()
    }

    pub fn total_degree(&self, k: &[u32]) -> u32 {
        self.blocks.iter().map(|(d, _)| k[*d]).sum()
    }

    fn divides(&self, a: &[u32], b: &[u32]) -> bool {
        a.iter()
            .zip(b)
            .enumerate()
            .all(|(i, (x, y))| if self.is_pos_slot(i) { x == y } else { x <= y })
    }

    /// `b / a` as a monomial key (slot 0 zero); requires `divides(a, b)`.
    fn quotient(&self, b: &[u32], a: &[u32]) -> Key {
        let k: Vec<u32> = b
            .iter()
            .zip(a)
            .enumerate()
            .map(|(i, (x, y))| if self.is_pos_slot(i) { 0 } else { x - y })
            .collect();
        k.into_boxed_slice()
    }

    fn lcm(&self, a: &[u32], b: &[u32]) -> Key {
        let mut k: Vec<u32> = a.iter().zip(b).map(|(x, y)| *x.max(y)).collect();
        for (d, vars) in &self.blocks {
            k[*d] = vars.iter().map(|v| k[self.slot[*v]]).sum();
        }
        k.into_boxed_slice()
    }

    fn mul_key(&self, k: &[u32], m: &[u32]) -> Key {
        let r: Vec<u32> = k
            .iter()
            .zip(m)
            .enumerate()
            .map(|(i, (x, y))| if self.is_pos_slot(i) { *x } else { x + y })
            .collect();
        r.into_boxed_slice()
    }

    /// Build a vector from unsorted `(pos, exps, coeff)` triples.
    pub fn vector<I: IntoIterator<Item = (usize, Vec<u32>, u32)>>(&self, it: I) -> Vector {
        let mut t: Vec<(Key, u32)> = it
            .into_iter()
            .map(|(pos, e, c)| (self.term(pos, &e), c % self.p))
            .collect();
        t.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Key, u32)> = Vec::with_capacity(t.len());
        for (k, c) in t {
            if let Some(last) = out.last_mut() {
                if last.0 == k {
                    last.1 = fp::add(last.1, c, self.p);
                    continue;
                }
            }
            out.push((k, c));
        }
        out.retain(|x| x.1 != 0);
        Vector { terms: out }
    }

    /// `(pos, exps, coeff)` view of a vector.
    pub fn unpack(&self, v: &Vector) -> Vec<(usize, Vec<u32>, u32)> {
        v.terms
            .iter()
            .map(|(k, c)| (self.pos(k), self.exps(k), *c))
            .collect()
    }

    /// `f - c * m * g`.
    fn sub_mul(&self, f: &[(Key, u32)], c: u32, m: &[u32], g: &[(Key, u32)]) -> Vec<(Key, u32)> {
        let p = self.p;
        let nc = fp::neg(c, p);
        let mut out = Vec::with_capacity(f.len() + g.len());
        let mut i = 0;
        let mut j = 0;
        let gm: Vec<(Key, u32)> = g
            .iter()
            .map(|(k, v)| (self.mul_key(k, m), fp::mul(*v, nc, p)))
            .collect();
        while i < f.len() && j < gm.len() {
            match f[i].0.cmp(&gm[j].0) {
                Ordering::Greater => {
                    out.push(f[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(gm[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let s = fp::add(f[i].1, gm[j].1, p);
                    if s != 0 {
                        out.push((f[i].0.clone(), s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&f[i..]);
        out.extend(gm.into_iter().skip(j));
        out
    }

    pub fn scale(&self, v: &Vector, c: u32) -> Vector {
        let c = c % self.p;
        if c == 0 {
            return Vector::default();
        }
        Vector {
            terms: v.terms.iter().map(|(k, x)| (k.clone(), fp::mul(*x, c, self.p))).collect(),
        }
    }

    pub fn monic(&self, v: &Vector) -> Vector {
        match v.terms.first() {
            None => v.clone(),
            Some((_, c)) => self.scale(v, fp::inv(*c, self.p)),
        }
    }

    pub fn add(&self, a: &Vector, b: &Vector) -> Vector {
        let zero = vec![0u32; self.keylen];
        Vector {
            terms: self.sub_mul(&a.terms, self.p - 1, &zero, &b.terms),
        }
    }

    /// Multiply by a monomial given by exponents.
    pub fn shift(&self, v: &Vector, exps: &[u32]) -> Vector {
        let m = self.term(0, exps);
        Vector {
            terms: v.terms.iter().map(|(k, c)| (self.mul_key(k, &m), *c)).collect(),
        }
    }

    fn find_reducer(&self, t: &[u32], basis: &[Vector]) -> Option<usize> {
        basis
            .iter()
            .position(|g| g.lead().map(|l| self.divides(l, t)).unwrap_or(false))
    }

    /// Full normal form of `f` with respect to `basis` (any generating set;
    /// canonical when `basis` is a reduced Gröbner basis).
    pub fn reduce(&self, f: &Vector, basis: &[Vector]) -> Vector {
        let mut f = f.terms.clone();
        let mut out: Vec<(Key, u32)> = Vec::new();
        while !f.is_empty() {
            let (t, c) = f[0].clone();
            match self.find_reducer(&t, basis) {
                Some(i) => {
                    let g = &basis[i].terms;
                    let q = self.quotient(&t, &g[0].0);
                    let coef = fp::mul(c, fp::inv(g[0].1, self.p), self.p);
                    f = self.sub_mul(&f, coef, &q, g);
                }
                None => {
                    out.push((t, c));
                    f.remove(0);
                }
            }
        }
        Vector { terms: out }
    }

    /// Reduce only while the leading term is reducible.
    fn top_reduce(&self, f: &Vector, basis: &[Vector]) -> Vector {
        let mut f = f.terms.clone();
        while let Some((t, c)) = f.first().cloned() {
            match self.find_reducer(&t, basis) {
                Some(i) => {
                    let g = &basis[i].terms;
                    let q = self.quotient(&t, &g[0].0);
                    let coef = fp::mul(c, fp::inv(g[0].1, self.p), self.p);
                    f = self.sub_mul(&f, coef, &q, g);
                }
                None => break,
            }
        }
        Vector { terms: f }
    }

    fn spoly(&self, f: &Vector, g: &Vector) -> Vector {
        let lf = &f.terms[0];
        let lg = &g.terms[0];
        let l = self.lcm(&lf.0, &lg.0);
        let mf = self.quotient(&l, &lf.0);
        let mg = self.quotient(&l, &lg.0);
        let a = self.scale(f, fp::inv(lf.1, self.p));
        let b = self.scale(g, fp::inv(lg.1, self.p));
        let fa = self.sub_mul(&[], self.p - 1, &mf, &a.terms);
        Vector {
            terms: self.sub_mul(&fa, 1, &mg, &b.terms),
        }
    }

    fn sugar_of(&self, v: &Vector) -> u32 {
        v.terms.iter().map(|(k, _)| self.total_degree(k)).max().unwrap_or(0)
    }

    /// Reduced Gröbner basis, sorted by increasing leading term.
    pub fn groebner(&self, gens: &[Vector]) -> Vec<Vector> {
        let mut basis: Vec<Vector> = Vec::new();
        let mut sugar: Vec<u32> = Vec::new();
        // (sugar, lcm, i, j)
        let mut pairs: BTreeSet<(u32, Key, usize, usize)> = BTreeSet::new();

        let mut pending: Vec<Vector> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
        pending.sort();
        pending.dedup();
        for g in pending {
            let s = self.sugar_of(&g);
            self.insert(&mut basis, &mut sugar, &mut pairs, self.monic(&g), s);
        }
        while let Some(pr) = pairs.iter().next().cloned() {
            pairs.remove(&pr);
            let (s, _, i, j) = pr;
            let sp = self.spoly(&basis[i], &basis[j]);
            let h = self.top_reduce(&sp, &basis);
            if h.is_zero() {
                continue;
            }
            let h = self.monic(&self.reduce(&h, &basis));
            self.insert(&mut basis, &mut sugar, &mut pairs, h, s);
        }
        // minimise
        let mut idx: Vec<usize> = (0..basis.len()).collect();
        idx.sort_by(|a, b| basis[*a].lead().cmp(&basis[*b].lead()));
        let mut minimal: Vec<Vector> = Vec::new();
        for k in idx {
            let l = basis[k].lead().unwrap();
            if minimal.iter().any(|g| self.divides(g.lead().unwrap(), l)) {
                continue;
            }
            minimal.push(basis[k].clone());
        }
        // interreduce
        let mut reduced = Vec::with_capacity(minimal.len());
        for i in 0..minimal.len() {
            let others: Vec<Vector> = minimal
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, g)| g.clone())
                .collect();
            let lead = minimal[i].terms[0].clone();
            let tail = Vector {
                terms: minimal[i].terms[1..].to_vec(),
            };
            let mut t = self.reduce(&tail, &others).terms;
            t.insert(0, lead);
            reduced.push(self.monic(&Vector { terms: t }));
        }
        reduced.sort_by(|a, b| a.lead().cmp(&b.lead()));
        reduced
    }

    fn insert(
        &self,
        basis: &mut Vec<Vector>,
        sugar: &mut Vec<u32>,
        pairs: &mut BTreeSet<(u32, Key, usize, usize)>,
        h: Vector,
        s: u32,
    ) {
        let n = basis.len();
        let lh = h.lead().unwrap().clone();
        // Gebauer-Moeller B criterion on existing pairs
        let doomed: Vec<(u32, Key, usize, usize)> = pairs
            .iter()
            .filter(|(_, l, i, j)| {
                self.divides(&lh, l)
                    && self.lcm(basis[*i].lead().unwrap(), &lh) != *l
                    && self.lcm(basis[*j].lead().unwrap(), &lh) != *l
            })
            .cloned()
            .collect();
        for d in doomed {
            pairs.remove(&d);
        }
        // candidate new pairs
        let mut cands: Vec<(Key, usize, u32)> = Vec::new();
        for i in 0..n {
            let li = basis[i].lead().unwrap();
            if self.pos(li) != self.pos(&lh) {
                continue;
            }
            let l = self.lcm(li, &lh);
            let si = sugar[i] + self.total_degree(&l) - self.total_degree(li);
            let sh = s + self.total_degree(&l) - self.total_degree(&lh);
            cands.push((l, i, si.max(sh)));
        }
        // M and F criteria among the new pairs
        let mut keep: Vec<(Key, usize, u32)> = Vec::new();
        for (a, ca) in cands.iter().enumerate() {
            let dominated = cands.iter().enumerate().any(|(b, cb)| {
                b != a && self.divides(&cb.0, &ca.0) && (cb.0 != ca.0 || b < a)
            });
            if !dominated {
                keep.push(ca.clone());
            }
        }
        basis.push(h);
        sugar.push(s);
        for (l, i, sg) in keep {
            pairs.insert((sg, l, i, n));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(e: &Engine, terms: &[(&[u32], u32)]) -> Vector {
        e.vector(terms.iter().map(|(x, c)| (0usize, x.to_vec(), *c)))
    }

    #[test]
    fn difference_gives_unit() {
        let e = Engine::grlex(2, 1);
        let g = e.groebner(&[poly(&e, &[(&[1], 1), (&[0], 1)]), poly(&e, &[(&[1], 1)])]);
        assert_eq!(g, vec![poly(&e, &[(&[0], 1)])]);
    }

    #[test]
    fn single_generator_made_monic() {
        let e = Engine::grlex(5, 2);
        let f = poly(&e, &[(&[1, 1], 3), (&[0, 0], 1)]);
        let g = e.groebner(&[f.clone()]);
        assert_eq!(g, vec![e.monic(&f)]);
    }

    #[test]
    fn cyclic_ideal_membership() {
        // x^2 - y, x*y - 1 over F_3: contains y^2 - x
        let e = Engine::grlex(3, 2);
        let f1 = poly(&e, &[(&[2, 0], 1), (&[0, 1], 2)]);
        let f2 = poly(&e, &[(&[1, 1], 1), (&[0, 0], 2)]);
        let g = e.groebner(&[f1, f2]);
        let t = poly(&e, &[(&[0, 2], 1), (&[1, 0], 2)]);
        assert!(e.reduce(&t, &g).is_zero());
        let u = poly(&e, &[(&[1, 0], 1)]);
        assert!(!e.reduce(&u, &g).is_zero());
        assert_eq!(e.groebner(&g), g);
    }

    #[test]
    fn module_positions_do_not_mix() {
        let e = Engine::grlex(2, 1);
        let a = e.vector([(0, vec![1], 1), (1, vec![0], 1)]);
        let b = e.vector([(1, vec![1], 1)]);
        let g = e.groebner(&[a.clone(), b.clone()]);
        assert!(e.reduce(&a, &g).is_zero());
        assert!(e.reduce(&b, &g).is_zero());
        // x*a - b = x^2 e0 + x e1 - x e1 = x^2 e0
        let c = e.vector([(0, vec![2], 1)]);
        assert!(e.reduce(&c, &g).is_zero());
        let d = e.vector([(0, vec![0], 1)]);
        assert!(!e.reduce(&d, &g).is_zero());
    }
}
