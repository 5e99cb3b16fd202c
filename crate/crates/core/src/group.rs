//! The group `G = Y ⋊ Z^n` for a finitely presented module `Y`, with
//! closed-form powers and the structure of finitely generated subgroups.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::lattice::{hermite, Lattice};
use crate::modcalc::{subring_presentation, FreeModuleElement, ModError, ModuleGb, ModulePresentation, Ring, SubringPresentation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group rings need every variable inverted")]
    NotLaurent,
    #[error("element has rank {0}, module has rank {1}")]
    Rank(usize, usize),
    #[error("translation part has length {0}, expected {1}")]
    Dimension(usize, usize),
    #[error("elements from different groups")]
    ContextMismatch,
    #[error(transparent)]
    Module(#[from] ModError),
}

/// The group `Y ⋊ Z^n` together with a Gröbner basis of `Y`'s relations.
#[derive(Debug)]
pub struct GroupContext {
    pub module: ModulePresentation,
    gb: ModuleGb,
}

/// `(y, a)` with `y` in normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    pub y: FreeModuleElement,
    pub a: Vec<i64>,
}

/// A word in generators: `(index, exponent)` factors, read left to right.
pub type Word = Vec<(usize, i64)>;

pub fn invert_word(w: &Word) -> Word {
    w.iter().rev().map(|(i, e)| (*i, -e)).collect()
}

pub fn power_word(w: &Word, k: i64) -> Word {
    let base = if k >= 0 { w.clone() } else { invert_word(w) };
    let mut out = Vec::new();
    for _ in 0..k.unsigned_abs() {
        out.extend(base.iter().cloned());
    }
    out
}

impl GroupContext {
    pub fn new(module: ModulePresentation) -> Result<Arc<GroupContext>, GroupError> {
        if !module.ring.all_laurent() {
            return Err(GroupError::NotLaurent);
        }
        let gb = ModuleGb::new(&module)?;
        Ok(Arc::new(GroupContext { module, gb }))
    }

    /// Lamplighter group `(Z/p) ≀ Z^n`.
    pub fn lamplighter(p: u32, n: usize) -> Arc<GroupContext> {
        GroupContext::new(ModulePresentation::free(Ring::laurent(p, n), 1)).expect("free module")
    }

    pub fn ring(&self) -> &Ring {
        &self.module.ring
    }

    pub fn p(&self) -> u32 {
        self.module.ring.p
    }

    pub fn n(&self) -> usize {
        self.module.ring.nvars()
    }

    pub fn rank(&self) -> usize {
        self.module.rank
    }

    pub fn normal_form(&self, y: &FreeModuleElement) -> FreeModuleElement {
        self.gb.normal_form(y).expect("admissible element")
    }

    pub fn module_gb(&self) -> &ModuleGb {
        &self.gb
    }

    pub fn element(&self, y: FreeModuleElement, a: Vec<i64>) -> Result<GroupElement, GroupError> {
        if y.rank() != self.rank() {
            return Err(GroupError::Rank(y.rank(), self.rank()));
        }
        if a.len() != self.n() {
            return Err(GroupError::Dimension(a.len(), self.n()));
        }
        Ok(GroupElement {
            y: self.normal_form(&y),
            a,
        })
    }

    /// `(y, 0)` for a scalar module (rank 1).
    pub fn lamp(&self, f: LaurentPoly) -> GroupElement {
        self.element(FreeModuleElement::scalar(f), vec![0; self.n()]).expect("rank-1 module")
    }

    pub fn translation(&self, a: Vec<i64>) -> GroupElement {
        self.element(FreeModuleElement::zero(self.ring(), self.rank()), a).expect("dimension")
    }

    pub fn identity(&self) -> GroupElement {
        self.translation(vec![0; self.n()])
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        g.y.is_zero() && g.a.iter().all(|x| *x == 0)
    }

    /// `(y, a)(y', a') = (y + X^a y', a + a')`.
    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let y = g.y.add(&h.y.shift(&g.a));
        let a = g.a.iter().zip(&h.a).map(|(x, z)| x + z).collect();
        GroupElement {
            y: self.normal_form(&y),
            a,
        }
    }

    /// `(y, a)^{-1} = (-X^{-a} y, -a)`.
    pub fn inv(&self, g: &GroupElement) -> GroupElement {
        let na: Vec<i64> = g.a.iter().map(|x| -x).collect();
        GroupElement {
            y: self.normal_form(&g.y.shift(&na).neg()),
            a: na,
        }
    }

    /// Closed form `(f, a)^z = (geom_sum(a, z) f, z a)`; for `a = 0` the
    /// power is `(z f, 0)`.
    pub fn power(&self, g: &GroupElement, z: i64) -> GroupElement {
        let p = self.p();
        let a: Vec<i64> = g.a.iter().map(|x| x * z).collect();
        let y = if g.a.iter().all(|x| *x == 0) {
            g.y.scale(crate::modcalc::residue(z, p))
        } else {
            let s = LaurentPoly::geom_sum(p, &g.a, z).expect("nonzero step");
            g.y.mul_poly(&s)
        };
        GroupElement {
            y: self.normal_form(&y),
            a,
        }
    }

    /// Conjugate `q g q^{-1}`.
    pub fn conjugate(&self, q: &GroupElement, g: &GroupElement) -> GroupElement {
        self.mul(&self.mul(q, g), &self.inv(q))
    }

    pub fn eval_word(&self, gens: &[GroupElement], w: &Word) -> GroupElement {
        let mut acc = self.identity();
        for (i, e) in w {
            acc = self.mul(&acc, &self.power(&gens[*i], *e));
        }
        acc
    }

    pub fn product(&self, els: &[GroupElement]) -> GroupElement {
        els.iter().fold(self.identity(), |acc, g| self.mul(&acc, g))
    }

    pub fn show(&self, g: &GroupElement) -> String {
        let a: Vec<String> = g.a.iter().map(|x| x.to_string()).collect();
        format!("({} ; {})", g.y.show(self.ring()), a.join(" "))
    }
}

/// Structure of `H = <gens>`: `π(H)`, lifts of its Hermite basis, and
/// generators of `Y ∩ H` as a module over `F_p[X^{π(H)}]`.
#[derive(Clone, Debug)]
pub struct SubgroupData {
    pub lattice: Lattice,
    pub lifts: Vec<(GroupElement, Word)>,
    pub kernel: Vec<(FreeModuleElement, Word)>,
    pub presentation: Option<SubringPresentation>,
}

/// Shortest words (by breadth-first search over `π`-images) realising each
/// target vector; falls back to the Hermite transform when the search is
/// exhausted.
fn lift_words(images: &[Vec<i64>], targets: &[Vec<i64>], fallback: &[Vec<i64>]) -> Vec<Word> {
    const MAX_LEN: usize = 6;
    const MAX_STATES: usize = 20_000;
    let n = images.first().map(|v| v.len()).unwrap_or(0);
    let mut found: HashMap<Vec<i64>, Word> = HashMap::new();
    let mut seen: HashMap<Vec<i64>, Word> = HashMap::new();
    let start = vec![0i64; n];
    seen.insert(start.clone(), Vec::new());
    let mut q = VecDeque::new();
    q.push_back(start);
    while let Some(v) = q.pop_front() {
        let w = seen[&v].clone();
        if targets.contains(&v) && !found.contains_key(&v) {
            found.insert(v.clone(), w.clone());
            if found.len() == targets.len() {
                break;
            }
        }
        if w.len() >= MAX_LEN || seen.len() > MAX_STATES {
            continue;
        }
        for (i, img) in images.iter().enumerate() {
            for s in [1i64, -1] {
                let u: Vec<i64> = v.iter().zip(img).map(|(a, b)| a + s * b).collect();
                if !seen.contains_key(&u) {
                    let mut w2 = w.clone();
                    w2.push((i, s));
                    seen.insert(u.clone(), w2);
                    q.push_back(u);
                }
            }
        }
    }
    targets
        .iter()
        .zip(fallback)
        .map(|(t, coef)| {
            found.get(t).cloned().unwrap_or_else(|| {
                coef.iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0)
                    .map(|(i, c)| (i, *c))
                    .collect()
            })
        })
        .collect()
}

/// Lattice, lifts and kernel generators (without the subring presentation).
pub fn subgroup_kernel(ctx: &GroupContext, gens: &[GroupElement]) -> SubgroupData {
    let n = ctx.n();
    let images: Vec<Vec<i64>> = gens.iter().map(|g| g.a.clone()).collect();
    let h = hermite(&images, n);
    let lattice = Lattice {
        dim: n,
        basis: h.basis.clone(),
    };
    let words = lift_words(&images, &h.basis, &h.transform);
    let lifts: Vec<(GroupElement, Word)> = words
        .iter()
        .map(|w| (ctx.eval_word(gens, w), w.clone()))
        .collect();
    let mut kernel: Vec<(FreeModuleElement, Word)> = Vec::new();
    let push = |g: GroupElement, w: Word, kernel: &mut Vec<(FreeModuleElement, Word)>| {
        debug_assert!(g.a.iter().all(|x| *x == 0));
        if !g.y.is_zero() && !kernel.iter().any(|(y, _)| *y == g.y) {
            kernel.push((g.y, w));
        }
    };
    for (t, g) in gens.iter().enumerate() {
        let c = lattice.coords(&g.a).expect("image lies in the lattice");
        let mut w: Word = Vec::new();
        for (j, cj) in c.iter().enumerate() {
            w.extend(power_word(&lifts[j].1, *cj));
        }
        let mut word = vec![(t, 1)];
        word.extend(invert_word(&w));
        let k = ctx.eval_word(gens, &word);
        push(k, word, &mut kernel);
    }
    for i in 0..lifts.len() {
        for j in i + 1..lifts.len() {
            let mut word = lifts[i].1.clone();
            word.extend(lifts[j].1.iter().cloned());
            word.extend(invert_word(&lifts[i].1));
            word.extend(invert_word(&lifts[j].1));
            let k = ctx.eval_word(gens, &word);
            push(k, word, &mut kernel);
        }
    }
    SubgroupData {
        lattice,
        lifts,
        kernel,
        presentation: None,
    }
}

/// Full subgroup structure including the presentation of `Y ∩ H` over
/// `F_p[X^{π(H)}]`.
pub fn subgroup_data(ctx: &GroupContext, gens: &[GroupElement]) -> Result<SubgroupData, GroupError> {
    let mut sd = subgroup_kernel(ctx, gens);
    let els: Vec<FreeModuleElement> = sd.kernel.iter().map(|(y, _)| y.clone()).collect();
    if !els.is_empty() {
        sd.presentation = Some(subring_presentation(&sd.lattice, &els, &ctx.module)?);
    }
    Ok(sd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(ctx: &GroupContext, y: &str, a: &[i64]) -> GroupElement {
        ctx.element(FreeModuleElement::scalar(ctx.ring().parse(y).unwrap()), a.to_vec()).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let ctx = GroupContext::lamplighter(2, 2);
        let g1 = el(&ctx, "1 + X2", &[2, 0]);
        let g2 = el(&ctx, "1", &[-2, 0]);
        assert_eq!(ctx.mul(&g1, &ctx.identity()), g1);
        assert_eq!(ctx.mul(&g1, &g2), el(&ctx, "1 + X2 + X1^2", &[0, 0]));
        let f = el(&ctx, "X1 + X2^-1", &[1, -3]);
        let y = el(&ctx, "1 + X1*X2", &[0, 0]);
        let c = ctx.conjugate(&f, &y);
        assert_eq!(c, el(&ctx, "X1*X2^-3 + X1^2*X2^-2", &[0, 0]));
    }

    #[test]
    fn power_examples() {
        let ctx = GroupContext::lamplighter(2, 2);
        let h = el(&ctx, "1 - X2", &[0, 1]);
        for n in -5..=5 {
            let expect = el(&ctx, &format!("1 - X2^{n}"), &[0, n]);
            assert_eq!(ctx.power(&h, n), expect);
        }
        assert_eq!(ctx.power(&h, 0), ctx.identity());
        let g1 = el(&ctx, "1 + X2", &[2, 0]);
        let g2 = el(&ctx, "1", &[-2, 0]);
        let g12 = ctx.mul(&g1, &g2);
        assert!(ctx.is_identity(&ctx.power(&g12, 2)));
    }

    #[test]
    fn quotient_module_normal_forms() {
        let ring = Ring::laurent(2, 2);
        let m = ModulePresentation::new(ring.clone(), 1, vec![FreeModuleElement::scalar(ring.parse("X1 + X2 + 1").unwrap())]).unwrap();
        let ctx = GroupContext::new(m).unwrap();
        let a = el(&ctx, "X1", &[0, 0]);
        let b = el(&ctx, "X2 + 1", &[0, 0]);
        assert_eq!(a, b);
    }

    #[test]
    fn subgroup_of_translating_pair() {
        let ctx = GroupContext::lamplighter(2, 2);
        let g1 = el(&ctx, "1 + X2", &[2, 0]);
        let g2 = el(&ctx, "1", &[-2, 0]);
        let sd = subgroup_data(&ctx, &[g1.clone(), g2.clone()]).unwrap();
        assert_eq!(sd.lattice.basis, vec![vec![2, 0]]);
        assert_eq!(sd.kernel.len(), 1);
        let (y, w) = &sd.kernel[0];
        let (stripped, _) = y.coords[0].strip_monomial();
        assert_eq!(stripped, ctx.ring().parse("1 + X2 + X1^2").unwrap());
        assert_eq!(ctx.eval_word(&[g1, g2], w).y, *y);
        let pres = sd.presentation.unwrap();
        assert!(pres.presentation.relations.is_empty());
    }

    #[test]
    fn subgroup_trivial_cases() {
        let ctx = GroupContext::lamplighter(3, 2);
        let t = vec![ctx.translation(vec![1, 0]), ctx.translation(vec![0, 1])];
        let sd = subgroup_data(&ctx, &t).unwrap();
        assert_eq!(sd.lattice, Lattice::full(2));
        assert!(sd.kernel.is_empty());
        let y = el(&ctx, "1 + X1", &[0, 0]);
        let sd = subgroup_data(&ctx, &[y.clone()]).unwrap();
        assert_eq!(sd.lattice.rank(), 0);
        assert_eq!(sd.kernel.len(), 1);
        assert!(ctx.is_identity(&ctx.power(&y, 3)));
    }
}
