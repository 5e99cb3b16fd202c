//! S-unit equations `X^{z_1} c_1 + ... + X^{z_m} c_m = c_0` over finitely
//! presented modules, with exponents `z_i = L_i x` linear in an unknown
//! `x in Z^k`. The module is split into components whose solution sets
//! intersect to the full solution set; each component is solved either
//! through the finite group its variables generate or by exploring the
//! p-kernel of the matrix equation over a rational function field.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::digitset::{DigitAutomaton, Letter, Status};
use crate::gb::{Key, Vector};
use crate::laurent::{fp, LaurentPoly};
use crate::lattice::{smith as int_smith, Lattice};
use crate::modcalc::{
    fp_dimension_capped, intersect, member_mod, Encoding, FpDimension, FreeModuleElement, ModError, ModuleGb, ModulePresentation, Ring, sum as module_sum,
};
use crate::ratfun::{self, mat_mul, rref, Echelon, Frac, KMat, KVec};
use crate::upoly::{factor, smith as poly_smith, UPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SUnitError {
    #[error("no decomposition available: {0}")]
    DecompositionUnavailable(String),
    #[error("decomposition hint rejected: {0}")]
    InvalidHint(String),
    #[error("no parameter set makes the component a torsion-free module of finite rank")]
    NormalizationFailed,
    #[error("variable {0} does not act invertibly")]
    NonInvertibleAction(String),
    #[error("component is not finite-dimensional")]
    InfiniteDimension,
    #[error("kernel exploration exceeded its budget")]
    KernelBudgetExceeded,
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Module(#[from] ModError),
}

/// `Σ_i X^{L_i x} c_i = c_0` in `module`, `x in Z^nx`.
#[derive(Clone, Debug)]
pub struct SUnitInstance {
    pub module: ModulePresentation,
    /// `c_0, c_1, ..., c_m`
    pub constants: Vec<FreeModuleElement>,
    /// `map[i][j]` is the row giving exponent `j` of block `i + 1` as a
    /// linear form in `x`.
    pub map: Vec<Vec<Vec<i64>>>,
    pub nx: usize,
}

impl SUnitInstance {
    /// Independent exponent blocks: `x = (z_1, ..., z_m) in Z^{nm}`.
    pub fn new(module: ModulePresentation, constants: Vec<FreeModuleElement>) -> Result<SUnitInstance, SUnitError> {
        let n = module.ring.nvars();
        let m = constants.len().saturating_sub(1);
        let map = (0..m)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut r = vec![0; n * m];
                        r[i * n + j] = 1;
                        r
                    })
                    .collect()
            })
            .collect();
        SUnitInstance::with_map(module, constants, map, n * m)
    }

    pub fn with_map(module: ModulePresentation, constants: Vec<FreeModuleElement>, map: Vec<Vec<Vec<i64>>>, nx: usize) -> Result<SUnitInstance, SUnitError> {
        if constants.is_empty() {
            return Err(SUnitError::Invalid("at least the constant c0 is required".into()));
        }
        let n = module.ring.nvars();
        if map.len() != constants.len() - 1 {
            return Err(SUnitError::Invalid(format!("{} exponent blocks for {} constants", map.len(), constants.len())));
        }
        for c in &constants {
            if c.rank() != module.rank {
                return Err(SUnitError::Module(ModError::RankMismatch(c.rank(), module.rank)));
            }
        }
        for blk in &map {
            if blk.len() != n || blk.iter().any(|r| r.len() != nx) {
                return Err(SUnitError::Invalid("exponent map has the wrong shape".into()));
            }
            for (j, row) in blk.iter().enumerate() {
                if !module.ring.laurent[j] {
                    let nz: Vec<&i64> = row.iter().filter(|x| **x != 0).collect();
                    if !(nz.is_empty() || (nz.len() == 1 && *nz[0] == 1)) {
                        return Err(SUnitError::Invalid(format!(
                            "exponent of polynomial variable {} must be zero or a single unknown",
                            module.ring.names[j]
                        )));
                    }
                }
            }
        }
        let gb = ModuleGb::new(&module)?;
        let constants = constants.iter().map(|c| gb.normal_form(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(SUnitInstance { module, constants, map, nx })
    }

    pub fn blocks(&self) -> usize {
        self.constants.len() - 1
    }

    pub fn ring(&self) -> &Ring {
        &self.module.ring
    }

    /// Exponent vectors `z_i = L_i x`.
    pub fn exponents(&self, x: &[i64]) -> Vec<Vec<i64>> {
        self.map
            .iter()
            .map(|blk| blk.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect())
            .collect()
    }

    /// Whether `x` solves the equation in the module presented with
    /// relations `gb`; `false` when a polynomial variable gets a negative
    /// exponent.
    pub fn holds_in(&self, gb: &ModuleGb, constants: &[FreeModuleElement], x: &[i64]) -> Result<bool, ModError> {
        let ring = self.ring();
        let mut acc = constants[0].neg();
        for (z, c) in self.exponents(x).iter().zip(&constants[1..]) {
            if c.is_zero() {
                continue;
            }
            if z.iter().enumerate().any(|(j, e)| *e < 0 && !ring.laurent[j]) {
                return Ok(false);
            }
            acc = acc.add(&c.shift(z));
        }
        gb.is_zero(&acc)
    }
}

/// One piece of a decomposition `N = ∩ N_i`: the quotient by `N_i` and the
/// images of the constants.
#[derive(Clone, Debug)]
pub struct CoprimaryComponent {
    pub module: ModulePresentation,
    pub constants: Vec<FreeModuleElement>,
    pub label: String,
    /// Declared prime, when known.
    pub prime: Option<Vec<FreeModuleElement>>,
}

impl CoprimaryComponent {
    pub fn new(module: ModulePresentation, constants: &[FreeModuleElement], label: String) -> Result<CoprimaryComponent, SUnitError> {
        let gb = ModuleGb::new(&module)?;
        let constants = constants.iter().map(|c| gb.normal_form(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(CoprimaryComponent {
            module,
            constants,
            label,
            prime: None,
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.constants.iter().all(|c| c.is_zero())
    }
}

/// Shift Laurent variables so their exponents are nonnegative (a unit
/// multiple).
fn clear_laurent(f: &LaurentPoly, ring: &Ring) -> LaurentPoly {
    let Some(min) = f.min_exponents() else { return f.clone() };
    let s: Vec<i64> = min.iter().enumerate().map(|(j, m)| if ring.laurent[j] { -m } else { 0 }).collect();
    f.shift(&s)
}

fn normalize_atom(f: &LaurentPoly, ring: &Ring) -> LaurentPoly {
    clear_laurent(f, ring).monic()
}

/// Irreducible factors of `f` when `f` is a unit times `g(X^v)` for a
/// single primitive direction `v`.
pub fn univariate_atoms(f: &LaurentPoly, ring: &Ring) -> Option<Vec<(LaurentPoly, u32)>> {
    let p = ring.p;
    let n = ring.nvars();
    let pts: Vec<Vec<i64>> = f.terms().map(|(e, _)| e.clone()).collect();
    if pts.len() <= 1 {
        return Some(Vec::new());
    }
    let diffs: Vec<Vec<i64>> = pts[1..].iter().map(|q| q.iter().zip(&pts[0]).map(|(a, b)| a - b).collect()).collect();
    let lat = Lattice::from_generators(&diffs, n);
    if lat.rank() != 1 {
        return None;
    }
    let mut v = lat.basis[0].clone();
    let g = v.iter().fold(0i64, |a, b| num_gcd(a, *b));
    v.iter_mut().for_each(|x| *x /= g);
    let poly_vars: Vec<usize> = (0..n).filter(|j| v[*j] != 0 && !ring.laurent[*j]).collect();
    if !poly_vars.is_empty() {
        if poly_vars.len() != 1 || v.iter().filter(|x| **x != 0).count() != 1 {
            return None;
        }
        if v[poly_vars[0]] < 0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let piv = v.iter().position(|x| *x != 0).unwrap();
    let ks: Vec<i64> = pts.iter().map(|q| (q[piv] - pts[0][piv]) / v[piv]).collect();
    let kmin = *ks.iter().min().unwrap();
    let deg = (ks.iter().max().unwrap() - kmin) as usize;
    let mut c = vec![0u32; deg + 1];
    for (q, k) in pts.iter().zip(&ks) {
        c[(k - kmin) as usize] = f.coeff(q);
    }
    let u = UPoly::new(p, c);
    let mut out = Vec::new();
    for (h, e) in factor(&u) {
        let terms = h.c.iter().enumerate().filter(|(_, x)| **x != 0).map(|(i, x)| (v.iter().map(|y| y * i as i64).collect::<Vec<i64>>(), *x as i64));
        let a = LaurentPoly::from_terms(p, n, terms);
        out.push((normalize_atom(&a, ring), e));
    }
    Some(out)
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        num_gcd(b, a % b)
    }
}

fn upoly_to_laurent(u: &UPoly) -> LaurentPoly {
    LaurentPoly::from_terms(u.p, 1, u.c.iter().enumerate().filter(|(_, x)| **x != 0).map(|(i, x)| (vec![i as i64], *x as i64)))
}

fn laurent_to_upoly(f: &LaurentPoly) -> UPoly {
    let d = f.terms().map(|(e, _)| e[0]).max().unwrap_or(0).max(0) as usize;
    let mut c = vec![0u32; d + 1];
    for (e, x) in f.terms() {
        c[e[0] as usize] = x;
    }
    UPoly::new(f.prime(), c)
}

/// Split the instance's module into components whose kernels intersect to
/// zero. `known` lists polynomials whose irreducible factors should be
/// split off first.
pub fn decompose(inst: &SUnitInstance, hint: Option<&[Vec<FreeModuleElement>]>, known: &[LaurentPoly]) -> Result<Vec<CoprimaryComponent>, SUnitError> {
    let pres = &inst.module;
    let ring = &pres.ring;
    let d = pres.rank;
    let rels: Vec<FreeModuleElement> = pres.relations.iter().filter(|r| !r.is_zero()).cloned().collect();
    if let Some(h) = hint {
        return decompose_with_hint(inst, h);
    }
    if rels.is_empty() {
        return Ok(vec![CoprimaryComponent::new(pres.clone(), &inst.constants, "free".into())?]);
    }
    if ring.nvars() == 1 {
        return decompose_univariate(inst, &rels);
    }
    if d == 1 {
        let polys: Vec<LaurentPoly> = rels.iter().map(|r| clear_laurent(&r.coords[0], ring)).collect();
        let mut g = polys[0].clone();
        for q in &polys[1..] {
            g = ratfun::gcd(&g, q);
        }
        let gen = FreeModuleElement::scalar(g.clone());
        if member_mod(&ModulePresentation::free(ring.clone(), 1), &gen, &rels)? {
            return decompose_principal(inst, &g, known);
        }
    }
    if let FpDimension::Finite(..) = fp_dimension_capped(pres, 4096)? {
        return Ok(vec![CoprimaryComponent::new(pres.clone(), &inst.constants, "finite".into())?]);
    }
    let comp = CoprimaryComponent::new(pres.clone(), &inst.constants, "whole".into())?;
    if noether_normalize(&comp).is_ok() {
        return Ok(vec![comp]);
    }
    if let Some(parts) = split_saturation(inst, &rels, known)? {
        return Ok(parts);
    }
    Err(SUnitError::DecompositionUnavailable(
        "module is neither principal, univariate, finite nor torsion-free over a parameter ring".into(),
    ))
}

/// `N : q` for a submodule `N` of the free module.
fn colon(ring: &Ring, rank: usize, rels: &[FreeModuleElement], q: &LaurentPoly) -> Result<Vec<FreeModuleElement>, SUnitError> {
    let qf: Vec<FreeModuleElement> = (0..rank).map(|i| FreeModuleElement::unit(ring, rank, i).mul_poly(q)).collect();
    let meet = intersect(ring, rank, rels, &qf)?;
    meet.iter()
        .map(|v| {
            let coords = v
                .coords
                .iter()
                .map(|c| {
                    if c.is_zero() {
                        return Some(c.clone());
                    }
                    let (body, mono) = c.strip_monomial();
                    ratfun::div_exact(&body, q).map(|x| x.shift(&mono))
                })
                .collect::<Option<Vec<_>>>();
            coords.map(FreeModuleElement::new).ok_or_else(|| SUnitError::Invalid("colon generator not divisible".into()))
        })
        .collect()
}

fn contained(ring: &Ring, rank: usize, a: &[FreeModuleElement], b: &[FreeModuleElement]) -> Result<bool, SUnitError> {
    let free = ModulePresentation::free(ring.clone(), rank);
    for v in a {
        if !member_mod(&free, v, b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Split `N = (N : q^k) ∩ (N + q^k F)` along a factor `q` of a known
/// polynomial or of a relation entry, where `k` is the step at
/// which the colon chain stabilises. Each side is decomposed again.
fn split_saturation(inst: &SUnitInstance, rels: &[FreeModuleElement], known: &[LaurentPoly]) -> Result<Option<Vec<CoprimaryComponent>>, SUnitError> {
    const MAX_STEPS: usize = 8;
    let ring = &inst.module.ring;
    let d = inst.module.rank;
    let mut cands: Vec<LaurentPoly> = known.to_vec();
    cands.extend(rels.iter().flat_map(|r| r.coords.iter().cloned()));
    let mut atoms: Vec<LaurentPoly> = Vec::new();
    for q in &cands {
        let (stripped, _) = q.strip_monomial();
        if stripped.terms().count() <= 1 {
            continue;
        }
        let fs = univariate_atoms(&stripped, ring).unwrap_or_else(|| {
            ratfun::content_factors(&stripped)
                .into_iter()
                .flat_map(|g| univariate_atoms(&g, ring).unwrap_or_else(|| vec![(g, 1)]))
                .collect()
        });
        for (a, _) in fs {
            if !atoms.contains(&a) {
                atoms.push(a);
            }
        }
    }
    for q in atoms {
        let mut sat = rels.to_vec();
        let mut qk = ring.one();
        let mut stable = false;
        for _ in 0..MAX_STEPS {
            let next = colon(ring, d, &sat, &q)?;
            qk = qk.mul(&q);
            if contained(ring, d, &next, &sat)? {
                stable = true;
                break;
            }
            sat = module_sum(&sat, &next);
        }
        if !stable || contained(ring, d, &sat, rels)? {
            continue;
        }
        let power: Vec<FreeModuleElement> = (0..d).map(|i| FreeModuleElement::unit(ring, d, i).mul_poly(&qk)).collect();
        if contained(ring, d, &power, rels)? {
            continue;
        }
        let mut out = Vec::new();
        for (side, gens) in [("sat", sat), ("nil", module_sum(rels, &power))] {
            let sub = SUnitInstance {
                module: ModulePresentation::new(ring.clone(), d, gens)?,
                ..inst.clone()
            };
            for mut c in decompose(&sub, None, known)? {
                c.label = format!("{side}({}): {}", ring.show(&q), c.label);
                out.push(c);
            }
        }
        return Ok(Some(out));
    }
    Ok(None)
}

fn decompose_with_hint(inst: &SUnitInstance, hint: &[Vec<FreeModuleElement>]) -> Result<Vec<CoprimaryComponent>, SUnitError> {
    let pres = &inst.module;
    let ring = &pres.ring;
    let d = pres.rank;
    if hint.is_empty() {
        return Err(SUnitError::InvalidHint("no components given".into()));
    }
    let mut inter: Vec<FreeModuleElement> = hint[0].clone();
    for h in &hint[1..] {
        inter = intersect(ring, d, &inter, h)?;
    }
    let free = ModulePresentation::free(ring.clone(), d);
    for r in &pres.relations {
        if !member_mod(&free, r, &inter)? {
            return Err(SUnitError::InvalidHint("a relation is missing from the intersection".into()));
        }
    }
    for r in &inter {
        if !member_mod(&free, r, &pres.relations)? {
            return Err(SUnitError::InvalidHint("the intersection is larger than the relation module".into()));
        }
    }
    hint.iter()
        .enumerate()
        .map(|(i, h)| {
            let m = ModulePresentation::new(ring.clone(), d, h.clone())?;
            let mut c = CoprimaryComponent::new(m, &inst.constants, format!("hint {}", i + 1))?;
            c.prime = None;
            Ok(c)
        })
        .collect()
}

fn decompose_univariate(inst: &SUnitInstance, rels: &[FreeModuleElement]) -> Result<Vec<CoprimaryComponent>, SUnitError> {
    let ring = &inst.module.ring;
    let p = ring.p;
    let d = inst.module.rank;
    let laurent = ring.laurent[0];
    let rows: Vec<Vec<UPoly>> = rels
        .iter()
        .map(|r| {
            let min = r.coords.iter().filter_map(|c| c.min_exponents()).map(|e| e[0]).min().unwrap_or(0);
            let s = if laurent { -min } else { 0 };
            r.coords.iter().map(|c| laurent_to_upoly(&c.shift(&[s]))).collect()
        })
        .collect();
    let sm = poly_smith(&rows, d, p);
    let q: Vec<Vec<LaurentPoly>> = sm.q.iter().map(|r| r.iter().map(upoly_to_laurent).collect()).collect();
    let project = |c: &FreeModuleElement, k: usize| -> FreeModuleElement {
        let mut acc = ring.zero();
        for j in 0..d {
            acc = acc.add(&c.coords[j].mul(&q[j][k]));
        }
        FreeModuleElement::scalar(acc)
    };
    let mut out = Vec::new();
    for k in 0..d {
        let dk = sm.diag.get(k).cloned().unwrap_or_else(|| UPoly::zero(p));
        let consts: Vec<FreeModuleElement> = inst.constants.iter().map(|c| project(c, k)).collect();
        if dk.is_zero() {
            out.push(CoprimaryComponent::new(ModulePresentation::free(ring.clone(), 1), &consts, format!("free summand {}", k + 1))?);
            continue;
        }
        for (pi, e) in factor(&dk) {
            if laurent && pi.c == [0, 1] {
                continue;
            }
            let gen = upoly_to_laurent(&pi.pow(e));
            let m = ModulePresentation::new(ring.clone(), 1, vec![FreeModuleElement::scalar(gen.clone())])?;
            let label = format!("summand {}: ({})^{}", k + 1, ring.show(&upoly_to_laurent(&pi)), e);
            let mut c = CoprimaryComponent::new(m, &consts, label)?;
            c.prime = Some(vec![FreeModuleElement::scalar(upoly_to_laurent(&pi))]);
            out.push(c);
        }
    }
    Ok(out)
}

fn decompose_principal(inst: &SUnitInstance, f: &LaurentPoly, known: &[LaurentPoly]) -> Result<Vec<CoprimaryComponent>, SUnitError> {
    let ring = &inst.module.ring;
    let n = ring.nvars();
    let (stripped, mono) = f.strip_monomial();
    let mut parts: Vec<(LaurentPoly, u32)> = Vec::new();
    for j in 0..n {
        if !ring.laurent[j] && mono[j] > 0 {
            parts.push((ring.var(j), mono[j] as u32));
        }
    }
    let mut atoms: Vec<LaurentPoly> = Vec::new();
    for q in known {
        if q.is_zero() {
            continue;
        }
        if let Some(fs) = univariate_atoms(q, ring) {
            for (a, _) in fs {
                if !atoms.contains(&a) {
                    atoms.push(a);
                }
            }
        }
    }
    let mut r = stripped.monic();
    for a in atoms {
        let mut e = 0;
        while let Some(qt) = ratfun::div_exact(&r, &a) {
            r = qt;
            e += 1;
        }
        if e > 0 {
            parts.push((a, e));
        }
    }
    if r.terms().count() > 1 {
        match univariate_atoms(&r, ring) {
            Some(fs) => parts.extend(fs),
            None => parts.push((r.monic(), 1)),
        }
    }
    parts
        .into_iter()
        .map(|(a, e)| {
            let gen = a.pow(e as u64);
            let m = ModulePresentation::new(ring.clone(), 1, vec![FreeModuleElement::scalar(gen)])?;
            let label = if e == 1 { format!("({})", ring.show(&a)) } else { format!("({})^{}", ring.show(&a), e) };
            let mut c = CoprimaryComponent::new(m, &inst.constants, label)?;
            c.prime = Some(vec![FreeModuleElement::scalar(a)]);
            Ok(c)
        })
        .collect()
}

// ---------------------------------------------------------------------
// Parameter selection and matrix form

/// A K-form element: `(engine key with parameter exponents zeroed) -> coefficient`.
type KForm = BTreeMap<Key, Frac>;

/// The component as a vector space over `K = F_p(params)`, with a basis of
/// standard monomials for a block order where non-parameters dominate.
#[derive(Clone, Debug)]
pub struct Normalization {
    pub ring: Ring,
    pub rank: usize,
    /// ring indices of the parameter variables
    pub params: Vec<usize>,
    enc: Encoding,
    /// engine index of each parameter's inverse partner
    partners: Vec<Option<usize>>,
    /// Gröbner basis in K-form: terms sorted descending, lead first
    gb: Vec<Vec<(Key, LaurentPoly)>>,
    pub basis: Vec<Key>,
    index: HashMap<Key, usize>,
}

impl Normalization {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn s(&self) -> usize {
        self.params.len()
    }

    fn kform(&self, v: &Vector) -> KForm {
        let eng = &self.enc.engine;
        let mut out: BTreeMap<Key, LaurentPoly> = BTreeMap::new();
        for (pos, e, c) in eng.unpack(v) {
            let (ye, ze) = split_params(&self.params, &self.partners, &e);
            out.entry(eng.term(pos, &ze)).or_insert_with(|| LaurentPoly::zero(self.ring.p, self.s())).add_term(ye, c);
        }
        out.into_iter().filter(|(_, f)| !f.is_zero()).map(|(k, f)| (k, frac_of(&f))).collect()
    }

    fn divides(&self, lead: &Key, t: &Key) -> Option<Vec<u32>> {
        let eng = &self.enc.engine;
        if eng.pos(lead) != eng.pos(t) {
            return None;
        }
        let (a, b) = (eng.exps(lead), eng.exps(t));
        if a.iter().zip(&b).all(|(x, y)| x <= y) {
            Some(b.iter().zip(&a).map(|(y, x)| y - x).collect())
        } else {
            None
        }
    }

    fn reduce(&self, mut f: KForm) -> KForm {
        let eng = &self.enc.engine;
        let mut cur = f.keys().next_back().cloned();
        while let Some(t) = cur {
            let hit = self.gb.iter().find_map(|g| self.divides(&g[0].0, &t).map(|sh| (g, sh)));
            if let Some((g, sh)) = hit {
                let c = f.remove(&t).unwrap();
                let k = c.div(&frac_of(&g[0].1));
                for (gk, gc) in &g[1..] {
                    let pos = eng.pos(gk);
                    let e: Vec<u32> = eng.exps(gk).iter().zip(&sh).map(|(a, b)| a + b).collect();
                    let nk = eng.term(pos, &e);
                    let delta = k.mul(&frac_of(gc));
                    let nv = match f.get(&nk) {
                        Some(old) => old.sub(&delta),
                        None => delta.neg(),
                    };
                    if nv.is_zero() {
                        f.remove(&nk);
                    } else {
                        f.insert(nk, nv);
                    }
                }
            }
            cur = f.range(..t).next_back().map(|(k, _)| k.clone());
        }
        f
    }

    fn coords_of(&self, f: &KForm) -> KVec {
        let p = self.ring.p;
        let s = self.s();
        let mut out = vec![Frac::zero(p, s); self.dim()];
        for (k, c) in f {
            let i = *self.index.get(k).expect("normal form uses standard monomials");
            out[i] = c.clone();
        }
        out
    }

    /// Coordinates of a module element in the K-basis.
    pub fn coords(&self, v: &FreeModuleElement) -> Result<KVec, ModError> {
        let e = self.enc.encode(v, 0)?;
        Ok(self.coords_of(&self.reduce(self.kform(&e))))
    }

    /// Matrix of multiplication by engine variable `var`.
    fn action(&self, var: usize) -> KMat {
        let eng = &self.enc.engine;
        let d = self.dim();
        let mut cols = Vec::with_capacity(d);
        for b in &self.basis {
            let mut e = eng.exps(b);
            e[var] += 1;
            let v = eng.vector([(eng.pos(b), e, 1)]);
            cols.push(self.coords_of(&self.reduce(self.kform(&v))));
        }
        (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|j| self.ring.names[*j].clone()).collect()
    }
}

/// Split engine exponents into parameter exponents (a Laurent monomial)
/// and the remaining exponents with the parameter part zeroed.
fn split_params(params: &[usize], partners: &[Option<usize>], e: &[u32]) -> (Vec<i64>, Vec<u32>) {
    let mut ze = e.to_vec();
    let mut ye = Vec::with_capacity(params.len());
    for (j, pj) in params.iter().zip(partners) {
        let mut x = e[*j] as i64;
        ze[*j] = 0;
        if let Some(q) = pj {
            x -= e[*q] as i64;
            ze[*q] = 0;
        }
        ye.push(x);
    }
    (ye, ze)
}

/// Fraction with polynomial numerator and denominator.
fn frac_of(f: &LaurentPoly) -> Frac {
    let Some(min) = f.min_exponents() else { return Frac::poly(f.clone()) };
    if min.iter().all(|x| *x >= 0) {
        return Frac::poly(f.clone());
    }
    let s: Vec<i64> = min.iter().map(|x| (-x).max(0)).collect();
    Frac::new(f.shift(&s), LaurentPoly::monomial(f.prime(), s, 1))
}

fn subsets_desc(n: usize) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0..(1u32 << n)).map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect();
    all.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    all
}

fn try_parameters(pres: &ModulePresentation, params: &[usize], cap: usize) -> Result<Option<Normalization>, SUnitError> {
    let ring = &pres.ring;
    let n = ring.nvars();
    let rank = pres.rank;
    let others: Vec<usize> = (0..n).filter(|j| !params.contains(j)).collect();
    let enc = Encoding::new(ring, &[others, params.to_vec()]);
    let eng = enc.engine.clone();
    let mut gens: Vec<Vector> = Vec::new();
    for r in &pres.relations {
        gens.push(enc.encode(r, 0)?);
    }
    gens.extend(enc.inverse_relations(rank));
    let gb = if gens.is_empty() { Vec::new() } else { eng.groebner(&gens) };
    let nv = eng.nvars();
    let partners: Vec<Option<usize>> = params.iter().map(|j| enc.inverse_of(*j)).collect();
    let zvars: Vec<usize> = (0..nv).filter(|v| !params.contains(v) && !partners.contains(&Some(*v))).collect();
    let mut norm = Normalization {
        ring: ring.clone(),
        rank,
        params: params.to_vec(),
        enc,
        partners: partners.clone(),
        gb: Vec::new(),
        basis: Vec::new(),
        index: HashMap::new(),
    };
    let s = params.len();
    let p = ring.p;
    for g in &gb {
        let mut grouped: BTreeMap<Key, LaurentPoly> = BTreeMap::new();
        for (pos, e, c) in eng.unpack(g) {
            let (ye, ze) = split_params(params, &partners, &e);
            grouped.entry(eng.term(pos, &ze)).or_insert_with(|| LaurentPoly::zero(p, s)).add_term(ye, c);
        }
        let mut v: Vec<(Key, LaurentPoly)> = grouped.into_iter().filter(|(_, f)| !f.is_zero()).collect();
        if v.is_empty() {
            continue;
        }
        v.reverse();
        norm.gb.push(v);
    }
    let leads: Vec<(usize, Vec<u32>)> = norm.gb.iter().map(|g| (eng.pos(&g[0].0), eng.exps(&g[0].0))).collect();
    for pos in 0..rank {
        if leads.iter().any(|(q, e)| *q == pos && e.iter().all(|x| *x == 0)) {
            continue;
        }
        for v in &zvars {
            let pure = leads.iter().any(|(q, e)| *q == pos && e[*v] > 0 && e.iter().enumerate().all(|(i, x)| i == *v || *x == 0));
            if !pure {
                return Ok(None);
            }
        }
    }
    let standard = |pos: usize, e: &[u32]| !leads.iter().any(|(q, l)| *q == pos && l.iter().zip(e).all(|(a, b)| a <= b));
    let mut basis: Vec<Key> = Vec::new();
    for pos in 0..rank {
        let start = vec![0u32; nv];
        if !standard(pos, &start) {
            continue;
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut stack = vec![start];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.clone()) {
                continue;
            }
            if seen.len() + basis.len() > cap {
                return Ok(None);
            }
            for v in &zvars {
                let mut f = e.clone();
                f[*v] += 1;
                if standard(pos, &f) && !seen.contains(&f) {
                    stack.push(f);
                }
            }
        }
        basis.extend(seen.into_iter().map(|e| eng.term(pos, &e)));
    }
    if basis.is_empty() {
        return Ok(None);
    }
    basis.sort();
    basis.reverse();
    norm.index = basis.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    norm.basis = basis;
    // saturation: N : h = N for the product h of leading coefficients
    let mut h = ring.one();
    for g in &norm.gb {
        let lc = &g[0].1;
        let mapped = LaurentPoly::from_terms(
            p,
            n,
            lc.terms().map(|(e, c)| {
                let mut ex = vec![0i64; n];
                for (q, j) in params.iter().enumerate() {
                    ex[*j] = e[q];
                }
                (ex, c as i64)
            }),
        );
        h = h.mul(&mapped);
    }
    let h = clear_laurent(&h, ring);
    let unit = h.is_monomial() && h.terms().all(|(e, _)| e.iter().enumerate().all(|(j, x)| *x == 0 || ring.laurent[j]));
    let rels: Vec<FreeModuleElement> = pres.relations.iter().filter(|r| !r.is_zero()).cloned().collect();
    if !unit && !rels.is_empty() {
        let hs: Vec<FreeModuleElement> = (0..rank).map(|k| FreeModuleElement::unit(ring, rank, k).mul_poly(&h)).collect();
        let rgb = ModuleGb::new(pres)?;
        for w in intersect(ring, rank, &rels, &hs)? {
            let coords: Option<Vec<LaurentPoly>> = w.coords.iter().map(|c| divide_laurent(c, &h, ring)).collect();
            let coords = coords.ok_or(SUnitError::NormalizationFailed)?;
            if !rgb.is_zero(&FreeModuleElement::new(coords))? {
                return Ok(None);
            }
        }
    }
    Ok(Some(norm))
}

/// `a / h` in the ring, when exact.
fn divide_laurent(a: &LaurentPoly, h: &LaurentPoly, ring: &Ring) -> Option<LaurentPoly> {
    if a.is_zero() {
        return Some(a.clone());
    }
    let amin = a.min_exponents().unwrap();
    let hmin = h.min_exponents().unwrap();
    let sa: Vec<i64> = amin.iter().map(|x| -x).collect();
    let sh: Vec<i64> = hmin.iter().map(|x| -x).collect();
    let q = ratfun::div_exact(&a.shift(&sa), &h.shift(&sh))?;
    let back: Vec<i64> = amin.iter().zip(&hmin).map(|(x, y)| x - y).collect();
    let r = q.shift(&back);
    if r.terms().any(|(e, _)| e.iter().enumerate().any(|(j, x)| *x < 0 && !ring.laurent[j])) {
        return None;
    }
    Some(r)
}

/// Choose parameters `Y ⊆ X` so the component is a torsion-free module of
/// finite rank `D > 0` over `F_p[Y]` (saturated relations); larger
/// parameter sets are tried first.
pub fn noether_normalize(comp: &CoprimaryComponent) -> Result<Normalization, SUnitError> {
    let n = comp.module.ring.nvars();
    for params in subsets_desc(n) {
        if let Some(norm) = try_parameters(&comp.module, &params, 64)? {
            return Ok(norm);
        }
    }
    Err(SUnitError::NormalizationFailed)
}

/// Actions of the ring variables on `K^D` and the coordinates of the
/// constants.
#[derive(Clone, Debug)]
pub struct MatrixForm {
    pub norm: Normalization,
    pub act: Vec<KMat>,
    /// inverse actions, for Laurent variables
    pub act_inv: Vec<Option<KMat>>,
    pub constants: Vec<KVec>,
}

impl MatrixForm {
    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    /// `A^z` applied to `v` (`z` may be negative only for Laurent variables).
    pub fn apply(&self, z: &[i64], v: &[Frac]) -> KVec {
        let mut w = v.to_vec();
        for (j, e) in z.iter().enumerate() {
            let m = if *e >= 0 { &self.act[j] } else { self.act_inv[j].as_ref().expect("invertible action") };
            for _ in 0..e.unsigned_abs() {
                w = ratfun::mat_vec(m, &w);
            }
        }
        w
    }
}

pub fn to_matrix_form(comp: &CoprimaryComponent, norm: &Normalization) -> Result<MatrixForm, SUnitError> {
    let ring = &comp.module.ring;
    let n = ring.nvars();
    let mut act = Vec::with_capacity(n);
    let mut act_inv = Vec::with_capacity(n);
    for j in 0..n {
        let a = norm.action(j);
        let ai = match norm.enc.inverse_of(j) {
            Some(jj) => {
                let b = norm.action(jj);
                if mat_mul(&a, &b) != ratfun::identity(ring.p, norm.s(), norm.dim()) {
                    return Err(SUnitError::NonInvertibleAction(ring.names[j].clone()));
                }
                Some(b)
            }
            None => None,
        };
        act.push(a);
        act_inv.push(ai);
    }
    for i in 0..n {
        for j in 0..i {
            if mat_mul(&act[i], &act[j]) != mat_mul(&act[j], &act[i]) {
                return Err(SUnitError::Invalid("actions do not commute".into()));
            }
        }
    }
    let constants = comp.constants.iter().map(|c| norm.coords(c)).collect::<Result<Vec<_>, _>>()?;
    Ok(MatrixForm {
        norm: norm.clone(),
        act,
        act_inv,
        constants,
    })
}

// ---------------------------------------------------------------------
// Finite backend

fn fmat_vec(a: &[Vec<u32>], v: &[u32], p: u32) -> Vec<u32> {
    a.iter()
        .map(|r| r.iter().zip(v).fold(0u64, |acc, (x, y)| (acc + *x as u64 * *y as u64) % p as u64) as u32)
        .collect()
}

fn fmat_inv(a: &[Vec<u32>], p: u32) -> Option<Vec<Vec<u32>>> {
    let n = a.len();
    let mut m: Vec<Vec<u32>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| (i == j) as u32));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|r| m[*r][c] != 0)?;
        m.swap(c, piv);
        let inv = fp::inv(m[c][c], p);
        m[c] = m[c].iter().map(|x| fp::mul(*x, inv, p)).collect();
        for r in 0..n {
            if r != c && m[r][c] != 0 {
                let k = m[r][c];
                let prow = m[c].clone();
                for (x, y) in m[r].iter_mut().zip(&prow) {
                    *x = fp::sub(*x, fp::mul(k, *y, p), p);
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `F_p`-matrices of the variable actions on a finite component.
pub struct FiniteForm {
    pub p: u32,
    pub act: Vec<Vec<Vec<u32>>>,
    pub act_inv: Vec<Vec<Vec<u32>>>,
    pub constants: Vec<Vec<u32>>,
}

pub fn finite_form(comp: &CoprimaryComponent) -> Result<FiniteForm, SUnitError> {
    let pres = &comp.module;
    let ring = &pres.ring;
    let p = ring.p;
    let FpDimension::Finite(dim, basis) = fp_dimension_capped(pres, 4096)? else {
        return Err(SUnitError::InfiniteDimension);
    };
    let gb = ModuleGb::new(pres)?;
    let index: HashMap<(usize, Vec<i64>), usize> = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    let coords = |v: &FreeModuleElement| -> Result<Vec<u32>, SUnitError> {
        let nf = gb.normal_form(v)?;
        let mut out = vec![0u32; dim];
        for (pos, c) in nf.coords.iter().enumerate() {
            for (e, x) in c.terms() {
                let i = index.get(&(pos, e.clone())).ok_or_else(|| SUnitError::Invalid("normal form outside the staircase".into()))?;
                out[*i] = x;
            }
        }
        Ok(out)
    };
    let n = ring.nvars();
    let mut act = Vec::with_capacity(n);
    let mut act_inv = Vec::with_capacity(n);
    for j in 0..n {
        let mut cols = Vec::with_capacity(dim);
        for (pos, e) in &basis {
            let mut e2 = e.clone();
            e2[j] += 1;
            let mut v = FreeModuleElement::zero(ring, pres.rank);
            v.coords[*pos] = LaurentPoly::monomial(p, e2, 1);
            cols.push(coords(&v)?);
        }
        let a: Vec<Vec<u32>> = (0..dim).map(|i| (0..dim).map(|k| cols[k][i]).collect()).collect();
        let ai = fmat_inv(&a, p).ok_or_else(|| SUnitError::NonInvertibleAction(ring.names[j].clone()))?;
        act.push(a);
        act_inv.push(ai);
    }
    let constants = comp.constants.iter().map(|c| coords(c)).collect::<Result<Vec<_>, _>>()?;
    Ok(FiniteForm { p, act, act_inv, constants })
}

impl FiniteForm {
    pub fn apply(&self, z: &[i64], v: &[u32]) -> Vec<u32> {
        let mut w = v.to_vec();
        for (j, e) in z.iter().enumerate() {
            let m = if *e >= 0 { &self.act[j] } else { &self.act_inv[j] };
            for _ in 0..e.unsigned_abs() {
                w = fmat_vec(m, &w, self.p);
            }
        }
        w
    }

    /// Generators of `{z : A^z v = v}` (Schreier generators of the orbit).
    fn stabilizer(&self, v: &[u32]) -> Vec<Vec<i64>> {
        let n = self.act.len();
        let mut word: HashMap<Vec<u32>, Vec<i64>> = HashMap::new();
        word.insert(v.to_vec(), vec![0; n]);
        let mut q = VecDeque::new();
        q.push_back(v.to_vec());
        let mut gens = Vec::new();
        while let Some(o) = q.pop_front() {
            let t = word[&o].clone();
            for j in 0..n {
                let o2 = fmat_vec(&self.act[j], &o, self.p);
                let mut t2 = t.clone();
                t2[j] += 1;
                match word.get(&o2) {
                    Some(w) => {
                        let g: Vec<i64> = t2.iter().zip(w).map(|(a, b)| a - b).collect();
                        if g.iter().any(|x| *x != 0) {
                            gens.push(g);
                        }
                    }
                    None => {
                        word.insert(o2.clone(), t2);
                        q.push_back(o2);
                    }
                }
            }
        }
        gens
    }
}

/// Finite components: the solution set is a union of cosets of the joint
/// stabilizer lattice; compiled into a residue automaton.
pub fn solve_component_finite(comp: &CoprimaryComponent, map: &[Vec<Vec<i64>>], nx: usize) -> Result<DigitAutomaton, SUnitError> {
    let ff = finite_form(comp)?;
    let p = ff.p;
    let n = ff.act.len();
    // congruence forms over x: (coeffs, modulus)
    let mut forms: Vec<(Vec<i64>, i64)> = Vec::new();
    for (blk, c) in map.iter().zip(&ff.constants[1..]) {
        if c.iter().all(|x| *x == 0) {
            continue;
        }
        let st = ff.stabilizer(c);
        let sl = Lattice::from_generators(&st, n);
        let sm = int_smith(&sl.basis, n);
        for t in 0..n {
            let dt = sm.diag.get(t).copied().unwrap_or(0);
            if dt == 1 {
                continue;
            }
            if dt == 0 {
                return Err(SUnitError::Invalid("stabilizer of a finite orbit has full rank".into()));
            }
            let coeffs: Vec<i64> = (0..nx).map(|l| (0..n).map(|j| blk[j][l] * sm.q[j][t]).sum::<i64>().rem_euclid(dt)).collect();
            forms.push((coeffs, dt));
        }
    }
    // enumerate the image group of x -> residues
    let residues = |x: &[i64]| -> Vec<i64> {
        forms
            .iter()
            .map(|(c, q)| c.iter().zip(x).map(|(a, b)| a * b).sum::<i64>().rem_euclid(*q))
            .collect()
    };
    let mut reps: HashMap<Vec<i64>, Vec<i64>> = HashMap::new();
    let zero = vec![0i64; nx];
    reps.insert(residues(&zero), zero.clone());
    let mut q = VecDeque::new();
    q.push_back(zero);
    while let Some(x) = q.pop_front() {
        for l in 0..nx {
            let mut y = x.clone();
            y[l] += 1;
            let r = residues(&y);
            if !reps.contains_key(&r) {
                reps.insert(r, y.clone());
                q.push_back(y);
            }
        }
    }
    let mut accepted: HashSet<Vec<i64>> = HashSet::new();
    for (r, x) in &reps {
        let mut acc = vec![0u32; ff.constants[0].len()];
        for (blk, c) in map.iter().zip(&ff.constants[1..]) {
            let z: Vec<i64> = blk.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
            let w = ff.apply(&z, c);
            for (a, b) in acc.iter_mut().zip(&w) {
                *a = fp::add(*a, *b, p);
            }
        }
        if acc == ff.constants[0] {
            accepted.insert(r.clone());
        }
    }
    Ok(crate::digitset::from_residue_set(p, nx, &forms, &accepted))
}

// ---------------------------------------------------------------------
// Field backend: p-kernel exploration

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Box half-width used to validate automata against direct evaluation.
    pub window: i64,
    /// Maximum number of kernel states per component.
    pub max_states: usize,
    /// Maximum length of the matrix sequence before it must repeat.
    pub kernel_depth: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            window: 6,
            max_states: 4000,
            kernel_depth: 64,
        }
    }
}

struct SeqEntry {
    /// `[l][block]`
    mats: Vec<Vec<KMat>>,
    /// `[l][r][block]` = `C_l^r`
    pows: Vec<Vec<Vec<KMat>>>,
    next: Option<(usize, bool)>,
}

/// Entries of the matrix sequence beyond this degree count as a budget
/// overrun; without a Frobenius root the degrees grow like `p^k`.
const MAX_SEQ_DEGREE: i64 = 1 << 16;

fn max_degree(mats: &[Vec<KMat>]) -> i64 {
    let deg = |f: &LaurentPoly| f.terms().flat_map(|(e, _)| e.iter().map(|x| x.abs())).max().unwrap_or(0);
    mats.iter()
        .flatten()
        .flatten()
        .flatten()
        .map(|x| deg(&x.num).max(deg(&x.den)))
        .max()
        .unwrap_or(0)
}

struct MatrixSeq {
    p: u32,
    entries: Vec<SeqEntry>,
    index: HashMap<Vec<Vec<KMat>>, usize>,
}

impl MatrixSeq {
    fn new(p: u32, mats: Vec<Vec<KMat>>) -> MatrixSeq {
        let mut s = MatrixSeq {
            p,
            entries: Vec::new(),
            index: HashMap::new(),
        };
        s.push(mats);
        s
    }

    fn push(&mut self, mats: Vec<Vec<KMat>>) -> usize {
        let pows = mats
            .iter()
            .map(|blocks| {
                let mut out: Vec<Vec<KMat>> = Vec::with_capacity(self.p as usize);
                out.push(blocks.iter().map(|b| ratfun::identity(self.p, b[0][0].num.nvars(), b.len())).collect());
                for r in 1..self.p as usize {
                    let prev = &out[r - 1];
                    out.push(prev.iter().zip(blocks).map(|(a, b)| mat_mul(a, b)).collect());
                }
                out
            })
            .collect();
        let i = self.entries.len();
        self.index.insert(mats.clone(), i);
        self.entries.push(SeqEntry { mats, pows, next: None });
        i
    }

    fn next(&mut self, i: usize, depth: usize) -> Result<(usize, bool), SUnitError> {
        if let Some(n) = self.entries[i].next {
            return Ok(n);
        }
        let p = self.p as usize;
        let q: Vec<Vec<KMat>> = self.entries[i]
            .mats
            .iter()
            .enumerate()
            .map(|(l, blocks)| blocks.iter().enumerate().map(|(b, m)| mat_mul(&self.entries[i].pows[l][p - 1][b], m)).collect())
            .collect();
        let root: Option<Vec<Vec<KMat>>> = q
            .iter()
            .map(|blocks| {
                blocks
                    .iter()
                    .map(|m| m.iter().map(|r| r.iter().map(|x| x.frobenius_root()).collect::<Option<Vec<Frac>>>()).collect::<Option<KMat>>())
                    .collect::<Option<Vec<KMat>>>()
            })
            .collect();
        let (mats, cartier) = match root {
            Some(r) => (r, true),
            None => (q, false),
        };
        let j = match self.index.get(&mats) {
            Some(j) => *j,
            None => {
                if self.entries.len() >= depth || max_degree(&mats) > MAX_SEQ_DEGREE {
                    return Err(SUnitError::KernelBudgetExceeded);
                }
                self.push(mats)
            }
        };
        self.entries[i].next = Some((j, cartier));
        Ok((j, cartier))
    }
}

struct KState {
    seq: usize,
    gens: Vec<KVec>,
    accept: bool,
}

struct Explorer {
    seq: MatrixSeq,
    states: Vec<KState>,
    ids: HashMap<(usize, Vec<KVec>), u32>,
    trans: HashMap<(u32, Vec<u32>), Option<u32>>,
}

struct FieldCtx<'a> {
    p: u32,
    s: usize,
    dim: usize,
    m: usize,
    opts: &'a SolveOptions,
}

impl FieldCtx<'_> {
    fn accept(&self, gens: &[KVec]) -> bool {
        let d = self.dim;
        gens.iter().all(|w| {
            (0..d).all(|t| {
                let mut acc = w[self.m * d + t].neg();
                for i in 0..self.m {
                    acc = acc.add(&w[i * d + t]);
                }
                acc.is_zero()
            })
        })
    }

    fn dead(&self, gens: &[KVec]) -> bool {
        let cut = self.m * self.dim;
        let mut e = Echelon::new();
        for g in gens {
            e.insert(&g[..cut]);
        }
        e.rank() < gens.len()
    }

    /// Greedy independent subset preferring low-weight vectors.
    fn prune(&self, mut cands: Vec<KVec>) -> Vec<KVec> {
        cands.retain(|v| v.iter().any(|x| !x.is_zero()));
        cands.sort_by_key(|v| v.iter().map(|x| x.weight()).sum::<usize>());
        let mut e = Echelon::new();
        let mut out = Vec::new();
        for v in cands {
            if e.insert(&v) {
                out.push(v);
            }
        }
        out
    }

    fn intern(&self, ex: &mut Explorer, seq: usize, gens: Vec<KVec>) -> Result<Option<u32>, SUnitError> {
        if self.dead(&gens) {
            return Ok(None);
        }
        let key = (seq, rref(&gens));
        if let Some(id) = ex.ids.get(&key) {
            return Ok(Some(*id));
        }
        if ex.states.len() >= self.opts.max_states {
            return Err(SUnitError::KernelBudgetExceeded);
        }
        let id = ex.states.len() as u32;
        let accept = self.accept(&gens);
        ex.states.push(KState { seq, gens, accept });
        ex.ids.insert(key, id);
        Ok(Some(id))
    }

    fn step(&self, ex: &mut Explorer, sid: u32, digits: &[u32]) -> Result<Option<u32>, SUnitError> {
        if let Some(t) = ex.trans.get(&(sid, digits.to_vec())) {
            return Ok(*t);
        }
        let d = self.dim;
        let (seq_i, gens) = {
            let st = &ex.states[sid as usize];
            (st.seq, st.gens.clone())
        };
        let mut moved = Vec::with_capacity(gens.len());
        for w in &gens {
            let mut w = w.clone();
            for (l, r) in digits.iter().enumerate() {
                if *r == 0 {
                    continue;
                }
                let blocks = &ex.seq.entries[seq_i].pows[l][*r as usize];
                for (i, m) in blocks.iter().enumerate() {
                    let part = ratfun::mat_vec(m, &w[i * d..(i + 1) * d]);
                    w[i * d..(i + 1) * d].clone_from_slice(&part);
                }
            }
            moved.push(w);
        }
        let (next, cartier) = ex.seq.next(seq_i, self.opts.kernel_depth)?;
        let new_gens = if cartier {
            let ls = digit_vectors(self.p, self.s);
            let mut cands = Vec::new();
            for w in &moved {
                for j in &ls {
                    let ym = Frac::poly(LaurentPoly::monomial(self.p, j.clone(), 1));
                    let wj: KVec = w.iter().map(|x| x.mul(&ym)).collect();
                    for t in &ls {
                        cands.push(wj.iter().map(|x| x.cartier(t)).collect::<KVec>());
                    }
                }
            }
            self.prune(cands)
        } else {
            self.prune(moved)
        };
        let r = self.intern(ex, next, new_gens)?;
        ex.trans.insert((sid, digits.to_vec()), r);
        Ok(r)
    }
}

fn digit_vectors(p: u32, s: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..p as i64).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Result of the kernel exploration.
pub struct FieldOutcome {
    pub automaton: DigitAutomaton,
    pub states: usize,
}

/// Explore the p-kernel of `x -> [Σ_i A^{L_i x} c_i = c_0]` orthant by
/// orthant. Fails with `KernelBudgetExceeded` when the exploration does not
/// close within the budget.
pub fn solve_component_field(mf: &MatrixForm, map: &[Vec<Vec<i64>>], nx: usize, opts: &SolveOptions) -> Result<FieldOutcome, SUnitError> {
    let ring = &mf.norm.ring;
    let p = ring.p;
    let s = mf.norm.s();
    let d = mf.dim();
    let m = map.len();
    let n = ring.nvars();
    let ctx = FieldCtx { p, s, dim: d, m, opts };
    let mut v: KVec = Vec::with_capacity(d * (m + 1));
    for c in &mf.constants[1..] {
        v.extend(c.iter().cloned());
    }
    v.extend(mf.constants[0].iter().cloned());
    let mut explorers: Vec<Option<Explorer>> = Vec::new();
    let mut starts: Vec<Option<u32>> = Vec::new();
    for sigma in 0..(1u32 << nx) {
        let mut dead = false;
        let mut mats: Vec<Vec<KMat>> = Vec::with_capacity(nx);
        for l in 0..nx {
            let neg = sigma & (1 << l) != 0;
            let mut blocks = Vec::with_capacity(m);
            for blk in map {
                let mut acc = ratfun::identity(p, s, d);
                for j in 0..n {
                    let e = blk[j][l] * if neg { -1 } else { 1 };
                    if e == 0 {
                        continue;
                    }
                    let a = if e > 0 {
                        &mf.act[j]
                    } else {
                        match &mf.act_inv[j] {
                            Some(a) => a,
                            None => {
                                dead = true;
                                break;
                            }
                        }
                    };
                    for _ in 0..e.unsigned_abs() {
                        acc = mat_mul(&acc, a);
                    }
                }
                blocks.push(acc);
            }
            mats.push(blocks);
        }
        if dead {
            explorers.push(None);
            starts.push(None);
            continue;
        }
        let mut ex = Explorer {
            seq: MatrixSeq::new(p, mats),
            states: Vec::new(),
            ids: HashMap::new(),
            trans: HashMap::new(),
        };
        let st = ctx.intern(&mut ex, 0, ctx.prune(vec![v.clone()]))?;
        explorers.push(Some(ex));
        starts.push(st);
    }
    #[derive(Clone, PartialEq, Eq, Hash)]
    enum FKey {
        Start,
        S(u32, u32),
    }
    let mut failure: Option<SUnitError> = None;
    let automaton = {
        let explorers = std::cell::RefCell::new(&mut explorers);
        DigitAutomaton::build(
            p,
            nx,
            FKey::Start,
            |k, l| match (k, l) {
                (FKey::Start, Letter::Sign(sig)) => starts[*sig as usize].map(|s0| FKey::S(*sig, s0)),
                (FKey::S(sig, sid), Letter::Digits(ds)) => {
                    if failure.is_some() {
                        return None;
                    }
                    let mut exs = explorers.borrow_mut();
                    let ex = exs[*sig as usize].as_mut().unwrap();
                    match ctx.step(ex, *sid, ds) {
                        Ok(Some(t)) => Some(FKey::S(*sig, t)),
                        Ok(None) => None,
                        Err(e) => {
                            failure = Some(e);
                            None
                        }
                    }
                }
                _ => None,
            },
            |k| match k {
                FKey::Start => false,
                FKey::S(sig, sid) => {
                    let exs = explorers.borrow();
                    exs[*sig as usize].as_ref().unwrap().states[*sid as usize].accept
                }
            },
        )
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let states = explorers.iter().flatten().map(|e| e.states.len()).sum();
    Ok(FieldOutcome { automaton, states })
}

// ---------------------------------------------------------------------
// Driver

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub label: String,
    pub backend: String,
    pub dimension: Option<usize>,
    pub parameters: Vec<String>,
    pub kernel_states: usize,
    pub status: Status,
    pub note: Option<String>,
    #[serde(skip)]
    pub automaton: Option<DigitAutomaton>,
}

pub struct SolveResult {
    pub automaton: DigitAutomaton,
    pub status: Status,
    pub components: Vec<ComponentReport>,
}

fn window_for(nx: usize, bound: i64) -> i64 {
    let mut b = bound.max(0);
    while b > 0 && ((2 * b + 1) as f64).powi(nx as i32) > 6000.0 {
        b -= 1;
    }
    b
}

fn for_each_point(nx: usize, b: i64, mut f: impl FnMut(&[i64]) -> Result<(), SUnitError>) -> Result<(), SUnitError> {
    let mut x = vec![-b; nx];
    loop {
        f(&x)?;
        let mut i = 0;
        loop {
            if i == nx {
                return Ok(());
            }
            if x[i] < b {
                x[i] += 1;
                break;
            }
            x[i] = -b;
            i += 1;
        }
    }
}

/// Points of the window `|x|_inf <= b` solving the component equation.
pub fn component_window(inst: &SUnitInstance, comp: &CoprimaryComponent, b: i64) -> Result<Vec<Vec<i64>>, SUnitError> {
    let gb = ModuleGb::new(&comp.module)?;
    let mut out = Vec::new();
    for_each_point(inst.nx, b, |x| {
        if inst.holds_in(&gb, &comp.constants, x)? {
            out.push(x.to_vec());
        }
        Ok(())
    })?;
    out.sort();
    Ok(out)
}

/// Solve one component, validating against direct evaluation.
pub fn solve_component(inst: &SUnitInstance, comp: &CoprimaryComponent, opts: &SolveOptions) -> Result<(DigitAutomaton, ComponentReport), SUnitError> {
    let p = inst.ring().p;
    let nx = inst.nx;
    let b = window_for(nx, opts.window);
    let mut report = ComponentReport {
        label: comp.label.clone(),
        backend: String::new(),
        dimension: None,
        parameters: Vec::new(),
        kernel_states: 0,
        status: Status::Exact,
        note: None,
        automaton: None,
    };
    let finite = match fp_dimension_capped(&comp.module, 4096)? {
        FpDimension::Finite(dim, _) => Some(dim),
        FpDimension::Infinite => None,
    };
    let mut result: Option<DigitAutomaton> = None;
    if let Some(dim) = finite {
        match solve_component_finite(comp, &inst.map, nx) {
            Ok(a) => {
                report.backend = "finite".into();
                report.dimension = Some(dim);
                result = Some(a);
            }
            Err(SUnitError::NonInvertibleAction(v)) => {
                report.note = Some(format!("{v} acts singularly; using kernel exploration over F_p"));
            }
            Err(e) => return Err(e),
        }
    }
    if result.is_none() {
        let norm = noether_normalize(comp)?;
        let mf = to_matrix_form(comp, &norm)?;
        report.backend = "field".into();
        report.dimension = Some(mf.dim());
        report.parameters = norm.param_names();
        match solve_component_field(&mf, &inst.map, nx, opts) {
            Ok(out) => {
                report.kernel_states = out.states;
                result = Some(out.automaton);
            }
            Err(SUnitError::KernelBudgetExceeded) => {
                let pts = component_window(inst, comp, b)?;
                report.backend = "window".into();
                report.status = Status::WindowVerified(b);
                report.note = Some("kernel exploration did not close; automaton lists the window solutions".into());
                let a = DigitAutomaton::from_points(p, nx, &pts).with_status(Status::WindowVerified(b));
                report.automaton = Some(a.clone());
                return Ok((a, report));
            }
            Err(e) => return Err(e),
        }
    }
    let a = result.unwrap();
    let expect = component_window(inst, comp, b)?;
    let got = a.enumerate_window(b);
    if got != expect {
        report.backend = "window".into();
        report.status = Status::WindowVerified(b);
        report.note = Some(format!("automaton disagreed with direct evaluation on |x| <= {b}; replaced by the window solutions"));
        let a = DigitAutomaton::from_points(p, nx, &expect).with_status(Status::WindowVerified(b));
        report.automaton = Some(a.clone());
        return Ok((a, report));
    }
    let a = a.with_status(Status::Exact);
    report.automaton = Some(a.clone());
    Ok((a, report))
}

/// Decompose, solve every component and intersect.
pub fn solve(inst: &SUnitInstance, hint: Option<&[Vec<FreeModuleElement>]>, known: &[LaurentPoly], opts: &SolveOptions) -> Result<SolveResult, SUnitError> {
    let p = inst.ring().p;
    let comps = decompose(inst, hint, known)?;
    let mut acc = DigitAutomaton::full(p, inst.nx);
    let mut status = Status::Exact;
    let mut reports = Vec::new();
    for comp in &comps {
        if comp.is_trivial() {
            reports.push(ComponentReport {
                label: comp.label.clone(),
                backend: "trivial".into(),
                dimension: None,
                parameters: Vec::new(),
                kernel_states: 0,
                status: Status::Exact,
                note: Some("all constants vanish".into()),
                automaton: Some(DigitAutomaton::full(p, inst.nx)),
            });
            continue;
        }
        let (a, rep) = solve_component(inst, comp, opts)?;
        status = status.weakest(rep.status);
        acc = acc.intersect(&a).expect("same space");
        reports.push(rep);
    }
    Ok(SolveResult {
        automaton: acc.with_status(status),
        status,
        components: reports,
    })
}
