//! Module calculus over `F_p[X^±]`: Gröbner bases, membership with
//! certificates, syzygies, intersections, quotients, presentations over
//! monomial subrings and finite-dimensionality tests.
//!
//! Rings may mix Laurent variables with ordinary polynomial variables. For
//! Gröbner computations each Laurent variable `X` gets a partner `X'` and the
//! relation `X X' - 1` in every position.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gb::{Engine, Vector};
use crate::laurent::{fp, ExponentVector, LaurentPoly};
pub use crate::lattice::Lattice;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("negative exponent on polynomial variable {0}")]
    NegativeExponent(String),
    #[error("lattice basis is dependent")]
    DependentBasis,
    #[error("monomial X^{0:?} is not invertible in this ring")]
    NotInvertible(Vec<i64>),
}

/// Coefficient ring: prime, variable names, and which variables are inverted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ring {
    pub p: u32,
    pub names: Vec<String>,
    pub laurent: Vec<bool>,
}

impl Ring {
    /// All variables inverted, named `X1..Xn`.
    pub fn laurent(p: u32, n: usize) -> Ring {
        Ring {
            p,
            names: crate::laurent::default_names(n),
            laurent: vec![true; n],
        }
    }

    pub fn with_names(p: u32, names: &[&str], laurent: &[bool]) -> Ring {
        assert_eq!(names.len(), laurent.len());
        Ring {
            p,
            names: names.iter().map(|s| s.to_string()).collect(),
            laurent: laurent.to_vec(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn all_laurent(&self) -> bool {
        self.laurent.iter().all(|x| *x)
    }

    pub fn zero(&self) -> LaurentPoly {
        LaurentPoly::zero(self.p, self.nvars())
    }

    pub fn one(&self) -> LaurentPoly {
        LaurentPoly::one(self.p, self.nvars())
    }

    pub fn var(&self, i: usize) -> LaurentPoly {
        LaurentPoly::var(self.p, self.nvars(), i)
    }

    pub fn monomial(&self, e: &[i64]) -> LaurentPoly {
        LaurentPoly::monomial(self.p, e.to_vec(), 1)
    }

    /// Whether `X^e` is a unit.
    pub fn is_unit_monomial(&self, e: &[i64]) -> bool {
        e.iter().zip(&self.laurent).all(|(x, l)| *x == 0 || *l)
    }

    /// Whether every exponent of `f` is admissible (nonnegative on
    /// polynomial variables).
    pub fn admits(&self, f: &LaurentPoly) -> bool {
        f.terms()
            .all(|(e, _)| e.iter().zip(&self.laurent).all(|(x, l)| *l || *x >= 0))
    }

    pub fn parse(&self, s: &str) -> Result<LaurentPoly, crate::laurent::PolyParseError> {
        crate::laurent::parse_poly(s, &self.names, self.p)
    }

    pub fn show(&self, f: &LaurentPoly) -> String {
        f.display_with(&self.names).to_string()
    }
}

/// Element of the free module `R^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeModuleElement {
    pub coords: Vec<LaurentPoly>,
}

impl FreeModuleElement {
    pub fn new(coords: Vec<LaurentPoly>) -> Self {
        assert!(!coords.is_empty());
        FreeModuleElement { coords }
    }

    pub fn zero(ring: &Ring, d: usize) -> Self {
        FreeModuleElement {
            coords: vec![ring.zero(); d],
        }
    }

    /// The `i`-th standard basis vector.
    pub fn unit(ring: &Ring, d: usize, i: usize) -> Self {
        let mut v = Self::zero(ring, d);
        v.coords[i] = ring.one();
        v
    }

    pub fn scalar(f: LaurentPoly) -> Self {
        FreeModuleElement { coords: vec![f] }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.rank(), o.rank());
        FreeModuleElement {
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        FreeModuleElement {
            coords: self.coords.iter().map(|a| a.neg()).collect(),
        }
    }

    pub fn mul_poly(&self, f: &LaurentPoly) -> Self {
        FreeModuleElement {
            coords: self.coords.iter().map(|a| a.mul(f)).collect(),
        }
    }

    pub fn scale(&self, c: u32) -> Self {
        FreeModuleElement {
            coords: self.coords.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn shift(&self, e: &[i64]) -> Self {
        FreeModuleElement {
            coords: self.coords.iter().map(|a| a.shift(e)).collect(),
        }
    }

    pub fn show(&self, ring: &Ring) -> String {
        self.coords.iter().map(|c| ring.show(c)).collect::<Vec<_>>().join(", ")
    }
}

/// `R^d / N` with `N` generated by `relations`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModulePresentation {
    pub ring: Ring,
    pub rank: usize,
    pub relations: Vec<FreeModuleElement>,
}

impl ModulePresentation {
    pub fn free(ring: Ring, rank: usize) -> Self {
        ModulePresentation {
            ring,
            rank,
            relations: Vec::new(),
        }
    }

    pub fn new(ring: Ring, rank: usize, relations: Vec<FreeModuleElement>) -> Result<Self, ModError> {
        for r in &relations {
            if r.rank() != rank {
                return Err(ModError::RankMismatch(r.rank(), rank));
            }
        }
        Ok(ModulePresentation { ring, rank, relations })
    }
}

/// The single admissible monomial order: position over term, graded lex,
/// with inverse partners of Laurent variables in a leading block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct MonomialOrder;

/// Translation between Laurent vectors over a [`Ring`] and vectors of the
/// polynomial engine.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub ring: Ring,
    /// engine index of the inverse partner of each variable
    inv: Vec<Option<usize>>,
    pub engine: Engine,
}

impl Encoding {
    /// `groups` partitions the ring variables into elimination blocks
    /// (earlier blocks dominate). Inside a group the inverse partners form
    /// their own leading block, so normal forms prefer nonnegative exponents.
    pub fn new(ring: &Ring, groups: &[Vec<usize>]) -> Encoding {
        let n = ring.nvars();
        let mut inv = vec![None; n];
        let mut k = n;
        for i in 0..n {
            if ring.laurent[i] {
                inv[i] = Some(k);
                k += 1;
            }
        }
        let blocks: Vec<Vec<usize>> = groups
            .iter()
            .flat_map(|g| [g.iter().filter_map(|v| inv[*v]).collect::<Vec<usize>>(), g.clone()])
            .collect();
        Encoding {
            ring: ring.clone(),
            inv,
            engine: Engine::new(ring.p, k, blocks),
        }
    }

    /// As [`Encoding::new`], with positions `>= split` compared only after
    /// the first group, so that group is eliminated across those positions.
    pub fn eliminating(ring: &Ring, groups: &[Vec<usize>], split: usize) -> Encoding {
        let mut e = Encoding::new(ring, groups);
        let blocks: Vec<Vec<usize>> = groups
            .iter()
            .flat_map(|g| [g.iter().filter_map(|v| e.inv[*v]).collect::<Vec<usize>>(), g.clone()])
            .collect();
        e.engine = Engine::with_late_positions(ring.p, e.engine.nvars(), blocks, split, 2);
        e
    }

    pub fn standard(ring: &Ring) -> Encoding {
        Encoding::new(ring, &[(0..ring.nvars()).collect()])
    }

    /// Engine index of the inverse partner of ring variable `i`.
    pub fn inverse_of(&self, i: usize) -> Option<usize> {
        self.inv[i]
    }

    pub fn nengine(&self) -> usize {
        self.engine.nvars()
    }

    fn exps(&self, e: &[i64]) -> Result<Vec<u32>, ModError> {
        let mut out = vec![0u32; self.nengine()];
        for (i, x) in e.iter().enumerate() {
            if *x >= 0 {
                out[i] = *x as u32;
            } else {
                match self.inv[i] {
                    Some(j) => out[j] = (-*x) as u32,
                    None => return Err(ModError::NegativeExponent(self.ring.names[i].clone())),
                }
            }
        }
        Ok(out)
    }

    /// Encode `v` into positions `offset..offset+rank`.
    pub fn encode(&self, v: &FreeModuleElement, offset: usize) -> Result<Vector, ModError> {
        let mut t = Vec::new();
        for (k, f) in v.coords.iter().enumerate() {
            for (e, c) in f.terms() {
                t.push((offset + k, self.exps(e)?, c));
            }
        }
        Ok(self.engine.vector(t))
    }

    /// Decode positions `offset..offset+rank` (other positions are ignored).
    pub fn decode(&self, v: &Vector, offset: usize, rank: usize) -> FreeModuleElement {
        let n = self.ring.nvars();
        let mut coords = vec![self.ring.zero(); rank];
        for (pos, e, c) in self.engine.unpack(v) {
            if pos < offset || pos >= offset + rank {
                continue;
            }
            let mut ex: ExponentVector = vec![0; n];
            for i in 0..n {
                ex[i] = e[i] as i64;
                if let Some(j) = self.inv[i] {
                    ex[i] -= e[j] as i64;
                }
            }
            coords[pos - offset].add_term(ex, c);
        }
        FreeModuleElement { coords }
    }

    /// `X X' - 1` in every position `0..npos`.
    pub fn inverse_relations(&self, npos: usize) -> Vec<Vector> {
        let mut out = Vec::new();
        for pos in 0..npos {
            for i in 0..self.ring.nvars() {
                if let Some(j) = self.inv[i] {
                    let mut e = vec![0u32; self.nengine()];
                    e[i] = 1;
                    e[j] = 1;
                    out.push(self.engine.vector([(pos, e, 1), (pos, vec![0; self.nengine()], self.ring.p - 1)]));
                }
            }
        }
        out
    }
}

/// Reduced Gröbner basis of a presentation's relation module, ready for
/// normal forms.
#[derive(Clone, Debug)]
pub struct ModuleGb {
    pub enc: Encoding,
    pub rank: usize,
    pub basis: Vec<Vector>,
}

impl ModuleGb {
    pub fn new(pres: &ModulePresentation) -> Result<ModuleGb, ModError> {
        let enc = Encoding::standard(&pres.ring);
        Self::with_encoding(enc, pres.rank, &pres.relations)
    }

    pub fn with_encoding(enc: Encoding, rank: usize, gens: &[FreeModuleElement]) -> Result<ModuleGb, ModError> {
        let mut g = Vec::new();
        for r in gens {
            if r.rank() != rank {
                return Err(ModError::RankMismatch(r.rank(), rank));
            }
            g.push(enc.encode(r, 0)?);
        }
        if g.iter().all(|v| v.is_zero()) {
            return Ok(ModuleGb { enc, rank, basis: Vec::new() });
        }
        g.extend(enc.inverse_relations(rank));
        let basis = enc.engine.groebner(&g);
        Ok(ModuleGb { enc, rank, basis })
    }

    pub fn normal_form(&self, v: &FreeModuleElement) -> Result<FreeModuleElement, ModError> {
        if v.rank() != self.rank {
            return Err(ModError::RankMismatch(v.rank(), self.rank));
        }
        let e = self.enc.encode(v, 0)?;
        let r = if self.basis.is_empty() { e } else { self.enc.engine.reduce(&e, &self.basis) };
        Ok(self.enc.decode(&r, 0, self.rank))
    }

    pub fn is_zero(&self, v: &FreeModuleElement) -> Result<bool, ModError> {
        Ok(self.normal_form(v)?.is_zero())
    }

    /// The basis translated back to Laurent vectors (zero images dropped).
    pub fn elements(&self) -> Vec<FreeModuleElement> {
        let mut out: Vec<FreeModuleElement> = self
            .basis
            .iter()
            .map(|b| self.enc.decode(b, 0, self.rank))
            .filter(|v| !v.is_zero())
            .collect();
        out.dedup();
        out
    }

    /// Whether the relation module is everything (the quotient is zero).
    pub fn is_whole(&self) -> bool {
        (0..self.rank).all(|k| {
            self.basis
                .iter()
                .any(|b| self.enc.engine.unpack(b).first().map(|(pos, e, _)| *pos == k && e.iter().all(|x| *x == 0)).unwrap_or(false))
        })
    }
}

fn check_ranks(gens: &[FreeModuleElement], d: usize) -> Result<(), ModError> {
    for g in gens {
        if g.rank() != d {
            return Err(ModError::RankMismatch(g.rank(), d));
        }
    }
    Ok(())
}

/// Multiply all generators by one monomial so every exponent is
/// nonnegative; returns the shifted generators and the shift.
pub fn laurent_shift(gens: &[FreeModuleElement]) -> (Vec<FreeModuleElement>, ExponentVector) {
    let n = gens
        .iter()
        .flat_map(|g| g.coords.iter())
        .map(|c| c.nvars())
        .next()
        .unwrap_or(0);
    let mut s = vec![0i64; n];
    for g in gens {
        for c in &g.coords {
            if let Some(m) = c.min_exponents() {
                for (a, b) in s.iter_mut().zip(m) {
                    *a = (*a).max(-b);
                }
            }
        }
    }
    (gens.iter().map(|g| g.shift(&s)).collect(), s)
}

/// Reduced Gröbner basis of the submodule generated by `gens`, translated
/// back to the Laurent ring. When the ring has Laurent variables the
/// translated basis is pruned to a minimal generating subset, since unit
/// multiples of one generator show up as separate basis elements.
pub fn groebner(ring: &Ring, rank: usize, gens: &[FreeModuleElement], _order: MonomialOrder) -> Result<Vec<FreeModuleElement>, ModError> {
    let els = ModuleGb::with_encoding(Encoding::standard(ring), rank, gens)?.elements();
    if ring.laurent.iter().any(|x| *x) {
        minimal_generators(ring, rank, &els)
    } else {
        Ok(els)
    }
}

fn size_key(v: &FreeModuleElement) -> (usize, i64) {
    let terms = v.coords.iter().map(|c| c.len()).sum();
    let span = v
        .coords
        .iter()
        .filter_map(|c| Some(c.max_exponents()?.iter().zip(c.min_exponents()?).map(|(a, b)| a - b).sum::<i64>()))
        .max()
        .unwrap_or(0);
    (terms, span)
}

/// Greedy minimal generating subset, smallest candidates first.
pub fn minimal_generators(ring: &Ring, rank: usize, cands: &[FreeModuleElement]) -> Result<Vec<FreeModuleElement>, ModError> {
    let mut c: Vec<FreeModuleElement> = cands.iter().filter(|v| !v.is_zero()).cloned().collect();
    c.sort_by(|a, b| size_key(a).cmp(&size_key(b)).then(a.cmp(b)));
    c.dedup();
    let mut kept: Vec<FreeModuleElement> = Vec::new();
    for v in c {
        let gb = ModuleGb::with_encoding(Encoding::standard(ring), rank, &kept)?;
        if !gb.is_zero(&v)? {
            kept.push(v);
        }
    }
    Ok(kept)
}

/// Decide `y ∈ Σ R gens`; on success returns coefficients `r` with
/// `Σ r_i gens_i = y`.
pub fn submodule_membership(ring: &Ring, y: &FreeModuleElement, gens: &[FreeModuleElement]) -> Result<Option<Vec<LaurentPoly>>, ModError> {
    let d = y.rank();
    check_ranks(gens, d)?;
    if y.is_zero() {
        return Ok(Some(vec![ring.zero(); gens.len()]));
    }
    if gens.is_empty() {
        return Ok(None);
    }
    let k = gens.len();
    let enc = Encoding::standard(ring);
    let mut g = Vec::new();
    for (t, x) in gens.iter().enumerate() {
        let mut v = enc.encode(x, 0)?;
        let tag = enc.encode(&FreeModuleElement::unit(ring, k, t), d)?;
        v = enc.engine.add(&v, &tag);
        g.push(v);
    }
    g.extend(enc.inverse_relations(d + k));
    let basis = enc.engine.groebner(&g);
    let r = enc.engine.reduce(&enc.encode(y, 0)?, &basis);
    let amb = enc.decode(&r, 0, d);
    if !amb.is_zero() {
        return Ok(None);
    }
    let cert = enc.decode(&r, d, k).neg();
    Ok(Some(cert.coords))
}

/// Membership modulo extra relations: `y ∈ Σ R gens + N`.
pub fn member_mod(pres: &ModulePresentation, y: &FreeModuleElement, gens: &[FreeModuleElement]) -> Result<bool, ModError> {
    let mut all = gens.to_vec();
    all.extend(pres.relations.iter().cloned());
    let gb = ModuleGb::with_encoding(Encoding::standard(&pres.ring), pres.rank, &all)?;
    gb.is_zero(y)
}

/// Generators of the kernel of `R^k -> R^d`, `e_i -> gens_i`, as a
/// presentation of the submodule generated by `gens`.
pub fn syzygy_presentation(ring: &Ring, rank: usize, gens: &[FreeModuleElement]) -> Result<ModulePresentation, ModError> {
    check_ranks(gens, rank)?;
    let k = gens.len();
    if k == 0 {
        return Ok(ModulePresentation::free(ring.clone(), 1).with_rank(0));
    }
    let enc = Encoding::standard(ring);
    let mut g = Vec::new();
    for (t, x) in gens.iter().enumerate() {
        let v = enc.encode(x, 0)?;
        let tag = enc.encode(&FreeModuleElement::unit(ring, k, t), rank)?;
        g.push(enc.engine.add(&v, &tag));
    }
    g.extend(enc.inverse_relations(rank + k));
    let basis = enc.engine.groebner(&g);
    let mut rel: Vec<FreeModuleElement> = Vec::new();
    for b in &basis {
        if enc.engine.pos(b.lead().unwrap()) >= rank {
            let s = enc.decode(b, rank, k);
            if !s.is_zero() && !rel.contains(&s) {
                rel.push(s);
            }
        }
    }
    Ok(ModulePresentation {
        ring: ring.clone(),
        rank: k,
        relations: rel,
    })
}

impl ModulePresentation {
    fn with_rank(mut self, r: usize) -> Self {
        self.rank = r;
        self
    }
}

/// Generators of `A ∩ B` inside `R^d`.
pub fn intersect(ring: &Ring, rank: usize, a: &[FreeModuleElement], b: &[FreeModuleElement]) -> Result<Vec<FreeModuleElement>, ModError> {
    check_ranks(a, rank)?;
    check_ranks(b, rank)?;
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let enc = Encoding::standard(ring);
    let mut g = Vec::new();
    for x in a {
        let v = enc.encode(x, 0)?;
        let w = enc.encode(x, rank)?;
        g.push(enc.engine.add(&v, &w));
    }
    for x in b {
        g.push(enc.encode(x, 0)?);
    }
    g.extend(enc.inverse_relations(2 * rank));
    let basis = enc.engine.groebner(&g);
    let mut out: Vec<FreeModuleElement> = Vec::new();
    for v in &basis {
        if enc.engine.pos(v.lead().unwrap()) >= rank {
            let s = enc.decode(v, rank, rank);
            if !s.is_zero() && !out.contains(&s) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// Generators of `A + B`.
pub fn sum(a: &[FreeModuleElement], b: &[FreeModuleElement]) -> Vec<FreeModuleElement> {
    let mut out = a.to_vec();
    for x in b {
        if !out.contains(x) {
            out.push(x.clone());
        }
    }
    out
}

/// Presentation of `ambient / sub`, with relations brought to reduced form.
pub fn quotient_presentation(ambient: &ModulePresentation, sub: &[FreeModuleElement]) -> Result<ModulePresentation, ModError> {
    check_ranks(sub, ambient.rank)?;
    let mut all = ambient.relations.clone();
    all.extend(sub.iter().cloned());
    let rel = minimal_generators(&ambient.ring, ambient.rank, &all)?;
    Ok(ModulePresentation {
        ring: ambient.ring.clone(),
        rank: ambient.rank,
        relations: rel,
    })
}

/// Presentation of `Σ F_p[X^Λ] elements` over the ring `F_p[Y]`, `Y_j <-> X^(λ_j)`.
#[derive(Clone, Debug)]
pub struct SubringPresentation {
    pub lattice: Lattice,
    /// ring of the `Y` variables
    pub ring: Ring,
    /// rank = number of elements; relations are the syzygies over `F_p[Y]`
    pub presentation: ModulePresentation,
}

impl SubringPresentation {
    /// Image of a `Y`-polynomial in the ambient ring.
    pub fn evaluate(&self, f: &LaurentPoly, ambient: &Ring) -> LaurentPoly {
        let images: Vec<LaurentPoly> = self.lattice.basis.iter().map(|l| ambient.monomial(l)).collect();
        f.substitute(&images)
    }
}

pub fn subring_presentation(lattice: &Lattice, elements: &[FreeModuleElement], ambient: &ModulePresentation) -> Result<SubringPresentation, ModError> {
    let amb = &ambient.ring;
    let n = amb.nvars();
    let r = lattice.rank();
    if crate::lattice::hermite(&lattice.basis, n).basis.len() != r {
        return Err(ModError::DependentBasis);
    }
    check_ranks(elements, ambient.rank)?;
    let ylaurent: Vec<bool> = lattice
        .basis
        .iter()
        .map(|l| l.iter().zip(&amb.laurent).all(|(x, lf)| *x == 0 || *lf))
        .collect();
    for l in &lattice.basis {
        if l.iter().zip(&amb.laurent).any(|(x, lf)| *x < 0 && !*lf) {
            return Err(ModError::NotInvertible(l.clone()));
        }
    }
    let ynames: Vec<String> = (1..=r).map(|j| format!("Y{j}")).collect();
    let yring = Ring {
        p: amb.p,
        names: ynames,
        laurent: ylaurent,
    };
    if r == n && amb.all_laurent() {
        return subring_by_cosets(lattice, elements, ambient, yring);
    }
    subring_by_elimination(lattice, elements, ambient, yring)
}

/// General case: eliminate the `X` variables from the module generated by
/// the elements, the relations and `Y_j - X^(λ_j)`.
fn subring_by_elimination(lattice: &Lattice, elements: &[FreeModuleElement], ambient: &ModulePresentation, yring: Ring) -> Result<SubringPresentation, ModError> {
    let amb = &ambient.ring;
    let n = amb.nvars();
    let r = lattice.rank();
    let d = ambient.rank;
    let t = elements.len();
    let ynames = yring.names.clone();
    let ylaurent = yring.laurent.clone();
    let mut cnames = amb.names.clone();
    cnames.extend(ynames.iter().map(|s| format!("{s}__sub")));
    let mut clau = amb.laurent.clone();
    clau.extend(ylaurent.iter().cloned());
    let cring = Ring {
        p: amb.p,
        names: cnames,
        laurent: clau,
    };
    let enc = Encoding::eliminating(&cring, &[(0..n).collect(), (n..n + r).collect()], d);
    let lift = |v: &FreeModuleElement| FreeModuleElement {
        coords: v.coords.iter().map(|c| c.extend_vars(n + r)).collect(),
    };
    let mut g = Vec::new();
    for (k, e) in elements.iter().enumerate() {
        let v = enc.encode(&lift(e), 0)?;
        let tag = enc.encode(&FreeModuleElement::unit(&cring, t, k), d)?;
        g.push(enc.engine.add(&v, &tag));
    }
    for rel in &ambient.relations {
        g.push(enc.encode(&lift(rel), 0)?);
    }
    for (j, l) in lattice.basis.iter().enumerate() {
        let mut ye = vec![0i64; n + r];
        ye[n + j] = 1;
        let mut xe = l.clone();
        xe.resize(n + r, 0);
        let bind = LaurentPoly::monomial(amb.p, ye, 1).sub(&LaurentPoly::monomial(amb.p, xe, 1));
        for pos in 0..d {
            let mut v = FreeModuleElement::zero(&cring, d);
            v.coords[pos] = bind.clone();
            g.push(enc.encode(&v, 0)?);
        }
    }
    g.extend(enc.inverse_relations(d + t));
    let basis = enc.engine.groebner(&g);
    let mut rel: Vec<FreeModuleElement> = Vec::new();
    for b in &basis {
        let lead = b.lead().unwrap();
        if enc.engine.pos(lead) < d {
            continue;
        }
        let v = enc.decode(b, d, t);
        let only_y = v
            .coords
            .iter()
            .all(|c| c.terms().all(|(e, _)| e[..n].iter().all(|x| *x == 0)));
        if !only_y || v.is_zero() {
            continue;
        }
        let w = FreeModuleElement {
            coords: v
                .coords
                .iter()
                .map(|c| LaurentPoly::from_terms(amb.p, r, c.terms().map(|(e, x)| (e[n..].to_vec(), x as i64))))
                .collect(),
        };
        if !rel.contains(&w) {
            rel.push(w);
        }
    }
    Ok(SubringPresentation {
        lattice: lattice.clone(),
        ring: yring.clone(),
        presentation: ModulePresentation {
            ring: yring,
            rank: t,
            relations: rel,
        },
    })
}

/// Finite-index case: `R` is free over `S = F_p[X^Λ]` on the coset
/// monomials, so the ambient module restricts to an `S`-module of rank
/// `d·[Z^n:Λ]` and the relations are plain syzygies over `S`.
fn subring_by_cosets(lattice: &Lattice, elements: &[FreeModuleElement], ambient: &ModulePresentation, yring: Ring) -> Result<SubringPresentation, ModError> {
    let amb = &ambient.ring;
    let n = amb.nvars();
    let d = ambient.rank;
    let t = elements.len();
    let h = crate::lattice::hermite(&lattice.basis, n);
    let moduli: Vec<i64> = h.basis.iter().zip(&h.pivots).map(|(row, c)| row[*c].abs()).collect();
    let index: i64 = moduli.iter().product();
    // split e = rep + Σ c_j λ_j, with rep in the box given by the pivots
    let split = |e: &[i64]| -> (usize, Vec<i64>) {
        let mut rest = e.to_vec();
        let mut ch = vec![0i64; h.basis.len()];
        for (i, (row, c)) in h.basis.iter().zip(&h.pivots).enumerate() {
            let q = (rest[*c] - rest[*c].rem_euclid(moduli[i])) / row[*c];
            for (x, y) in rest.iter_mut().zip(row) {
                *x -= q * y;
            }
            ch[i] = q;
        }
        let mut slot = 0usize;
        for (i, c) in h.pivots.iter().enumerate() {
            slot = slot * moduli[i] as usize + rest[*c] as usize;
        }
        let mut coef = vec![0i64; lattice.basis.len()];
        for (i, q) in ch.iter().enumerate() {
            for (k, u) in h.transform[i].iter().enumerate() {
                coef[k] += q * u;
            }
        }
        (slot, coef)
    };
    let rank = d * index as usize;
    let restrict = |v: &FreeModuleElement| -> FreeModuleElement {
        let mut coords = vec![yring.zero(); rank];
        for (pos, c) in v.coords.iter().enumerate() {
            for (e, x) in c.terms() {
                let (slot, coef) = split(e);
                coords[pos * index as usize + slot].add_term(coef, x);
            }
        }
        FreeModuleElement { coords }
    };
    let mut reps: Vec<Vec<i64>> = vec![vec![0; n]];
    for (i, c) in h.pivots.iter().enumerate() {
        reps = reps
            .into_iter()
            .flat_map(|r| {
                (0..moduli[i]).map(move |k| {
                    let mut r2 = r.clone();
                    r2[*c] = k;
                    r2
                })
            })
            .collect();
    }
    let mut gens: Vec<FreeModuleElement> = elements.iter().map(restrict).collect();
    for rel in &ambient.relations {
        for rep in &reps {
            gens.push(restrict(&rel.shift(rep)));
        }
    }
    let syz = syzygy_presentation(&yring, rank, &gens)?;
    let mut rel: Vec<FreeModuleElement> = Vec::new();
    for s in &syz.relations {
        let w = FreeModuleElement {
            coords: s.coords[..t].to_vec(),
        };
        if !w.is_zero() && !rel.contains(&w) {
            rel.push(w);
        }
    }
    let rel = if rel.is_empty() { rel } else { minimal_generators(&yring, t, &rel)? };
    Ok(SubringPresentation {
        lattice: lattice.clone(),
        ring: yring.clone(),
        presentation: ModulePresentation {
            ring: yring,
            rank: t,
            relations: rel,
        },
    })
}

/// Result of [`fp_dimension`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FpDimension {
    /// dimension and standard monomials `(position, exponent)`
    Finite(usize, Vec<(usize, ExponentVector)>),
    Infinite,
}

/// Dimension over `F_p` of `pres`, via the staircase of its Gröbner basis.
pub fn fp_dimension(pres: &ModulePresentation) -> Result<FpDimension, ModError> {
    fp_dimension_capped(pres, usize::MAX)
}

/// As [`fp_dimension`], reporting `Infinite` once more than `cap` standard
/// monomials are found.
pub fn fp_dimension_capped(pres: &ModulePresentation, cap: usize) -> Result<FpDimension, ModError> {
    let gb = ModuleGb::new(pres)?;
    let eng = &gb.enc.engine;
    let nv = eng.nvars();
    let leads: Vec<(usize, Vec<u32>)> = gb.basis.iter().map(|b| {
        let l = b.lead().unwrap();
        (eng.pos(l), eng.exps(l))
    }).collect();
    // finiteness: every position has a pure power of each engine variable
    for pos in 0..gb.rank {
        let unit = leads.iter().any(|(q, e)| *q == pos && e.iter().all(|x| *x == 0));
        if unit {
            continue;
        }
        for v in 0..nv {
            let pure = leads.iter().any(|(q, e)| *q == pos && e[v] > 0 && e.iter().enumerate().all(|(i, x)| i == v || *x == 0));
            if !pure {
                return Ok(FpDimension::Infinite);
            }
        }
    }
    let standard = |pos: usize, e: &[u32]| !leads.iter().any(|(q, l)| *q == pos && l.iter().zip(e).all(|(a, b)| a <= b));
    let mut out: Vec<(usize, Vec<u32>)> = Vec::new();
    for pos in 0..gb.rank {
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
            if seen.len() + out.len() > cap {
                return Ok(FpDimension::Infinite);
            }
            for v in 0..nv {
                let mut f = e.clone();
                f[v] += 1;
                if standard(pos, &f) && !seen.contains(&f) {
                    stack.push(f);
                }
            }
        }
        out.extend(seen.into_iter().map(|e| (pos, e)));
    }
    let mut basis: Vec<(usize, ExponentVector)> = out
        .into_iter()
        .map(|(pos, e)| {
            let v = gb.enc.engine.vector([(pos, e, 1)]);
            let dec = gb.enc.decode(&v, 0, gb.rank);
            let (ex, _) = dec.coords[pos].terms().next().map(|(a, c)| (a.clone(), c)).unwrap();
            (pos, ex)
        })
        .collect();
    basis.sort();
    Ok(FpDimension::Finite(basis.len(), basis))
}

/// Evaluate `Σ r_i gens_i`.
pub fn combine(ring: &Ring, rank: usize, coeffs: &[LaurentPoly], gens: &[FreeModuleElement]) -> FreeModuleElement {
    let mut acc = FreeModuleElement::zero(ring, rank);
    for (c, g) in coeffs.iter().zip(gens) {
        acc = acc.add(&g.mul_poly(c));
    }
    acc
}

/// Reduce a scalar mod `p` into a coefficient usable with [`FreeModuleElement::scale`].
pub fn residue(c: i64, p: u32) -> u32 {
    fp::from_i64(c, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2() -> Ring {
        Ring::laurent(2, 2)
    }

    fn e(ring: &Ring, s: &str) -> FreeModuleElement {
        FreeModuleElement::scalar(ring.parse(s).unwrap())
    }

    #[test]
    fn laurent_shift_examples() {
        let r1 = Ring::laurent(2, 1);
        let (g, s) = laurent_shift(&[e(&r1, "X1^-1 + 1")]);
        assert_eq!(g, vec![e(&r1, "1 + X1")]);
        assert_eq!(s, vec![1]);
        let (g, s) = laurent_shift(&[e(&r1, "X1 + 1")]);
        assert_eq!(g, vec![e(&r1, "X1 + 1")]);
        assert_eq!(s, vec![0]);
        let ring = r2();
        let (g, s) = laurent_shift(&[e(&ring, "X1^-2*X2"), e(&ring, "X2^-1")]);
        assert_eq!(s, vec![2, 1]);
        assert_eq!(g, vec![e(&ring, "X2^2"), e(&ring, "X1^2")]);
    }

    #[test]
    fn groebner_examples() {
        let r1 = Ring::laurent(2, 1);
        let g = groebner(&r1, 1, &[e(&r1, "X1 + 1"), e(&r1, "X1")], MonomialOrder).unwrap();
        assert_eq!(g, vec![e(&r1, "1")]);
        let ring = r2();
        let f = e(&ring, "X1 + X2 + 1");
        let g = groebner(&ring, 1, &[f.clone()], MonomialOrder).unwrap();
        assert_eq!(g.len(), 1);
        assert!(submodule_membership(&ring, &f, &g).unwrap().is_some());
        assert!(submodule_membership(&ring, &g[0], &[f.clone()]).unwrap().is_some());
        assert_eq!(groebner(&ring, 1, &g, MonomialOrder).unwrap(), g);
    }

    #[test]
    fn membership_examples() {
        let ring = r2();
        let f = e(&ring, "X1 + X2 + 1");
        let y = e(&ring, "X1^2*(X1 + X2 + 1)");
        let c = submodule_membership(&ring, &y, &[f.clone()]).unwrap().unwrap();
        assert_eq!(combine(&ring, 1, &c, &[f.clone()]), y);
        assert!(submodule_membership(&ring, &e(&ring, "1"), &[f.clone()]).unwrap().is_none());
        assert!(submodule_membership(&ring, &FreeModuleElement::zero(&ring, 1), &[]).unwrap().is_some());
        let bad = FreeModuleElement::zero(&ring, 2);
        assert!(submodule_membership(&ring, &bad, &[f]).is_err());
    }

    #[test]
    fn membership_with_inverse_certificate() {
        let ring = r2();
        let f = e(&ring, "X1 + 1");
        let y = e(&ring, "X1^-3 + X1^-2");
        let c = submodule_membership(&ring, &y, &[f.clone()]).unwrap().unwrap();
        assert_eq!(combine(&ring, 1, &c, &[f]), y);
    }

    #[test]
    fn syzygy_examples() {
        let ring = r2();
        let f = e(&ring, "X1 + X2 + 1");
        assert!(syzygy_presentation(&ring, 1, &[f.clone()]).unwrap().relations.is_empty());
        let s = syzygy_presentation(&ring, 1, &[f.clone(), f.clone()]).unwrap();
        assert_eq!(s.relations.len(), 1);
        let v = &s.relations[0];
        assert!(combine(&ring, 1, &v.coords, &[f.clone(), f.clone()]).is_zero());
        let pr = Ring::with_names(2, &["X", "Y"], &[false, false]);
        let g = pr.parse("X + Y + 1").unwrap();
        let a = FreeModuleElement::scalar(pr.parse("X").unwrap().mul(&g));
        let b = FreeModuleElement::scalar(pr.parse("Y").unwrap().mul(&g));
        let s = syzygy_presentation(&pr, 1, &[a, b]).unwrap();
        let koszul = FreeModuleElement::new(vec![pr.parse("Y").unwrap(), pr.parse("X").unwrap()]);
        assert_eq!(s.relations, vec![koszul]);
    }

    #[test]
    fn intersection_of_coprime_factors() {
        let pr = Ring::with_names(2, &["X", "Y"], &[false, false]);
        let a = vec![FreeModuleElement::scalar(pr.parse("Y^2").unwrap())];
        let b = vec![FreeModuleElement::scalar(pr.parse("X+Y+1").unwrap())];
        let i = intersect(&pr, 1, &a, &b).unwrap();
        assert_eq!(i, vec![FreeModuleElement::scalar(pr.parse("Y^2*(X+Y+1)").unwrap())]);
        assert_eq!(intersect(&pr, 1, &a, &a).unwrap(), a);
        assert_eq!(sum(&a, &b).len(), 2);
    }

    #[test]
    fn quotient_examples() {
        let ring = r2();
        let free = ModulePresentation::free(ring.clone(), 1);
        let q = quotient_presentation(&free, &[]).unwrap();
        assert!(q.relations.is_empty());
        let q = quotient_presentation(&free, &[e(&ring, "X1 + X2 + 1")]).unwrap();
        assert_eq!(q.relations.len(), 1);
        let pr = Ring::with_names(2, &["X", "Y"], &[false, false]);
        let amb = ModulePresentation::new(pr.clone(), 1, vec![FreeModuleElement::scalar(pr.parse("Y^2*(X+Y+1)").unwrap())]).unwrap();
        let q = quotient_presentation(&amb, &[FreeModuleElement::scalar(pr.parse("Y^2").unwrap())]).unwrap();
        assert_eq!(q.relations, vec![FreeModuleElement::scalar(pr.parse("Y^2").unwrap())]);
    }

    #[test]
    fn subring_examples() {
        let ring = r2();
        let amb = ModulePresentation::free(ring.clone(), 1);
        let lat = Lattice::from_generators(&[vec![2, 0]], 2);
        let sp = subring_presentation(&lat, &[e(&ring, "1 + X2 + X1^2")], &amb).unwrap();
        assert!(sp.presentation.relations.is_empty());
        assert_eq!(sp.presentation.rank, 1);
        let pr = Ring::with_names(2, &["X", "Y"], &[false, false]);
        let amb = ModulePresentation::new(pr.clone(), 1, vec![FreeModuleElement::scalar(pr.parse("Y^2").unwrap())]).unwrap();
        let lat = Lattice::from_generators(&[vec![1, 0]], 2);
        let els = vec![FreeModuleElement::scalar(pr.parse("1").unwrap()), FreeModuleElement::scalar(pr.parse("Y").unwrap())];
        let sp = subring_presentation(&lat, &els, &amb).unwrap();
        assert!(sp.presentation.relations.is_empty());
        // a dependent pair: 1 and X over Y <-> X gives the relation (Y, -1)
        let els = vec![FreeModuleElement::scalar(pr.parse("1").unwrap()), FreeModuleElement::scalar(pr.parse("X").unwrap())];
        let sp = subring_presentation(&lat, &els, &amb).unwrap();
        assert_eq!(sp.presentation.relations.len(), 1);
        for rel in &sp.presentation.relations {
            let imgs: Vec<LaurentPoly> = rel.coords.iter().map(|c| sp.evaluate(c, &pr)).collect();
            let v = combine(&pr, 1, &imgs, &els);
            assert!(member_mod(&amb, &v, &[]).unwrap());
        }
    }

    #[test]
    fn subring_routes_agree() {
        let ring = r2();
        let lat = Lattice::from_generators(&[vec![1, 1], vec![0, 2]], 2);
        let els = vec![e(&ring, "1 + X2 + X1^2"), e(&ring, "X1 + X2^-1"), e(&ring, "X1*X2 + 1")];
        for rels in [vec![], vec![e(&ring, "X1 + X2 + 1")]] {
            let amb = ModulePresentation::new(ring.clone(), 1, rels).unwrap();
            let y = Ring::laurent(2, 2);
            let y = Ring { names: vec!["Y1".into(), "Y2".into()], ..y };
            let a = subring_by_cosets(&lat, &els, &amb, y.clone()).unwrap().presentation.relations;
            let b = subring_by_elimination(&lat, &els, &amb, y.clone()).unwrap().presentation.relations;
            for v in &a {
                assert!(submodule_membership(&y, v, &b).unwrap().is_some());
            }
            for v in &b {
                assert!(submodule_membership(&y, v, &a).unwrap().is_some());
            }
        }
    }

    #[test]
    fn fp_dimension_examples() {
        let r1 = Ring::laurent(2, 1);
        let m = ModulePresentation::new(r1.clone(), 1, vec![e(&r1, "X1^2 + X1 + 1")]).unwrap();
        assert_eq!(fp_dimension(&m).unwrap(), FpDimension::Finite(2, vec![(0, vec![0]), (0, vec![1])]));
        let m = ModulePresentation::new(r1.clone(), 1, vec![e(&r1, "X1^3 + X1 + 1")]).unwrap();
        assert_eq!(fp_dimension(&m).unwrap(), FpDimension::Finite(3, vec![(0, vec![0]), (0, vec![1]), (0, vec![2])]));
        let pr = Ring::with_names(2, &["X", "Y"], &[false, false]);
        let m = ModulePresentation::new(pr.clone(), 1, vec![FreeModuleElement::scalar(pr.parse("Y^2").unwrap())]).unwrap();
        assert_eq!(fp_dimension(&m).unwrap(), FpDimension::Infinite);
    }
}
