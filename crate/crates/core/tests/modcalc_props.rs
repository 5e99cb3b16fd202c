mod common;

use common::*;
use lamplighter::lattice::Lattice;
use lamplighter::modcalc::{
    combine, fp_dimension, groebner, intersect, submodule_membership, subring_presentation, sum, FpDimension, FreeModuleElement, ModuleGb,
    ModulePresentation, MonomialOrder, Ring,
};
use proptest::prelude::*;

/// A ring (Laurent or polynomial, one or two variables), a rank and a few
/// small generators.
fn generators() -> impl Strategy<Value = (Ring, usize, Vec<FreeModuleElement>)> {
    (prop_oneof![Just(2u32), Just(3)], 1usize..=2, 1usize..=2, any::<bool>()).prop_flat_map(|(p, n, d, laurent)| {
        let ring = if laurent {
            Ring::laurent(p, n)
        } else {
            let names = ["X", "Y"];
            Ring::with_names(p, &names[..n], &vec![false; n])
        };
        let lo = if laurent { -1 } else { 0 };
        (Just(ring), Just(d), prop::collection::vec(vector(p, n, d, 3, lo, 2), 1..=3))
    })
}

#[test]
fn membership_certificates_evaluate_back() {
    let s = generators().prop_flat_map(|(ring, d, gens)| {
        let k = gens.len();
        let (p, n) = (ring.p, ring.nvars());
        let lo = if ring.all_laurent() { -1 } else { 0 };
        (Just(ring), Just(d), Just(gens), prop::collection::vec(poly(p, n, 2, lo, 2), k))
    });
    runner(60)
        .run(&s, |(ring, d, gens, coeffs)| {
            let y = combine(&ring, d, &coeffs, &gens);
            let cert = submodule_membership(&ring, &y, &gens).unwrap();
            prop_assert!(cert.is_some());
            prop_assert_eq!(combine(&ring, d, &cert.unwrap(), &gens), y);
            Ok(())
        })
        .unwrap();
}

#[test]
fn intersection_and_sum_containments() {
    let s = generators().prop_flat_map(|(ring, d, a)| {
        let (p, n) = (ring.p, ring.nvars());
        let lo = if ring.all_laurent() { -1 } else { 0 };
        (Just(ring), Just(d), Just(a), prop::collection::vec(vector(p, n, d, 3, lo, 2), 1..=2))
    });
    runner(40)
        .run(&s, |(ring, d, a, b)| {
            for g in intersect(&ring, d, &a, &b).unwrap() {
                prop_assert!(submodule_membership(&ring, &g, &a).unwrap().is_some());
                prop_assert!(submodule_membership(&ring, &g, &b).unwrap().is_some());
            }
            let s = sum(&a, &b);
            for g in a.iter().chain(&b) {
                prop_assert!(submodule_membership(&ring, g, &s).unwrap().is_some());
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn groebner_is_idempotent() {
    runner(60)
        .run(&generators(), |(ring, d, gens)| {
            let g1 = groebner(&ring, d, &gens, MonomialOrder).unwrap();
            let g2 = groebner(&ring, d, &g1, MonomialOrder).unwrap();
            prop_assert_eq!(&g1, &g2);
            for g in &gens {
                prop_assert!(submodule_membership(&ring, g, &g1).unwrap().is_some());
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn subring_relations_vanish_in_the_ambient_module() {
    let s = (prop_oneof![Just(2u32), Just(3)], prop::collection::vec(prop::collection::vec(-2i64..=2, 2), 1..=2)).prop_flat_map(|(p, lat)| {
        (Just(p), Just(lat), poly(p, 2, 2, 0, 2), prop::collection::vec(poly(p, 2, 3, -2, 2), 1..=3))
    });
    runner(30)
        .run(&s, |(p, lat, rel, els)| {
            let ring = Ring::laurent(p, 2);
            let lattice = Lattice::from_generators(&lat, 2);
            prop_assume!(lattice.rank() > 0);
            let rels = if rel.is_zero() { vec![] } else { vec![FreeModuleElement::scalar(rel)] };
            let amb = ModulePresentation::new(ring.clone(), 1, rels).unwrap();
            let els: Vec<FreeModuleElement> = els.into_iter().map(FreeModuleElement::scalar).collect();
            let sp = subring_presentation(&lattice, &els, &amb).unwrap();
            let gb = ModuleGb::new(&amb).unwrap();
            for r in &sp.presentation.relations {
                let coeffs: Vec<_> = r.coords.iter().map(|c| sp.evaluate(c, &ring)).collect();
                prop_assert!(gb.is_zero(&combine(&ring, 1, &coeffs, &els)).unwrap());
            }
            Ok(())
        })
        .unwrap();
}

/// `F_p`-rank of the normal forms of all monomials in a box, computed by
/// dense elimination.
fn spanned_dimension(pres: &ModulePresentation, b: i64) -> usize {
    let p = pres.ring.p;
    let gb = ModuleGb::new(pres).unwrap();
    let mut index: Vec<(usize, Vec<i64>)> = Vec::new();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for pos in 0..pres.rank {
        for e in box_points(pres.ring.nvars(), b) {
            let mut v = FreeModuleElement::zero(&pres.ring, pres.rank);
            v.coords[pos] = pres.ring.monomial(&e);
            let nf = gb.normal_form(&v).unwrap();
            let mut row = vec![0u32; index.len()];
            for (q, c) in nf.coords.iter().enumerate() {
                for (x, k) in c.terms() {
                    let key = (q, x.clone());
                    let i = index.iter().position(|y| *y == key).unwrap_or_else(|| {
                        index.push(key);
                        index.len() - 1
                    });
                    if i >= row.len() {
                        row.resize(i + 1, 0);
                    }
                    row[i] = k;
                }
            }
            rows.push(row);
        }
    }
    let w = index.len();
    rows.iter_mut().for_each(|r| r.resize(w, 0));
    let mut rank = 0;
    for col in 0..w {
        let Some(piv) = (rank..rows.len()).find(|i| rows[*i][col] != 0) else { continue };
        rows.swap(rank, piv);
        let inv = (1..p).find(|x| (x * rows[rank][col]) % p == 1).unwrap();
        rows[rank].iter_mut().for_each(|x| *x = (*x * inv) % p);
        for i in 0..rows.len() {
            if i != rank && rows[i][col] != 0 {
                let k = rows[i][col];
                for j in 0..w {
                    rows[i][j] = (rows[i][j] + p * p - k * rows[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn finite_dimension_matches_normal_form_span() {
    // monic univariate relations with unit constant term in each variable
    let uni = |p: u32, n: usize, var: usize| {
        (prop::collection::vec(0..p as i64, 0..=2), 1..p as i64).prop_map(move |(mid, c0)| {
            let e = |k: i64| {
                let mut v = vec![0; n];
                v[var] = k;
                v
            };
            let deg = mid.len() as i64 + 1;
            let mut t = vec![(e(0), c0), (e(deg), 1)];
            t.extend(mid.iter().enumerate().map(|(i, c)| (e(i as i64 + 1), *c)));
            lamplighter::laurent::LaurentPoly::from_terms(p, n, t)
        })
    };
    let s = (prop_oneof![Just(2u32), Just(3)], 1usize..=2).prop_flat_map(move |(p, n)| (Just(p), Just(n), uni(p, n, 0), uni(p, n, n - 1)));
    runner(30)
        .run(&s, |(p, n, f, g)| {
            let ring = Ring::laurent(p, n);
            let mut rels = vec![FreeModuleElement::scalar(f)];
            if n == 2 {
                rels.push(FreeModuleElement::scalar(g));
            }
            let pres = ModulePresentation::new(ring, 1, rels).unwrap();
            let FpDimension::Finite(dim, basis) = fp_dimension(&pres).unwrap() else {
                return Err(TestCaseError::fail("expected a finite module"));
            };
            prop_assert!(dim <= 64);
            prop_assert_eq!(basis.len(), dim);
            prop_assert_eq!(spanned_dimension(&pres, 4), dim);
            Ok(())
        })
        .unwrap();
}
