mod common;

use common::*;
use lamplighter::laurent::{default_names, parse_poly, LaurentPoly, Prime};
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3), Just(5), Just(7)]
}

#[test]
fn frobenius_is_additive() {
    let s = (prime(), 1usize..=3, 0u32..=3).prop_flat_map(|(p, n, k)| (poly(p, n, 6, -4, 4), poly(p, n, 6, -4, 4), Just(k)));
    runner(150)
        .run(&s, |(f, g, k)| {
            prop_assert_eq!(f.add(&g).frobenius_pow(k), f.frobenius_pow(k).add(&g.frobenius_pow(k)));
            Ok(())
        })
        .unwrap();
}

#[test]
fn frobenius_matches_repeated_multiplication() {
    let s = (prime(), 1usize..=2, 0u32..=2).prop_flat_map(|(p, n, k)| (poly(p, n, 4, -4, 4), Just(k)));
    runner(60)
        .run(&s, |(f, k)| {
            let q = (f.prime() as u64).pow(k);
            let mut chain = LaurentPoly::one(f.prime(), f.nvars());
            for _ in 0..q {
                chain = chain.mul(&f);
            }
            prop_assert_eq!(f.frobenius_pow(k), chain.clone());
            prop_assert_eq!(f.pow(q), chain);
            Ok(())
        })
        .unwrap();
}

#[test]
fn geometric_sums_telescope() {
    let s = (prime(), 1usize..=3)
        .prop_flat_map(|(p, n)| (Just(p), prop::collection::vec(-3i64..=3, n).prop_filter("a != 0", |a| a.iter().any(|x| *x != 0)), -20i64..=20));
    runner(200)
        .run(&s, |(p, a, z)| {
            let n = a.len();
            let one = LaurentPoly::one(p, n);
            let xa = LaurentPoly::monomial(p, a.clone(), 1);
            let za: Vec<i64> = a.iter().map(|x| x * z).collect();
            let g = LaurentPoly::geom_sum(p, &a, z).unwrap();
            prop_assert_eq!(g.mul(&one.sub(&xa)), one.sub(&LaurentPoly::monomial(p, za, 1)));
            Ok(())
        })
        .unwrap();
}

#[test]
fn ring_laws_and_canonical_zero() {
    let s = (prime(), 1usize..=3).prop_flat_map(|(p, n)| (poly(p, n, 5, -3, 3), poly(p, n, 5, -3, 3), poly(p, n, 5, -3, 3)));
    runner(150)
        .run(&s, |(f, g, h)| {
            prop_assert!(f.add(&f.neg()).is_zero());
            prop_assert_eq!(f.add(&f.neg()).len(), 0);
            prop_assert_eq!(f.mul(&g), g.mul(&f));
            prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
            prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
            prop_assert!(f.terms().all(|(_, c)| c != 0 && c < f.prime()));
            Ok(())
        })
        .unwrap();
}

#[test]
fn display_parses_back() {
    let s = (prime(), 1usize..=3).prop_flat_map(|(p, n)| poly(p, n, 6, -5, 5));
    runner(150)
        .run(&s, |f| {
            let names = default_names(f.nvars());
            let text = f.display_with(&names).to_string();
            prop_assert_eq!(parse_poly(&text, &names, f.prime()).unwrap(), f);
            Ok(())
        })
        .unwrap();
}

#[test]
fn shift_is_multiplication_by_a_monomial() {
    let s = (prime(), 1usize..=3).prop_flat_map(|(p, n)| (poly(p, n, 5, -3, 3), prop::collection::vec(-4i64..=4, n)));
    runner(100)
        .run(&s, |(f, a)| {
            let m = LaurentPoly::monomial(f.prime(), a.clone(), 1);
            prop_assert_eq!(f.shift(&a), f.mul(&m));
            let back: Vec<i64> = a.iter().map(|x| -x).collect();
            prop_assert_eq!(f.shift(&a).shift(&back), f);
            Ok(())
        })
        .unwrap();
}

#[test]
fn primality_check() {
    for p in [2u64, 3, 5, 7, 11, 13, 101, 65537] {
        assert_eq!(Prime::new(p).unwrap().get() as u64, p);
    }
    for c in [0u64, 1, 4, 9, 15, 91, 65535] {
        assert!(Prime::new(c).is_err(), "{c}");
    }
}
