mod common;

use std::collections::BTreeSet;

use common::*;
use lamplighter::digitset::{decode, encode, from_linear_system, Congruence, DigitAutomaton};
use proptest::prelude::*;

const B: i64 = 32;

fn set(v: Vec<Vec<i64>>) -> BTreeSet<Vec<i64>> {
    v.into_iter().collect()
}

fn space() -> impl Strategy<Value = (u32, usize)> {
    prop_oneof![Just((2u32, 1usize)), Just((3, 1)), Just((5, 1)), Just((2, 2)), Just((3, 2))]
}

#[test]
fn encoding_round_trips() {
    let s = (prop_oneof![Just(2u32), Just(3), Just(7)], prop::collection::vec(-1_000_000i64..=1_000_000, 1..=4));
    runner(300)
        .run(&s, |(p, z)| {
            let w = encode(&z, p);
            prop_assert_eq!(decode(&w).unwrap(), z.clone());
            // canonical: padded only up to the longest coordinate
            let ndigits = |mut x: u64| {
                let mut k = 1;
                while x >= p as u64 {
                    x /= p as u64;
                    k += 1;
                }
                k
            };
            let longest = z.iter().map(|x| ndigits(x.unsigned_abs())).max().unwrap();
            prop_assert_eq!(w.letters.len() - 1, longest);
            Ok(())
        })
        .unwrap();
    assert_eq!(encode(&[0], 2).to_string(), "+0");
    assert_eq!(encode(&[4], 2).to_string(), "+001");
}

#[test]
fn set_operations_match_windows() {
    let s = space().prop_flat_map(|(p, d)| (automaton(p, d, 12), automaton(p, d, 12)));
    runner(40)
        .run(&s, |(a, b)| {
            let wa = set(a.enumerate_window(B));
            let wb = set(b.enumerate_window(B));
            let w = |x: DigitAutomaton| set(x.enumerate_window(B));
            prop_assert_eq!(w(a.union(&b).unwrap()), wa.union(&wb).cloned().collect());
            prop_assert_eq!(w(a.intersect(&b).unwrap()), wa.intersection(&wb).cloned().collect());
            prop_assert_eq!(w(a.difference(&b).unwrap()), wa.difference(&wb).cloned().collect());
            prop_assert_eq!(w(a.minimize()), wa.clone());
            for z in &wa {
                prop_assert!(a.member(z));
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn complement_is_an_involution() {
    let s = space().prop_flat_map(|(p, d)| (Just(d), automaton(p, d, 12)));
    runner(40)
        .run(&s, |(d, a)| {
            let c = a.complement();
            prop_assert!(c.complement().equals(&a).unwrap());
            let all = set(box_points(d, 8));
            let wa = set(a.enumerate_window(8));
            prop_assert_eq!(set(c.enumerate_window(8)), all.difference(&wa).cloned().collect());
            prop_assert!(a.intersect(&c).unwrap().is_empty());
            Ok(())
        })
        .unwrap();
}

#[test]
fn emptiness_matches_short_words() {
    let s = prop_oneof![Just(2u32), Just(3)].prop_flat_map(|p| (Just(p), automaton(p, 1, 8)));
    runner(60)
        .run(&s, |(p, a)| {
            // a shortest accepted word is no longer than the state count
            let bound = (p as i64).pow(8);
            let found = !a.enumerate_window(bound).is_empty();
            prop_assert_eq!(a.is_empty(), !found);
            Ok(())
        })
        .unwrap();
}

#[test]
fn text_format_round_trips() {
    let s = space().prop_flat_map(|(p, d)| automaton(p, d, 10));
    runner(40)
        .run(&s, |a| {
            let b = DigitAutomaton::from_text(&a.to_text()).unwrap();
            prop_assert!(a.equals(&b).unwrap());
            prop_assert_eq!(a.enumerate_window(B), b.enumerate_window(B));
            Ok(())
        })
        .unwrap();
}

#[test]
fn linear_preimage_matches_pointwise_membership() {
    let s = prop_oneof![Just(2u32), Just(3)].prop_flat_map(|p| (automaton(p, 1, 8), prop::collection::vec(-3i64..=3, 2)));
    runner(40)
        .run(&s, |(a, row)| {
            let pre = a.linear_preimage(&[row.clone()], 2).unwrap();
            let want: Vec<Vec<i64>> = box_points(2, 12).into_iter().filter(|v| a.member(&[row[0] * v[0] + row[1] * v[1]])).collect();
            prop_assert_eq!(pre.enumerate_window(12), want);
            Ok(())
        })
        .unwrap();
}

#[test]
fn linear_image_and_projection_of_finite_sets() {
    let s = (prop_oneof![Just(2u32), Just(3)], prop::collection::vec(prop::collection::vec(-6i64..=6, 2), 0..6), prop::collection::vec(-2i64..=2, 2));
    runner(40)
        .run(&s, |(p, pts, row)| {
            let a = DigitAutomaton::from_points(p, 2, &pts);
            let img = a.linear_image(&[row.clone()]).unwrap();
            let want = set(pts.iter().map(|v| vec![row[0] * v[0] + row[1] * v[1]]).collect());
            prop_assert_eq!(set(img.enumerate_window(64)), want);
            let proj = a.project(&[1]);
            prop_assert_eq!(set(proj.enumerate_window(64)), set(pts.iter().map(|v| vec![v[1]]).collect()));
            Ok(())
        })
        .unwrap();
}

#[test]
fn linear_systems_match_brute_force() {
    let s = (
        prop_oneof![Just(2u32), Just(3)],
        prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 0..=2),
        prop::collection::vec(-4i64..=4, 2),
        prop::collection::vec((prop::collection::vec(-2i64..=2, 2), 0i64..6, 2i64..=6), 0..=1),
    );
    runner(40)
        .run(&s, |(p, rows, rhs, congs)| {
            let b: Vec<i64> = rhs[..rows.len()].to_vec();
            let cs: Vec<Congruence> = congs
                .iter()
                .map(|(c, r, m)| Congruence {
                    coeffs: c.clone(),
                    residue: r % m,
                    modulus: *m,
                })
                .collect();
            let a = from_linear_system(p, 2, &rows, &b, &cs);
            let want: Vec<Vec<i64>> = box_points(2, 16)
                .into_iter()
                .filter(|v| rows.iter().zip(&b).all(|(r, x)| r[0] * v[0] + r[1] * v[1] == *x))
                .filter(|v| cs.iter().all(|c| (c.coeffs[0] * v[0] + c.coeffs[1] * v[1] - c.residue).rem_euclid(c.modulus) == 0))
                .collect();
            prop_assert_eq!(a.enumerate_window(16), want);
            Ok(())
        })
        .unwrap();
}
