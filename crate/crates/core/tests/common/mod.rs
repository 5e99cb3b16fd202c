// Shared generators and helpers for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use lamplighter::digitset::DigitAutomaton;
use lamplighter::group::{GroupContext, GroupElement};
use lamplighter::laurent::LaurentPoly;
use lamplighter::modcalc::{FreeModuleElement, ModulePresentation, Ring};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const SEED: [u8; 32] = *b"lamplighter-fixed-seed-000000001";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Deterministic runner: same cases on every run.
pub fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

pub fn el(ctx: &GroupContext, y: &str, a: &[i64]) -> GroupElement {
    ctx.element(FreeModuleElement::scalar(ctx.ring().parse(y).unwrap()), a.to_vec()).unwrap()
}

pub fn sc(ring: &Ring, s: &str) -> FreeModuleElement {
    FreeModuleElement::scalar(ring.parse(s).unwrap())
}

/// Laurent polynomial with up to `terms` terms, exponents in `[lo, hi]`.
pub fn poly(p: u32, n: usize, terms: usize, lo: i64, hi: i64) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((prop::collection::vec(lo..=hi, n), 1..p as i64), 0..=terms)
        .prop_map(move |ts| LaurentPoly::from_terms(p, n, ts))
}

pub fn vector(p: u32, n: usize, rank: usize, terms: usize, lo: i64, hi: i64) -> impl Strategy<Value = FreeModuleElement> {
    prop::collection::vec(poly(p, n, terms, lo, hi), rank).prop_map(FreeModuleElement::new)
}

/// The groups used by the property suites.
pub fn contexts() -> Vec<Arc<GroupContext>> {
    let r2 = Ring::laurent(2, 2);
    let r3 = Ring::laurent(3, 1);
    vec![
        GroupContext::lamplighter(2, 2),
        GroupContext::lamplighter(3, 1),
        GroupContext::new(ModulePresentation::new(r2.clone(), 1, vec![sc(&r2, "X1 + X2 + 1")]).unwrap()).unwrap(),
        GroupContext::new(ModulePresentation::new(r3.clone(), 2, vec![FreeModuleElement::new(vec![r3.parse("X1 - 1").unwrap(), r3.parse("1").unwrap()])]).unwrap()).unwrap(),
    ]
}

pub fn element(ctx: &Arc<GroupContext>) -> impl Strategy<Value = GroupElement> {
    let ctx = ctx.clone();
    let (p, n, d) = (ctx.p(), ctx.n(), ctx.rank());
    (vector(p, n, d, 3, -2, 2), prop::collection::vec(-2i64..=2, n)).prop_map(move |(y, a)| ctx.element(y, a).unwrap())
}

/// Random automaton over `Z^d` with at most `states` states, built through
/// the text format so it is restricted to canonical words.
pub fn automaton(p: u32, d: usize, states: usize) -> impl Strategy<Value = DigitAutomaton> {
    let nletters = (1usize << d) + (p as usize).pow(d as u32);
    (1..=states)
        .prop_flat_map(move |n| {
            (
                Just(n),
                prop::collection::vec(prop::option::weighted(0.8, 0..n), n * nletters),
                prop::collection::vec(prop::bool::weighted(0.4), n),
            )
        })
        .prop_map(move |(n, trans, finals)| {
            let mut s = format!("pautomaton v1\np={p} d={d}\n");
            let f: Vec<String> = (0..n).filter(|i| finals[*i]).map(|i| i.to_string()).collect();
            s.push_str(&format!("states={n} initial=0 finals={}\n", f.join(",")));
            for q in 0..n {
                for l in 0..nletters {
                    if let Some(t) = trans[q * nletters + l] {
                        s.push_str(&format!("trans {q} {} {t}\n", letter(p, d, l)));
                    }
                }
            }
            DigitAutomaton::from_text(&s).unwrap()
        })
}

fn letter(p: u32, d: usize, l: usize) -> String {
    let parts: Vec<String> = if l < (1 << d) {
        (0..d).map(|i| if l & (1 << i) != 0 { "-".into() } else { "+".into() }).collect()
    } else {
        let mut k = l - (1 << d);
        (0..d)
            .map(|_| {
                let x = k % p as usize;
                k /= p as usize;
                x.to_string()
            })
            .collect()
    };
    format!("({})", parts.join(","))
}

/// All integer vectors of length `d` with entries in `[-b, b]`.
pub fn box_points(d: usize, b: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-b..=b).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}
