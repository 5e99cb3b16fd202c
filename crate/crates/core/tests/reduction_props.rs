mod common;

use std::sync::Arc;

use common::*;
use lamplighter::digitset::Status;
use lamplighter::group::{GroupContext, GroupElement};
use lamplighter::laurent::LaurentPoly;
use lamplighter::modcalc::{FreeModuleElement, ModulePresentation, Ring};
use lamplighter::oracle::{bfs_submonoid, brute_knapsack, window_compare, Comparison, SearchBudget, SearchOutcome};
use lamplighter::reduction::{
    decide_submonoid, group_product_to_knapsack, knapsack_to_sunit, solve_knapsack, submonoid_to_group_products, GroupProductOutcome, KnapsackInstance,
    SubmonoidInstance, Verdict,
};
use lamplighter::sunit::SolveOptions;
use proptest::prelude::*;

fn small_element(ctx: &Arc<GroupContext>, amax: i64) -> impl Strategy<Value = GroupElement> {
    let ctx = ctx.clone();
    let (p, n) = (ctx.p(), ctx.n());
    (poly(p, n, 2, -1, 1), prop::collection::vec(-amax..=amax, n)).prop_map(move |(y, a)| ctx.element(FreeModuleElement::scalar(y), a).unwrap())
}

fn knapsack(ctx: Arc<GroupContext>, torsion: bool) -> impl Strategy<Value = KnapsackInstance> {
    let c2 = ctx.clone();
    let tors = if torsion { 1usize..=1 } else { 0usize..=0 };
    (
        prop::collection::vec(small_element(&ctx, 2), 1..=2),
        prop::collection::vec(poly(ctx.p(), ctx.n(), 2, -1, 1), tors),
        prop::collection::vec(-2i64..=2, 3),
        any::<bool>(),
        small_element(&ctx, 2),
    )
        .prop_map(move |(mut fs, ts, ks, reachable, other)| {
            for t in ts {
                fs.insert(1, c2.element(FreeModuleElement::scalar(t), vec![0; c2.n()]).unwrap());
            }
            let target = if reachable {
                let parts: Vec<GroupElement> = fs.iter().zip(ks.iter().cycle()).map(|(h, k)| c2.power(h, *k)).collect();
                c2.product(&parts)
            } else {
                other
            };
            KnapsackInstance { ctx: c2.clone(), factors: fs, target }
        })
}

fn contexts_n1() -> Vec<Arc<GroupContext>> {
    let r = Ring::laurent(2, 1);
    vec![
        GroupContext::lamplighter(2, 1),
        GroupContext::lamplighter(3, 1),
        GroupContext::new(ModulePresentation::new(r.clone(), 1, vec![FreeModuleElement::scalar(r.parse("X1^3 + X1 + 1").unwrap())]).unwrap()).unwrap(),
    ]
}

fn check_knapsack(k: &KnapsackInstance) -> Result<(), TestCaseError> {
    const B: i64 = 10;
    let sol = solve_knapsack(k, &SolveOptions::default()).unwrap();
    let b = match sol.status {
        Status::Exact => B,
        Status::WindowVerified(w) => w.min(B),
    };
    let brute = brute_knapsack(&k.ctx, &k.factors, &k.target, b);
    prop_assert_eq!(window_compare(&sol.automaton, &brute, b), Comparison::Pass);
    // every accepted tuple really solves the equation
    for nv in sol.automaton.enumerate_window(b) {
        let parts: Vec<GroupElement> = k.factors.iter().zip(&nv).map(|(h, e)| k.ctx.power(h, *e)).collect();
        prop_assert_eq!(k.ctx.product(&parts), k.target.clone());
    }
    Ok(())
}

#[test]
fn knapsack_pipeline_matches_oracle() {
    for ctx in contexts_n1() {
        runner(12).run(&knapsack(ctx, false), |k| check_knapsack(&k)).unwrap();
    }
}

#[test]
fn torsion_residue_pieces_cover_the_solution_set() {
    for ctx in contexts_n1() {
        runner(10)
            .run(&knapsack(ctx, true), |k| {
                let pieces = knapsack_to_sunit(&k).unwrap();
                let torsion = k.factors.iter().filter(|h| h.a.iter().all(|x| *x == 0) && !h.y.is_zero()).count();
                prop_assert_eq!(pieces.len(), (k.ctx.p() as usize).pow(torsion as u32));
                check_knapsack(&k)
            })
            .unwrap();
    }
}

fn finite_ctx() -> Arc<GroupContext> {
    let r = Ring::laurent(2, 1);
    let f = LaurentPoly::from_terms(2, 1, [(vec![0], 1), (vec![1], 1), (vec![2], 1)]);
    GroupContext::new(ModulePresentation::new(r, 1, vec![FreeModuleElement::scalar(f)]).unwrap()).unwrap()
}

#[test]
fn submonoid_decision_agrees_with_search() {
    let ctx = finite_ctx();
    let s = (prop::collection::vec(small_element(&ctx, 2), 2..=3), small_element(&ctx, 3));
    let budget = SearchBudget {
        max_len: 10,
        support: 8,
        window: 8,
    };
    runner(16)
        .run(&s, |(gens, target)| {
            let inst = SubmonoidInstance {
                ctx: ctx.clone(),
                generators: gens,
                target,
            };
            let d = decide_submonoid(&inst, &SolveOptions::default(), Some(12)).unwrap();
            let bfs = bfs_submonoid(&ctx, &inst.generators, &inst.target, &budget);
            if let SearchOutcome::Found(w) = &bfs {
                prop_assert_ne!(d.verdict, Verdict::NonMember, "witness {:?}", w);
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn group_product_knapsacks_are_equivalent_at_desk_scale() {
    let ctx = finite_ctx();
    let s = (prop::collection::vec(small_element(&ctx, 2), 2..=3), small_element(&ctx, 2));
    let budget = SearchBudget {
        max_len: 8,
        support: 8,
        window: 8,
    };
    runner(16)
        .run(&s, |(gens, target)| {
            let inst = SubmonoidInstance {
                ctx: ctx.clone(),
                generators: gens,
                target,
            };
            let s1 = submonoid_to_group_products(&inst, Some(8));
            let mut some_yes = false;
            for gp in &s1.instances {
                match group_product_to_knapsack(gp).unwrap() {
                    GroupProductOutcome::Decided(yes, _) => some_yes |= yes,
                    GroupProductOutcome::Knapsack(k) => {
                        let sol = brute_knapsack(&k.ctx, &k.factors, &k.target, 6);
                        some_yes |= !sol.is_empty();
                    }
                }
            }
            if let SearchOutcome::Found(_) = bfs_submonoid(&ctx, &inst.generators, &inst.target, &budget) {
                prop_assert!(some_yes);
            }
            Ok(())
        })
        .unwrap();
}
