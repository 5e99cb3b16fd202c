//! Knapsack equations h1^n1 h2^n2 h3^n3 = g, with a torsion factor that
//! splits the solution set into residue classes mod p.

use lamplighter::group::GroupContext;
use lamplighter::modcalc::FreeModuleElement;
use lamplighter::oracle::{brute_knapsack, window_compare};
use lamplighter::reduction::{solve_knapsack, KnapsackInstance};
use lamplighter::sunit::SolveOptions;

fn main() {
    let ctx = GroupContext::lamplighter(2, 1);
    let lamp = |s: &str| FreeModuleElement::scalar(ctx.ring().parse(s).unwrap());
    let h1 = ctx.element(lamp("1"), vec![1]).unwrap();
    let h2 = ctx.element(lamp("X1"), vec![0]).unwrap();
    let h3 = ctx.element(lamp("1 + X1"), vec![-1]).unwrap();
    let parts = [ctx.power(&h1, 3), ctx.power(&h2, 1), ctx.power(&h3, 2)];
    let target = ctx.product(&parts);
    let inst = KnapsackInstance {
        ctx: ctx.clone(),
        factors: vec![h1, h2, h3],
        target,
    };
    let sol = solve_knapsack(&inst, &SolveOptions::default()).unwrap();
    println!("status {:?}, {} residue pieces", sol.status, sol.pieces.len());
    for p in &sol.pieces {
        println!("  residues {:?}: empty = {}", p.residues, p.empty);
    }
    let b = 6;
    println!("solutions with |n| <= {b}: {:?}", sol.automaton.enumerate_window(b));
    let baseline = brute_knapsack(&ctx, &inst.factors, &inst.target, b);
    println!("agrees with exhaustive search: {:?}", window_compare(&sol.automaton, &baseline, b));
}
