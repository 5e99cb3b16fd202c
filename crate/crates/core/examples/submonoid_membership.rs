//! Deciding submonoid membership in F_2 wr Z^2 and cross-checking with the
//! breadth-first oracle.

use lamplighter::group::GroupContext;
use lamplighter::modcalc::FreeModuleElement;
use lamplighter::oracle::{bfs_submonoid, SearchBudget};
use lamplighter::reduction::{decide_submonoid, SubmonoidInstance};
use lamplighter::sunit::SolveOptions;

fn main() {
    let ctx = GroupContext::lamplighter(2, 2);
    let lamp = |s: &str| FreeModuleElement::scalar(ctx.ring().parse(s).unwrap());
    let generators = vec![
        ctx.element(lamp("1 + X2"), vec![2, 0]).unwrap(),
        ctx.element(lamp("1"), vec![-2, 0]).unwrap(),
        ctx.element(lamp("1 + X1"), vec![0, 1]).unwrap(),
    ];
    // g1 g3 g1 g1 g3 g2 is a member; (X2^2, (4, 2)) is not
    let member = ctx.eval_word(&generators, &vec![(0, 1), (2, 1), (0, 2), (2, 1), (1, 1)]);
    for target in [member, ctx.element(lamp("X2^2"), vec![4, 2]).unwrap()] {
        let inst = SubmonoidInstance {
            ctx: ctx.clone(),
            generators: generators.clone(),
            target,
        };
        let d = decide_submonoid(&inst, &SolveOptions::default(), None).unwrap();
        println!("target {}: {:?}", ctx.show(&inst.target), d.verdict);
        println!("  strict generators {:?}, bound {}", d.strict, d.bound);
        for w in &d.words {
            println!("  word {:?}: {}", w.word, w.outcome);
        }
        let budget = SearchBudget {
            max_len: 12,
            support: 8,
            window: 8,
        };
        println!("  oracle: {:?}", bfs_submonoid(&ctx, &inst.generators, &inst.target, &budget));
    }
}
