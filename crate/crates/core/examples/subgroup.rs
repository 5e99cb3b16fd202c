//! Kernel and lattice data of a finitely generated subgroup: the image
//! lattice, lifts of its basis, and the kernel as a module over the
//! subring of the lattice.

use lamplighter::group::{subgroup_data, GroupContext};
use lamplighter::modcalc::FreeModuleElement;

fn main() {
    let ctx = GroupContext::lamplighter(2, 1);
    let lamp = |s: &str| FreeModuleElement::scalar(ctx.ring().parse(s).unwrap());
    let gens = vec![
        ctx.element(lamp("1 + X1"), vec![2]).unwrap(),
        ctx.element(lamp("X1^-1"), vec![-2]).unwrap(),
        ctx.element(lamp("1"), vec![4]).unwrap(),
    ];
    let sd = subgroup_data(&ctx, &gens).unwrap();
    println!("image lattice basis: {:?}", sd.lattice.basis);
    for (h, w) in &sd.lifts {
        println!("lift {} = word {:?}", ctx.show(h), w);
    }
    for (y, w) in &sd.kernel {
        println!("kernel element {} = word {:?}", y.show(ctx.ring()), w);
    }
    if let Some(sp) = &sd.presentation {
        println!("kernel presentation relations: {}", sp.presentation.relations.len());
    }
}
