//! Multiplying, inverting and conjugating elements of `F_2 wr Z^2`.

use lamplighter::group::GroupContext;
use lamplighter::modcalc::FreeModuleElement;

fn main() {
    let ctx = GroupContext::lamplighter(2, 2);
    let lamp = |s: &str| FreeModuleElement::scalar(ctx.ring().parse(s).unwrap());
    let g = ctx.element(lamp("1 + X2"), vec![2, 0]).unwrap();
    let h = ctx.element(lamp("1 + X1"), vec![0, 1]).unwrap();

    println!("g       = {}", ctx.show(&g));
    println!("h       = {}", ctx.show(&h));
    println!("g h     = {}", ctx.show(&ctx.mul(&g, &h)));
    println!("h g     = {}", ctx.show(&ctx.mul(&h, &g)));
    println!("g^-1    = {}", ctx.show(&ctx.inv(&g)));
    println!("g^5     = {}", ctx.show(&ctx.power(&g, 5)));
    println!("h g h^-1 = {}", ctx.show(&ctx.conjugate(&h, &g)));
    // lamps alone have order p
    let y = ctx.lamp(ctx.ring().parse("X1 + X2^-1").unwrap());
    println!("y^2 is identity: {}", ctx.is_identity(&ctx.power(&y, 2)));
}
