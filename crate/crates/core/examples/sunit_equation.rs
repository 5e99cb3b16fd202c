//! Solving an S-unit equation over a module with two coprimary components
//! and printing the per-component backends.

use lamplighter::sunit::{solve, SUnitInstance, SolveOptions};
use lamplighter::modcalc::{FreeModuleElement, ModulePresentation, Ring};

fn main() {
    // (1 + X) X^{x1} + X^{x2} = 1 over F_2[X^±]/((X^2 + X + 1)(X^3 + X + 1))
    let ring = Ring::laurent(2, 1);
    let f = ring.parse("(X1^2 + X1 + 1) * (X1^3 + X1 + 1)").unwrap();
    let module = ModulePresentation::new(ring.clone(), 1, vec![FreeModuleElement::scalar(f)]).unwrap();
    let constants = ["1 + X1", "1", "1"].map(|s| FreeModuleElement::scalar(ring.parse(s).unwrap())).to_vec();
    let inst = SUnitInstance::new(module, constants).unwrap();
    let res = solve(&inst, None, &[], &SolveOptions::default()).unwrap();
    println!("status: {:?}", res.status);
    for c in &res.components {
        println!("component {}: backend {}, status {:?}", c.label, c.backend, c.status);
    }
    println!("solutions with |x| <= 10: {:?}", res.automaton.enumerate_window(10));
}
