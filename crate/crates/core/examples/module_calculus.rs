//! Gröbner bases, membership certificates and finite-dimensionality for
//! submodules of free modules over Laurent polynomial rings.

use lamplighter::modcalc::{combine, fp_dimension, groebner, submodule_membership, FpDimension, FreeModuleElement, ModulePresentation, MonomialOrder, Ring};

fn main() {
    let ring = Ring::laurent(3, 2);
    let v = |a: &str, b: &str| FreeModuleElement::new(vec![ring.parse(a).unwrap(), ring.parse(b).unwrap()]);
    let gens = vec![v("X1 - 1", "X2"), v("X2^-1", "1 + X1")];
    let gb = groebner(&ring, 2, &gens, MonomialOrder).unwrap();
    println!("Gröbner basis ({} elements):", gb.len());
    for g in &gb {
        println!("  {}", g.show(&ring));
    }

    let y = combine(&ring, 2, &[ring.parse("X1 + X2").unwrap(), ring.parse("2").unwrap()], &gens);
    let cert = submodule_membership(&ring, &y, &gens).unwrap().expect("member");
    println!("{} = Σ c_i g_i with c = {:?}", y.show(&ring), cert.iter().map(|c| c.to_string()).collect::<Vec<_>>());

    let finite = ModulePresentation::new(
        ring.clone(),
        1,
        vec![FreeModuleElement::scalar(ring.parse("X1^2 + X1 + 2").unwrap()), FreeModuleElement::scalar(ring.parse("X2 - X1").unwrap())],
    )
    .unwrap();
    match fp_dimension(&finite).unwrap() {
        FpDimension::Finite(d, _) => println!("F_3[X1^±, X2^±]/(X1^2+X1+2, X2-X1) has dimension {d}"),
        FpDimension::Infinite => println!("infinite dimensional"),
    }
}
