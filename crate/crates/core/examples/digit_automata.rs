//! Base-p digit automata: building sets of integer vectors, Boolean
//! operations, linear maps and the text format.

use lamplighter::digitset::{encode, from_linear_system, Congruence, DigitAutomaton};

fn main() {
    // { (x, y) : x = 2y } and { (x, y) : x ≡ 1 (mod 3) } over Z^2, base 2
    let line = from_linear_system(2, 2, &[vec![1, -2]], &[0], &[]);
    let odd = from_linear_system(
        2,
        2,
        &[],
        &[],
        &[Congruence {
            coeffs: vec![1, 0],
            residue: 1,
            modulus: 3,
        }],
    );
    let both = line.intersect(&odd).unwrap().minimize();
    println!("x = 2y and x ≡ 1 mod 3, |x|,|y| <= 12: {:?}", both.enumerate_window(12));

    // project to the first coordinate and push through z -> 3z
    let xs = both.project(&[0]);
    let tripled = xs.linear_image(&[vec![3]]).unwrap();
    println!("3x: {:?}", tripled.enumerate_window(40));

    // powers of 2 from the fixture-style text format
    let pow = DigitAutomaton::from_points(2, 1, &[vec![1], vec![2], vec![4], vec![8]]);
    let text = pow.to_text();
    println!("{text}");
    let back = DigitAutomaton::from_text(&text).unwrap();
    println!("round trip equal: {}", back.equals(&pow).unwrap());
    println!("complement misses 4: {}", !pow.complement().member(&[4]));
    println!("word for (5, -3) in base 2: {}", encode(&[5, -3], 2));
}
