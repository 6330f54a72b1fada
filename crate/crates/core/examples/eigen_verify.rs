//! Exact eigenpairs of the finite sections and their duals.

use ceslab::eigen::{biorthogonality, eigenvector_closed_form, verify_dual_eigenpair, verify_eigenpair};
use ceslab::numeric::render_rational;
use ceslab::Rational;

fn main() {
    let t = Rational::new(1.into(), 3.into());
    let n = 8;
    for m in 0..4 {
        let v = eigenvector_closed_form(&t, m, n);
        let shown: Vec<String> = v.iter().take(m + 3).map(render_rational).collect();
        println!("x^({m}) = [{} ...]", shown.join(", "));
        println!("  primal: {}", verify_eigenpair(&t, m, n));
        println!("  dual:   {}", verify_dual_eigenpair(&t, m, n));
    }

    println!("<x^(m), y^(n)>:");
    for m in 0..4 {
        let row: Vec<String> = (0..4).map(|k| render_rational(&biorthogonality(&t, m, k))).collect();
        println!("  {}", row.join("\t"));
    }
}
