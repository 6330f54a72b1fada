//! `C_t` as a product of the diagonal and the Toeplitz part, checked exactly.

use ceslab::operators::{cesaro_matrix, factorization_check};
use ceslab::numeric::render_rational;
use ceslab::Rational;

fn main() -> ceslab::Result<()> {
    let t = Rational::new(2.into(), 5.into());
    let a = cesaro_matrix(&t, 5)?;
    for i in 0..5 {
        let row: Vec<String> = (0..5).map(|j| render_rational(a.get(i, j))).collect();
        println!("{}", row.join("\t"));
    }
    for n in [4, 16, 64] {
        println!("N={n}: {}", factorization_check(&t, n));
    }
    Ok(())
}
