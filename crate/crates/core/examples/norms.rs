//! Operator norm enclosures of `C_t` across the space catalog.

use ceslab::spectral::operator_norm;
use ceslab::{Scalar, SpaceSpec};

fn main() -> ceslab::Result<()> {
    let spaces = ["l1", "l2", "l3", "linf", "c0", "cs", "ces2", "d2", "bv"];
    let t = Scalar::exact(1, 2);
    println!("{:<6} {:>22} {:>22}  method", "space", "lower", "upper");
    for s in spaces {
        let space: SpaceSpec = s.parse()?;
        let est = operator_norm(&space, &t, 1024)?;
        let upper = est.upper().map_or("inf".to_string(), |u| format!("{u:.17}"));
        println!("{:<6} {:>22.17} {:>22}  {:?}", s, est.lower(), upper, est.method);
    }

    // t = 1 on l^2 is the Hardy constant 2, reached slowly
    let l2: SpaceSpec = "l2".parse()?;
    for n in [256, 1024, 4096] {
        let est = operator_norm(&l2, &Scalar::exact(1, 1), n)?;
        println!("l2 t=1 N={n}: lower {:.6}", est.lower());
    }
    Ok(())
}
