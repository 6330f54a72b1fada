//! Distance of powers and Cesàro means of `C_t` from the limit projection.

use ceslab::spectral::ergodic_distances;
use ceslab::SpaceSpec;

fn main() -> ceslab::Result<()> {
    for s in ["l1", "linf"] {
        let space: SpaceSpec = s.parse()?;
        let rep = ergodic_distances(&space, 0.5, 64, 512)?;
        println!("{s}:");
        for n in [1, 2, 4, 8, 16, 32, 64] {
            println!("  n={n:<3} |C^n - P| = {:.6e}   |mean_n - P| = {:.6e}", rep.powers[n - 1], rep.means[n - 1]);
        }
    }
    Ok(())
}
