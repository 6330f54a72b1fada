//! Resolvent norms of `C_1` sections on a small grid, printed as a heat map.

use ceslab::spectral::{pseudospectrum, Grid};

fn main() -> ceslab::Result<()> {
    let grid = Grid { re: (-0.5, 2.5), im: (-1.5, 1.5), nx: 25, ny: 13 };
    let vals = pseudospectrum(1.0, &grid, 256)?;
    let shade = |r: f64| match r.log10() {
        x if x > 3.0 => '#',
        x if x > 2.0 => '+',
        x if x > 1.0 => '.',
        _ => ' ',
    };
    // rows come out im-major
    for row in vals.chunks(grid.nx).rev() {
        let line: String = row.iter().map(|v| shade(v.value)).collect();
        println!("|{line}|");
    }
    Ok(())
}
