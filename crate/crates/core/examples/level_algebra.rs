//! Matrix-unit generators of the three-level system: non-zero structure
//! constants, closure, and the gauge split of level energies.
//!
//! ```text
//! cargo run --example level_algebra
//! ```

use multiphoton::models::levels::{generator_levels, level_basis, GENERATORS};
use multiphoton::models::gauge_decompose;

fn main() {
    let basis = level_basis();
    let worst = (1..=GENERATORS)
        .flat_map(|i| (1..=GENERATORS).map(move |j| (i, j)))
        .map(|(i, j)| basis.closure_residual(i, j))
        .fold(0.0f64, f64::max);
    let constants = basis.nonzero_structure_constants();
    println!("{} non-zero structure constants, closure residual {worst:.1e}", constants.len());
    for (i, j, k, c) in constants.iter().take(12) {
        let name = |g: usize| {
            let (r, c) = generator_levels(g);
            format!("E{r}{c}")
        };
        println!("  [{}, {}] -> {:+} {}", name(*i), name(*j), c.re, name(*k));
    }

    let (e1, e2, e3) = (-1.25, 0.5, 1.75);
    let gauge = gauge_decompose(e1, e2, e3);
    println!(
        "E = ({e1}, {e2}, {e3}): omega0 = {}, omega1 = {}, dropped shift {}",
        gauge.omega0, gauge.omega1, gauge.shift
    );
    let rebuilt = gauge.reconstruct().diagonal();
    println!("  rebuilt diagonal {:?}", rebuilt.iter().map(|z| z.re).collect::<Vec<_>>());
}
