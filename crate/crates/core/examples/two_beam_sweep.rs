//! Tabulate the two three-level Rabi frequencies over a photon-number grid and
//! write them as CSV to stdout.
//!
//! ```text
//! cargo run --example two_beam_sweep > sweep.csv
//! ```

use multiphoton::fock::ModeDim;
use multiphoton::models::ThreeLevelParams;
use multiphoton::rabi::sweep_three_level;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ThreeLevelParams {
        omega_l1: 0.6,
        omega_l2: 0.45,
        omega0: 1.0,
        omega1: 0.8,
        g: 0.05,
        m: 1,
        ntot: 2,
        dims: [ModeDim::new(4)?, ModeDim::new(4)?],
    };
    let rows = sweep_three_level(&p, 0..=12, 0..=12);
    let mut out = csv::Writer::from_writer(std::io::stdout().lock());
    for row in &rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
