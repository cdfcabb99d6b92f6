//! Exact evolution of the inversion from |n, e⟩ and the dominant frequency of
//! the resulting trace, for one- and two-photon absorption.
//!
//! ```text
//! cargo run --example evolve_spectrum
//! ```

use multiphoton::dynamics::{rabi_compare, Peak};
use multiphoton::fock::ModeDim;
use multiphoton::models::TwoLevelParams;

fn main() -> multiphoton::Result<()> {
    println!("{:>2} {:>3} {:>12} {:>12} {:>12} {:>10}", "M", "n", "exact", "measured", "closed form", "bin");
    for (m, omega) in [(1u32, 1.05), (2, 0.52)] {
        let p = TwoLevelParams { omega, omega0: 1.0, g: 0.05, m, fock_dim: ModeDim::new(14)? };
        for n in [0u64, 1, 5] {
            let r = rabi_compare(&p, n, None)?;
            let measured = match r.measured {
                Peak::Oscillation(peak) => format!("{:.6}", peak.frequency),
                Peak::NoOscillation { .. } => "flat".to_string(),
            };
            println!(
                "{m:>2} {n:>3} {:>12.6} {measured:>12} {:>12.6} {:>10.2e}",
                r.exact_splitting,
                r.formula_frequency,
                r.measured.bin_width()
            );
        }
    }
    Ok(())
}
