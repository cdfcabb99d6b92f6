//! Population dynamics of the three-level model from |n1, n2, bottom⟩: the
//! ⟨S⟩ channel oscillates, ⟨S²⟩ stays fixed because S² commutes with H.
//!
//! ```text
//! cargo run --example center_and_relative_channels
//! ```

use multiphoton::dynamics::three_level_compare;
use multiphoton::fock::ModeDim;
use multiphoton::models::ThreeLevelParams;

fn main() -> multiphoton::Result<()> {
    for (omega0, omega1) in [(0.5, 0.5), (0.9, 0.4)] {
        let p = ThreeLevelParams {
            omega_l1: 0.6,
            omega_l2: 0.4,
            omega0,
            omega1,
            g: 0.1,
            m: 1,
            ntot: 2,
            dims: [ModeDim::new(6)?, ModeDim::new(6)?],
        };
        for (n1, n2) in [(1u64, 1u64), (3, 2)] {
            let r = three_level_compare(&p, n1, n2, None)?;
            println!(
                "omega0={omega0} omega1={omega1} (n1,n2)=({n1},{n2}): split {:?}, <S> peak {:?}, <S^2> peak {:?}, closed forms {:.4} / {:.4}",
                r.exact_splitting,
                r.center_channel.frequency(),
                r.relative_channel.frequency(),
                r.center_frequency,
                r.relative_frequency
            );
        }
    }
    Ok(())
}
