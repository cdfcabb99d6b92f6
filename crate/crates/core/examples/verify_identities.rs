//! Run every operator-identity check on one two-level and one three-level
//! model and print the one-line summaries.
//!
//! ```text
//! cargo run --example verify_identities
//! ```

use multiphoton::fock::ModeDim;
use multiphoton::models::{build_three_level, build_two_level, ThreeLevelParams, TwoLevelParams};
use multiphoton::verify;

fn main() -> multiphoton::Result<()> {
    for m in 1..=2u32 {
        let p = TwoLevelParams { omega: 1.1, omega0: 1.7, g: 0.2, m, fock_dim: ModeDim::new(20)? };
        let model = build_two_level(&p)?;
        let conserved = verify::check_constants(&model.hamiltonian, &[&model.excitation], &model.buffered())?;
        println!("two-level M={m}");
        println!("  [N, H] relative residual {:.2e}", conserved[0]);
        for r in verify::check_heisenberg(&p)? {
            println!("  {}", r.summary());
        }
        println!("  {}", verify::check_inversion_identity(&p)?.summary());
    }

    let q = ThreeLevelParams {
        omega_l1: 0.7,
        omega_l2: 0.5,
        omega0: 1.0,
        omega1: 0.6,
        g: 0.1,
        m: 1,
        ntot: 2,
        dims: [ModeDim::new(8)?, ModeDim::new(8)?],
    };
    let model = build_three_level(&q)?;
    let conserved = verify::check_constants(&model.hamiltonian, &[&model.n1, &model.n2, &model.s_squared], &model.buffered())?;
    println!("three-level M=1, N=2");
    println!("  [N1, H], [N2, H], [S², H] residuals {:.2e} {:.2e} {:.2e}", conserved[0], conserved[1], conserved[2]);
    let report = verify::check_level_identity(&q)?;
    println!("  {}", report.summary());
    for c in report.residuals_all.iter().take(4) {
        println!("    {:<16} {:.3e}", c.convention.to_string(), c.residual);
    }

    let limit = ThreeLevelParams { m: 1, ntot: 1, omega1: 0.0, omega_l1: 0.0, ..q };
    println!("  single-beam reduction, max splitting difference {:.2e}", verify::check_reduction(&limit)?);
    Ok(())
}
