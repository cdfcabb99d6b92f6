//! Closed-form Rabi frequency against the exact invariant-block splitting of
//! the M-photon two-level model.
//!
//! ```text
//! cargo run --example two_level_rabi
//! ```

use multiphoton::fock::ModeDim;
use multiphoton::models::{block_decompose, block_of, build_two_level, Level2, TwoLevelParams};
use multiphoton::rabi::{frequency, omega_r_squared, TwoLevelRabiInput};

fn main() -> multiphoton::Result<()> {
    for m in 1..=3u32 {
        let p = TwoLevelParams { omega: 1.0, omega0: 0.9 * m as f64, g: 0.05, m, fock_dim: ModeDim::new(16)? };
        let model = build_two_level(&p)?;
        let blocks = block_decompose(&model.hamiltonian, &[&model.excitation])?;

        println!("M = {m}, detuning {:.3}", p.detuning());
        println!("{:>4} {:>14} {:>14} {:>10}", "n", "closed form", "exact", "ratio");
        for n in 0..8u64 {
            let closed = frequency(omega_r_squared(&TwoLevelRabiInput::excited(n, p))?);
            let exact = block_of(&blocks, model.index(n as usize, Level2::Excited))
                .and_then(|b| b.splitting)
                .expect("|n,e> pairs with |n+M,g>");
            println!("{n:>4} {closed:>14.6} {exact:>14.6} {:>10.4}", closed / exact);
        }
        println!();
    }
    Ok(())
}
