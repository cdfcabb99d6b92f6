//! Single-mode M-photon absorption by a two-level system.
//!
//! Basis ordering is mode ⊗ level with level index 0 = excited, 1 = ground,
//! so state `(n, level)` has index `2n + level`.
//!
//! The interaction is written `β(a†^M σ₋ − a^M σ₊)` with `β = i·g`, `g ≥ 0`.
//! A real `β` would make that term anti-Hermitian; every closed form depends
//! on `|β|² = g²` only.

use serde::{Deserialize, Serialize};

use crate::algebra::{Operator, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::fock::{ladder_power, number, ModeDim};

/// Normalization of the two-level inversion operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinNorm {
    /// `σ_z = diag(1, −1)`, so `[σ₊, σ₋] = σ_z` and `[σ_z, σ±] = ±2σ±`.
    Pauli,
    /// `σ_z = ½ diag(1, −1)`, so `[σ_z, σ±] = ±σ±` and `[σ₊, σ₋] = 2σ_z`.
    Half,
}

impl SpinNorm {
    pub const ALL: [SpinNorm; 2] = [SpinNorm::Pauli, SpinNorm::Half];

    pub fn factor(self) -> f64 {
        match self {
            SpinNorm::Pauli => 1.0,
            SpinNorm::Half => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinNorm::Pauli => "pauli",
            SpinNorm::Half => "half",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level2 {
    Excited,
    Ground,
}

impl Level2 {
    pub fn index(self) -> usize {
        match self {
            Level2::Excited => 0,
            Level2::Ground => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    /// Laser frequency ω.
    pub omega: f64,
    /// Transition frequency ω₀.
    pub omega0: f64,
    /// Coupling strength, `|β| = g`.
    pub g: f64,
    /// Photons absorbed per transition.
    pub m: u32,
    pub fock_dim: ModeDim,
}

impl TwoLevelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega", self.omega), ("omega0", self.omega0), ("g", self.g)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        if self.m == 0 {
            return Err(Error::InvalidParams("photon multiplicity M must be ≥ 1".into()));
        }
        if self.fock_dim.get() < self.m as usize + 2 {
            return Err(Error::InvalidParams(format!(
                "Fock dimension {} too small for M={} (need ≥ M+2)",
                self.fock_dim.get(),
                self.m
            )));
        }
        Ok(())
    }

    /// `Mω − ω₀`.
    pub fn detuning(&self) -> f64 {
        self.m as f64 * self.omega - self.omega0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TwoLevelState {
    pub n: usize,
    pub level: Level2,
}

#[derive(Clone, Debug)]
pub struct TwoLevelModel {
    pub params: TwoLevelParams,
    pub spin_norm: SpinNorm,
    pub hamiltonian: Operator,
    /// Constant of motion `a†a + M σ₊σ₋`.
    pub excitation: Operator,
    pub sigma_z: Operator,
    pub sigma_plus: Operator,
    pub sigma_minus: Operator,
    pub photon_number: Operator,
    pub annihilation: Operator,
}

pub fn build_two_level(p: &TwoLevelParams) -> Result<TwoLevelModel> {
    build_two_level_with(p, SpinNorm::Pauli)
}

pub fn build_two_level_with(p: &TwoLevelParams, spin_norm: SpinNorm) -> Result<TwoLevelModel> {
    p.validate()?;
    let d = p.fock_dim;
    let id_mode = Operator::identity(&[d.get()]);
    let id_level = Operator::identity(&[2]);

    let sz = Operator::from_real_diagonal(&[2], [spin_norm.factor(), -spin_norm.factor()]);
    let sp = Operator::from_rows(2, &[ZERO, ONE, ZERO, ZERO]);
    let sm = sp.adjoint();

    let n_hat = number(d).kron(&id_level);
    let sigma_z = id_mode.kron(&sz);
    let sigma_plus = id_mode.kron(&sp);
    let sigma_minus = id_mode.kron(&sm);
    let emit = ladder_power(d, p.m, true).kron(&sm);
    let absorb = ladder_power(d, p.m, false).kron(&sp);

    let free = &n_hat.scale_real(p.omega) + &sigma_z.scale_real(0.5 * p.omega0);
    let beta = C64::new(0.0, p.g);
    let hamiltonian = &free + &(&emit - &absorb).scale(beta);
    let excitation = &n_hat + &id_mode.kron(&(&sp * &sm)).scale_real(p.m as f64);
    let annihilation = crate::fock::annihilation(d).kron(&id_level);

    Ok(TwoLevelModel {
        params: *p,
        spin_norm,
        hamiltonian,
        excitation,
        sigma_z,
        sigma_plus,
        sigma_minus,
        photon_number: n_hat,
        annihilation,
    })
}

impl TwoLevelModel {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn index(&self, n: usize, level: Level2) -> usize {
        assert!(n < self.params.fock_dim.get());
        2 * n + level.index()
    }

    pub fn label(&self, index: usize) -> TwoLevelState {
        let level = if index.is_multiple_of(2) { Level2::Excited } else { Level2::Ground };
        TwoLevelState { n: index / 2, level }
    }

    /// States with `n ≤ dim − 1 − M`, on which the truncated ladder algebra
    /// agrees with the untruncated one.
    pub fn buffered(&self) -> Vec<usize> {
        let top = self.params.fock_dim.get() - 1 - self.params.m as usize;
        (0..self.dim()).filter(|&i| self.label(i).n <= top).collect()
    }

    /// Diagonal operator `f(n)` over the photon number of each basis state.
    pub fn photon_function(&self, f: impl Fn(u64) -> Result<f64>) -> Result<Operator> {
        let diag = (0..self.dim()).map(|i| f(self.label(i).n as u64)).collect::<Result<Vec<_>>>()?;
        Ok(Operator::from_real_diagonal(self.hamiltonian.factors(), diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{commutator, I};
    use crate::algebra::restricted_norm;

    pub(crate) fn params(m: u32, dim: usize) -> TwoLevelParams {
        TwoLevelParams { omega: 0.9, omega0: 1.7, g: 0.3, m, fock_dim: ModeDim::new(dim).unwrap() }
    }

    #[test]
    fn uncoupled_is_diagonal() {
        let mut p = params(2, 6);
        p.g = 0.0;
        let model = build_two_level(&p).unwrap();
        assert!(model.hamiltonian.is_diagonal());
        for i in 0..model.dim() {
            let s = model.label(i);
            let sign = if s.level == Level2::Excited { 1.0 } else { -1.0 };
            let want = p.omega * s.n as f64 + sign * p.omega0 / 2.0;
            assert!((model.hamiltonian.get(i, i).re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn single_photon_coupling_element() {
        let p = TwoLevelParams { omega: 1.0, omega0: 1.0, g: 0.25, m: 1, fock_dim: ModeDim::new(3).unwrap() };
        let model = build_two_level(&p).unwrap();
        let row = model.index(1, Level2::Ground);
        let col = model.index(0, Level2::Excited);
        assert_eq!(model.hamiltonian.get(row, col), I * 0.25);
    }

    #[test]
    fn hermitian_and_conserving() {
        for m in 1..=3 {
            let model = build_two_level(&params(m, 12)).unwrap();
            assert!(model.hamiltonian.hermiticity_residual() < 1e-12);
            let c = commutator(&model.excitation, &model.hamiltonian).unwrap();
            let keep = model.buffered();
            let rel = restricted_norm(&c, &keep) / restricted_norm(&model.hamiltonian, &keep);
            assert!(rel < 1e-12);
        }
    }

    #[test]
    fn wrong_multiplicity_is_not_conserved() {
        let model = build_two_level(&params(2, 12)).unwrap();
        let wrong = &model.photon_number + &(&model.sigma_plus * &model.sigma_minus).scale_real(1.0);
        let c = commutator(&wrong, &model.hamiltonian).unwrap();
        assert!(c.frobenius_norm() > 1e-3);
    }

    #[test]
    fn spin_normalizations() {
        let p = params(1, 4);
        let pauli = build_two_level_with(&p, SpinNorm::Pauli).unwrap();
        let c = commutator(&pauli.sigma_plus, &pauli.sigma_minus).unwrap();
        assert_eq!(c, pauli.sigma_z);
        let half = build_two_level_with(&p, SpinNorm::Half).unwrap();
        let c = commutator(&half.sigma_z, &half.sigma_plus).unwrap();
        assert_eq!(c, half.sigma_plus);
    }

    #[test]
    fn rejects_small_truncation() {
        assert!(matches!(build_two_level(&params(3, 4)), Err(Error::InvalidParams(_))));
        let mut p = params(1, 4);
        p.g = -1.0;
        assert!(build_two_level(&p).is_err());
        p.g = 0.1;
        p.m = 0;
        assert!(build_two_level(&p).is_err());
    }
}
