//! Two-beam absorption by a three-level system.
//!
//! Basis ordering is mode 1 ⊗ mode 2 ⊗ level, levels (top, middle, bottom),
//! so `(n1, n2, level)` has index `(n1·d2 + n2)·3 + level`. The middle level
//! is the energy origin. Beam 1 supplies `M` photons and beam 2 supplies
//! `N − M` photons to the direct bottom → top transition; the middle level
//! carries no coupling.

use serde::{Deserialize, Serialize};

use crate::algebra::{Operator, C64};
use crate::error::{Error, Result};
use crate::fock::{ladder_power, number, ModeDim};
use crate::models::levels::{self, Gauge, BOTTOM, MIDDLE, TOP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level3 {
    Top,
    Middle,
    Bottom,
}

impl Level3 {
    pub fn index(self) -> usize {
        match self {
            Level3::Top => TOP,
            Level3::Middle => MIDDLE,
            Level3::Bottom => BOTTOM,
        }
    }

    fn from_index(i: usize) -> Self {
        match i {
            TOP => Level3::Top,
            MIDDLE => Level3::Middle,
            _ => Level3::Bottom,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelParams {
    pub omega_l1: f64,
    pub omega_l2: f64,
    /// Lower transition `E₂ − E₁`.
    pub omega0: f64,
    /// Upper transition `E₃ − E₂`.
    pub omega1: f64,
    pub g: f64,
    /// Photons taken from beam 1.
    pub m: u32,
    /// Total photons per transition; beam 2 supplies `ntot − m`.
    pub ntot: u32,
    pub dims: [ModeDim; 2],
}

impl ThreeLevelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_l1", self.omega_l1),
            ("omega_l2", self.omega_l2),
            ("omega0", self.omega0),
            ("omega1", self.omega1),
            ("g", self.g),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        if self.m == 0 || self.m > self.ntot {
            return Err(Error::InvalidParams(format!("need 1 ≤ M ≤ N, got M={}, N={}", self.m, self.ntot)));
        }
        let need = [self.m as usize + 2, self.second_multiplicity() as usize + 2];
        for (k, (d, need)) in self.dims.iter().zip(need).enumerate() {
            if d.get() < need {
                return Err(Error::InvalidParams(format!(
                    "mode {} dimension {} too small (need ≥ {need})",
                    k + 1,
                    d.get()
                )));
            }
        }
        Ok(())
    }

    /// `N − M`.
    pub fn second_multiplicity(&self) -> u32 {
        self.ntot.saturating_sub(self.m)
    }

    pub fn from_energies(e1: f64, e2: f64, e3: f64) -> Gauge {
        levels::gauge_decompose(e1, e2, e3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ThreeLevelState {
    pub n1: usize,
    pub n2: usize,
    pub level: Level3,
}

#[derive(Clone, Debug)]
pub struct ThreeLevelModel {
    pub params: ThreeLevelParams,
    pub hamiltonian: Operator,
    /// `n̂₁ + (M/2) S`.
    pub n1: Operator,
    /// `n̂₂ + ((N−M)/2) S`.
    pub n2: Operator,
    pub s: Operator,
    pub s_squared: Operator,
    pub photons1: Operator,
    pub photons2: Operator,
}

pub fn build_three_level(p: &ThreeLevelParams) -> Result<ThreeLevelModel> {
    p.validate()?;
    let [d1, d2] = p.dims;
    let k = p.second_multiplicity();
    let id1 = Operator::identity(&[d1.get()]);
    let id2 = Operator::identity(&[d2.get()]);
    let id3 = Operator::identity(&[levels::LEVELS]);

    let s_level = levels::level_s();
    let s = id1.kron(&id2).kron(&s_level);
    let s_squared = id1.kron(&id2).kron(&(&s_level * &s_level));
    let photons1 = number(d1).kron(&id2).kron(&id3);
    let photons2 = id1.kron(&number(d2)).kron(&id3);

    let emit = ladder_power(d1, p.m, true).kron(&ladder_power(d2, k, true)).kron(&levels::lowering());
    let absorb = ladder_power(d1, p.m, false).kron(&ladder_power(d2, k, false)).kron(&levels::raising());

    let gauge = Gauge { omega0: p.omega0, omega1: p.omega1, shift: 0.0 };
    let free = &(&photons1.scale_real(p.omega_l1) + &photons2.scale_real(p.omega_l2))
        + &id1.kron(&id2).kron(&gauge.level_hamiltonian());
    let hamiltonian = &free + &(&emit - &absorb).scale(C64::new(0.0, p.g));

    let n1 = &photons1 + &s.scale_real(p.m as f64 / 2.0);
    let n2 = &photons2 + &s.scale_real(k as f64 / 2.0);

    Ok(ThreeLevelModel { params: *p, hamiltonian, n1, n2, s, s_squared, photons1, photons2 })
}

impl ThreeLevelModel {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn index(&self, n1: usize, n2: usize, level: Level3) -> usize {
        let [d1, d2] = self.params.dims;
        assert!(n1 < d1.get() && n2 < d2.get());
        (n1 * d2.get() + n2) * levels::LEVELS + level.index()
    }

    pub fn label(&self, index: usize) -> ThreeLevelState {
        let d2 = self.params.dims[1].get();
        let level = Level3::from_index(index % levels::LEVELS);
        let modes = index / levels::LEVELS;
        ThreeLevelState { n1: modes / d2, n2: modes % d2, level }
    }

    /// States with `n1 ≤ d1 − 1 − M` and `n2 ≤ d2 − 1 − (N − M)`.
    pub fn buffered(&self) -> Vec<usize> {
        let top1 = self.params.dims[0].get() - 1 - self.params.m as usize;
        let top2 = self.params.dims[1].get() - 1 - self.params.second_multiplicity() as usize;
        (0..self.dim())
            .filter(|&i| {
                let s = self.label(i);
                s.n1 <= top1 && s.n2 <= top2
            })
            .collect()
    }

    pub fn photon_function(&self, f: impl Fn(u64, u64) -> Result<f64>) -> Result<Operator> {
        let diag = (0..self.dim())
            .map(|i| {
                let s = self.label(i);
                f(s.n1 as u64, s.n2 as u64)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Operator::from_real_diagonal(self.hamiltonian.factors(), diag))
    }
}
