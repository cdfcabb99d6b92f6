//! Closed-form Rabi frequencies, evaluated at Fock-number eigenvalues.
//!
//! Squared frequencies are returned signed: nothing restricts them to be
//! non-negative, and callers decide whether a negative value means an
//! imaginary root. Integer parts are evaluated exactly before the single
//! conversion to `f64`.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock;
use crate::models::{ThreeLevelParams, TwoLevelParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelRabiInput {
    /// Photon number `n`.
    pub n: u64,
    /// Eigenvalue of the excitation number `a†a + Mσ₊σ₋`.
    pub neig: u64,
    pub params: TwoLevelParams,
}

impl TwoLevelRabiInput {
    /// The coupled sector of `|n, e⟩`, i.e. `neig = n + M`.
    pub fn excited(n: u64, params: TwoLevelParams) -> Self {
        Self { n, neig: n + params.m as u64, params }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeLevelRabiInput {
    pub n1: u64,
    pub n2: u64,
    pub params: ThreeLevelParams,
}

fn to_f64(x: u128) -> f64 {
    x as f64
}

/// `(Mω−ω₀)² + 2g²[M·A₂(n) − B₂(n)(M − 2N + 2n)]`.
pub fn omega_r_squared(inp: &TwoLevelRabiInput) -> Result<f64> {
    let p = &inp.params;
    let m = p.m;
    if m == 0 {
        return Err(Error::InvalidParams("photon multiplicity M must be ≥ 1".into()));
    }
    let offset = inp.neig.checked_sub(inp.n);
    if offset != Some(0) && offset != Some(m as u64) {
        return Err(Error::InvalidParams(format!(
            "excitation eigenvalue {} is not n or n+M for n={}, M={m}",
            inp.neig, inp.n
        )));
    }
    let overflow = || Error::overflow(format!("Rabi bracket at n={}, M={m}", inp.n));
    let a2 = i128::try_from(fock::a2(inp.n, m)?).map_err(|_| overflow())?;
    let b2 = i128::try_from(fock::b2(inp.n, m)?).map_err(|_| overflow())?;
    // M − 2N + 2n is ±M on the two sectors
    let sector = m as i128 - 2 * offset.unwrap_or(0) as i128;
    let bracket = (m as i128)
        .checked_mul(a2)
        .zip(b2.checked_mul(sector))
        .and_then(|(x, y)| x.checked_sub(y))
        .ok_or_else(overflow)?;
    let detuning = p.detuning();
    let g2 = p.g * p.g;
    Ok(detuning * detuning + 2.0 * g2 * bracket as f64)
}

/// `2[ω₀ + ω₁ − Mω_L1 − (N−M)ω_L2]`.
pub fn epsilon(p: &ThreeLevelParams) -> f64 {
    2.0 * (p.omega0 + p.omega1 - p.m as f64 * p.omega_l1 - p.second_multiplicity() as f64 * p.omega_l2)
}

/// Squared frequency multiplying `S`:
/// `−(ε/2)(ω₀+ω₁−Mω_L1) + (ε/2)(N−M)ω_L2 − g²A₃(n₁,n₂)`.
pub fn omega_rc_squared(inp: &ThreeLevelRabiInput) -> Result<f64> {
    let p = &inp.params;
    let half_eps = 0.5 * epsilon(p);
    let a3 = to_f64(fock::a3(inp.n1, inp.n2, p.m, p.ntot)?);
    Ok(-half_eps * (p.omega0 + p.omega1 - p.m as f64 * p.omega_l1)
        + half_eps * p.second_multiplicity() as f64 * p.omega_l2
        - p.g * p.g * a3)
}

/// Squared frequency multiplying `S²`: `−(ε/2)(ω₁−ω₀) − 2g²B₃(n₁,n₂)`.
pub fn omega_rr_squared(inp: &ThreeLevelRabiInput) -> Result<f64> {
    let p = &inp.params;
    let b3 = to_f64(fock::b3(inp.n1, inp.n2, p.m, p.ntot)?);
    Ok(-0.5 * epsilon(p) * (p.omega1 - p.omega0) - 2.0 * p.g * p.g * b3)
}

/// `√|Ω²|`.
pub fn frequency(omega_squared: f64) -> f64 {
    omega_squared.abs().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoLevelRow {
    pub n: u64,
    pub neig: u64,
    pub omega_r_squared: Option<f64>,
    pub omega_r: Option<f64>,
    /// `+1` or `−1` (0 when exactly zero).
    pub sign: Option<i8>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThreeLevelRow {
    pub n1: u64,
    pub n2: u64,
    pub omega_rc_squared: Option<f64>,
    pub omega_rr_squared: Option<f64>,
    pub error: Option<String>,
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `Ω_R²(n, n+M)` over a photon-number range, rows in input order.
pub fn sweep_two_level(p: &TwoLevelParams, ns: RangeInclusive<u64>) -> Vec<TwoLevelRow> {
    let ns: Vec<u64> = ns.collect();
    ns.par_iter()
        .map(|&n| {
            let neig = n.saturating_add(p.m as u64);
            match omega_r_squared(&TwoLevelRabiInput { n, neig, params: *p }) {
                Ok(v) => TwoLevelRow {
                    n,
                    neig,
                    omega_r_squared: Some(v),
                    omega_r: Some(frequency(v)),
                    sign: Some(sign_of(v)),
                    error: None,
                },
                Err(e) => TwoLevelRow { n, neig, omega_r_squared: None, omega_r: None, sign: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

/// `Ω_Rc²` and `Ω_Rr²` over an `n₁ × n₂` grid, `n₂` varying fastest.
pub fn sweep_three_level(
    p: &ThreeLevelParams,
    n1s: RangeInclusive<u64>,
    n2s: RangeInclusive<u64>,
) -> Vec<ThreeLevelRow> {
    let grid: Vec<(u64, u64)> = n1s.flat_map(|n1| n2s.clone().map(move |n2| (n1, n2))).collect();
    grid.par_iter()
        .map(|&(n1, n2)| {
            let inp = ThreeLevelRabiInput { n1, n2, params: *p };
            match omega_rc_squared(&inp).and_then(|c| Ok((c, omega_rr_squared(&inp)?))) {
                Ok((c, r)) => ThreeLevelRow { n1, n2, omega_rc_squared: Some(c), omega_rr_squared: Some(r), error: None },
                Err(e) => ThreeLevelRow { n1, n2, omega_rc_squared: None, omega_rr_squared: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}
