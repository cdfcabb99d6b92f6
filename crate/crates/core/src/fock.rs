//! Truncated bosonic modes and the exact factorial ratios built from them.
//!
//! All ratios are evaluated as running integer products in `u128` with
//! checked arithmetic; a reciprocal factorial of a negative integer counts as
//! zero, so annihilating below the vacuum yields 0 rather than a fault.

use serde::{Deserialize, Serialize};

use crate::algebra::{Operator, C64, ZERO};
use crate::error::{Error, Result};

/// Fock truncation: states |0⟩..|dim−1⟩.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ModeDim(usize);

impl ModeDim {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParams(format!("Fock dimension must be at least 2, got {dim}")));
        }
        Ok(Self(dim))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for ModeDim {
    type Error = Error;
    fn try_from(dim: usize) -> Result<Self> {
        Self::new(dim)
    }
}

impl From<ModeDim> for usize {
    fn from(d: ModeDim) -> usize {
        d.0
    }
}

pub fn annihilation(d: ModeDim) -> Operator {
    Operator::from_fn(&[d.0], |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { ZERO })
}

pub fn creation(d: ModeDim) -> Operator {
    annihilation(d).adjoint()
}

pub fn number(d: ModeDim) -> Operator {
    Operator::from_real_diagonal(&[d.0], (0..d.0).map(|n| n as f64))
}

/// `a^M` (or `a†^M` when `raise`), built entry-wise from the exact ratios so
/// the truncated power carries no accumulated rounding.
pub fn ladder_power(d: ModeDim, m: u32, raise: bool) -> Operator {
    let dim = d.0;
    let m = m as usize;
    Operator::from_fn(&[dim], |i, j| {
        let (hi, lo) = if raise { (i, j) } else { (j, i) };
        if hi == lo + m {
            let ratio = (lo + 1..=hi).map(|k| k as f64).product::<f64>();
            C64::new(ratio.sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

/// `n!/(n−m)! = n(n−1)···(n−m+1)`, zero when `n < m`, one when `m = 0`.
pub fn falling_ratio(n: u64, m: u32) -> Result<u128> {
    if n < m as u64 {
        return Ok(0);
    }
    (0..m as u64).try_fold(1u128, |acc, k| {
        acc.checked_mul((n - k) as u128)
            .ok_or_else(|| Error::overflow(format!("{n}!/({n}-{m})!")))
    })
}

/// `(n+m)!/n! = (n+1)(n+2)···(n+m)`.
pub fn rising_ratio(n: u64, m: u32) -> Result<u128> {
    (1..=m as u64).try_fold(1u128, |acc, k| {
        (n as u128)
            .checked_add(k as u128)
            .and_then(|f| acc.checked_mul(f))
            .ok_or_else(|| Error::overflow(format!("({n}+{m})!/{n}!")))
    })
}

/// Diagonal value of `a†^M a^M + a^M a†^M` on |n⟩.
pub fn a2(n: u64, m: u32) -> Result<u128> {
    falling_ratio(n, m)?
        .checked_add(rising_ratio(n, m)?)
        .ok_or_else(|| Error::overflow(format!("A2({n}, {m})")))
}

/// `Σ_{α=0}^{M−1} (n+α)!/(n−M+α+1)!`.
pub fn b2(n: u64, m: u32) -> Result<u128> {
    partial_ratio_sum(n, m)
}

// Each summand is the (m−1)-term falling product ending at n+α.
fn partial_ratio_sum(n: u64, m: u32) -> Result<u128> {
    (0..m as u64).try_fold(0u128, |acc, alpha| {
        let shifted = n
            .checked_add(alpha)
            .ok_or_else(|| Error::overflow(format!("B2({n}, {m})")))?;
        let term = falling_ratio(shifted, m.saturating_sub(1))?;
        acc.checked_add(term).ok_or_else(|| Error::overflow(format!("B2({n}, {m})")))
    })
}

fn second_multiplicity(m: u32, ntot: u32) -> Result<u32> {
    if m == 0 || m > ntot {
        return Err(Error::InvalidParams(format!("need 1 ≤ M ≤ N, got M={m}, N={ntot}")));
    }
    Ok(ntot - m)
}

/// Two-mode analogue of [`a2`]: `F₁F₂ + R₁R₂` with mode 2 absorbing `N−M`
/// photons. Mode-2 ratios are the empty product when `N = M`.
pub fn a3(n1: u64, n2: u64, m: u32, ntot: u32) -> Result<u128> {
    let k = second_multiplicity(m, ntot)?;
    let overflow = || Error::overflow(format!("A3({n1}, {n2}; {m}, {ntot})"));
    let lowered = falling_ratio(n1, m)?.checked_mul(falling_ratio(n2, k)?).ok_or_else(overflow)?;
    let raised = rising_ratio(n1, m)?.checked_mul(rising_ratio(n2, k)?).ok_or_else(overflow)?;
    lowered.checked_add(raised).ok_or_else(overflow)
}

/// `M·F₂(n₂)·Σ_α … + (N−M)·F₁(n₁)·Σ_γ …`, the second sum empty when `N = M`.
pub fn b3(n1: u64, n2: u64, m: u32, ntot: u32) -> Result<u128> {
    let k = second_multiplicity(m, ntot)?;
    let overflow = || Error::overflow(format!("B3({n1}, {n2}; {m}, {ntot})"));
    let first = (m as u128)
        .checked_mul(falling_ratio(n2, k)?)
        .and_then(|x| x.checked_mul(partial_ratio_sum(n1, m).ok()?))
        .ok_or_else(overflow)?;
    let second = (k as u128)
        .checked_mul(falling_ratio(n1, m)?)
        .and_then(|x| x.checked_mul(partial_ratio_sum(n2, k).ok()?))
        .ok_or_else(overflow)?;
    first.checked_add(second).ok_or_else(overflow)
}
