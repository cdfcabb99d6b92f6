//! Exact pure-state evolution and spectral extraction of oscillation
//! frequencies.
//!
//! `|ψ(t)⟩ = V e^{−iΛt} V†|ψ₀⟩` from one Hermitian eigendecomposition; the
//! dominant frequency of an expectation-value trace is read off a
//! Hann-windowed DFT with quadratic interpolation of the log-magnitude around
//! the peak bin.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::algebra::{Ket, Operator, C64, ZERO};
use crate::error::{Error, Result};
use crate::fock;
use crate::models::{
    block_decompose, block_of, build_three_level, build_two_level, Level2, Level3, ThreeLevelParams, TwoLevelParams,
};
use crate::rabi::{self, ThreeLevelRabiInput, TwoLevelRabiInput};

pub const DEFAULT_SAMPLES: usize = 4096;
pub const DEFAULT_PERIODS: f64 = 6.0;
pub const MIN_SAMPLES: usize = 64;

/// Largest allowed deviation of `‖ψ(t)‖` from 1.
pub const NORM_TOL: f64 = 1e-10;

/// Uniform grid `t_k = k·dt`, `k = 0..samples`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, samples: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || samples < 2 {
            return Err(Error::InvalidParams(format!("time grid needs dt > 0 and ≥ 2 samples, got dt={dt}, samples={samples}")));
        }
        Ok(Self { dt, samples })
    }

    /// `samples` points covering `periods` periods of `frequency` (angular).
    /// A non-positive frequency falls back to unit frequency.
    pub fn covering(frequency: f64, periods: f64, samples: usize) -> Result<Self> {
        let f = if frequency > 0.0 && frequency.is_finite() { frequency } else { 1.0 };
        Self::new(periods * 2.0 * PI / f / samples as f64, samples)
    }

    pub fn default_for(frequency: f64) -> Self {
        Self::covering(frequency, DEFAULT_PERIODS, DEFAULT_SAMPLES).expect("default grid is valid")
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|k| k as f64 * self.dt).collect()
    }

    pub fn duration(&self) -> f64 {
        self.samples as f64 * self.dt
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn spacing(&self) -> Result<f64> {
        if self.times.len() != self.values.len() {
            return Err(Error::DimensionMismatch { left: self.times.len(), right: self.values.len() });
        }
        if self.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: self.len() });
        }
        let dt = (self.times[self.len() - 1] - self.times[0]) / (self.len() - 1) as f64;
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs());
        if !(dt > 0.0 && uniform) {
            return Err(Error::InvalidParams("time series must be on an ascending uniform grid".into()));
        }
        Ok(dt)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Evolution {
    pub series: BTreeMap<String, TimeSeries>,
    /// `max_t |‖ψ(t)‖ − 1|`.
    pub max_norm_error: f64,
}

impl Evolution {
    pub fn get(&self, name: &str) -> Option<&TimeSeries> {
        self.series.get(name)
    }
}

fn nonzero_entries(op: &Operator) -> Vec<(usize, usize, C64)> {
    let dim = op.dim();
    (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let z = op.get(i, j);
            (z != ZERO).then_some((i, j, z))
        })
        .collect()
}

/// Evolve `psi0` under `h` and record `⟨ψ(t)|O|ψ(t)⟩` for each named
/// observable. Fails if the state norm drifts beyond [`NORM_TOL`].
pub fn evolve(h: &Operator, psi0: &Ket, grid: &TimeGrid, observables: &[(&str, &Operator)]) -> Result<Evolution> {
    if psi0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { left: h.dim(), right: psi0.dim() });
    }
    for (_, o) in observables {
        if o.dim() != h.dim() {
            return Err(Error::DimensionMismatch { left: h.dim(), right: o.dim() });
        }
        let residual = o.hermiticity_residual();
        if residual >= crate::algebra::HERMITIAN_TOL {
            return Err(Error::NotHermitian { residual });
        }
    }
    let eig = h.eig_hermitian()?;
    let v = &eig.vectors;
    let dim = h.dim();
    let coeffs = v.adjoint().apply(psi0.amplitudes())?;
    let support: Vec<usize> = (0..dim).filter(|&k| coeffs[k].norm() > 1e-15).collect();
    let entries: Vec<Vec<(usize, usize, C64)>> = observables.iter().map(|(_, o)| nonzero_entries(o)).collect();

    let times = grid.times();
    let mut values = vec![Vec::with_capacity(times.len()); observables.len()];
    let mut max_norm_error = 0.0f64;
    let mut psi = vec![ZERO; dim];
    for &t in &times {
        psi.iter_mut().for_each(|z| *z = ZERO);
        for &k in &support {
            let c = coeffs[k] * C64::from_polar(1.0, -eig.values[k] * t);
            for (i, z) in psi.iter_mut().enumerate() {
                *z += v.get(i, k) * c;
            }
        }
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        max_norm_error = max_norm_error.max((norm - 1.0).abs());
        for (vals, ent) in values.iter_mut().zip(&entries) {
            let e: C64 = ent.iter().map(|&(i, j, z)| psi[i].conj() * z * psi[j]).sum();
            vals.push(e.re);
        }
    }
    if max_norm_error > NORM_TOL {
        return Err(Error::InvalidParams(format!("norm drifted by {max_norm_error:.3e}")));
    }
    let series = observables
        .iter()
        .zip(values)
        .map(|((name, _), values)| (name.to_string(), TimeSeries { times: times.clone(), values }))
        .collect();
    Ok(Evolution { series, max_norm_error })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralPeak {
    /// Angular frequency of the interpolated peak.
    pub frequency: f64,
    pub amplitude: f64,
    /// `2π / T_total`.
    pub bin_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Peak {
    Oscillation(SpectralPeak),
    /// The series is constant to rounding; carries the bin width of the grid.
    NoOscillation { bin_width: f64 },
}

impl Peak {
    pub fn frequency(&self) -> Option<f64> {
        match self {
            Peak::Oscillation(p) => Some(p.frequency),
            Peak::NoOscillation { .. } => None,
        }
    }

    pub fn bin_width(&self) -> f64 {
        match self {
            Peak::Oscillation(p) => p.bin_width,
            Peak::NoOscillation { bin_width } => *bin_width,
        }
    }
}

/// Highest non-DC peak of the Hann-windowed, mean-removed spectrum.
pub fn dominant_frequency(ts: &TimeSeries) -> Result<Peak> {
    let dt = ts.spacing()?;
    let n = ts.len();
    let bin_width = 2.0 * PI / (n as f64 * dt);
    let mean = ts.values.iter().sum::<f64>() / n as f64;
    let scale = ts.values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let spread = ts.values.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
    if spread <= 1e-10 * scale {
        return Ok(Peak::NoOscillation { bin_width });
    }

    let window: Vec<f64> = (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()).collect();
    let mut buf: Vec<C64> = ts.values.iter().zip(&window).map(|(x, w)| C64::new((x - mean) * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let mag: Vec<f64> = buf[..=half].iter().map(|z| z.norm()).collect();

    let k = (1..=half).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).expect("at least one bin");
    let offset = if k < half {
        let (y0, y1, y2) = (mag[k - 1], mag[k], mag[k + 1]);
        let (l0, l1, l2) = (y0.ln(), y1.ln(), y2.ln());
        let (a, b, c) = if l0.is_finite() && l2.is_finite() { (l0, l1, l2) } else { (y0, y1, y2) };
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let coherent_gain = window.iter().sum::<f64>();
    Ok(Peak::Oscillation(SpectralPeak {
        frequency: (k as f64 + offset) * bin_width,
        amplitude: 2.0 * mag[k] / coherent_gain,
        bin_width,
    }))
}

fn relative_difference(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RabiComparison {
    pub n: u64,
    pub neig: u64,
    /// Eigenvalue gap of the 2×2 block of `|n, e⟩`.
    pub exact_splitting: f64,
    pub formula_omega_squared: f64,
    /// `√|Ω_R²|` at `(n, n+M)`.
    pub formula_frequency: f64,
    /// Dominant frequency of `⟨σ_z⟩(t)` from `|n, e⟩`.
    pub measured: Peak,
    pub grid: TimeGrid,
    pub measured_vs_exact: Option<f64>,
    pub formula_vs_exact: f64,
    pub measured_vs_formula: Option<f64>,
}

/// Exact splitting, closed form and simulated frequency for the two-level
/// sector containing `|n, e⟩`. `grid` defaults to [`TimeGrid::default_for`]
/// the coarse estimate `max(|Δ|, 2g√((n+M)!/n!))`.
pub fn rabi_compare(p: &TwoLevelParams, n: u64, grid: Option<TimeGrid>) -> Result<RabiComparison> {
    p.validate()?;
    if n as usize + p.m as usize > p.fock_dim.get() - 1 {
        return Err(Error::InvalidParams(format!(
            "n + M = {} exceeds the truncation (dim {})",
            n + p.m as u64,
            p.fock_dim.get()
        )));
    }
    let model = build_two_level(p)?;
    let start = model.index(n as usize, Level2::Excited);
    let blocks = block_decompose(&model.hamiltonian, &[&model.excitation])?;
    let exact_splitting = block_of(&blocks, start).and_then(|b| b.splitting).expect("|n,e⟩ lies in a 2x2 block");

    let input = TwoLevelRabiInput::excited(n, *p);
    let formula_omega_squared = rabi::omega_r_squared(&input)?;
    let formula_frequency = rabi::frequency(formula_omega_squared);

    let coarse = p.detuning().abs().max(2.0 * p.g * (fock::rising_ratio(n, p.m)? as f64).sqrt());
    let grid = grid.unwrap_or_else(|| TimeGrid::default_for(coarse));
    let evo = evolve(&model.hamiltonian, &Ket::basis(model.dim(), start), &grid, &[("sigma_z", &model.sigma_z)])?;
    let measured = dominant_frequency(evo.get("sigma_z").expect("requested"))?;

    Ok(RabiComparison {
        n,
        neig: input.neig,
        exact_splitting,
        formula_omega_squared,
        formula_frequency,
        measured,
        grid,
        measured_vs_exact: measured.frequency().map(|f| relative_difference(f, exact_splitting)),
        formula_vs_exact: relative_difference(formula_frequency, exact_splitting),
        measured_vs_formula: measured.frequency().map(|f| relative_difference(f, formula_frequency)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreeLevelComparison {
    pub n1: u64,
    pub n2: u64,
    pub harmonic: bool,
    /// Gap of the block containing `|n1, n2, bottom⟩`; `None` for a 1×1 block.
    pub exact_splitting: Option<f64>,
    pub omega_rc_squared: f64,
    pub omega_rr_squared: f64,
    pub center_frequency: f64,
    pub relative_frequency: f64,
    /// Dominant frequency of `⟨S⟩(t)`.
    pub center_channel: Peak,
    /// Dominant frequency of `⟨S²⟩(t)`.
    pub relative_channel: Peak,
    pub grid: TimeGrid,
}

/// Simulate from `|n1, n2, bottom⟩` and tabulate the `⟨S⟩` and `⟨S²⟩`
/// channels against the closed forms and the exact block splitting.
pub fn three_level_compare(p: &ThreeLevelParams, n1: u64, n2: u64, grid: Option<TimeGrid>) -> Result<ThreeLevelComparison> {
    p.validate()?;
    let [d1, d2] = p.dims;
    if n1 as usize >= d1.get() || n2 as usize >= d2.get() {
        return Err(Error::InvalidParams(format!("({n1}, {n2}) outside the truncation")));
    }
    let model = build_three_level(p)?;
    let start = model.index(n1 as usize, n2 as usize, Level3::Bottom);
    let blocks = block_decompose(&model.hamiltonian, &[&model.n1, &model.n2, &model.s_squared])?;
    let exact_splitting = block_of(&blocks, start).and_then(|b| b.splitting);

    let input = ThreeLevelRabiInput { n1, n2, params: *p };
    let omega_rc_squared = rabi::omega_rc_squared(&input)?;
    let omega_rr_squared = rabi::omega_rr_squared(&input)?;

    let k = p.second_multiplicity();
    let coupling = (fock::falling_ratio(n1, p.m)? as f64 * fock::falling_ratio(n2, k)? as f64).sqrt();
    let coarse = (0.5 * rabi::epsilon(p)).abs().max(2.0 * p.g * coupling);
    let grid = grid.unwrap_or_else(|| TimeGrid::default_for(coarse));
    let evo = evolve(
        &model.hamiltonian,
        &Ket::basis(model.dim(), start),
        &grid,
        &[("s", &model.s), ("s_squared", &model.s_squared)],
    )?;

    Ok(ThreeLevelComparison {
        n1,
        n2,
        harmonic: p.omega0 == p.omega1,
        exact_splitting,
        omega_rc_squared,
        omega_rr_squared,
        center_frequency: rabi::frequency(omega_rc_squared),
        relative_frequency: rabi::frequency(omega_rr_squared),
        center_channel: dominant_frequency(evo.get("s").expect("requested"))?,
        relative_channel: dominant_frequency(evo.get("s_squared").expect("requested"))?,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ModeDim;

    fn two(omega: f64, omega0: f64, g: f64, m: u32, dim: usize) -> TwoLevelParams {
        TwoLevelParams { omega, omega0, g, m, fock_dim: ModeDim::new(dim).unwrap() }
    }

    fn series(n: usize, dt: f64, f: impl Fn(f64) -> f64) -> TimeSeries {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        TimeSeries { times, values }
    }

    #[test]
    fn pure_cosine_peak() {
        let omega = 2.37;
        let grid = TimeGrid::covering(omega, 7.3, 2048).unwrap();
        let ts = series(grid.samples, grid.dt, |t| 0.3 + (omega * t).cos());
        let Peak::Oscillation(p) = dominant_frequency(&ts).unwrap() else { panic!("no peak") };
        assert!((p.frequency - omega).abs() < p.bin_width / 2.0);
        assert!((p.bin_width - 2.0 * PI / grid.duration()).abs() < 1e-12);
        assert!((p.amplitude - 1.0).abs() < 0.2);
    }

    #[test]
    fn constant_series_has_no_peak() {
        let ts = series(128, 0.1, |_| 0.75);
        assert!(matches!(dominant_frequency(&ts).unwrap(), Peak::NoOscillation { .. }));
    }

    #[test]
    fn two_tone_returns_louder_tone() {
        let ts = series(4096, 0.01, |t| 0.4 * (3.0 * t).sin() + 1.0 * (11.0 * t).cos());
        let f = dominant_frequency(&ts).unwrap().frequency().unwrap();
        assert!((f - 11.0).abs() < 0.1, "{f}");
        let ts = series(4096, 0.01, |t| 1.0 * (3.0 * t).sin() + 0.4 * (11.0 * t).cos());
        let f = dominant_frequency(&ts).unwrap().frequency().unwrap();
        assert!((f - 3.0).abs() < 0.1, "{f}");
    }

    #[test]
    fn short_or_irregular_series_rejected() {
        let ts = series(32, 0.1, |t| t.sin());
        assert!(matches!(dominant_frequency(&ts), Err(Error::TooFewSamples { .. })));
        let mut ts = series(128, 0.1, |t| t.sin());
        ts.times[5] += 0.03;
        assert!(dominant_frequency(&ts).is_err());
    }

    #[test]
    fn eigenstate_is_stationary() {
        let p = two(1.0, 1.4, 0.0, 1, 6);
        let model = build_two_level(&p).unwrap();
        let psi = Ket::basis(model.dim(), model.index(2, Level2::Excited));
        let grid = TimeGrid::new(0.05, 200).unwrap();
        let evo = evolve(&model.hamiltonian, &psi, &grid, &[("sz", &model.sigma_z), ("n", &model.photon_number)]).unwrap();
        assert!(evo.get("sz").unwrap().values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(evo.get("n").unwrap().values.iter().all(|&v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn resonant_single_photon_full_swing() {
        let (g, n) = (0.2, 3usize);
        let p = two(1.0, 1.0, g, 1, 8);
        let model = build_two_level(&p).unwrap();
        let psi = Ket::basis(model.dim(), model.index(n, Level2::Excited));
        let omega = 2.0 * g * ((n + 1) as f64).sqrt();
        let grid = TimeGrid::covering(omega, 2.0, 400).unwrap();
        let evo = evolve(&model.hamiltonian, &psi, &grid, &[("sz", &model.sigma_z), ("h", &model.hamiltonian)]).unwrap();
        let sz = &evo.get("sz").unwrap().values;
        for (t, v) in grid.times().iter().zip(sz) {
            assert!((v - (omega * t).cos()).abs() < 1e-10);
        }
        let h = &evo.get("h").unwrap().values;
        assert!(h.iter().all(|e| (e - h[0]).abs() < 1e-10));
        assert!(evo.max_norm_error < NORM_TOL);
    }

    #[test]
    fn superposition_keeps_bounds_and_constants() {
        let p = two(0.9, 1.6, 0.3, 2, 10);
        let model = build_two_level(&p).unwrap();
        let amps: Vec<C64> = (0..model.dim()).map(|k| C64::new(1.0 / (1.0 + k as f64), 0.1 * k as f64)).collect();
        let psi = Ket::new(amps).unwrap();
        let grid = TimeGrid::new(0.07, 300).unwrap();
        let evo = evolve(&model.hamiltonian, &psi, &grid, &[("sz", &model.sigma_z), ("N", &model.excitation)]).unwrap();
        assert!(evo.get("sz").unwrap().values.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        let n = &evo.get("N").unwrap().values;
        assert!(n.iter().all(|v| (v - n[0]).abs() < 1e-10));
    }

    #[test]
    fn evolve_rejects_bad_inputs() {
        let model = build_two_level(&two(1.0, 1.0, 0.1, 1, 4)).unwrap();
        let grid = TimeGrid::new(0.1, 10).unwrap();
        assert!(evolve(&model.hamiltonian, &Ket::basis(3, 0), &grid, &[]).is_err());
        let psi = Ket::basis(model.dim(), 0);
        assert!(matches!(
            evolve(&model.annihilation, &psi, &grid, &[]),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            evolve(&model.hamiltonian, &psi, &grid, &[("a", &model.annihilation)]),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn single_photon_comparison_agrees() {
        for (omega, n) in [(1.0, 0u64), (1.15, 1), (0.8, 5)] {
            let r = rabi_compare(&two(omega, 1.0, 0.1, 1, 10), n, None).unwrap();
            assert!(r.formula_vs_exact < 1e-12);
            let bw = r.measured.bin_width();
            assert!((r.measured.frequency().unwrap() - r.exact_splitting).abs() < bw);
        }
    }

    #[test]
    fn two_photon_comparison_reports_formula_gap() {
        let g = 0.1;
        let r = rabi_compare(&two(0.5, 1.0, g, 2, 8), 0, None).unwrap();
        assert!((r.exact_splitting - (8.0f64 * g * g).sqrt()).abs() < 1e-12);
        assert!((r.formula_frequency - (12.0f64 * g * g).sqrt()).abs() < 1e-12);
        let f = r.measured.frequency().unwrap();
        assert!((f - r.exact_splitting).abs() < r.measured.bin_width());
        assert!(r.formula_vs_exact > 0.1);
    }

    #[test]
    fn uncoupled_comparison_has_no_oscillation() {
        let r = rabi_compare(&two(0.5, 1.3, 0.0, 1, 6), 2, None).unwrap();
        assert!(matches!(r.measured, Peak::NoOscillation { .. }));
        assert!((r.exact_splitting - 0.8).abs() < 1e-14);
        assert!(rabi_compare(&two(0.5, 1.3, 0.1, 2, 6), 4, None).is_err());
    }

    fn three(omega0: f64, omega1: f64, g: f64) -> ThreeLevelParams {
        ThreeLevelParams {
            omega_l1: 0.6,
            omega_l2: 0.4,
            omega0,
            omega1,
            g,
            m: 1,
            ntot: 2,
            dims: [ModeDim::new(5).unwrap(), ModeDim::new(5).unwrap()],
        }
    }

    #[test]
    fn three_level_channels() {
        let r = three_level_compare(&three(0.9, 0.7, 0.0), 2, 2, None).unwrap();
        assert!(matches!(r.center_channel, Peak::NoOscillation { .. }));
        assert!(matches!(r.relative_channel, Peak::NoOscillation { .. }));

        // resonance with ω₀ = ω₁ = 0.5: ε = 0
        let r = three_level_compare(&three(0.5, 0.5, 0.1), 2, 2, None).unwrap();
        assert!(r.harmonic);
        let split = r.exact_splitting.unwrap();
        assert!((split - 2.0 * 0.1 * 4f64.sqrt()).abs() < 1e-12);
        let f = r.center_channel.frequency().unwrap();
        assert!((f - split).abs() < r.center_channel.bin_width());

        // S² commutes with H, so the relative channel is flat for every ω₀, ω₁
        let r = three_level_compare(&three(0.9, 0.4, 0.1), 2, 3, None).unwrap();
        assert!(matches!(r.relative_channel, Peak::NoOscillation { .. }));
        assert!(r.center_channel.frequency().is_some());
    }
}
