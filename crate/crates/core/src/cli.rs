//! Command-line front end.
//!
//! Every parameter is a `key = value` pair. Values come from built-in
//! defaults, then an optional `--config FILE`, then command-line flags, each
//! layer overriding the previous one. The config file grammar is one
//! `key = value` per line, `#` starts a comment, blank lines are ignored, and
//! keys are the long flag names (`omega-l1` and `omega_l1` are equivalent).
//!
//! Output is CSV (config echoed as leading `# key = value` lines, then a
//! header row) or a single JSON object `{schema_version, command, config,
//! results}`. `MULTIPHOTON_OUTPUT_DIR`, when set, is prepended to relative
//! `--output` paths.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Arg, ArgMatches, Command};
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{self, Peak, TimeGrid};
use crate::error::Error as ModelError;
use crate::fock::ModeDim;
use crate::models::{build_three_level, build_two_level, Level2, Level3, ThreeLevelParams, TwoLevelParams};
use crate::rabi::{self, TwoLevelRabiInput, TwoLevelRow};
use crate::verify::{self, IdentityReport};
use crate::Ket;

pub const SCHEMA_VERSION: u32 = 1;
pub const OUTPUT_DIR_VAR: &str = "MULTIPHOTON_OUTPUT_DIR";

const KEYS: &[(&str, &str)] = &[
    ("model", "two-level | three-level"),
    ("omega", "mode frequency (two-level)"),
    ("omega0", "lower transition frequency"),
    ("g", "coupling strength"),
    ("M", "photons per transition (from beam 1 for three-level)"),
    ("dim", "Fock truncation (two-level)"),
    ("omega-l1", "beam 1 frequency (three-level)"),
    ("omega-l2", "beam 2 frequency (three-level)"),
    ("omega1", "upper transition frequency (three-level)"),
    ("ntot", "total photons per transition (three-level)"),
    ("dim1", "beam 1 Fock truncation"),
    ("dim2", "beam 2 Fock truncation"),
    ("n", "photon number"),
    ("neig", "excitation-number eigenvalue (default n + M)"),
    ("n1", "beam 1 photon number"),
    ("n2", "beam 2 photon number"),
    ("n-min", "sweep start"),
    ("n-max", "sweep end (inclusive)"),
    ("n1-min", "beam 1 sweep start"),
    ("n1-max", "beam 1 sweep end (inclusive)"),
    ("n2-min", "beam 2 sweep start"),
    ("n2-max", "beam 2 sweep end (inclusive)"),
    ("samples", "time samples"),
    ("periods", "periods of the coarse frequency estimate covered"),
    ("format", "csv | json"),
    ("output", "output file (default stdout)"),
];

const DEFAULTS: &[(&str, &str)] = &[
    ("omega", "1"),
    ("omega0", "1"),
    ("g", "0.1"),
    ("M", "1"),
    ("dim", "24"),
    ("omega-l1", "0.6"),
    ("omega-l2", "0.4"),
    ("omega1", "0.8"),
    ("ntot", "2"),
    ("dim1", "12"),
    ("dim2", "12"),
    ("n", "0"),
    ("n1", "0"),
    ("n2", "0"),
    ("n-min", "0"),
    ("n-max", "20"),
    ("n1-min", "0"),
    ("n1-max", "10"),
    ("n2-min", "0"),
    ("n2-max", "10"),
    ("samples", "4096"),
    ("periods", "6"),
    ("format", "json"),
];

const TWO_LEVEL_KEYS: &[&str] = &["omega", "omega0", "g", "M", "dim"];
const THREE_LEVEL_KEYS: &[&str] = &["omega-l1", "omega-l2", "omega0", "omega1", "g", "M", "ntot", "dim1", "dim2"];

#[derive(Debug, Error)]
enum CliError {
    /// Help or version text requested.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) | CliError::Invalid(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}

fn command() -> Command {
    let args: Vec<Arg> = std::iter::once(Arg::new("config").long("config").value_name("FILE").help("key = value config file"))
        .chain(KEYS.iter().map(|&(key, help)| Arg::new(key).long(key).value_name("VALUE").help(help)))
        .collect();
    let sub = |name: &'static str, about: &'static str| Command::new(name).about(about).args(args.clone());
    Command::new("multiphoton")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Multiphoton two- and three-level absorption models")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(sub("verify", "check operator identities and constants of motion"))
        .subcommand(sub("rabi", "evaluate the closed-form Rabi frequencies at one photon number"))
        .subcommand(sub("sweep", "tabulate the closed-form Rabi frequencies over photon-number ranges"))
        .subcommand(sub("evolve", "exact time evolution of observables"))
        .subcommand(sub("spectrum", "compare simulated, closed-form and exact oscillation frequencies"))
}

fn canonical_key(raw: &str) -> String {
    raw.trim().replace('_', "-")
}

/// Parse the flat `key = value` config grammar.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", lineno + 1))?;
        let key = canonical_key(key);
        if key == "config" || !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(format!("config line {}: unknown key `{key}`", lineno + 1));
        }
        let value = value.trim();
        if value.is_empty() {
            return Err(format!("config line {}: empty value for `{key}`", lineno + 1));
        }
        out.insert(key, value.to_string());
    }
    Ok(out)
}

/// Effective parameters after layering defaults, config file and flags.
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn resolve(matches: &ArgMatches) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> =
            DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = matches.get_one::<String>("config") {
            let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("cannot read config {path}: {e}")))?;
            let file = parse_config(&text).map_err(|e| CliError::Invalid(format!("{path}: {e}")))?;
            values.extend(file);
        }
        for (key, _) in KEYS {
            if let Some(v) = matches.get_one::<String>(key) {
                values.insert(key.to_string(), v.clone());
            }
        }
        Ok(Self { values })
    }

    fn raw(&self, key: &str) -> Result<&str, CliError> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Usage(format!("missing required --{key}")))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| CliError::Invalid(format!("invalid value for --{key}: `{raw}`")))
    }

    fn mode_dim(&self, key: &str) -> Result<ModeDim, CliError> {
        let d: usize = self.get(key)?;
        ModeDim::new(d).map_err(|e| CliError::Invalid(format!("--{key}: {e}")))
    }

    fn model(&self) -> Result<Model, CliError> {
        match self.raw("model")? {
            "two-level" | "two_level" => Ok(Model::TwoLevel),
            "three-level" | "three_level" => Ok(Model::ThreeLevel),
            other => Err(CliError::Invalid(format!("unknown --model `{other}` (expected two-level or three-level)"))),
        }
    }

    fn format(&self) -> Result<Format, CliError> {
        match self.raw("format")? {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Invalid(format!("unknown --format `{other}` (expected csv or json)"))),
        }
    }

    fn two_level(&self) -> Result<TwoLevelParams, CliError> {
        let p = TwoLevelParams {
            omega: self.get("omega")?,
            omega0: self.get("omega0")?,
            g: self.get("g")?,
            m: self.get("M")?,
            fock_dim: self.mode_dim("dim")?,
        };
        p.validate()?;
        Ok(p)
    }

    fn three_level(&self) -> Result<ThreeLevelParams, CliError> {
        let p = ThreeLevelParams {
            omega_l1: self.get("omega-l1")?,
            omega_l2: self.get("omega-l2")?,
            omega0: self.get("omega0")?,
            omega1: self.get("omega1")?,
            g: self.get("g")?,
            m: self.get("M")?,
            ntot: self.get("ntot")?,
            dims: [self.mode_dim("dim1")?, self.mode_dim("dim2")?],
        };
        p.validate()?;
        Ok(p)
    }

    fn grid_shape(&self) -> Result<(usize, f64), CliError> {
        let samples: usize = self.get("samples")?;
        let periods: f64 = self.get("periods")?;
        if samples < dynamics::MIN_SAMPLES || !(periods.is_finite() && periods > 0.0) {
            return Err(CliError::Invalid(format!(
                "need --samples ≥ {} and --periods > 0",
                dynamics::MIN_SAMPLES
            )));
        }
        Ok((samples, periods))
    }

    /// The subset of settings that influenced this run, for the output header.
    fn echo(&self, model: Model, keys: &[&str]) -> BTreeMap<String, String> {
        let model_keys = match model {
            Model::TwoLevel => TWO_LEVEL_KEYS,
            Model::ThreeLevel => THREE_LEVEL_KEYS,
        };
        ["model", "format"]
            .iter()
            .chain(model_keys)
            .chain(keys)
            .filter_map(|k| self.values.get(*k).map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Model {
    TwoLevel,
    ThreeLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

/// Everything a command produces; rows are flat records.
struct Output {
    config: BTreeMap<String, String>,
    body: Body,
    /// Set when a row carries a numerical failure.
    failure: Option<String>,
}

enum Body {
    Checks(Vec<CheckRow>),
    TwoLevelRabi(Vec<TwoLevelRow>),
    ThreeLevelRabi(Vec<rabi::ThreeLevelRow>),
    TwoLevelTrace(Vec<TwoLevelSample>),
    ThreeLevelTrace(Vec<ThreeLevelSample>),
    TwoLevelSpectrum(Vec<TwoLevelSpectrumRow>),
    ThreeLevelSpectrum(Vec<ThreeLevelSpectrumRow>),
}

#[derive(Serialize)]
struct CheckRow {
    check: String,
    residual: f64,
    tolerance: f64,
    passed: bool,
    convention: Option<String>,
    detail: String,
}

impl CheckRow {
    fn from_report(r: &IdentityReport) -> Self {
        CheckRow {
            check: r.identity.clone(),
            residual: r.residual,
            tolerance: r.tolerance,
            passed: r.matched,
            convention: Some(r.best_convention.to_string()),
            detail: r.summary(),
        }
    }

    fn plain(check: &str, residual: f64, tolerance: f64) -> Self {
        let passed = residual < tolerance;
        let verdict = if passed { "<" } else { "≥" };
        CheckRow {
            check: check.to_string(),
            residual,
            tolerance,
            passed,
            convention: None,
            detail: format!("{check}: residual {residual:.3e} {verdict} {tolerance:.0e}"),
        }
    }
}

#[derive(Serialize)]
struct TwoLevelSample {
    t: f64,
    sigma_z: f64,
    photons: f64,
    excitation: f64,
}

#[derive(Serialize)]
struct ThreeLevelSample {
    t: f64,
    s: f64,
    s_squared: f64,
    photons1: f64,
    photons2: f64,
}

#[derive(Serialize)]
struct TwoLevelSpectrumRow {
    n: u64,
    neig: u64,
    exact_splitting: f64,
    formula_omega_squared: f64,
    formula_frequency: f64,
    measured_frequency: Option<f64>,
    bin_width: f64,
    measured_vs_exact: Option<f64>,
    formula_vs_exact: f64,
    measured_vs_formula: Option<f64>,
}

#[derive(Serialize)]
struct ThreeLevelSpectrumRow {
    n1: u64,
    n2: u64,
    exact_splitting: Option<f64>,
    omega_rc_squared: f64,
    omega_rr_squared: f64,
    center_frequency: f64,
    relative_frequency: f64,
    center_measured: Option<f64>,
    relative_measured: Option<f64>,
    bin_width: f64,
}

fn peak_frequency(p: &Peak) -> Option<f64> {
    p.frequency()
}

fn verify_cmd(s: &Settings, model: Model) -> Result<Output, CliError> {
    let rows = match model {
        Model::TwoLevel => {
            let p = s.two_level()?;
            let m = build_two_level(&p)?;
            let keep = m.buffered();
            let mut rows: Vec<CheckRow> = verify::check_constants(&m.hamiltonian, &[&m.excitation], &keep)?
                .into_iter()
                .map(|r| CheckRow::plain("constant excitation number", r, verify::EXACT_TOL))
                .collect();
            rows.extend(verify::check_heisenberg(&p)?.iter().map(CheckRow::from_report));
            rows.push(CheckRow::from_report(&verify::check_inversion_identity(&p)?));
            rows
        }
        Model::ThreeLevel => {
            let p = s.three_level()?;
            let m = build_three_level(&p)?;
            let keep = m.buffered();
            let names = ["constant N1", "constant N2", "constant S^2"];
            let mut rows: Vec<CheckRow> = verify::check_constants(&m.hamiltonian, &[&m.n1, &m.n2, &m.s_squared], &keep)?
                .into_iter()
                .zip(names)
                .map(|(r, name)| CheckRow::plain(name, r, verify::EXACT_TOL))
                .collect();
            rows.push(CheckRow::from_report(&verify::check_level_identity(&p)?));
            let limit = ThreeLevelParams { m: 1, ntot: 1, omega1: 0.0, omega_l1: 0.0, ..p };
            rows.push(CheckRow::plain(
                "reduction to two-level (M=N=1, omega1=omega_l1=0)",
                verify::check_reduction(&limit)?,
                verify::EXACT_TOL,
            ));
            rows
        }
    };
    Ok(Output { config: s.echo(model, &[]), body: Body::Checks(rows), failure: None })
}

fn rabi_cmd(s: &Settings, model: Model) -> Result<Output, CliError> {
    match model {
        Model::TwoLevel => {
            let p = s.two_level()?;
            let n: u64 = s.get("n")?;
            let neig = if s.values.contains_key("neig") { s.get("neig")? } else { n + p.m as u64 };
            let (row, failure) = match rabi::omega_r_squared(&TwoLevelRabiInput { n, neig, params: p }) {
                Ok(v) => (
                    TwoLevelRow {
                        n,
                        neig,
                        omega_r_squared: Some(v),
                        omega_r: Some(rabi::frequency(v)),
                        sign: Some(if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 }),
                        error: None,
                    },
                    None,
                ),
                Err(e) if e.is_numerical() => (
                    TwoLevelRow { n, neig, omega_r_squared: None, omega_r: None, sign: None, error: Some(e.to_string()) },
                    Some(e.to_string()),
                ),
                Err(e) => return Err(e.into()),
            };
            let mut keys = vec!["n"];
            if s.values.contains_key("neig") {
                keys.push("neig");
            }
            Ok(Output { config: s.echo(model, &keys), body: Body::TwoLevelRabi(vec![row]), failure })
        }
        Model::ThreeLevel => {
            let p = s.three_level()?;
            let (n1, n2): (u64, u64) = (s.get("n1")?, s.get("n2")?);
            let rows = rabi::sweep_three_level(&p, n1..=n1, n2..=n2);
            let failure = rows[0].error.clone();
            Ok(Output { config: s.echo(model, &["n1", "n2"]), body: Body::ThreeLevelRabi(rows), failure })
        }
    }
}

fn range(s: &Settings, lo: &str, hi: &str) -> Result<std::ops::RangeInclusive<u64>, CliError> {
    let (a, b): (u64, u64) = (s.get(lo)?, s.get(hi)?);
    if a > b {
        return Err(CliError::Invalid(format!("--{lo} ({a}) exceeds --{hi} ({b})")));
    }
    Ok(a..=b)
}

fn sweep_cmd(s: &Settings, model: Model) -> Result<Output, CliError> {
    match model {
        Model::TwoLevel => {
            let p = s.two_level()?;
            let rows = rabi::sweep_two_level(&p, range(s, "n-min", "n-max")?);
            Ok(Output { config: s.echo(model, &["n-min", "n-max"]), body: Body::TwoLevelRabi(rows), failure: None })
        }
        Model::ThreeLevel => {
            let p = s.three_level()?;
            let rows = rabi::sweep_three_level(&p, range(s, "n1-min", "n1-max")?, range(s, "n2-min", "n2-max")?);
            Ok(Output {
                config: s.echo(model, &["n1-min", "n1-max", "n2-min", "n2-max"]),
                body: Body::ThreeLevelRabi(rows),
                failure: None,
            })
        }
    }
}

fn evolve_cmd(s: &Settings, model: Model) -> Result<Output, CliError> {
    let (samples, periods) = s.grid_shape()?;
    match model {
        Model::TwoLevel => {
            let p = s.two_level()?;
            let n: usize = s.get("n")?;
            if n >= p.fock_dim.get() {
                return Err(CliError::Invalid(format!("--n {n} outside the truncation (dim {})", p.fock_dim.get())));
            }
            let m = build_two_level(&p)?;
            let coupling = crate::fock::rising_ratio(n as u64, p.m)? as f64;
            let grid = TimeGrid::covering(p.detuning().abs().max(2.0 * p.g * coupling.sqrt()), periods, samples)?;
            let psi = Ket::basis(m.dim(), m.index(n, Level2::Excited));
            let evo = dynamics::evolve(
                &m.hamiltonian,
                &psi,
                &grid,
                &[("sigma_z", &m.sigma_z), ("photons", &m.photon_number), ("excitation", &m.excitation)],
            )?;
            let col = |k: &str| &evo.series[k].values;
            let rows = grid
                .times()
                .into_iter()
                .enumerate()
                .map(|(i, t)| TwoLevelSample {
                    t,
                    sigma_z: col("sigma_z")[i],
                    photons: col("photons")[i],
                    excitation: col("excitation")[i],
                })
                .collect();
            Ok(Output {
                config: s.echo(model, &["n", "samples", "periods"]),
                body: Body::TwoLevelTrace(rows),
                failure: None,
            })
        }
        Model::ThreeLevel => {
            let p = s.three_level()?;
            let (n1, n2): (usize, usize) = (s.get("n1")?, s.get("n2")?);
            if n1 >= p.dims[0].get() || n2 >= p.dims[1].get() {
                return Err(CliError::Invalid(format!("--n1 {n1} / --n2 {n2} outside the truncation")));
            }
            let m = build_three_level(&p)?;
            let k = p.second_multiplicity();
            let coupling = crate::fock::falling_ratio(n1 as u64, p.m)? as f64 * crate::fock::falling_ratio(n2 as u64, k)? as f64;
            let coarse = (0.5 * rabi::epsilon(&p)).abs().max(2.0 * p.g * coupling.sqrt());
            let grid = TimeGrid::covering(coarse, periods, samples)?;
            let psi = Ket::basis(m.dim(), m.index(n1, n2, Level3::Bottom));
            let evo = dynamics::evolve(
                &m.hamiltonian,
                &psi,
                &grid,
                &[("s", &m.s), ("s_squared", &m.s_squared), ("photons1", &m.photons1), ("photons2", &m.photons2)],
            )?;
            let col = |k: &str| &evo.series[k].values;
            let rows = grid
                .times()
                .into_iter()
                .enumerate()
                .map(|(i, t)| ThreeLevelSample {
                    t,
                    s: col("s")[i],
                    s_squared: col("s_squared")[i],
                    photons1: col("photons1")[i],
                    photons2: col("photons2")[i],
                })
                .collect();
            Ok(Output {
                config: s.echo(model, &["n1", "n2", "samples", "periods"]),
                body: Body::ThreeLevelTrace(rows),
                failure: None,
            })
        }
    }
}

fn spectrum_cmd(s: &Settings, model: Model) -> Result<Output, CliError> {
    let (samples, periods) = s.grid_shape()?;
    match model {
        Model::TwoLevel => {
            let p = s.two_level()?;
            let n: u64 = s.get("n")?;
            let coarse = p.detuning().abs().max(2.0 * p.g * (crate::fock::rising_ratio(n, p.m)? as f64).sqrt());
            let grid = TimeGrid::covering(coarse, periods, samples)?;
            let r = dynamics::rabi_compare(&p, n, Some(grid))?;
            let row = TwoLevelSpectrumRow {
                n: r.n,
                neig: r.neig,
                exact_splitting: r.exact_splitting,
                formula_omega_squared: r.formula_omega_squared,
                formula_frequency: r.formula_frequency,
                measured_frequency: peak_frequency(&r.measured),
                bin_width: r.measured.bin_width(),
                measured_vs_exact: r.measured_vs_exact,
                formula_vs_exact: r.formula_vs_exact,
                measured_vs_formula: r.measured_vs_formula,
            };
            Ok(Output {
                config: s.echo(model, &["n", "samples", "periods"]),
                body: Body::TwoLevelSpectrum(vec![row]),
                failure: None,
            })
        }
        Model::ThreeLevel => {
            let p = s.three_level()?;
            let (n1, n2): (u64, u64) = (s.get("n1")?, s.get("n2")?);
            let k = p.second_multiplicity();
            let coupling = crate::fock::falling_ratio(n1, p.m)? as f64 * crate::fock::falling_ratio(n2, k)? as f64;
            let coarse = (0.5 * rabi::epsilon(&p)).abs().max(2.0 * p.g * coupling.sqrt());
            let grid = TimeGrid::covering(coarse, periods, samples)?;
            let r = dynamics::three_level_compare(&p, n1, n2, Some(grid))?;
            let row = ThreeLevelSpectrumRow {
                n1,
                n2,
                exact_splitting: r.exact_splitting,
                omega_rc_squared: r.omega_rc_squared,
                omega_rr_squared: r.omega_rr_squared,
                center_frequency: r.center_frequency,
                relative_frequency: r.relative_frequency,
                center_measured: peak_frequency(&r.center_channel),
                relative_measured: peak_frequency(&r.relative_channel),
                bin_width: r.center_channel.bin_width(),
            };
            Ok(Output {
                config: s.echo(model, &["n1", "n2", "samples", "periods"]),
                body: Body::ThreeLevelSpectrum(vec![row]),
                failure: None,
            })
        }
    }
}

fn write_csv<T: Serialize>(out: &mut Vec<u8>, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Invalid(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| CliError::Invalid(format!("csv: {e}")))
}

fn render(command: &str, format: Format, output: &Output) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => {
            writeln!(buf, "# schema_version = {SCHEMA_VERSION}").expect("write to Vec");
            writeln!(buf, "# command = {command}").expect("write to Vec");
            for (k, v) in &output.config {
                writeln!(buf, "# {k} = {v}").expect("write to Vec");
            }
            match &output.body {
                Body::Checks(r) => write_csv(&mut buf, r)?,
                Body::TwoLevelRabi(r) => write_csv(&mut buf, r)?,
                Body::ThreeLevelRabi(r) => write_csv(&mut buf, r)?,
                Body::TwoLevelTrace(r) => write_csv(&mut buf, r)?,
                Body::ThreeLevelTrace(r) => write_csv(&mut buf, r)?,
                Body::TwoLevelSpectrum(r) => write_csv(&mut buf, r)?,
                Body::ThreeLevelSpectrum(r) => write_csv(&mut buf, r)?,
            }
        }
        Format::Json => {
            let results = match &output.body {
                Body::Checks(r) => serde_json::to_value(r),
                Body::TwoLevelRabi(r) => serde_json::to_value(r),
                Body::ThreeLevelRabi(r) => serde_json::to_value(r),
                Body::TwoLevelTrace(r) => serde_json::to_value(r),
                Body::ThreeLevelTrace(r) => serde_json::to_value(r),
                Body::TwoLevelSpectrum(r) => serde_json::to_value(r),
                Body::ThreeLevelSpectrum(r) => serde_json::to_value(r),
            }
            .map_err(|e| CliError::Invalid(format!("json: {e}")))?;
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "command": command,
                "config": output.config,
                "results": results,
            });
            serde_json::to_writer_pretty(&mut buf, &doc).map_err(|e| CliError::Invalid(format!("json: {e}")))?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

fn output_path(raw: &str) -> PathBuf {
    let path = PathBuf::from(raw);
    match std::env::var_os(OUTPUT_DIR_VAR) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path,
    }
}

fn dispatch(argv: Vec<OsString>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let matches = command().try_get_matches_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.render().to_string()),
        _ => CliError::Usage(e.render().to_string()),
    })?;
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let settings = Settings::resolve(sub)?;
    let model = settings.model()?;
    let format = settings.format()?;
    let output = match name {
        "verify" => verify_cmd(&settings, model)?,
        "rabi" => rabi_cmd(&settings, model)?,
        "sweep" => sweep_cmd(&settings, model)?,
        "evolve" => evolve_cmd(&settings, model)?,
        "spectrum" => spectrum_cmd(&settings, model)?,
        _ => unreachable!("clap rejects unknown subcommands"),
    };
    let bytes = render(name, format, &output)?;
    match settings.values.get("output") {
        Some(raw) => {
            let path = output_path(raw);
            fs::write(&path, &bytes).map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))?
        }
        None => stdout.write_all(&bytes).map_err(|e| CliError::Invalid(format!("stdout: {e}")))?,
    }
    match output.failure {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

/// Run the CLI with explicit streams; returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match dispatch(argv, stdout) {
        Ok(()) => 0,
        Err(CliError::Info(msg)) => {
            let _ = stdout.write_all(msg.as_bytes());
            0
        }
        Err(CliError::Usage(msg)) => {
            let _ = write!(stderr, "{}", msg.trim_end());
            if !msg.contains("Usage:") {
                let _ = write!(stderr, "\n\n{}", command().render_usage());
            }
            let _ = writeln!(stderr);
            1
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Run the CLI against the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
