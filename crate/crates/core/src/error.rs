use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian (relative anti-Hermitian part {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("exact integer overflow while evaluating {what}")]
    Overflow { what: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("conserved operator #{index} is not diagonal in the computational basis")]
    NotDiagonal { index: usize },

    #[error("conserved operator #{index} does not commute with the Hamiltonian (residual {residual:.3e})")]
    NotConserved { index: usize, residual: f64 },

    #[error("Hamiltonian couples different conserved sectors (max element {residual:.3e})")]
    SectorLeak { residual: f64 },

    #[error("state is not normalizable (zero norm or non-finite amplitudes)")]
    BadState,

    #[error("time series needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn overflow(what: impl Into<String>) -> Self {
        Error::Overflow { what: what.into() }
    }

    /// True for failures of the numerical kind (overflow, lost Hermiticity),
    /// as opposed to bad user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow { .. } | Error::NotHermitian { .. } | Error::NotConserved { .. }
        )
    }
}
