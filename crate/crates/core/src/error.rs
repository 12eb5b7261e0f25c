use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation n_max = {n_max} exceeds the supported maximum {max}")]
    TruncationTooLarge { n_max: usize, max: usize },

    #[error("gain is not matched: g*nu*tau = {product} (must be 1)")]
    UnmatchedGain { product: f64 },

    #[error("state is not normalized: squared norm / trace = {norm}")]
    NotNormalized { norm: f64 },

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("channel output leaves the {{|00>,|10>,|01>}} Choi support: {0}")]
    ChoiSupport(String),

    #[error("success probability {probability:e} is too small to condition on")]
    ZeroSuccess { probability: f64 },

    #[error("target is infeasible: {0}")]
    Infeasible(String),

    #[error("measurement settings are not informationally complete: rank {rank}, need {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("maximum-likelihood iteration did not converge after {iterations} iterations (last update {last_update:e})")]
    NonConvergence { iterations: usize, last_update: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroSuccess { .. } | Error::NonConvergence { .. }
        )
    }

    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }
}
