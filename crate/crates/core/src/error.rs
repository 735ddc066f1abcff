use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coincident atoms: the separation vector has zero length")]
    CoincidentAtoms,
    #[error("near-field evaluation underflow: kR = {kr:e} is below 1e-8")]
    NearFieldUnderflow { kr: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("degenerate frequencies: omega_a equals omega_b, use the identical-atoms evaluation instead")]
    DegenerateFrequencies,
    #[error("phase precision loss: |detuning * T| = {0:e} exceeds 1e12")]
    PhasePrecisionLoss(f64),
    #[error("observation time T = {t} does not exceed the separation R = {r} (causality)")]
    Acausal { t: f64, r: f64 },
    #[error(
        "quadrature did not converge after {evaluations} evaluations: best estimate {estimate:e}, error estimate {error:e}"
    )]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("non-finite integrand at direction ({}, {}, {})", .direction[0], .direction[1], .direction[2])]
    NonFiniteSample { direction: [f64; 3] },
    #[error("failed to parse configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_finite(name: &'static str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(name, format!("must be finite, got {x}")))
    }
}
