use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-integrable sample: integrand is not finite at a quadrature node on every refinement level")]
    NonIntegrableSample,

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot normalize: {0}")]
    Normalization(String),

    #[error(
        "truncation insufficient: tail term {tail:e} exceeds 1e-12 of head at l_max = {l_max}"
    )]
    TruncationInsufficient { l_max: usize, tail: f64 },

    #[error("spectral tail too large: {tail:e} of the norm lies beyond |m| = {m_max}")]
    SpectralTail { m_max: usize, tail: f64 },

    #[error("spectral data required: {0}")]
    SpectralDataRequired(String),

    #[error("state {0} has no derivative along {1} and numeric differentiation is disabled")]
    MissingDerivative(String, &'static str),

    #[error("hermiticity violated for {label}: Im<psi|O psi> = {imag:e}")]
    HermiticityViolated { label: String, imag: f64 },

    #[error("no admissible center: {0}")]
    NoAdmissibleCenter(String),
}
