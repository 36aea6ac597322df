use thiserror::Error;

/// Errors raised anywhere in the model, analytic engine or simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {name} = {value} is outside {admissible}")]
    Domain {
        name: &'static str,
        value: f64,
        admissible: String,
    },

    #[error(
        "quadrature did not reach relative tolerance {tolerance:e} (estimated error {estimate:e})"
    )]
    QuadratureNonConvergence { tolerance: f64, estimate: f64 },

    #[error("misalignment model is degenerate (rho = 0): the law is a point mass at 0")]
    DegenerateModel,

    #[error("zero-length direction vector")]
    ZeroVector,

    #[error("near-field distance {distance} m is below the far-field floor {floor} m")]
    NearField { distance: f64, floor: f64 },

    #[error("rejection sampling exceeded {attempts} attempts while placing {what}")]
    RejectionCap { attempts: usize, what: &'static str },

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("distribution support [{lo:e}, {hi:e}] exceeds the configured bounds")]
    GridOverflow { lo: f64, hi: f64 },

    #[error("Laplace inversion disagrees with grid convolution by {sup_norm:e} (limit {limit:e})")]
    InversionInstability { sup_norm: f64, limit: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown experiment `{0}` (expected fig3, fig4, fig5, fig6, fig7 or custom)")]
    UnknownExperiment(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, admissible: impl Into<String>) -> Self {
        Error::Domain {
            name,
            value,
            admissible: admissible.into(),
        }
    }

    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::QuadratureNonConvergence { .. } => "quadrature",
            Error::DegenerateModel => "degenerate_model",
            Error::ZeroVector => "zero_vector",
            Error::NearField { .. } => "near_field",
            Error::RejectionCap { .. } => "rejection_cap",
            Error::ParameterMismatch(_) => "parameter_mismatch",
            Error::GridOverflow { .. } => "grid_overflow",
            Error::InversionInstability { .. } => "inversion_instability",
            Error::EmptyInput(_) => "empty_input",
            Error::Config { .. } => "config",
            Error::UnknownExperiment(_) => "unknown_experiment",
            Error::Parse(_) => "parse",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
