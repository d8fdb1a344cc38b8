use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("unknown variable: {0}")]
    UnknownVariable(String),
    #[error("missing coordinate: {0}")]
    MissingCoordinate(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix asymmetric by {asymmetry:e} (tolerance {tol:e})")]
    AsymmetricMatrix { asymmetry: f64, tol: f64 },
    #[error("constant-rank violation: rank {first_rank} at {first_at:?}, rank {rank} at {at:?}")]
    ConstantRankViolation { first_rank: usize, first_at: Vec<f64>, rank: usize, at: Vec<f64> },
    #[error("zero-section violation: (1 - a sigma0) b = {residual:e} at {at:?}")]
    ZeroSectionViolation { residual: f64, at: Vec<f64> },
    #[error("invalid sigma: {0}")]
    InvalidSigma(String),
    #[error("invalid kernel offset: {0}")]
    InvalidOffset(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("requires a symbolic splitting: {0}")]
    RequiresSymbolic(String),
    #[error("integration diverged at t = {t} (last finite sample at t = {last_t})")]
    Divergence { t: f64, last_t: f64, last_state: Vec<f64> },
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("truncation exceeded: {0}")]
    Truncation(String),
}

impl Error {
    /// Stable kebab-case tag used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::SignatureMismatch(_) => "signature-mismatch",
            Error::UnknownVariable(_) => "unknown-variable",
            Error::MissingCoordinate(_) => "missing-coordinate",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::Parse(_) => "parse",
            Error::InvalidInput(_) => "invalid-input",
            Error::AsymmetricMatrix { .. } => "asymmetric-matrix",
            Error::ConstantRankViolation { .. } => "constant-rank-violation",
            Error::ZeroSectionViolation { .. } => "zero-section-violation",
            Error::InvalidSigma(_) => "invalid-sigma",
            Error::InvalidOffset(_) => "invalid-offset",
            Error::InvalidFrame(_) => "invalid-frame",
            Error::InvalidConstraint(_) => "invalid-constraint",
            Error::RequiresSymbolic(_) => "requires-symbolic",
            Error::Divergence { .. } => "divergence",
            Error::TooFewSamples { .. } => "too-few-samples",
            Error::NotApplicable(_) => "not-applicable",
            Error::Truncation(_) => "truncation",
        }
    }

    /// Whether the error reports a failed mathematical check on valid input
    /// rather than malformed input.
    pub fn is_check_failure(&self) -> bool {
        matches!(
            self,
            Error::ConstantRankViolation { .. }
                | Error::ZeroSectionViolation { .. }
                | Error::Divergence { .. }
                | Error::InvalidConstraint(_)
        )
    }
}
