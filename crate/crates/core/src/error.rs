use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element is not expandable in the approximation ring: {0}")]
    NotExpandable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("operator is not monic")]
    NotMonic,
    #[error("operator has degree zero")]
    ZeroDegree,
    #[error("no cyclic vector found within {0} candidates")]
    SearchExhausted(usize),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("integrability violated between derivations {0} and {1}")]
    Integrability(usize, usize),
    #[error("no Newton polygon break at {0}")]
    NoGap(String),
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("iteration budget of {0} steps exhausted")]
    IterationBudget(usize),
    #[error("certificate failure: {0}")]
    CertificateFailure(String),
    #[error("component not stable under derivation {0}")]
    StabilityFailure(usize),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("all coefficients in the window vanish")]
    AllZero,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotExpandable(_) => "NotExpandable",
            Error::DivisionByZero => "DivisionByZero",
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::NotMonic => "NotMonic",
            Error::ZeroDegree => "ZeroDegree",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::FieldMismatch(_) => "FieldMismatch",
            Error::Integrability(..) => "IntegrabilityError",
            Error::NoGap(_) => "NoGap",
            Error::PrecisionLoss(_) => "PrecisionLoss",
            Error::IterationBudget(_) => "IterationBudget",
            Error::CertificateFailure(_) => "CertificateFailure",
            Error::StabilityFailure(_) => "StabilityFailure",
            Error::Parse { .. } => "ParseError",
            Error::AllZero => "AllZero",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
