use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("NotHyperbolic: (g,n)=({g},{n}) violates 2g-2+n > 0")]
    NotHyperbolic { g: u32, n: u32 },

    #[error("ExcludedClass: ({tau},{set}) is not a boundary class")]
    ExcludedClass { tau: u32, set: String },

    #[error("OutOfRange: {0}")]
    OutOfRange(String),

    #[error("SyntaxError at byte {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },

    #[error("GenusZeroUnsupported: rank queries need g >= 1")]
    GenusZeroUnsupported,

    #[error("UnknownName: `{0}` is not a divisor-class preset")]
    UnknownName(String),

    #[error("WrongSpace: expected a class on {expected}, got one on {found}")]
    WrongSpace { expected: String, found: String },

    #[error("InvalidCurveType: {0}")]
    InvalidCurveType(String),

    #[error("ForbiddenTacnodalType: {0}")]
    ForbiddenTacnodalType(String),

    #[error("IllPosedPairing: {0}")]
    IllPosedPairing(String),

    #[error("CapExceeded: needs {required} nodes but the cap is {cap}")]
    CapExceeded { required: u128, cap: u64 },
}

impl Error {
    /// Stable short name, used by the CLI when reporting domain errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotHyperbolic { .. } => "NotHyperbolic",
            Error::ExcludedClass { .. } => "ExcludedClass",
            Error::OutOfRange(_) => "OutOfRange",
            Error::SyntaxError { .. } => "SyntaxError",
            Error::GenusZeroUnsupported => "GenusZeroUnsupported",
            Error::UnknownName(_) => "UnknownName",
            Error::WrongSpace { .. } => "WrongSpace",
            Error::InvalidCurveType(_) => "InvalidCurveType",
            Error::ForbiddenTacnodalType(_) => "ForbiddenTacnodalType",
            Error::IllPosedPairing(_) => "IllPosedPairing",
            Error::CapExceeded { .. } => "CapExceeded",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
