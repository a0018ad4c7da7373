use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime below 2^16")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("field mismatch: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("rank too small: rank {rank} of {n} needs at least {needed}")]
    RankTooSmall { rank: usize, n: usize, needed: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("polynomial has degree zero")]
    DegreeZero,
    #[error("bad rank sequence: {0}")]
    BadRanks(String),
    #[error("idempotent is zero")]
    ZeroIdempotent,
    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: String,
        needed: u128,
        budget: u128,
    },
    #[error("idempotents are not orthogonal")]
    NotOrthogonal,
    #[error("idempotents have unequal ranks")]
    UnequalRanks,
    #[error("idempotents do not form an orthogonal partition of the identity")]
    NotPartition,
    #[error("incompatible shapes: {0}")]
    IncompatibleShapes(String),
    #[error("matrix is not annihilated by every polynomial of S")]
    NotAlgebraicOverS,
    #[error("scalar is not a common root of S")]
    CenterNotRoot,
    #[error("characteristic polynomial of the corner operator does not split")]
    NotTriangularizable,
    #[error("no triangularizable approximant found within {0} perturbations")]
    NoTriangularizableApproximant(usize),
    #[error("part count {m} does not divide dimension {n}")]
    NotDivisible { m: usize, n: usize },
    #[error("matrix is not a unit of the nest algebra")]
    NotInGlRe,
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::DivisionByZero => "DivisionByZero",
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::NotInvertible => "NotInvertible",
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::FieldMismatch(..) => "FieldMismatch",
            Error::RankTooSmall { .. } => "RankTooSmall",
            Error::PreconditionViolation(_) => "PreconditionViolation",
            Error::NotMonic => "NotMonic",
            Error::DegreeZero => "DegreeZero",
            Error::BadRanks(_) => "BadRanks",
            Error::ZeroIdempotent => "ZeroIdempotent",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::NotOrthogonal => "NotOrthogonal",
            Error::UnequalRanks => "UnequalRanks",
            Error::NotPartition => "NotPartition",
            Error::IncompatibleShapes(_) => "IncompatibleShapes",
            Error::NotAlgebraicOverS => "NotAlgebraicOverS",
            Error::CenterNotRoot => "CenterNotRoot",
            Error::NotTriangularizable => "NotTriangularizable",
            Error::NoTriangularizableApproximant(_) => "NoTriangularizableApproximant",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::NotInGlRe => "NotInGL_RE",
            Error::HypothesisNotMet(_) => "HypothesisNotMet",
            Error::Parse(_) => "ParseError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
