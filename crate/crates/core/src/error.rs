use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// The variant name doubles as a stable machine-readable error kind, see
/// [`Error::kind`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("nonzero self distance at point {0}")]
    NonzeroDiagonal(usize),
    #[error("asymmetric metric: d({0},{1}) != d({1},{0})")]
    Asymmetric(usize, usize),
    #[error("negative distance d({0},{1})")]
    NegativeDistance(usize, usize),
    #[error("triangle inequality violated: d({0},{1}) > d({0},{2}) + d({2},{1})")]
    TriangleViolation(usize, usize, usize),
    #[error("subset is empty")]
    EmptySubset,
    #[error("graph is disconnected (vertex {0} unreachable from vertex 0)")]
    Disconnected(usize),
    #[error("edge ({0},{1}) has nonpositive weight")]
    NonpositiveWeight(usize, usize),
    #[error("measures live on different spaces")]
    SpaceMismatch,
    #[error("truncation removed all mass")]
    EmptyTruncation,
    #[error("density has zero mass")]
    ZeroMass,
    #[error("quantization needs more than {0} atoms")]
    QuantizationBudgetExceeded(usize),
    #[error("transport solver failure: {0}")]
    SolverFailure(String),
    #[error("measure is not a uniform cloud")]
    NotUniformCloud,
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("instance too large for brute force ({0} candidate bases)")]
    TooLarge(u128),
    #[error("space carries no geodesic structure")]
    NoGeodesicStructure,
    #[error("relative entropy is infinite")]
    InfiniteEntropy,
    #[error("no pair with positive transport distance was generated")]
    NoValidPairs,
    #[error("curvature parameter must be positive")]
    NonpositiveK,
    #[error("measure charges point {0} outside the reference support")]
    AbsoluteContinuityFailure(usize),
    #[error("family lengths differ: {0} vs {1}")]
    FamilyLengthMismatch(usize, usize),
    #[error("{0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::NonzeroDiagonal(_) => "NonzeroDiagonal",
            Error::Asymmetric(..) => "Asymmetric",
            Error::NegativeDistance(..) => "NegativeDistance",
            Error::TriangleViolation(..) => "TriangleViolation",
            Error::EmptySubset => "EmptySubset",
            Error::Disconnected(_) => "Disconnected",
            Error::NonpositiveWeight(..) => "NonpositiveWeight",
            Error::SpaceMismatch => "SpaceMismatch",
            Error::EmptyTruncation => "EmptyTruncation",
            Error::ZeroMass => "ZeroMass",
            Error::QuantizationBudgetExceeded(_) => "QuantizationBudgetExceeded",
            Error::SolverFailure(_) => "SolverFailure",
            Error::NotUniformCloud => "NotUniformCloud",
            Error::SizeMismatch(..) => "SizeMismatch",
            Error::TooLarge(_) => "TooLarge",
            Error::NoGeodesicStructure => "NoGeodesicStructure",
            Error::InfiniteEntropy => "InfiniteEntropy",
            Error::NoValidPairs => "NoValidPairs",
            Error::NonpositiveK => "NonpositiveK",
            Error::AbsoluteContinuityFailure(_) => "AbsoluteContinuityFailure",
            Error::FamilyLengthMismatch(..) => "FamilyLengthMismatch",
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
