use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not a positive even integer")]
    InvalidDimension(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("slot {slot} out of range for a rank-{rank} tensor")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("structure constants are not antisymmetric at (i, j, k) = {indices:?} (residual {residual:e})")]
    AntisymmetryViolation { indices: [usize; 3], residual: f64 },
    #[error("Jacobi identity fails at (i, j, k) = {indices:?} (residual {residual:e})")]
    JacobiViolation { indices: [usize; 3], residual: f64 },
    #[error("J is not an almost complex structure: max |J² + I| = {0:e}")]
    NotAlmostComplex(f64),
    #[error("metric is not Norden-compatible with J: max |JᵀgJ + g| = {0:e}")]
    NotNordenCompatible(f64),
    #[error("metric has signature ({pos}, {neg}), expected ({expected}, {expected})")]
    WrongSignature { pos: usize, neg: usize, expected: usize },
    #[error("model is not in W3: cyclic-sum residual {0:e}")]
    NotW3(f64),
    #[error("holomorphic plane is isotropic (g(x,x)² + g(x,Jx)² = {0:e})")]
    IsotropicPlane(f64),
    #[error("generator exhausted {0} retries")]
    RetriesExhausted(usize),
    #[error("the W3 solution space contains only Kähler models")]
    OnlyKahlerSolutions,
    #[error("no isotropic Kähler model found after {0} attempts")]
    NotFound(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable name of the violated condition.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension(_) => "InvalidDimension",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::DegenerateMetric(_) => "DegenerateMetric",
            Error::SlotOutOfRange { .. } => "SlotOutOfRange",
            Error::AntisymmetryViolation { .. } => "AntisymmetryViolation",
            Error::JacobiViolation { .. } => "JacobiViolation",
            Error::NotAlmostComplex(_) => "NotAlmostComplex",
            Error::NotNordenCompatible(_) => "NotNordenCompatible",
            Error::WrongSignature { .. } => "WrongSignature",
            Error::NotW3(_) => "NotW3",
            Error::IsotropicPlane(_) => "IsotropicPlane",
            Error::RetriesExhausted(_) => "RetriesExhausted",
            Error::OnlyKahlerSolutions => "OnlyKahlerSolutions",
            Error::NotFound(_) => "NotFound",
            Error::Parse(_) => "ParseError",
        }
    }
}
