use thiserror::Error;

/// Everything that can go wrong while building families, matrices or brackets.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("map family must contain at least one map")]
    EmptyFamily,
    #[error("digit {0} is not strictly positive")]
    NonPositiveDigit(f64),
    #[error("digit {0} appears more than once")]
    DuplicateDigit(f64),
    #[error("parameter {name} = {value} is outside its admissible range")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("map index {index} out of range for a family of {len} maps")]
    BadIndex { index: usize, len: usize },
    #[error("derivative order {0} not supported (maximum is 3)")]
    BadOrder(u8),
    #[error("map {index} does not send the domain into itself")]
    NotSelfMap { index: usize },
    #[error("weight of map {index} is not strictly positive at x = {x}")]
    NonPositiveWeight { index: usize, x: f64 },
    #[error("derivative of map {index} changes sign on the domain")]
    DerivativeSignChange { index: usize },
    #[error("no contraction bound available: sampled sup |θ'| = {0} is not below 1")]
    NoContractionBound(f64),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("family does not supply derivative data: {0}")]
    MissingDerivatives(&'static str),
    #[error("sign certificate does not hold for this family at s = {0}")]
    SignNotCertified(f64),
    #[error("mesh must have at least 2 subintervals per piece (got {0})")]
    MeshTooSmall(usize),
    #[error("interpolation correction too large: coef·h²/4 = {value} ≥ 1 (h = {h}, s = {s}); refine mesh")]
    ErrTooLarge { value: f64, h: f64, s: f64 },
    #[error("map {index} sends node {x} to {y}, outside the meshed domain")]
    MapEscapesDomain { index: usize, x: f64, y: f64 },
    #[error("assembled matrix has a negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("vector must be strictly positive (entry {index} = {value})")]
    NonPositiveVector { index: usize, value: f64 },
    #[error("vectors have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("row {0} has zero row sum")]
    ZeroRowSum(usize),
    #[error("no sign change of log-radius on [{lo}, {hi}] (values {f_lo}, {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("power iteration on signed matrix failed to settle")]
    PowerDivergence,
    #[error("malformed matrix dump: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
