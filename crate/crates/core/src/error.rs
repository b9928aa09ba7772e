use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of modes must be at least 1 (got {0})")]
    InvalidModes(usize),
    #[error("scaling parameter must be positive and finite (got {0})")]
    InvalidScaling(f64),
    #[error("fractional order must lie in (0, 2) (got {0})")]
    InvalidAlpha(f64),
    #[error("argument {x} outside the supported range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("index {ell} exceeds degree {n}")]
    InvalidIndex { ell: i64, n: i64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian (max |H - H^H| = {0:e})")]
    NotHermitian(f64),
    #[error("invalid spectral interval [{zeta}, {eta}]")]
    InvalidBounds { zeta: f64, eta: f64 },
    #[error("singular denominator in rational evaluation")]
    Singular,
    #[error("sampled function has a non-finite value at infinity")]
    NonFiniteLimit,
    #[error("scaling parameters differ ({0} vs {1})")]
    ScalingMismatch(f64, f64),
    #[error("window [{lo}, {hi}] lies outside the resolved region |x| <= {limit}")]
    WindowUnresolved { lo: f64, hi: f64, limit: f64 },
    #[error("mode windows must be increasing, nonnegative and within the truncation")]
    InvalidModeWindow,
    #[error("need at least 3 unsaturated points for an order fit (got {0})")]
    TooFewPoints(usize),
    #[error("t_final = {t_final} is not an integer multiple of tau = {tau}")]
    InvalidTimeStep { tau: f64, t_final: f64 },
    #[error("coefficient count mismatch: {0}")]
    SchemeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
