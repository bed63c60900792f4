use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("points live in different spaces")]
    SpaceMismatch,
    #[error("net of {size} points exceeds the cap of {cap}")]
    NetTooLarge { size: u128, cap: usize },
    #[error("symbol {symbol} is outside 1..={kappa}")]
    BadSymbol { symbol: usize, kappa: usize },
    #[error("safety margin {margin:e} exceeds the ball radius {radius:e}")]
    ResolutionTooCoarse { margin: f64, radius: f64 },
    #[error("search budget exhausted: {0}")]
    BudgetExceeded(String),
    #[error("Lipschitz constant is 1; use isometry mode")]
    DegenerateLipschitz,
    #[error("schedule exceeds the orbit budget at level {level} (n = {n:e})")]
    DepthOverflow { level: usize, n: f64 },
    #[error("schedule ratio {ratio} at the last level is above the threshold {threshold}")]
    ThresholdNotReached { ratio: f64, threshold: f64 },
    #[error("targets coincide (I1 = {i1}, I2 = {i2}); no gap to oscillate across")]
    NoGap { i1: f64, i2: f64 },
    #[error("basin check failed for target {target}: average {average} at n = {n} is off {expected} by more than {tolerance}")]
    BasinCheckFailed { target: usize, n: usize, average: f64, expected: f64, tolerance: f64 },
    #[error("epsilon {eps} exceeds the sampled continuity scale {eps0}")]
    EpsilonTooLarge { eps: f64, eps0: f64 },
    #[error("no transition found at level {level} within {k_max} steps")]
    TransitionNotFound { level: usize, k_max: usize },
    #[error("level {level} needs radius {radius:e}, below the f64 resolution floor {floor:e}")]
    PrecisionExhausted { level: usize, radius: f64, floor: f64 },
    #[error("checkpoint {checkpoint} average {average} violates its bound {bound}")]
    CheckpointBound { checkpoint: usize, average: f64, bound: f64 },
    #[error("zero vector")]
    ZeroVector,
    #[error("subspace is not invariant under generator {generator} (residual {residual:e})")]
    NotInvariant { generator: usize, residual: f64 },
    #[error("not dominated within k <= {k_max}")]
    NotDominated { k_max: usize },
    #[error("not hyperbolic: {0}")]
    NotHyperbolic(String),
    #[error("matrix {index} has determinant {det}, not of modulus 1")]
    NotSpecialLinear { index: usize, det: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
