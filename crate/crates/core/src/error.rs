use thiserror::Error;

/// Errors shared by the solver and field layers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid size {0} is not a power of two (got n = {0}, need n = 2^k, k >= 3)")]
    GridSizeNotPowerOfTwo(usize),

    #[error("grid half-length must be positive, got {0}")]
    NonPositiveHalfLength(f64),

    #[error("fields live on different grids: {0} vs {1} nodes per axis")]
    GridMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field contains non-finite values after {0}")]
    NonFinite(&'static str),

    #[error("nonlocal term is nonpositive; the iterate left the admissible cone")]
    NonpositiveNonlocalTerm,

    #[error("iterate collapsed to zero (l2 norm {norm:.3e}); reseed with a larger amplitude")]
    CollapsedIterate { norm: f64 },

    #[error("no convergence after {iters} iterations (residual {resid:.3e}, target {target:.3e}); recent residuals: {history:?}")]
    NoConvergence {
        iters: usize,
        resid: f64,
        target: f64,
        history: Vec<f64>,
    },

    #[error("energy rose above twice the saddle-level estimate ({energy:.3e} > 2 x {estimate:.3e}); trajectory: {trajectory:?}")]
    Divergence {
        energy: f64,
        estimate: f64,
        trajectory: Vec<f64>,
    },

    #[error("box too small for the requested sweep: need half-length >= {needed:.1} (have {have:.1}); raise L or n")]
    BoxTooSmall { needed: f64, have: f64 },

    #[error("path search exhausted: the profile never fell below {level} on (0, {t_max}]; extend the search interval")]
    PathLevelNotReached { level: f64, t_max: f64 },

    #[error("annulus too thin: only {count} usable nodes for the decay fit (need >= {need})")]
    AnnulusTooThin { count: usize, need: usize },

    #[error("dump i/o failed: {0}")]
    DumpIo(String),

    #[error("dump header malformed: {0}")]
    DumpHeader(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
