use thiserror::Error;

/// Errors shared across the solvers, transforms, and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// An exponential weight e^{pi^2 k^2 t} (or a modulation weight) would overflow f64.
    #[error("weight overflow; rescale T: exponent {exponent:.1} exceeds {limit}")]
    WeightOverflow { exponent: f64, limit: f64 },

    /// Grid too coarse for the requested mode content.
    #[error("aliasing: {0}")]
    Aliasing(String),

    /// Argument outside the domain an operation is defined on.
    #[error("domain: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its refinement depth.
    #[error("quadrature did not converge after {levels} levels; achieved estimate {estimate:.6e} (error ~ {error:.3e})")]
    QuadratureNoConverge {
        levels: usize,
        estimate: f64,
        error: f64,
    },

    /// Moment system too ill-conditioned to solve reliably.
    #[error("moment system condition {condition:.3e} exceeds 1e14; use fewer modes or a shorter horizon")]
    IllConditioned { condition: f64 },

    /// Nonlinear solve left the small-data regime.
    #[error("blow-up suspected at t = {time:.6}: |y| = {norm:.3e} exceeds 1e3")]
    BlowUp { time: f64, norm: f64 },

    /// Transform grid cannot deliver the requested tail accuracy.
    #[error("insufficient spectral coverage for 1% tail accuracy (tail bound {tail_bound:.3e} vs main {main:.3e}); suggest pad_factor >= {suggested_pad} and a finer sample step")]
    InsufficientPad {
        tail_bound: f64,
        main: f64,
        suggested_pad: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit status for the command-line tools: numeric guard violations map to 3.
    pub fn exit_code(&self) -> i32 {
        3
    }
}
