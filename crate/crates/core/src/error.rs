use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split into two families: validation failures (bad indices,
/// out-of-range parameters, trivial inputs) and numerical failures
/// (singular stubs, divergent tails, non-convergence). [`Error::is_numerical`]
/// tells them apart; the CLI maps them to different exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("pole of r_{n} at z = {z}")]
    Pole { n: usize, z: String },

    #[error("non-integrable behaviour near 0: fitted local exponent {exponent:.6} (must exceed -1)")]
    Singularity { exponent: f64 },

    #[error("divergent tail integral: fitted local exponent {exponent:.6} (must be below -1)")]
    DivergentTail { exponent: f64 },

    #[error("trivial function: denominator {denominator:e} is below 1e-300")]
    TrivialFunction { denominator: f64 },

    #[error("derivative of order {requested} requested, only {available} available")]
    MissingDerivative { requested: usize, available: usize },

    #[error("boundary conditions inconsistent with the supplied closures: {0}")]
    InconsistentBoundary(String),

    #[error("component length mismatch: expected {expected}, found {found}")]
    MixedLengths { expected: usize, found: usize },

    #[error("z = {z} lies within {margin} of the spectrum circle |z - 1| = 1 (or inside it)")]
    NearSpectrum { z: String, margin: f64 },

    #[error("estimate did not converge after {iterations} iterations (last estimate {last_estimate})")]
    Unconverged { iterations: usize, last_estimate: f64 },
}

impl Error {
    /// `true` for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singularity { .. } | Error::DivergentTail { .. } | Error::Unconverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
