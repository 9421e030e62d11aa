//! Numerics for the higher-order Hardy inequalities
//!
//! ```text
//! int_0^inf |f^(n)(x)|^2 dx  >=  [(2n-1)!!]^2 / 2^(2n)  int_0^inf |f(x)|^2 / x^(2n) dx
//! ```
//!
//! and the generalized continuous Cesàro operators
//! `(T_n f)(x) = x^(-n) int_0^x int_0^t1 ... f`, whose norm `2^n / (2n-1)!!`
//! is the reciprocal square root of the sharp constant.
//!
//! Modules:
//!
//! * [`constants`]: exact rationals for the constants, the Leibniz
//!   coefficients, the probe tail coefficients, and the polynomials
//!   `p_n`, `r_n` relating `T_n` to `T_1`.
//! * [`grid`]: sampled functions on log-uniform and uniform grids,
//!   quadrature, cumulative integration, finite differences, CSV.
//! * [`analytic`]: functions with closed-form derivatives.
//! * [`operators`]: `T_n` (kernel and nested forms), `T_n^{-1}` on analytic
//!   functions, `T_{1,z}`, the resolvent of `T_1`, the weighted pair of
//!   integral operators, and operator-norm estimation.
//! * [`functional`]: inequality ratios, the optimality probes, sharpness
//!   sweeps, boundary decay diagnostics.
//! * [`spectral`]: the unitary Mellin transform and the spectral curves
//!   `r_n(1 + e^{i theta})`.
//! * [`interval`]: the finite-interval and vector-valued inequalities.
//!
//! The guide in `book/` walks through each of these with runnable snippets;
//! they are compiled as doctests of this crate.

pub mod analytic;
pub mod constants;
pub mod error;
pub mod functional;
pub mod grid;
pub mod interval;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};

/// Seed used wherever a reproducible pseudo-random stream is needed.
pub const DEFAULT_SEED: u64 = 0x5EED_B1A5;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/constants.md")]
    mod constants {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/cesaro.md")]
    mod cesaro {}
    #[doc = include_str!("../../../book/src/inequalities.md")]
    mod inequalities {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/interval.md")]
    mod interval {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
