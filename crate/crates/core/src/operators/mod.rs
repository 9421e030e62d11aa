//! The generalized Cesàro operators and their relatives.
//!
//! * [`cesaro`]: `T_n` on sampled functions, `T_n^{-1}` and
//!   `p_n(T_1^{-1})` on analytic functions, the family `T_{1,z}` and the
//!   resolvent of `T_1`.
//! * [`weighted`]: the pair `A`, `B` of weighted integral operators built
//!   from `(phi, psi, w)` and their constant `K`.
//! * [`norm`]: matrix-free discretizations and power iteration for their
//!   operator norms.

pub mod cesaro;
pub mod norm;
pub mod weighted;

pub use cesaro::{
    apply_t1z, apply_cesaro, apply_cesaro_nested, apply_inverse_cesaro, compose_p_n_of_inverse_t1,
    resolvent_t1, CesaroOperator, ResolventPoint, RESOLVENT_MARGIN,
};
pub use norm::{estimate_operator_norm, extrapolated_norm, DiscreteOperator, NormEstimate, WindowedNorm};
pub use weighted::{weighted_pair_apply, PairSide, WeightedPairSpec};
