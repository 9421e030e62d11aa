//! `T_n`, its inverse, the family `T_{1,z}` and the resolvent of `T_1`.
//!
//! On samples, `T_n` is evaluated through the single-kernel form
//!
//! ```text
//! (T_n f)(x) = x^(-n) / (n-1)! int_0^x (x - t)^(n-1) f(t) dt
//!            = 1/(n-1)! sum_j C(n-1, j) (-1)^j x^(-j-1) int_0^x t^j f(t) dt,
//! ```
//!
//! one cumulative integral per moment. [`apply_cesaro_nested`] is the literal
//! `n`-fold antiderivative and serves as its oracle.
//!
//! Inverses are only ever applied to [`AnalyticFunction`]s: they involve
//! `n` derivatives.

use std::sync::Arc;

use num_complex::Complex64;

use crate::analytic::{supports_order, AnalyticFunction, Decay, SharedFunction};
use crate::constants::{binomial_f64, factorial_f64, leibniz_coeffs};
use crate::error::{Error, Result};
use crate::grid::{cumulative_integral, GridFunction};

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidIndex("n must be at least 1".into()));
    }
    Ok(())
}

/// `T_n` for a fixed `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CesaroOperator {
    n: usize,
}

impl CesaroOperator {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        apply_cesaro(self.n, f)
    }

    pub fn apply_nested(&self, f: &GridFunction) -> Result<GridFunction> {
        apply_cesaro_nested(self.n, f)
    }

    /// `T_n^{-1} f = (x^n f)^(n)`.
    pub fn inverse(&self, f: SharedFunction) -> Result<LeibnizInverse> {
        apply_inverse_cesaro(self.n, f)
    }
}

/// `(T_n f)(x_i)` by the kernel form. Vector values are handled
/// componentwise.
pub fn apply_cesaro(n: usize, f: &GridFunction) -> Result<GridFunction> {
    check_n(n)?;
    let norm = factorial_f64(n - 1);
    let mut acc: Option<GridFunction> = None;
    for j in 0..n {
        let moment = cumulative_integral(&f.map(|t, v| v * t.powi(j as i32)))?;
        let c = binomial_f64(n - 1, j) / norm * if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = moment.map(|x, m| m * (c / x.powi(j as i32 + 1)));
        acc = Some(match acc {
            None => term,
            Some(a) => a.axpy(Complex64::new(1.0, 0.0), &term)?,
        });
    }
    Ok(acc.expect("n >= 1"))
}

/// `(T_n f)(x_i)` as `n` successive antiderivatives divided by `x^n`.
pub fn apply_cesaro_nested(n: usize, f: &GridFunction) -> Result<GridFunction> {
    check_n(n)?;
    let mut g = f.clone();
    for _ in 0..n {
        g = cumulative_integral(&g)?;
    }
    Ok(g.map(|x, v| v / x.powi(n as i32)))
}

/// `T_n^{-1} f = (x^n f)^(n)` as an analytic function.
///
/// The value is the Leibniz expansion `sum_j a_j(n, n) x^j f^(j)`; its own
/// derivatives come from the general Leibniz rule.
#[derive(Clone)]
pub struct LeibnizInverse {
    n: usize,
    inner: SharedFunction,
    coeffs: Vec<f64>,
}

/// `T_n^{-1} f`. Needs `f` to supply derivatives up to order `n`.
pub fn apply_inverse_cesaro(n: usize, f: SharedFunction) -> Result<LeibnizInverse> {
    check_n(n)?;
    supports_order(f.as_ref(), n)?;
    let coeffs = leibniz_coeffs(n, n)?.coeffs_f64();
    Ok(LeibnizInverse { n, inner: f, coeffs })
}

impl AnalyticFunction for LeibnizInverse {
    fn max_order(&self) -> Option<usize> {
        self.inner.max_order().map(|m| m - self.n)
    }

    fn eval(&self, order: usize, x: f64) -> f64 {
        let n = self.n;
        if order == 0 {
            return self
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, &a)| a * x.powi(j as i32) * self.inner.eval(j, x))
                .sum();
        }
        // (x^n f)^(n + order) = sum_i C(n+order, i) n!/(n-i)! x^(n-i) f^(n+order-i)
        let k = n + order;
        (0..=n.min(k))
            .map(|i| {
                binomial_f64(k, i) * factorial_f64(n) / factorial_f64(n - i)
                    * x.powi((n - i) as i32)
                    * self.inner.eval(k - i, x)
            })
            .sum()
    }

    fn vanishing_order(&self) -> f64 {
        self.inner.vanishing_order()
    }

    fn decay(&self) -> Decay {
        self.inner.decay()
    }
}

/// `(T_1^{-1} + k) g = x g' + (1 + k) g`.
#[derive(Clone)]
pub struct ShiftedEuler {
    inner: SharedFunction,
    k: usize,
}

impl AnalyticFunction for ShiftedEuler {
    fn max_order(&self) -> Option<usize> {
        self.inner.max_order().map(|m| m - 1)
    }

    fn eval(&self, order: usize, x: f64) -> f64 {
        x * self.inner.eval(order + 1, x) + (order + 1 + self.k) as f64 * self.inner.eval(order, x)
    }

    fn vanishing_order(&self) -> f64 {
        self.inner.vanishing_order()
    }

    fn decay(&self) -> Decay {
        self.inner.decay()
    }
}

/// `p_n(T_1^{-1}) f = prod_{k=0}^{n-1} (T_1^{-1} + k) f`, which equals
/// `T_n^{-1} f`.
pub fn compose_p_n_of_inverse_t1(n: usize, f: SharedFunction) -> Result<SharedFunction> {
    check_n(n)?;
    supports_order(f.as_ref(), n)?;
    let mut g = f;
    for k in 0..n {
        g = Arc::new(ShiftedEuler { inner: g, k });
    }
    Ok(g)
}

/// `(T_{1,z} f)(x) = x^(z-1) int_0^x t^(-z) f(t) dt` for `Re z < 1/2`.
pub fn apply_t1z(z: Complex64, f: &GridFunction) -> Result<GridFunction> {
    if !(z.re < 0.5) {
        return Err(Error::InvalidArgument(format!("T_1,z needs Re z < 1/2, got z = {z}")));
    }
    let weighted = f.map(|t, v| v * Complex64::new(t, 0.0).powc(-z));
    let primitive = cumulative_integral(&weighted)?;
    Ok(primitive.map(|x, v| v * Complex64::new(x, 0.0).powc(z - 1.0)))
}

/// Distance to the circle `|z - 1| = 1` below which the resolvent is
/// refused.
pub const RESOLVENT_MARGIN: f64 = 0.05;

/// A point `z` with `|z - 1| > 1 + margin`, where the resolvent formula
/// through `T_{1, 1/z}` is valid (`Re(1/z) < 1/2` there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventPoint {
    z: Complex64,
}

impl ResolventPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        Self::with_margin(z, RESOLVENT_MARGIN)
    }

    pub fn with_margin(z: Complex64, margin: f64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || (z - 1.0).norm() <= 1.0 + margin {
            return Err(Error::NearSpectrum { z: format!("{z}"), margin });
        }
        Ok(Self { z })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }
}

/// `(T_1 - z)^{-1} f = -z^{-1} f - z^{-2} T_{1, 1/z} f`.
pub fn resolvent_t1(point: ResolventPoint, f: &GridFunction) -> Result<GridFunction> {
    let z = point.z;
    let w = z.inv();
    let t = apply_t1z(w, f)?;
    f.scale(-w).axpy(-w * w, &t)
}
