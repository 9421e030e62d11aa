//! Functions that carry closed-form derivatives.
//!
//! The inequality functionals square the `n`-th derivative, so numerical
//! differentiation is never good enough for them. Everything that feeds a
//! ratio implements [`AnalyticFunction`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Declared behaviour at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decay {
    Exponential { rate: f64 },
    Power { exponent: f64 },
    /// Closed form changes at `end`: zero beyond it, or a polynomial tail
    /// for the probes.
    Compact { end: f64 },
    Unknown,
}

pub trait AnalyticFunction: Send + Sync {
    /// Highest derivative order available, `None` when unlimited.
    fn max_order(&self) -> Option<usize>;

    /// `f^(order)(x)`. Only called with `order <= max_order()`.
    fn eval(&self, order: usize, x: f64) -> f64;

    /// Declared order of vanishing at `0` (`f ~ x^order`).
    fn vanishing_order(&self) -> f64 {
        0.0
    }

    fn decay(&self) -> Decay {
        Decay::Unknown
    }
}

pub type SharedFunction = Arc<dyn AnalyticFunction>;

pub fn supports_order(f: &dyn AnalyticFunction, order: usize) -> Result<()> {
    match f.max_order() {
        Some(m) if order > m => Err(Error::MissingDerivative { requested: order, available: m }),
        _ => Ok(()),
    }
}

/// `f^(order)(x)` with the order checked.
pub fn derivative(f: &dyn AnalyticFunction, order: usize, x: f64) -> Result<f64> {
    supports_order(f, order)?;
    Ok(f.eval(order, x))
}

/// Samples `f^(order)` on a grid.
pub fn sample(f: &dyn AnalyticFunction, order: usize, grid: impl Into<Grid>) -> Result<GridFunction> {
    supports_order(f, order)?;
    Ok(GridFunction::from_fn(grid, |x| Complex64::new(f.eval(order, x), 0.0)))
}

/// Central-difference spot check of every available derivative against the
/// next one, relative tolerance `1e-5`.
pub fn check_consistency(f: &dyn AnalyticFunction, points: &[f64]) -> Result<()> {
    let top = f.max_order().unwrap_or(3).min(6);
    for order in 0..top {
        for &x in points {
            let h = 1e-4 * x.abs().max(1e-2);
            let fd = (f.eval(order, x + h) - f.eval(order, x - h)) / (2.0 * h);
            let exact = f.eval(order + 1, x);
            let scale = exact.abs().max(fd.abs()).max(1e-8 * (1.0 + f.eval(order, x).abs()));
            if (fd - exact).abs() > 1e-5 * scale {
                return Err(Error::InvalidData(format!(
                    "derivative of order {} at x = {x} is {exact}, finite differences give {fd}",
                    order + 1
                )));
            }
        }
    }
    Ok(())
}

/// `sum_k c_k x^(p_k) e^(-rate x)` with real powers.
///
/// Covers polynomials (`rate = 0`), the Gamma class `x^(k+1/2) e^(-c x)`,
/// and truncated monomials on a domain that stays below any cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerExp {
    terms: Vec<(f64, f64)>,
    rate: f64,
    cache: Vec<Vec<(f64, f64)>>,
}

const CACHED_ORDERS: usize = 12;

fn differentiate_terms(terms: &[(f64, f64)], rate: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(2 * terms.len());
    let mut push = |c: f64, p: f64| {
        if c == 0.0 {
            return;
        }
        match out.iter_mut().find(|(_, q)| *q == p) {
            Some(t) => t.0 += c,
            None => out.push((c, p)),
        }
    };
    for &(c, p) in terms {
        push(c * p, p - 1.0);
        if rate != 0.0 {
            push(-rate * c, p);
        }
    }
    out.retain(|t| t.0 != 0.0);
    out
}

impl PowerExp {
    pub fn new(terms: Vec<(f64, f64)>, rate: f64) -> Self {
        let terms: Vec<(f64, f64)> = terms.into_iter().filter(|t| t.0 != 0.0).collect();
        let mut cache = vec![terms.clone()];
        for k in 0..CACHED_ORDERS {
            let next = differentiate_terms(&cache[k], rate);
            cache.push(next);
        }
        Self { terms, rate, cache }
    }

    /// `x^power e^(-rate x)`.
    pub fn gamma_class(power: f64, rate: f64) -> Self {
        Self::new(vec![(1.0, power)], rate)
    }

    pub fn monomial(power: f64) -> Self {
        Self::new(vec![(1.0, power)], 0.0)
    }

    /// `sum_k coeffs[k] x^k`.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().enumerate().map(|(k, &c)| (c, k as f64)).collect(), 0.0)
    }

    pub fn zero() -> Self {
        Self::new(Vec::new(), 0.0)
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// `self * x^shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self::new(self.terms.iter().map(|&(c, p)| (c, p + shift)).collect(), self.rate)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.terms.iter().map(|&(c, p)| (c * factor, p)).collect(), self.rate)
    }

    fn terms_of_order(&self, order: usize) -> std::borrow::Cow<'_, [(f64, f64)]> {
        if order <= CACHED_ORDERS {
            std::borrow::Cow::Borrowed(&self.cache[order])
        } else {
            let mut t = self.cache[CACHED_ORDERS].clone();
            for _ in CACHED_ORDERS..order {
                t = differentiate_terms(&t, self.rate);
            }
            std::borrow::Cow::Owned(t)
        }
    }
}

fn pow(x: f64, p: f64) -> f64 {
    if p == p.trunc() && p.abs() < 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

impl AnalyticFunction for PowerExp {
    fn max_order(&self) -> Option<usize> {
        None
    }

    fn eval(&self, order: usize, x: f64) -> f64 {
        let terms = self.terms_of_order(order);
        let s: f64 = terms.iter().map(|&(c, p)| c * pow(x, p)).sum();
        if self.rate == 0.0 {
            s
        } else {
            s * (-self.rate * x).exp()
        }
    }

    fn vanishing_order(&self) -> f64 {
        self.terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min)
    }

    fn decay(&self) -> Decay {
        if self.rate > 0.0 {
            Decay::Exponential { rate: self.rate }
        } else {
            Decay::Power { exponent: self.terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max) }
        }
    }
}

/// `x^power exp(-(ln x - center)^2 / (2 width^2))`, a Gaussian in `ln x`.
///
/// With `power = -1/2` this is `x^(-1/2) psi(ln x)` for a Gaussian `psi`,
/// whose Mellin transform is again a Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLog {
    pub center: f64,
    pub width: f64,
    pub power: f64,
    /// Polynomials `Q_j` in `v = ln x - center` with
    /// `f^(j)(x) = x^(-j) Q_j(v) f(x)`.
    polys: Vec<Vec<f64>>,
}

impl GaussianLog {
    pub fn new(center: f64, width: f64, power: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!("width = {width} must be positive")));
        }
        let inv = 1.0 / (width * width);
        let mut polys = vec![vec![1.0]];
        for k in 0..CACHED_ORDERS {
            // Q_{k+1} = Q_k' + Q_k (power - v / width^2) - k Q_k
            let q = &polys[k];
            let mut next = vec![0.0; q.len() + 1];
            for (i, &c) in q.iter().enumerate() {
                if i > 0 {
                    next[i - 1] += i as f64 * c;
                }
                next[i] += (power - k as f64) * c;
                next[i + 1] -= inv * c;
            }
            polys.push(next);
        }
        Ok(Self { center, width, power, polys })
    }
}

impl AnalyticFunction for GaussianLog {
    fn max_order(&self) -> Option<usize> {
        Some(CACHED_ORDERS)
    }

    fn eval(&self, order: usize, x: f64) -> f64 {
        let v = x.ln() - self.center;
        let base = (self.power * x.ln() - v * v / (2.0 * self.width * self.width)).exp();
        if order == 0 {
            return base;
        }
        let q: f64 = self.polys[order].iter().rev().fold(0.0, |acc, c| acc * v + c);
        q * base / x.powi(order as i32)
    }

    fn vanishing_order(&self) -> f64 {
        f64::INFINITY
    }

    fn decay(&self) -> Decay {
        Decay::Exponential { rate: f64::INFINITY }
    }
}

type Closure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function given by closures for `f, f', ..., f^(k)`.
#[derive(Clone)]
pub struct ClosureFunction {
    derivatives: Vec<Closure>,
    vanishing_order: f64,
    decay: Decay,
}

impl fmt::Debug for ClosureFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosureFunction")
            .field("orders", &self.derivatives.len())
            .field("vanishing_order", &self.vanishing_order)
            .field("decay", &self.decay)
            .finish()
    }
}

impl ClosureFunction {
    /// Builds the function and spot-checks the closures against each other
    /// at `check_points` (central differences, relative tolerance `1e-5`).
    pub fn new(
        derivatives: Vec<Closure>,
        vanishing_order: f64,
        decay: Decay,
        check_points: &[f64],
    ) -> Result<Self> {
        if derivatives.is_empty() {
            return Err(Error::InvalidArgument("at least the value closure is required".into()));
        }
        let f = Self { derivatives, vanishing_order, decay };
        check_consistency(&f, check_points)?;
        Ok(f)
    }
}

impl AnalyticFunction for ClosureFunction {
    fn max_order(&self) -> Option<usize> {
        Some(self.derivatives.len() - 1)
    }

    fn eval(&self, order: usize, x: f64) -> f64 {
        (self.derivatives[order])(x)
    }

    fn vanishing_order(&self) -> f64 {
        self.vanishing_order
    }

    fn decay(&self) -> Decay {
        self.decay
    }
}

/// `x -> f(a + c - x)`, the reflection about the midpoint of `(a, c)`.
#[derive(Clone)]
pub struct Reflected {
    inner: SharedFunction,
    a: f64,
    c: f64,
}

impl Reflected {
    pub fn new(inner: SharedFunction, a: f64, c: f64) -> Self {
        Self { inner, a, c }
    }
}

impl AnalyticFunction for Reflected {
    fn max_order(&self) -> Option<usize> {
        self.inner.max_order()
    }

    fn eval(&self, order: usize, x: f64) -> f64 {
        let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * self.inner.eval(order, self.a + self.c - x)
    }
}

/// `factor * f`.
#[derive(Clone)]
pub struct Scaled {
    inner: SharedFunction,
    factor: f64,
}

impl Scaled {
    pub fn new(inner: SharedFunction, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl AnalyticFunction for Scaled {
    fn max_order(&self) -> Option<usize> {
        self.inner.max_order()
    }

    fn eval(&self, order: usize, x: f64) -> f64 {
        self.factor * self.inner.eval(order, x)
    }

    fn vanishing_order(&self) -> f64 {
        if self.factor == 0.0 {
            f64::INFINITY
        } else {
            self.inner.vanishing_order()
        }
    }

    fn decay(&self) -> Decay {
        self.inner.decay()
    }
}
