//! The operators `(A f)(x) = phi(x) int_x^b psi f w dt` and
//! `(B f)(x) = psi(x) int_a^x phi f w dt`.
//!
//! Both are bounded on `L^2((a, b); w dx)` exactly when
//! `K = sup_x K(x)` is finite, where
//! `K(x)^2 = int_a^x |phi|^2 w dt * int_x^b |psi|^2 w dt`; then
//! `||A|| = ||B|| = 2K` and `A`, `B` are adjoint to each other.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{cumulative_integral, reverse_cumulative_integral, GridFunction};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairSide {
    A,
    B,
}

/// `(phi, psi, w)` on `(a, b)`; `b` may be infinite.
#[derive(Clone)]
pub struct WeightedPairSpec {
    phi: RealFn,
    psi: RealFn,
    w: RealFn,
    a: f64,
    b: f64,
    k_exact: Option<f64>,
    label: String,
}

impl fmt::Debug for WeightedPairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightedPairSpec")
            .field("label", &self.label)
            .field("interval", &(self.a, self.b))
            .field("k_exact", &self.k_exact)
            .finish()
    }
}

impl WeightedPairSpec {
    pub fn new(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        psi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        interval: (f64, f64),
    ) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) || a.is_nan() || b.is_nan() {
            return Err(Error::InvalidArgument(format!("interval ({a}, {b}) is empty")));
        }
        Ok(Self {
            phi: Arc::new(phi),
            psi: Arc::new(psi),
            w: Arc::new(w),
            a,
            b,
            k_exact: None,
            label: "custom".into(),
        })
    }

    /// `phi = x^p`, `psi = x^q`, `w = x^r` on `(0, inf)`.
    ///
    /// Requires `2p + r + 1 > 0` and `2q + r + 1 < 0` (local square
    /// integrability at the two ends) and `p + q + r + 1 = 0`, which makes
    /// `K(x)` constant:
    /// `K = ((2p + r + 1)(-2q - r - 1))^(-1/2)`.
    pub fn power_family(p: f64, q: f64, r: f64) -> Result<Self> {
        let left = 2.0 * p + r + 1.0;
        let right = -(2.0 * q + r + 1.0);
        if !(left > 0.0 && right > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "x^{p}, x^{q} with weight x^{r}: need 2p + r + 1 > 0 and 2q + r + 1 < 0"
            )));
        }
        if (p + q + r + 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "K(x) is unbounded unless p + q + r + 1 = 0 (got {})",
                p + q + r + 1.0
            )));
        }
        let mut spec = Self::new(
            move |x: f64| x.powf(p),
            move |x: f64| x.powf(q),
            move |x: f64| if r == 0.0 { 1.0 } else { x.powf(r) },
            (0.0, f64::INFINITY),
        )?;
        spec.k_exact = Some(1.0 / (left * right).sqrt());
        spec.label = format!("phi = x^{p}, psi = x^{q}, w = x^{r}");
        Ok(spec)
    }

    /// `phi = 1`, `psi = 1/x`, `w = 1`: `B` is `T_1`, `K = 1`.
    pub fn cesaro() -> Self {
        Self::power_family(0.0, -1.0, 0.0).expect("valid exponents")
    }

    /// `phi = x`, `psi = 1/x^2`, `w = 1`: `K = 1/3`.
    pub fn rellich_step() -> Self {
        Self::power_family(1.0, -2.0, 0.0).expect("valid exponents")
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn phi(&self, x: f64) -> f64 {
        (self.phi)(x)
    }

    pub fn psi(&self, x: f64) -> f64 {
        (self.psi)(x)
    }

    pub fn w(&self, x: f64) -> f64 {
        (self.w)(x)
    }

    /// Closed-form `K`, when known.
    pub fn k_exact(&self) -> Option<f64> {
        self.k_exact
    }

    fn check_grid(&self, f: &GridFunction) -> Result<()> {
        let x = f.nodes();
        if x[0] < self.a || x[x.len() - 1] > self.b {
            return Err(Error::InvalidArgument(format!(
                "grid [{}, {}] leaves the interval ({}, {})",
                x[0],
                x[x.len() - 1],
                self.a,
                self.b
            )));
        }
        Ok(())
    }

    /// `K(x_i)` on the nodes of `grid_of`, from cumulative integrals of
    /// `|phi|^2 w` and `|psi|^2 w`.
    pub fn k_profile(&self, grid_of: &GridFunction) -> Result<Vec<f64>> {
        self.check_grid(grid_of)?;
        let left = cumulative_integral(&grid_of.map(|x, _| Complex64::new(self.phi(x).powi(2) * self.w(x), 0.0)))?;
        let right =
            reverse_cumulative_integral(&grid_of.map(|x, _| Complex64::new(self.psi(x).powi(2) * self.w(x), 0.0)))?;
        Ok(left
            .scalar()?
            .iter()
            .zip(right.scalar()?)
            .map(|(l, r)| (l.re * r.re).max(0.0).sqrt())
            .collect())
    }

    /// `sup K(x)` over the sampled nodes.
    pub fn k_sup(&self, grid_of: &GridFunction) -> Result<f64> {
        Ok(self.k_profile(grid_of)?.into_iter().fold(0.0, f64::max))
    }
}

/// `A f` or `B f` on the nodes of `f`.
pub fn weighted_pair_apply(spec: &WeightedPairSpec, side: PairSide, f: &GridFunction) -> Result<GridFunction> {
    spec.check_grid(f)?;
    match side {
        PairSide::A => {
            let inner = reverse_cumulative_integral(&f.map(|t, v| v * (spec.psi(t) * spec.w(t))))?;
            Ok(inner.map(|x, v| v * spec.phi(x)))
        }
        PairSide::B => {
            let inner = cumulative_integral(&f.map(|t, v| v * (spec.phi(t) * spec.w(t))))?;
            Ok(inner.map(|x, v| v * spec.psi(x)))
        }
    }
}
