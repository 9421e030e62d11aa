//! Operator norms by power iteration on `M* M`.
//!
//! An operator is discretized on a grid as a real matrix `M` acting on
//! nodal values and applied matrix-free. The discrete inner product is
//! `<u, v> = sum_i w_i u_i v_i` with trapezoid weights `w`, so the adjoint
//! is `W^{-1} M^T W` rather than the plain transpose.
//!
//! On `(0, inf)` the window `[x_min, x_max]` truncates a continuous
//! spectrum, and the largest discrete singular value falls short of the
//! norm by roughly `c / L^2` where `L = ln(x_max / x_min)`. [`extrapolated_norm`]
//! removes that term by repeating the estimate on the centred half window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constants::{binomial_f64, factorial_f64};
use crate::error::{Error, Result};
use crate::grid::{panel_rule, Grid, LogGrid};
use crate::operators::weighted::{PairSide, WeightedPairSpec};

/// A real linear map on nodal values with its plain matrix transpose.
pub trait DiscreteOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Vec<f64>;
    fn apply_transpose(&self, v: &[f64]) -> Vec<f64>;
}

/// `C v`, with `(C v)_i ~ int_{x_0}^{x_i} v dx` by the quintic panel rule.
fn cumulative(v: &[f64], grid: &Grid) -> Vec<f64> {
    let n = v.len();
    let h = grid.step();
    let jv: Vec<f64> = (0..n).map(|i| v[i] * grid.jacobian(i)).collect();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for p in 0..n - 1 {
        acc += h * panel_rule(p, n).iter().map(|&(k, w)| jv[k] * w).sum::<f64>();
        out[p + 1] = acc;
    }
    out
}

/// `C^T y`: `(C^T y)_k = h J_k sum_p c_{p,k} sum_{i > p} y_i`.
fn cumulative_transpose(y: &[f64], grid: &Grid) -> Vec<f64> {
    let n = y.len();
    let h = grid.step();
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + y[i];
    }
    let mut out = vec![0.0; n];
    for p in 0..n - 1 {
        for (k, w) in panel_rule(p, n) {
            out[k] += w * suffix[p + 1];
        }
    }
    (0..n).map(|k| out[k] * h * grid.jacobian(k)).collect()
}

/// `R v`, with `(R v)_i ~ int_{x_i}^{x_max} v dx`.
fn reverse_cumulative(v: &[f64], grid: &Grid) -> Vec<f64> {
    let n = v.len();
    let h = grid.step();
    let jv: Vec<f64> = (0..n).map(|i| v[i] * grid.jacobian(i)).collect();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for p in (0..n - 1).rev() {
        acc += h * panel_rule(p, n).iter().map(|&(k, w)| jv[k] * w).sum::<f64>();
        out[p] = acc;
    }
    out
}

/// `R^T y`: `(R^T y)_k = h J_k sum_p c_{p,k} sum_{i <= p} y_i`.
fn reverse_cumulative_transpose(y: &[f64], grid: &Grid) -> Vec<f64> {
    let n = y.len();
    let h = grid.step();
    let mut prefix = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += y[i];
        prefix[i] = acc;
    }
    let mut out = vec![0.0; n];
    for (p, &s) in prefix.iter().enumerate().take(n - 1) {
        for (k, w) in panel_rule(p, n) {
            out[k] += w * s;
        }
    }
    (0..n).map(|k| out[k] * h * grid.jacobian(k)).collect()
}

/// `T_n` on a grid, in the kernel form used by
/// [`apply_cesaro`](crate::operators::apply_cesaro) but without the model of
/// `(0, x_min)`, so that it is exactly linear.
#[derive(Debug, Clone)]
pub struct DiscreteCesaro {
    n: usize,
    grid: Grid,
    coeffs: Vec<f64>,
}

impl DiscreteCesaro {
    pub fn new(n: usize, grid: impl Into<Grid>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidIndex("n must be at least 1".into()));
        }
        let norm = factorial_f64(n - 1);
        let coeffs = (0..n)
            .map(|j| binomial_f64(n - 1, j) / norm * if j % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        Ok(Self { n, grid: grid.into(), coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

impl DiscreteOperator for DiscreteCesaro {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = self.grid.nodes();
        let mut out = vec![0.0; v.len()];
        for j in 0..self.n {
            let tv: Vec<f64> = v.iter().zip(x).map(|(a, t)| a * t.powi(j as i32)).collect();
            let m = cumulative(&tv, &self.grid);
            for i in 0..out.len() {
                out[i] += self.coeffs[j] * m[i] / x[i].powi(j as i32 + 1);
            }
        }
        out
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let x = self.grid.nodes();
        let mut out = vec![0.0; y.len()];
        for j in 0..self.n {
            let sy: Vec<f64> = y.iter().zip(x).map(|(a, t)| self.coeffs[j] * a / t.powi(j as i32 + 1)).collect();
            let m = cumulative_transpose(&sy, &self.grid);
            for k in 0..out.len() {
                out[k] += m[k] * x[k].powi(j as i32);
            }
        }
        out
    }
}

/// `A` or `B` of a weighted pair on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteWeightedPair {
    side: PairSide,
    grid: Grid,
    phi: Vec<f64>,
    psi: Vec<f64>,
    w: Vec<f64>,
}

impl DiscreteWeightedPair {
    pub fn new(spec: &WeightedPairSpec, side: PairSide, grid: impl Into<Grid>) -> Result<Self> {
        let grid = grid.into();
        let x = grid.nodes();
        let (a, b) = spec.interval();
        if x[0] < a || x[x.len() - 1] > b {
            return Err(Error::InvalidArgument("grid leaves the interval of the pair".into()));
        }
        Ok(Self {
            side,
            phi: x.iter().map(|&t| spec.phi(t)).collect(),
            psi: x.iter().map(|&t| spec.psi(t)).collect(),
            w: x.iter().map(|&t| spec.w(t)).collect(),
            grid,
        })
    }

    /// Weights of the `L^2(w dx)` inner product.
    pub fn inner_product_weights(&self) -> Vec<f64> {
        self.grid.trapezoid_weights().iter().zip(&self.w).map(|(a, b)| a * b).collect()
    }
}

impl DiscreteOperator for DiscreteWeightedPair {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        match self.side {
            PairSide::A => {
                let q: Vec<f64> = (0..n).map(|i| v[i] * self.psi[i] * self.w[i]).collect();
                let r = reverse_cumulative(&q, &self.grid);
                (0..n).map(|i| self.phi[i] * r[i]).collect()
            }
            PairSide::B => {
                let q: Vec<f64> = (0..n).map(|i| v[i] * self.phi[i] * self.w[i]).collect();
                let r = cumulative(&q, &self.grid);
                (0..n).map(|i| self.psi[i] * r[i]).collect()
            }
        }
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        match self.side {
            PairSide::A => {
                let q: Vec<f64> = (0..n).map(|i| y[i] * self.phi[i]).collect();
                let r = reverse_cumulative_transpose(&q, &self.grid);
                (0..n).map(|i| r[i] * self.psi[i] * self.w[i]).collect()
            }
            PairSide::B => {
                let q: Vec<f64> = (0..n).map(|i| y[i] * self.psi[i]).collect();
                let r = cumulative_transpose(&q, &self.grid);
                (0..n).map(|i| r[i] * self.phi[i] * self.w[i]).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
}

fn dot_w(u: &[f64], v: &[f64], w: &[f64]) -> f64 {
    u.iter().zip(v).zip(w).map(|((a, b), c)| a * b * c).sum()
}

/// Largest singular value of `op` in the inner product with weights
/// `weights`, by power iteration on `W^{-1} M^T W M` from a seeded positive
/// start vector. Stops when the estimate changes by less than `tol`
/// relative.
pub fn estimate_operator_norm(
    op: &dyn DiscreteOperator,
    weights: &[f64],
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<NormEstimate> {
    let n = op.dim();
    if weights.len() != n {
        return Err(Error::MixedLengths { expected: n, found: weights.len() });
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidArgument("inner-product weights must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let nx = dot_w(&x, &x, weights).sqrt();
    x.iter_mut().for_each(|v| *v /= nx);
    let mut last = 0.0;
    for it in 1..=max_iter {
        let y = op.apply(&x);
        let wy: Vec<f64> = y.iter().zip(weights).map(|(a, w)| a * w).collect();
        let mut z = op.apply_transpose(&wy);
        z.iter_mut().zip(weights).for_each(|(a, w)| *a /= w);
        // <x, M* M x> = ||M x||^2 with ||x|| = 1
        let estimate = dot_w(&y, &y, weights).sqrt();
        let nz = dot_w(&z, &z, weights).sqrt();
        if !(nz > 0.0) {
            return Ok(NormEstimate { value: 0.0, iterations: it });
        }
        if it > 1 && (estimate - last).abs() <= tol * estimate {
            return Ok(NormEstimate { value: estimate, iterations: it });
        }
        last = estimate;
        x = z.into_iter().map(|v| v / nz).collect();
    }
    Err(Error::Unconverged { iterations: max_iter, last_estimate: last })
}

/// Raw estimate on a log window, estimate on its centred half, and the
/// combination that cancels the `1/L^2` truncation term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowedNorm {
    pub raw: f64,
    pub half_window: f64,
    pub extrapolated: f64,
    pub iterations: usize,
}

/// Norm estimate with window extrapolation. `build` discretizes the
/// operator on a given grid and returns it with its inner-product weights.
pub fn extrapolated_norm<O, F>(grid: &LogGrid, max_iter: usize, tol: f64, seed: u64, build: F) -> Result<WindowedNorm>
where
    O: DiscreteOperator,
    F: Fn(&LogGrid) -> Result<(O, Vec<f64>)> + Sync,
{
    let n = grid.len();
    let half = grid.sub_grid(n / 4, n / 2)?;
    let (full, half_est) = rayon::join(
        || -> Result<NormEstimate> {
            let (op, w) = build(grid)?;
            estimate_operator_norm(&op, &w, max_iter, tol, seed)
        },
        || -> Result<NormEstimate> {
            let (op, w) = build(&half)?;
            estimate_operator_norm(&op, &w, max_iter, tol, seed)
        },
    );
    let (full, half_est) = (full?, half_est?);
    let l1 = grid.log_length().powi(2);
    let l2 = half.log_length().powi(2);
    Ok(WindowedNorm {
        raw: full.value,
        half_window: half_est.value,
        extrapolated: (l1 * full.value - l2 * half_est.value) / (l1 - l2),
        iterations: full.iterations.max(half_est.iterations),
    })
}

/// `||T_n||` on a log grid with window extrapolation.
pub fn cesaro_norm_estimate(n: usize, grid: &LogGrid, max_iter: usize, tol: f64, seed: u64) -> Result<WindowedNorm> {
    extrapolated_norm(grid, max_iter, tol, seed, |g| {
        let op = DiscreteCesaro::new(n, g.clone())?;
        let w = op.grid().trapezoid_weights();
        Ok((op, w))
    })
}

/// `||A||` (or `||B||`) of a weighted pair on a log grid with window
/// extrapolation.
pub fn pair_norm_estimate(
    spec: &WeightedPairSpec,
    side: PairSide,
    grid: &LogGrid,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<WindowedNorm> {
    extrapolated_norm(grid, max_iter, tol, seed, |g| {
        let op = DiscreteWeightedPair::new(spec, side, g.clone())?;
        let w = op.inner_product_weights();
        Ok((op, w))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LinearGrid;

    fn check_transpose(op: &dyn DiscreteOperator) {
        let n = op.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs: f64 = op.apply(&u).iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs: f64 = u.iter().zip(op.apply_transpose(&v)).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn transposes_are_exact() {
        let log = LogGrid::new(1e-2, 1e2, 64).unwrap();
        for n in 1..=3 {
            check_transpose(&DiscreteCesaro::new(n, log.clone()).unwrap());
        }
        let lin = LinearGrid::new(0.5, 3.0, 40).unwrap();
        check_transpose(&DiscreteCesaro::new(2, lin).unwrap());
        for side in [PairSide::A, PairSide::B] {
            check_transpose(&DiscreteWeightedPair::new(&WeightedPairSpec::rellich_step(), side, log.clone()).unwrap());
        }
    }

    struct Diagonal(Vec<f64>);

    impl DiscreteOperator for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, v: &[f64]) -> Vec<f64> {
            v.iter().zip(&self.0).map(|(a, b)| a * b).collect()
        }
        fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
            self.apply(v)
        }
    }

    #[test]
    fn power_iteration_on_diagonal() {
        let op = Diagonal(vec![1.0, -3.0, 2.0, 0.5]);
        let est = estimate_operator_norm(&op, &[1.0, 2.0, 1.0, 1.0], 1000, 1e-12, 1).unwrap();
        assert!((est.value - 3.0).abs() < 1e-9);
        let err = estimate_operator_norm(&Diagonal(vec![1.0, 1.0 - 1e-9]), &[1.0, 1.0], 1, 1e-15, 1);
        assert!(matches!(err, Err(Error::Unconverged { .. })) || err.is_ok());
        let zero = estimate_operator_norm(&Diagonal(vec![0.0; 3]), &[1.0; 3], 10, 1e-6, 1).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn cesaro_norm_small_grid() {
        // a coarse run: well below the limit, but the extrapolation moves toward it
        let grid = LogGrid::new(1e-4, 1e4, 512).unwrap();
        let est = cesaro_norm_estimate(1, &grid, 10000, 1e-8, crate::DEFAULT_SEED).unwrap();
        assert!(est.raw < 2.0 && est.half_window < est.raw);
        assert!((est.extrapolated - 2.0).abs() < (est.raw - 2.0).abs());
    }
}
