//! Sampled functions on `(0, inf)` and on finite intervals.
//!
//! A [`LogGrid`] places nodes uniformly in `u = ln x`, so integrals over
//! `(0, inf)` become integrals over `u` with Jacobian `x`. A [`LinearGrid`]
//! is uniform in `x`. Both expose the same "uniform step in a natural
//! coordinate `s` plus Jacobian `dx/ds`" view, which is what every routine
//! in this module works with.
//!
//! Quadrature rules:
//!
//! * [`integrate`] is the composite trapezoid rule in `s`. For integrands
//!   that decay at both ends of a log grid it converges spectrally. The
//!   pieces outside a log window are modelled by power laws `c x^gamma`
//!   fitted through the outermost samples.
//! * [`cumulative_integral`] integrates panel by panel with the quintic
//!   through the six surrounding nodes (sixth order), starting from the
//!   same power-law model of `(0, x_min)`.
//! * [`integrate_half_line`] is [`integrate`] but refuses end behaviour that
//!   is not integrable.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_LOG_WINDOW: (f64, f64) = (1e-6, 1e6);
pub const DEFAULT_COUNT: usize = 4096;
pub const MIN_COUNT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid {
    x_min: f64,
    x_max: f64,
    nodes: Arc<[f64]>,
    step: f64,
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, count: usize) -> Result<Self> {
        if !(x_min > 0.0 && x_min.is_finite()) {
            return Err(Error::InvalidArgument(format!("x_min = {x_min} must be positive")));
        }
        if !(x_max > x_min && x_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("x_max = {x_max} must exceed x_min = {x_min}")));
        }
        if count < MIN_COUNT {
            return Err(Error::GridTooSmall(format!("{count} nodes, need at least {MIN_COUNT}")));
        }
        let (u0, u1) = (x_min.ln(), x_max.ln());
        let step = (u1 - u0) / (count - 1) as f64;
        let nodes: Arc<[f64]> = (0..count)
            .map(|i| {
                if i == count - 1 {
                    x_max
                } else if i == 0 {
                    x_min
                } else {
                    (u0 + step * i as f64).exp()
                }
            })
            .collect();
        Ok(Self { x_min, x_max, nodes, step })
    }

    /// `(1e-6, 1e6)` with 4096 nodes.
    pub fn default_half_line() -> Self {
        Self::new(DEFAULT_LOG_WINDOW.0, DEFAULT_LOG_WINDOW.1, DEFAULT_COUNT).expect("valid defaults")
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Spacing in `u = ln x`.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn log_min(&self) -> f64 {
        self.x_min.ln()
    }

    /// Length of the window in `u`.
    pub fn log_length(&self) -> f64 {
        self.step * (self.len() - 1) as f64
    }

    /// The `count` consecutive nodes starting at `start`, as a grid with the
    /// same spacing.
    pub fn sub_grid(&self, start: usize, count: usize) -> Result<Self> {
        if start + count > self.len() {
            return Err(Error::InvalidArgument(format!(
                "sub-grid [{start}, {}) exceeds {} nodes",
                start + count,
                self.len()
            )));
        }
        if count < MIN_COUNT {
            return Err(Error::GridTooSmall(format!("{count} nodes, need at least {MIN_COUNT}")));
        }
        let nodes: Arc<[f64]> = self.nodes[start..start + count].into();
        Ok(Self {
            x_min: nodes[0],
            x_max: nodes[count - 1],
            nodes,
            step: self.step,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearGrid {
    a: f64,
    b: f64,
    nodes: Arc<[f64]>,
    step: f64,
}

impl LinearGrid {
    pub fn new(a: f64, b: f64, count: usize) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("a = {a} must be non-negative")));
        }
        if !(b > a && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("b = {b} must exceed a = {a}")));
        }
        if count < MIN_COUNT {
            return Err(Error::GridTooSmall(format!("{count} nodes, need at least {MIN_COUNT}")));
        }
        let step = (b - a) / (count - 1) as f64;
        let nodes: Arc<[f64]> = (0..count)
            .map(|i| if i == count - 1 { b } else { a + step * i as f64 })
            .collect();
        Ok(Self { a, b, nodes, step })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Log(LogGrid),
    Linear(LinearGrid),
}

impl From<LogGrid> for Grid {
    fn from(g: LogGrid) -> Self {
        Grid::Log(g)
    }
}

impl From<LinearGrid> for Grid {
    fn from(g: LinearGrid) -> Self {
        Grid::Linear(g)
    }
}

impl Grid {
    pub fn nodes(&self) -> &[f64] {
        match self {
            Grid::Log(g) => g.nodes(),
            Grid::Linear(g) => g.nodes(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes().is_empty()
    }

    /// Uniform step in the natural coordinate (`ln x` or `x`).
    pub fn step(&self) -> f64 {
        match self {
            Grid::Log(g) => g.step(),
            Grid::Linear(g) => g.step(),
        }
    }

    /// `dx/ds` at node `i`.
    #[inline]
    pub fn jacobian(&self, i: usize) -> f64 {
        match self {
            Grid::Log(g) => g.nodes[i],
            Grid::Linear(_) => 1.0,
        }
    }

    pub fn as_log(&self) -> Option<&LogGrid> {
        match self {
            Grid::Log(g) => Some(g),
            Grid::Linear(_) => None,
        }
    }

    /// Trapezoid weights for `dx`: `sum_i w_i g(x_i) ~ int g dx`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.len();
        let h = self.step();
        (0..n)
            .map(|i| {
                let end = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                end * h * self.jacobian(i)
            })
            .collect()
    }

    pub fn same_nodes(&self, other: &Grid) -> bool {
        self.len() == other.len()
            && self
                .nodes()
                .iter()
                .zip(other.nodes())
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Values {
    Scalar(Vec<Complex64>),
    /// Row-major: node `i`, component `k` at `data[i * dim + k]`.
    Vector { dim: usize, data: Vec<Complex64> },
}

/// Samples of a scalar or `C^m`-valued function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Values,
}

impl GridFunction {
    pub fn new(grid: impl Into<Grid>, values: Vec<Complex64>) -> Result<Self> {
        let grid = grid.into();
        if values.len() != grid.len() {
            return Err(Error::MixedLengths { expected: grid.len(), found: values.len() });
        }
        Ok(Self { grid, values: Values::Scalar(values) })
    }

    pub fn new_vector(grid: impl Into<Grid>, dim: usize, data: Vec<Complex64>) -> Result<Self> {
        let grid = grid.into();
        if dim == 0 {
            return Err(Error::InvalidArgument("vector dimension must be at least 1".into()));
        }
        if data.len() != grid.len() * dim {
            return Err(Error::MixedLengths { expected: grid.len() * dim, found: data.len() });
        }
        Ok(Self { grid, values: Values::Vector { dim, data } })
    }

    /// Stacks scalar functions on a common grid into a vector-valued one.
    pub fn stack(components: &[GridFunction]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("no components".into()))?;
        let dim = components.len();
        let n = first.len();
        let mut data = vec![Complex64::new(0.0, 0.0); n * dim];
        for (k, c) in components.iter().enumerate() {
            if !c.grid.same_nodes(&first.grid) {
                return Err(Error::InvalidArgument("components live on different grids".into()));
            }
            let v = c.scalar()?;
            for i in 0..n {
                data[i * dim + k] = v[i];
            }
        }
        Self::new_vector(first.grid.clone(), dim, data)
    }

    pub fn from_fn(grid: impl Into<Grid>, f: impl Fn(f64) -> Complex64) -> Self {
        let grid = grid.into();
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, values: Values::Scalar(values) }
    }

    pub fn from_real_fn(grid: impl Into<Grid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: impl Into<Grid>) -> Self {
        Self::from_fn(grid, |_| Complex64::new(0.0, 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    /// Vector length; `1` for scalar functions.
    pub fn dim(&self) -> usize {
        match &self.values {
            Values::Scalar(_) => 1,
            Values::Vector { dim, .. } => *dim,
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.values, Values::Vector { .. })
    }

    pub fn scalar(&self) -> Result<&[Complex64]> {
        match &self.values {
            Values::Scalar(v) => Ok(v),
            Values::Vector { .. } => Err(Error::InvalidArgument(
                "operation needs scalar values, got a vector-valued function".into(),
            )),
        }
    }

    /// Component `k` as a scalar function (component `0` of a scalar function
    /// is itself).
    pub fn component(&self, k: usize) -> Result<GridFunction> {
        match &self.values {
            Values::Scalar(v) if k == 0 => Ok(Self { grid: self.grid.clone(), values: Values::Scalar(v.clone()) }),
            Values::Vector { dim, data } if k < *dim => {
                let v = data.iter().skip(k).step_by(*dim).copied().collect();
                Ok(Self { grid: self.grid.clone(), values: Values::Scalar(v) })
            }
            _ => Err(Error::InvalidIndex(format!("component {k} out of range"))),
        }
    }

    pub fn components(&self) -> Vec<GridFunction> {
        (0..self.dim()).map(|k| self.component(k).expect("in range")).collect()
    }

    /// Pointwise squared Euclidean norm of the values.
    pub fn pointwise_norm_sq(&self) -> Vec<f64> {
        match &self.values {
            Values::Scalar(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            Values::Vector { dim, data } => data.chunks(*dim).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect(),
        }
    }

    /// New scalar function on the same grid.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let nodes = self.grid.nodes();
        let values = match &self.values {
            Values::Scalar(v) => Values::Scalar(v.iter().zip(nodes).map(|(&z, &x)| f(x, z)).collect()),
            Values::Vector { dim, data } => Values::Vector {
                dim: *dim,
                data: data.iter().enumerate().map(|(i, &z)| f(nodes[i / dim], z)).collect(),
            },
        };
        Self { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, z| c * z)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &GridFunction) -> Result<Self> {
        if !self.grid.same_nodes(&other.grid) || self.dim() != other.dim() {
            return Err(Error::InvalidArgument("functions live on different grids".into()));
        }
        let values = match (&self.values, &other.values) {
            (Values::Scalar(a), Values::Scalar(b)) => {
                Values::Scalar(a.iter().zip(b).map(|(x, y)| x + c * y).collect())
            }
            (Values::Vector { dim, data: a }, Values::Vector { data: b, .. }) => Values::Vector {
                dim: *dim,
                data: a.iter().zip(b).map(|(x, y)| x + c * y).collect(),
            },
            _ => return Err(Error::InvalidArgument("cannot mix scalar and vector values".into())),
        };
        Ok(Self { grid: self.grid.clone(), values })
    }

    fn raw(&self) -> &[Complex64] {
        match &self.values {
            Values::Scalar(v) => v,
            Values::Vector { data, .. } => data,
        }
    }

    fn check_finite(&self) -> Result<()> {
        match self.raw().iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            None => Ok(()),
            Some(i) => Err(Error::InvalidData(format!("non-finite sample at index {i}"))),
        }
    }

    /// L2 norm over the grid (trapezoid rule, no tail models).
    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.trapezoid_weights();
        self.pointwise_norm_sq().iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().sqrt()
    }

    /// Writes `x,re,im` (or `x,re_1,im_1,...,re_m,im_m`) rows with 17
    /// significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let dim = self.dim();
        if self.is_vector() {
            let cols: Vec<String> = (1..=dim).map(|k| format!("re_{k},im_{k}")).collect();
            writeln!(out, "x,{}", cols.join(","))?;
        } else {
            writeln!(out, "x,re,im")?;
        }
        let data = self.raw();
        for (i, x) in self.grid.nodes().iter().enumerate() {
            write!(out, "{}", fmt17(*x))?;
            for z in &data[i * dim..(i + 1) * dim] {
                write!(out, ",{},{}", fmt17(z.re), fmt17(z.im))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Reads the format written by [`GridFunction::write_csv`]. The grid is
    /// recognised as log-uniform or uniform from the `x` column.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidData("empty CSV".into()))?
            .map_err(|e| Error::InvalidData(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
        let vector = cols.len() != 3 || cols.get(1) != Some(&"re");
        if cols.first() != Some(&"x") || cols.len() < 3 || cols.len().is_multiple_of(2) {
            return Err(Error::InvalidData(format!("unexpected CSV header `{header}`")));
        }
        let dim = (cols.len() - 1) / 2;
        let mut xs = Vec::new();
        let mut data = Vec::new();
        for (ln, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::InvalidData(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidData(format!("line {}: {e}", ln + 2)))?;
            if fields.len() != cols.len() {
                return Err(Error::MixedLengths { expected: cols.len(), found: fields.len() });
            }
            xs.push(fields[0]);
            for k in 0..dim {
                data.push(Complex64::new(fields[1 + 2 * k], fields[2 + 2 * k]));
            }
        }
        let grid = infer_grid(&xs)?;
        if vector {
            Self::new_vector(grid, dim, data)
        } else {
            Self::new(grid, data)
        }
    }
}

fn infer_grid(xs: &[f64]) -> Result<Grid> {
    let n = xs.len();
    if n < MIN_COUNT {
        return Err(Error::GridTooSmall(format!("{n} rows, need at least {MIN_COUNT}")));
    }
    let (lo, hi) = (xs[0], xs[n - 1]);
    let close = |g: &[f64]| g.iter().zip(xs).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300));
    if lo > 0.0 {
        let g = LogGrid::new(lo, hi, n)?;
        if close(g.nodes()) {
            return Ok(g.into());
        }
    }
    let g = LinearGrid::new(lo, hi, n)?;
    if close(g.nodes()) {
        return Ok(g.into());
    }
    Err(Error::InvalidData("x column is neither log-uniform nor uniform".into()))
}

/// Fixed 17-significant-digit rendering used by every text artifact.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
}

fn integrand(f: &GridFunction, p: f64) -> Result<Vec<Complex64>> {
    f.check_finite()?;
    let v = f.scalar()?;
    let grid = &f.grid;
    Ok(grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = if p == 0.0 { 1.0 } else { x.powf(p) };
            v[i] * w
        })
        .collect())
}

fn trapezoid(q: &[Complex64], grid: &Grid, stride: usize, last: usize) -> Complex64 {
    let h = grid.step() * stride as f64;
    let idx: Vec<usize> = (0..=last).step_by(stride).collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for (k, &i) in idx.iter().enumerate() {
        let end = if k == 0 || k == idx.len() - 1 { 0.5 } else { 1.0 };
        sum += q[i] * (end * grid.jacobian(i));
    }
    sum * h
}

fn trapezoid_with_estimate(q: &[Complex64], grid: &Grid) -> QuadratureResult {
    let n = q.len();
    let value = trapezoid(q, grid, 1, n - 1);
    let even_last = 2 * ((n - 1) / 2);
    let fine = trapezoid(q, grid, 1, even_last);
    let coarse = trapezoid(q, grid, 2, even_last);
    let richardson = (fine - coarse).norm() / 3.0;
    // magnitude of the integrand at the window ends, as a truncation indicator
    let h = grid.step();
    let edge = h * (q[0].norm() * grid.jacobian(0) + q[n - 1].norm() * grid.jacobian(n - 1));
    QuadratureResult { value, error_estimate: richardson + edge }
}

/// `int f(x) x^p dx`, composite trapezoid in the natural coordinate.
///
/// On a log grid the pieces `(0, x_min)` and `(x_max, inf)` are added from
/// power laws fitted through the two outermost samples at each end. Each
/// piece is only added when the fit is integrable there, otherwise
/// the window edge shows up in `error_estimate`. Linear grids integrate over
/// `[a, b]` exactly as sampled.
pub fn integrate(f: &GridFunction, weight_power: f64) -> Result<QuadratureResult> {
    let q = integrand(f, weight_power)?;
    let mut res = trapezoid_with_estimate(&q, &f.grid);
    if let Grid::Log(g) = &f.grid {
        let x = g.nodes();
        let n = x.len();
        let stub = match local_exponent(x[0], x[1], q[0], q[1]) {
            Some(gamma) if gamma.re > -1.0 + SINGULAR_TOL => q[0] * x[0] / (gamma + 1.0),
            _ => Complex64::new(0.0, 0.0),
        };
        let tail = match local_exponent(x[n - 2], x[n - 1], q[n - 2], q[n - 1]) {
            Some(gamma) if gamma.re < -1.0 => -q[n - 1] * x[n - 1] / (gamma + 1.0),
            _ => Complex64::new(0.0, 0.0),
        };
        let h = g.step();
        let mut edge = 0.0;
        if stub.norm() > 0.0 {
            edge -= h * q[0].norm() * x[0];
        }
        if tail.norm() > 0.0 {
            edge -= h * q[n - 1].norm() * x[n - 1];
        }
        res.value += stub + tail;
        res.error_estimate = (res.error_estimate + edge).max(0.0) + 1e-3 * (stub.norm() + tail.norm());
    }
    Ok(res)
}

/// `int ||f(x)||^2 x^p dx`; vector values use the pointwise squared
/// Euclidean norm. Same tail handling as [`integrate`].
pub fn norm_sq(f: &GridFunction, weight_power: f64) -> Result<f64> {
    f.check_finite()?;
    let sq = f.pointwise_norm_sq().into_iter().map(|s| Complex64::new(s, 0.0)).collect();
    Ok(integrate(&GridFunction::new(f.grid.clone(), sq)?, weight_power)?.value.re)
}

/// `int_0^inf f(x) x^p dx` on a log grid, like [`integrate`] but strict:
/// an end behaviour that is not integrable fails with
/// [`Error::Singularity`] or [`Error::DivergentTail`].
pub fn integrate_half_line(f: &GridFunction, weight_power: f64) -> Result<QuadratureResult> {
    let grid = f
        .grid
        .as_log()
        .ok_or_else(|| Error::InvalidArgument("half-line integration needs a log grid".into()))?;
    let q = integrand(f, weight_power)?;
    let x = grid.nodes();
    let n = x.len();
    let scale = trapezoid(&q, &f.grid, 1, n - 1).norm();
    left_stub(x[0], x[1], q[0], q[1])?;
    right_tail(x[n - 2], x[n - 1], q[n - 2], q[n - 1], scale)?;
    integrate(f, weight_power)
}

/// `int_0^inf ||f(x)||^2 x^p dx`, strict; see [`integrate_half_line`].
pub fn norm_sq_half_line(f: &GridFunction, weight_power: f64) -> Result<f64> {
    f.check_finite()?;
    let sq = f.pointwise_norm_sq().into_iter().map(|s| Complex64::new(s, 0.0)).collect();
    Ok(integrate_half_line(&GridFunction::new(f.grid.clone(), sq)?, weight_power)?.value.re)
}

/// Fitted exponents this close to `-1` count as non-integrable.
const SINGULAR_TOL: f64 = 1e-9;

/// Fits `q(x) ~ c x^gamma` through two samples and returns `gamma`.
fn local_exponent(x0: f64, x1: f64, q0: Complex64, q1: Complex64) -> Option<Complex64> {
    if q0.norm() == 0.0 || q1.norm() == 0.0 {
        return None;
    }
    // logs taken separately: q1 / q0 overflows for subnormal samples
    let dlog = Complex64::new(q1.norm().ln() - q0.norm().ln(), q1.arg() - q0.arg());
    Some(dlog / (x1 / x0).ln())
}

/// `int_0^{x0} c x^gamma dx` for the power law through `(x0, q0), (x1, q1)`.
pub(crate) fn left_stub(x0: f64, x1: f64, q0: Complex64, q1: Complex64) -> Result<Complex64> {
    match local_exponent(x0, x1, q0, q1) {
        None => Ok(Complex64::new(0.0, 0.0)),
        Some(gamma) => {
            if gamma.re <= -1.0 + SINGULAR_TOL {
                return Err(Error::Singularity { exponent: gamma.re });
            }
            Ok(q0 * x0 / (gamma + 1.0))
        }
    }
}

/// `int_{xn}^inf c x^gamma dx` for the power law through the last two samples.
pub(crate) fn right_tail(xm: f64, xn: f64, qm: Complex64, qn: Complex64, scale: f64) -> Result<Complex64> {
    match local_exponent(xm, xn, qm, qn) {
        None => Ok(Complex64::new(0.0, 0.0)),
        Some(gamma) => {
            if gamma.re < -1.0 {
                Ok(-qn * xn / (gamma + 1.0))
            } else if (qn * xn).norm() <= 1e-14 * scale {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                Err(Error::DivergentTail { exponent: gamma.re })
            }
        }
    }
}

/// Weights of the quintic panel rule: `int_{s_i}^{s_{i+1}} g ds ~ h * sum w_k g(s_k)`.
///
/// Interior panels use the centred six-point stencil; the two panels at
/// each end use one-sided stencils on the outermost six nodes.
#[inline]
pub(crate) fn panel_rule(i: usize, n: usize) -> [(usize, f64); 6] {
    const C: f64 = 1.0 / 1440.0;
    const FIRST: [f64; 6] = [475.0, 1427.0, -798.0, 482.0, -173.0, 27.0];
    const SECOND: [f64; 6] = [-27.0, 637.0, 1022.0, -258.0, 77.0, -11.0];
    const CENTRE: [f64; 6] = [11.0, -93.0, 802.0, 802.0, -93.0, 11.0];
    let (start, w, reversed) = match i {
        0 => (0, FIRST, false),
        1 => (0, SECOND, false),
        _ if i == n - 2 => (n - 6, FIRST, true),
        _ if i == n - 3 => (n - 6, SECOND, true),
        _ => (i - 2, CENTRE, false),
    };
    std::array::from_fn(|k| {
        let wk = if reversed { w[5 - k] } else { w[k] };
        (start + k, wk * C)
    })
}

/// Running integral `F_i = int_{s_0}^{s_i} q(s) J(s) ds` with `F_0 = start`.
pub(crate) fn running_integral(q: &[Complex64], grid: &Grid, start: Complex64) -> Vec<Complex64> {
    let n = q.len();
    let h = grid.step();
    let weighted: Vec<Complex64> = q.iter().enumerate().map(|(i, &v)| v * grid.jacobian(i)).collect();
    let mut out = Vec::with_capacity(n);
    let mut acc = start;
    out.push(acc);
    for i in 0..n - 1 {
        let panel: Complex64 = panel_rule(i, n).iter().map(|&(k, w)| weighted[k] * w).sum();
        acc += panel * h;
        out.push(acc);
    }
    out
}

/// Reverse running integral `G_i = int_{s_i}^{s_end} q J ds + end`.
pub(crate) fn reverse_running_integral(q: &[Complex64], grid: &Grid, end: Complex64) -> Vec<Complex64> {
    let n = q.len();
    let h = grid.step();
    let weighted: Vec<Complex64> = q.iter().enumerate().map(|(i, &v)| v * grid.jacobian(i)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = end;
    out[n - 1] = acc;
    for i in (0..n - 1).rev() {
        let panel: Complex64 = panel_rule(i, n).iter().map(|&(k, w)| weighted[k] * w).sum();
        acc += panel * h;
        out[i] = acc;
    }
    out
}

fn cumulative_scalar(v: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    let start = match grid {
        Grid::Log(g) => {
            let x = g.nodes();
            left_stub(x[0], x[1], v[0], v[1])?
        }
        Grid::Linear(_) => Complex64::new(0.0, 0.0),
    };
    Ok(running_integral(v, grid, start))
}

/// `F(x_i) = int_0^{x_i} f` on a log grid, or `int_a^{x_i} f` on a linear
/// grid. Vector values are integrated componentwise.
///
/// On a log grid the piece `(0, x_min)` is the exact integral of the power
/// law fitted through the first two samples; a fitted exponent `<= -1`
/// fails with [`Error::Singularity`].
pub fn cumulative_integral(f: &GridFunction) -> Result<GridFunction> {
    f.check_finite()?;
    match &f.values {
        Values::Scalar(v) => GridFunction::new(f.grid.clone(), cumulative_scalar(v, &f.grid)?),
        Values::Vector { .. } => {
            let comps = f
                .components()
                .iter()
                .map(cumulative_integral)
                .collect::<Result<Vec<_>>>()?;
            GridFunction::stack(&comps)
        }
    }
}

/// `int_{x_i}^{end} f`, with a power-law tail model beyond `x_max` on log
/// grids ([`Error::DivergentTail`] if that tail is not integrable).
pub fn reverse_cumulative_integral(f: &GridFunction) -> Result<GridFunction> {
    f.check_finite()?;
    let v = f.scalar()?;
    let n = v.len();
    let end = match &f.grid {
        Grid::Log(g) => {
            let x = g.nodes();
            let scale = v.iter().zip(x).map(|(z, x)| z.norm() * x).fold(0.0, f64::max);
            right_tail(x[n - 2], x[n - 1], v[n - 2], v[n - 1], scale)?
        }
        Grid::Linear(_) => Complex64::new(0.0, 0.0),
    };
    GridFunction::new(f.grid.clone(), reverse_running_integral(v, &f.grid, end))
}

fn first_derivative(v: &[Complex64], grid: &Grid) -> Vec<Complex64> {
    let n = v.len();
    let h = grid.step();
    (0..n)
        .map(|i| {
            let d = if i == 0 {
                (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * h)
            };
            d / grid.jacobian(i)
        })
        .collect()
}

/// Derivative of order `order >= 1` by repeated second-order finite
/// differences in the natural coordinate, mapped by the chain rule
/// (`d/dx = e^{-u} d/du` on log grids); one-sided at the ends.
///
/// Accuracy is `O(h^2)`. Acceptance-critical quantities use analytic
/// derivatives instead.
pub fn differentiate(f: &GridFunction, order: usize) -> Result<GridFunction> {
    if order == 0 {
        return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
    }
    if f.len() < 2 * order + 2 {
        return Err(Error::GridTooSmall(format!(
            "{} nodes cannot support a derivative of order {order}",
            f.len()
        )));
    }
    f.check_finite()?;
    match &f.values {
        Values::Scalar(v) => {
            let mut d = v.clone();
            for _ in 0..order {
                d = first_derivative(&d, &f.grid);
            }
            GridFunction::new(f.grid.clone(), d)
        }
        Values::Vector { .. } => {
            let comps = f
                .components()
                .iter()
                .map(|c| differentiate(c, order))
                .collect::<Result<Vec<_>>>()?;
            GridFunction::stack(&comps)
        }
    }
}
