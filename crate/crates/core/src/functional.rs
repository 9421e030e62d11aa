//! Inequality ratios, the optimality probes, and boundary diagnostics.
//!
//! For an admissible `f` (vanishing to order `n` at `0`) the ratio
//!
//! ```text
//! int_0^inf x^alpha |f^(n)|^2 dx  /  int_0^inf x^(alpha - 2n) |f|^2 dx
//! ```
//!
//! is bounded below by the Glazman constant, which for `alpha = 0` is the
//! Birman constant `c_n`. No `f` attains it. The probes `F_{n,sigma}`, the
//! `n`-fold antiderivatives of `x^sigma 1_(0,a)`, push the ratio down to
//! `c_n` as `sigma -> -1/2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{supports_order, AnalyticFunction, Decay, PowerExp};
use crate::constants::{birman_constant, factorial_f64, glazman_constant, probe_tail_coeffs};
use crate::error::{Error, Result};
use crate::grid::{integrate_half_line, GridFunction, LogGrid};

/// Default quadrature window for ratios of analytic functions.
pub const RATIO_WINDOW: (f64, f64) = (1e-8, 1e4);
pub const RATIO_COUNT: usize = 4096;
/// Default probe cutoff of the sharpness sweep.
pub const DEFAULT_CUTOFF: f64 = 10.0;
pub const SWEEP_EPSILONS: [f64; 6] = [0.5, 0.25, 0.1, 0.05, 0.01, 1e-3];

const TRIVIAL: f64 = 1e-300;

/// The probe `F_{n,sigma}` with cutoff `a`:
/// `x^(n+sigma) / prod_{j=1}^n (j + sigma)` on `[0, a]`, the polynomial
/// `sum_k b_k x^k` beyond. Its `n`-th derivative is `x^sigma 1_(0,a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSpec {
    pub n: usize,
    pub sigma: f64,
    pub a: f64,
    #[serde(skip)]
    tail: Vec<f64>,
}

impl ProbeSpec {
    pub fn new(n: usize, sigma: f64, a: f64) -> Result<Self> {
        let tail = probe_tail_coeffs(n, sigma, a)?;
        Ok(Self { n, sigma, a, tail })
    }

    pub fn tail_coeffs(&self) -> &[f64] {
        &self.tail
    }

    /// `prod_{j=1}^m (j + sigma)`.
    fn rising(&self, m: usize) -> f64 {
        (1..=m).map(|j| j as f64 + self.sigma).product()
    }
}

/// `F_{n,sigma}(x)`.
pub fn probe_eval(spec: &ProbeSpec, x: f64) -> Result<f64> {
    probe_derivative(spec, x, 0)
}

/// `F_{n,sigma}^(j)(x)` for `j <= n`.
pub fn probe_derivative(spec: &ProbeSpec, x: f64, j: usize) -> Result<f64> {
    if j > spec.n {
        return Err(Error::MissingDerivative { requested: j, available: spec.n });
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidArgument(format!("x = {x} must be nonnegative")));
    }
    Ok(spec.eval(j, x))
}

impl AnalyticFunction for ProbeSpec {
    fn max_order(&self) -> Option<usize> {
        Some(self.n)
    }

    fn eval(&self, j: usize, x: f64) -> f64 {
        let n = self.n;
        if x <= self.a {
            if x == 0.0 {
                return if j == n && self.sigma == 0.0 { 1.0 } else { 0.0 };
            }
            x.powf((n - j) as f64 + self.sigma) / self.rising(n - j)
        } else {
            // d^j/dx^j sum_k b_k x^k
            self.tail
                .iter()
                .enumerate()
                .skip(j)
                .map(|(k, b)| b * factorial_f64(k) / factorial_f64(k - j) * x.powi((k - j) as i32))
                .sum()
        }
    }

    fn vanishing_order(&self) -> f64 {
        self.n as f64 + self.sigma
    }

    fn decay(&self) -> Decay {
        Decay::Power { exponent: (self.n - 1) as f64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    pub constant: f64,
    pub slack: f64,
}

impl RatioReport {
    pub(crate) fn new(n: usize, numerator: f64, denominator: f64, constant: f64) -> Result<Self> {
        if !(denominator.abs() > TRIVIAL) {
            return Err(Error::TrivialFunction { denominator });
        }
        let ratio = numerator / denominator;
        Ok(Self {
            n,
            alpha: None,
            sigma: None,
            a: None,
            c: None,
            side: None,
            m: None,
            numerator,
            denominator,
            ratio,
            constant,
            slack: ratio - constant,
        })
    }

    /// `slack > 0`.
    pub fn is_strict(&self) -> bool {
        self.slack > 0.0
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidIndex("n must be at least 1".into()));
    }
    Ok(())
}

pub fn default_ratio_grid() -> LogGrid {
    LogGrid::new(RATIO_WINDOW.0, RATIO_WINDOW.1, RATIO_COUNT).expect("valid defaults")
}

/// `int x^alpha |f^(n)|^2` and `int x^(alpha-2n) |f|^2` on a log grid.
pub(crate) fn weighted_integrals(n: usize, alpha: f64, f: &dyn AnalyticFunction, grid: &LogGrid) -> Result<(f64, f64)> {
    supports_order(f, n)?;
    let num = GridFunction::from_real_fn(grid.clone(), |x| f.eval(n, x).powi(2));
    let den = GridFunction::from_real_fn(grid.clone(), |x| f.eval(0, x).powi(2));
    let numerator = integrate_half_line(&num, alpha)?.value.re;
    let denominator = integrate_half_line(&den, alpha - 2.0 * n as f64)?.value.re;
    Ok((numerator, denominator))
}

/// `int x^alpha |f^(n)|^2 / int x^(alpha-2n) |f|^2` against
/// [`glazman_constant`].
pub fn glazman_ratio(n: usize, alpha: f64, f: &dyn AnalyticFunction, grid: &LogGrid) -> Result<RatioReport> {
    check_n(n)?;
    let (num, den) = weighted_integrals(n, alpha, f, grid)?;
    let mut report = RatioReport::new(n, num, den, glazman_constant(n, alpha)?)?;
    report.alpha = Some(alpha);
    Ok(report)
}

/// `int |f^(n)|^2 / int |f|^2 x^(-2n)` against `c_n`.
///
/// ```
/// use birman::analytic::PowerExp;
/// use birman::functional::{birman_ratio, default_ratio_grid};
///
/// let f = PowerExp::gamma_class(1.5, 1.0); // x^{3/2} e^{-x}
/// let r = birman_ratio(1, &f, &default_ratio_grid()).unwrap();
/// assert!((r.ratio - 0.75).abs() < 1e-10);
/// ```
pub fn birman_ratio(n: usize, f: &dyn AnalyticFunction, grid: &LogGrid) -> Result<RatioReport> {
    let mut report = glazman_ratio(n, 0.0, f, grid)?;
    report.alpha = None;
    Ok(report)
}

/// Exact ratio of a probe.
///
/// On `(0, a)` both integrands are powers of `x`; beyond `a` the numerator
/// vanishes and the denominator is `sum_{k,l} b_k b_l int_a^inf x^(k+l-2n)`.
pub fn probe_ratio(spec: &ProbeSpec) -> Result<RatioReport> {
    let n = spec.n;
    let s = spec.sigma;
    let a = spec.a;
    let p = spec.rising(n);
    let head = a.powf(1.0 + 2.0 * s) / (1.0 + 2.0 * s);
    let mut tail = 0.0;
    for (k, bk) in spec.tail.iter().enumerate() {
        for (l, bl) in spec.tail.iter().enumerate() {
            let e = (k + l) as f64 - 2.0 * n as f64 + 1.0;
            tail -= bk * bl * a.powf(e) / e;
        }
    }
    let numerator = head;
    let denominator = head / (p * p) + tail;
    let mut report = RatioReport::new(n, numerator, denominator, birman_constant(n)?.c_f64())?;
    report.sigma = Some(s);
    report.a = Some(a);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessSweep {
    pub n: usize,
    pub a: f64,
    pub epsilons: Vec<f64>,
    pub reports: Vec<RatioReport>,
    /// Value at `epsilon = 0` of the line through the two smallest `epsilon`.
    pub extrapolated_limit: f64,
    pub constant: f64,
    pub strictly_decreasing: bool,
}

/// Probe ratios at `sigma = -1/2 + epsilon` for each `epsilon`, in input
/// order.
pub fn sharpness_sweep(n: usize, epsilons: &[f64], a: f64) -> Result<SharpnessSweep> {
    check_n(n)?;
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("no epsilon values".into()));
    }
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::InvalidArgument(format!("epsilon = {e} must be positive")));
    }
    let reports = epsilons
        .par_iter()
        .map(|&e| ProbeSpec::new(n, -0.5 + e, a).and_then(|p| probe_ratio(&p)))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..epsilons.len()).collect();
    order.sort_by(|&i, &j| epsilons[i].total_cmp(&epsilons[j]));
    let extrapolated_limit = if order.len() >= 2 {
        let (i, j) = (order[0], order[1]);
        let (e0, e1) = (epsilons[i], epsilons[j]);
        let (r0, r1) = (reports[i].ratio, reports[j].ratio);
        r0 - e0 * (r1 - r0) / (e1 - e0)
    } else {
        reports[0].ratio
    };
    let strictly_decreasing = order.windows(2).all(|w| reports[w[0]].ratio < reports[w[1]].ratio);
    Ok(SharpnessSweep {
        n,
        a,
        epsilons: epsilons.to_vec(),
        constant: reports[0].constant,
        reports,
        extrapolated_limit,
        strictly_decreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub n: usize,
    pub j: usize,
    /// Slope of `ln q` against `ln(1/x)` as `x -> 0`, where
    /// `q = |f^(j)|^2 / x^(2n-2j-1)`.
    pub trend_at_zero: f64,
    /// Slope of `ln q` against `ln x` as `x -> inf`.
    pub trend_at_infinity: f64,
    pub vanishes_at_zero: bool,
    pub vanishes_at_infinity: bool,
}

impl DecayReport {
    pub fn passes(&self) -> bool {
        self.vanishes_at_zero && self.vanishes_at_infinity
    }
}

const TREND_TOL: f64 = 1e-6;

fn trend(f: &dyn AnalyticFunction, n: usize, j: usize, xs: &[f64], t: impl Fn(f64) -> f64) -> f64 {
    let q: Vec<f64> = xs
        .iter()
        .map(|&x| f.eval(j, x).powi(2) / x.powi(2 * (n - j) as i32 - 1))
        .collect();
    if q.last().is_some_and(|v| *v == 0.0) {
        return f64::NEG_INFINITY;
    }
    let pts: Vec<(f64, f64)> = xs.iter().zip(&q).filter(|(_, v)| **v > 0.0).map(|(&x, v)| (t(x), v.ln())).collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + (p.0 - mx) * (p.1 - my), acc.1 + (p.0 - mx).powi(2)));
    num / den
}

/// Checks `|f^(j)(x)|^2 / x^(2n-2j-1) -> 0` at both ends from six samples
/// over five decades, starting at `1e-3` and `1e3`.
pub fn decay_check(f: &dyn AnalyticFunction, n: usize, j: usize) -> Result<DecayReport> {
    check_n(n)?;
    if j >= n {
        return Err(Error::InvalidArgument(format!("need j < n, got j = {j}, n = {n}")));
    }
    supports_order(f, j)?;
    let near: Vec<f64> = (0..6).map(|k| 1e-3 * 10f64.powi(-k)).collect();
    let far: Vec<f64> = (0..6).map(|k| 1e3 * 10f64.powi(k)).collect();
    let t0 = trend(f, n, j, &near, |x| -x.ln());
    let t1 = trend(f, n, j, &far, |x| x.ln());
    Ok(DecayReport {
        n,
        j,
        trend_at_zero: t0,
        trend_at_infinity: t1,
        vanishes_at_zero: t0 < -TREND_TOL,
        vanishes_at_infinity: t1 < -TREND_TOL,
    })
}

/// A random admissible function `x^order (c_0 + c_1 x + c_2 x^2) e^(-x)` with
/// `c_0` in `[0.5, 1.5]` and `c_1, c_2` in `[-1, 1]` (`c_2 > 0` is forced
/// so the polynomial factor stays positive near infinity).
pub fn random_admissible(order: usize, rng: &mut impl Rng) -> PowerExp {
    let c0 = rng.random_range(0.5..1.5);
    let c1 = rng.random_range(-1.0..1.0);
    let c2 = rng.random_range(0.05..1.0);
    let k = order as f64;
    PowerExp::new(vec![(c0, k), (c1, k + 1.0), (c2, k + 2.0)], 1.0)
}

/// `count` random admissible functions from a seeded stream.
pub fn random_admissible_family(order: usize, count: usize, seed: u64) -> Vec<PowerExp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_admissible(order, &mut rng)).collect()
}
