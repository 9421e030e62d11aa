//! Birman inequalities on a finite interval and for vector-valued functions.
//!
//! On `(a, c)` the weight `x^(-2n)` is replaced by a power of the distance to
//! the boundary where `f` vanishes:
//!
//! * [`Side::Left`]: `f^(j)(a) = 0`, weight `(x - a)^(-2n)`;
//! * [`Side::Right`]: `f^(j)(c) = 0`, weight `(c - x)^(-2n)`;
//! * [`Side::Both`]: both, weight `d(x)^(-2n)` with
//!   `d(x) = min(x - a, c - x)`.
//!
//! The constant is `c_n` in every case. Integrals use composite
//! Gauss–Legendre rules on panels refined geometrically towards each
//! endpoint, and the `d(x)` integral is split at the midpoint where `d` has
//! its kink.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::analytic::{supports_order, AnalyticFunction, SharedFunction};
use crate::constants::birman_constant;
use crate::error::{Error, Result};
use crate::functional::{weighted_integrals, RatioReport};
use crate::grid::{differentiate, norm_sq_half_line, GridFunction, LogGrid};

pub const MAX_COMPONENTS: usize = 64;
const GAUSS_ORDER: usize = 20;

/// Breakpoints (as fractions of a panel group) with three geometric levels
/// at each end.
const BREAKS: [f64; 9] = [0.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 0.5, 0.75, 15.0 / 16.0, 63.0 / 64.0, 1.0];

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let m = GAUSS_ORDER;
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// `int_lo^hi g` on the graded panels of `[lo, hi]`.
fn graded_integral(lo: f64, hi: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let len = hi - lo;
    BREAKS
        .windows(2)
        .map(|w| {
            let (p, q) = (lo + w[0] * len, lo + w[1] * len);
            let half = 0.5 * (q - p);
            let mid = 0.5 * (p + q);
            nodes.iter().zip(weights).map(|(t, wt)| wt * g(mid + half * t)).sum::<f64>() * half
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Both,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalProblem {
    pub n: usize,
    pub a: f64,
    pub c: f64,
    pub side: Side,
}

impl IntervalProblem {
    pub fn new(n: usize, a: f64, c: f64, side: Side) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidIndex("n must be at least 1".into()));
        }
        if !(a >= 0.0 && c > a && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("need 0 <= a < c < inf, got ({a}, {c})")));
        }
        Ok(Self { n, a, c, side })
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.c)
    }

    /// The boundary weight: `x - a`, `c - x` or `d(x)`.
    pub fn distance(&self, x: f64) -> f64 {
        match self.side {
            Side::Left => x - self.a,
            Side::Right => self.c - x,
            Side::Both => (x - self.a).min(self.c - x),
        }
    }

    /// Checks that `f` and its first `n - 1` derivatives vanish at the
    /// endpoints required by `side`, relative to their interior size.
    pub fn check_boundary(&self, f: &dyn AnalyticFunction) -> Result<()> {
        supports_order(f, self.n)?;
        let len = self.c - self.a;
        let interior = [0.1, 0.3, 0.5, 0.7, 0.9].map(|t| self.a + t * len);
        let ends: Vec<(f64, &str)> = match self.side {
            Side::Left => vec![(self.a, "left")],
            Side::Right => vec![(self.c, "right")],
            Side::Both => vec![(self.a, "left"), (self.c, "right")],
        };
        for j in 0..self.n {
            let scale = (0..=self.n)
                .flat_map(|k| interior.iter().map(move |&x| (k, x)))
                .map(|(k, x)| f.eval(k, x).abs() * len.powi(k as i32 - j as i32))
                .fold(0.0, f64::max);
            for &(x, name) in &ends {
                let v = f.eval(j, x);
                if !v.is_finite() || v.abs() > 1e-8 * scale.max(1e-300) {
                    return Err(Error::InconsistentBoundary(format!(
                        "derivative {j} is {v:e} at the {name} endpoint x = {x}, expected 0"
                    )));
                }
            }
        }
        Ok(())
    }

    fn weighted(&self, f: &dyn AnalyticFunction, lo: f64, hi: f64, dist: impl Fn(f64) -> f64) -> f64 {
        let two_n = 2 * self.n as i32;
        graded_integral(lo, hi, &|x| f.eval(0, x).powi(2) / dist(x).powi(two_n))
    }
}

/// `int |f^(n)|^2 / int |f|^2 / weight^(2n)` on `(a, c)`.
///
/// ```
/// use std::sync::Arc;
/// use birman::analytic::PowerExp;
/// use birman::interval::{interval_ratio, IntervalProblem, Side};
///
/// let f = PowerExp::polynomial(&[0.0, 1.0, -1.0]); // x (1 - x)
/// let p = IntervalProblem::new(1, 0.0, 1.0, Side::Both).unwrap();
/// let r = interval_ratio(&p, &f).unwrap();
/// assert!((r.ratio - 4.0 / 7.0).abs() < 1e-12);
/// ```
pub fn interval_ratio(problem: &IntervalProblem, f: &dyn AnalyticFunction) -> Result<RatioReport> {
    problem.check_boundary(f)?;
    let n = problem.n;
    let (a, c) = (problem.a, problem.c);
    let numerator = match problem.side {
        Side::Both => {
            let m = problem.midpoint();
            graded_integral(a, m, &|x| f.eval(n, x).powi(2)) + graded_integral(m, c, &|x| f.eval(n, x).powi(2))
        }
        _ => graded_integral(a, c, &|x| f.eval(n, x).powi(2)),
    };
    let denominator = match problem.side {
        Side::Both => split_parts(problem, f).total,
        _ => problem.weighted(f, a, c, |x| problem.distance(x)),
    };
    let mut report = RatioReport::new(n, numerator, denominator, birman_constant(n)?.c_f64())?;
    report.a = Some(a);
    report.c = Some(c);
    report.side = Some(problem.side.name().into());
    Ok(report)
}

/// The three denominators of the splitting identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitParts {
    /// `int_a^m |f|^2 / (x - a)^(2n)`
    pub left: f64,
    /// `int_m^c |f|^2 / (c - x)^(2n)`
    pub right: f64,
    /// `int_a^c |f|^2 / d(x)^(2n)`
    pub total: f64,
}

fn split_parts(problem: &IntervalProblem, f: &dyn AnalyticFunction) -> SplitParts {
    let (a, c, m) = (problem.a, problem.c, problem.midpoint());
    let d = |x: f64| (x - a).min(c - x);
    let total = problem.weighted(f, a, m, d) + problem.weighted(f, m, c, d);
    let left = problem.weighted(f, a, m, |x| x - a);
    let right = problem.weighted(f, m, c, |x| c - x);
    SplitParts { left, right, total }
}

/// The `d(x)`-weighted denominator and its two halves, for `f` vanishing at
/// both ends.
pub fn splitting_parts(problem: &IntervalProblem, f: &dyn AnalyticFunction) -> Result<SplitParts> {
    let both = IntervalProblem { side: Side::Both, ..*problem };
    both.check_boundary(f)?;
    Ok(split_parts(&both, f))
}

/// `int sum_k |f_k^(n)|^2 / int sum_k |f_k|^2 x^(-2n)` on `(0, inf)` for
/// `f = (f_1, ..., f_m)`.
pub fn vector_birman_ratio(n: usize, components: &[SharedFunction], grid: &LogGrid) -> Result<RatioReport> {
    if n == 0 {
        return Err(Error::InvalidIndex("n must be at least 1".into()));
    }
    let m = components.len();
    if m == 0 || m > MAX_COMPONENTS {
        return Err(Error::InvalidArgument(format!("need 1 to {MAX_COMPONENTS} components, got {m}")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for f in components {
        let (a, b) = weighted_integrals(n, 0.0, f.as_ref(), grid)?;
        num += a;
        den += b;
    }
    let mut report = RatioReport::new(n, num, den, birman_constant(n)?.c_f64())?;
    report.m = Some(m);
    Ok(report)
}

/// [`vector_birman_ratio`] for sampled values. The `n`-th derivative comes
/// from finite differences, so the result is only accurate to `O(h^2)`.
pub fn vector_birman_ratio_sampled(n: usize, f: &GridFunction) -> Result<RatioReport> {
    if n == 0 {
        return Err(Error::InvalidIndex("n must be at least 1".into()));
    }
    if f.dim() > MAX_COMPONENTS {
        return Err(Error::InvalidArgument(format!("at most {MAX_COMPONENTS} components")));
    }
    let d = differentiate(f, n)?;
    let num = norm_sq_half_line(&d, 0.0)?;
    let den = norm_sq_half_line(f, -2.0 * n as f64)?;
    let mut report = RatioReport::new(n, num, den, birman_constant(n)?.c_f64())?;
    report.m = Some(f.dim());
    Ok(report)
}

/// Ratios of the boundary probe `F = t^(n+sigma) / prod (j + sigma)`,
/// `t` the distance to the vanishing endpoint, at `sigma = -1/2 + epsilon`.
///
/// Both integrals are computed numerically after substituting
/// `t = L s^(1/(1+2 sigma))`, which removes the endpoint singularity of
/// `t^(2 sigma)`. A probe vanishing at both ends needs a cutoff and is not
/// provided.
pub fn interval_sharpness_sweep(problem: &IntervalProblem, epsilons: &[f64]) -> Result<Vec<RatioReport>> {
    if problem.side == Side::Both {
        return Err(Error::InvalidArgument(
            "the boundary probe vanishes at one endpoint only; use side left or right".into(),
        ));
    }
    let n = problem.n;
    let len = problem.c - problem.a;
    let constant = birman_constant(n)?.c_f64();
    epsilons
        .iter()
        .map(|&e| {
            if !(e > 0.0) {
                return Err(Error::InvalidArgument(format!("epsilon = {e} must be positive")));
            }
            let sigma = -0.5 + e;
            let rising: f64 = (1..=n).map(|j| j as f64 + sigma).product();
            let p = 1.0 / (1.0 + 2.0 * sigma);
            let t_of = |s: f64| len * s.powf(p);
            let jac = |s: f64| len * p * s.powf(p - 1.0);
            let num = graded_integral(0.0, 1.0, &|s| t_of(s).powf(2.0 * sigma) * jac(s));
            // F / t^n = t^sigma / prod (j + sigma); the quotient is formed
            // before squaring so that t^(2n) never underflows
            let den = graded_integral(0.0, 1.0, &|s| (t_of(s).powf(sigma) / rising).powi(2) * jac(s));
            let mut r = RatioReport::new(n, num, den, constant)?;
            r.sigma = Some(sigma);
            r.a = Some(problem.a);
            r.c = Some(problem.c);
            r.side = Some(problem.side.name().into());
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{PowerExp, Reflected, Scaled};
    use crate::functional::{birman_ratio, default_ratio_grid};
    use std::sync::Arc;

    fn bubble() -> PowerExp {
        PowerExp::polynomial(&[0.0, 1.0, -1.0])
    }

    #[test]
    fn gauss_rule_is_exact_on_polynomials() {
        let v = graded_integral(0.0, 2.0, &|x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
    }

    #[test]
    fn bubble_ratios() {
        let p = IntervalProblem::new(1, 0.0, 1.0, Side::Both).unwrap();
        let r = interval_ratio(&p, &bubble()).unwrap();
        assert!((r.numerator - 1.0 / 3.0).abs() < 1e-14);
        assert!((r.denominator - 7.0 / 12.0).abs() < 1e-14);
        let left = interval_ratio(&IntervalProblem::new(1, 0.0, 1.0, Side::Left).unwrap(), &bubble()).unwrap();
        // int (1 - x)^2 = 1/3, so the ratio is 1
        assert!((left.ratio - 1.0).abs() < 1e-13 && left.slack > 0.0);
    }

    #[test]
    fn splitting_identity() {
        let f = PowerExp::polynomial(&[0.0, 0.0, 1.0, -2.0, 1.0]); // x^2 (1 - x)^2
        let parts = splitting_parts(&IntervalProblem::new(2, 0.0, 1.0, Side::Both).unwrap(), &f).unwrap();
        assert!((parts.left + parts.right - parts.total).abs() < 1e-10 * parts.total);
    }

    #[test]
    fn boundary_declaration_is_checked() {
        let f = PowerExp::polynomial(&[0.0, 1.0]); // x: vanishes at 0 only
        let both = IntervalProblem::new(1, 0.0, 1.0, Side::Both).unwrap();
        assert!(matches!(interval_ratio(&both, &f), Err(Error::InconsistentBoundary(_))));
        let right = IntervalProblem::new(1, 0.0, 1.0, Side::Right).unwrap();
        assert!(interval_ratio(&right, &f).is_err());
        assert!(interval_ratio(&IntervalProblem::new(1, 0.0, 1.0, Side::Left).unwrap(), &f).is_ok());
        assert!(IntervalProblem::new(1, 1.0, 1.0, Side::Left).is_err());
    }

    #[test]
    fn reflection_symmetry() {
        let f: SharedFunction = Arc::new(PowerExp::polynomial(&[0.0, 0.0, 1.0, 0.5]));
        let (a, c) = (0.0, 2.0);
        let left = interval_ratio(&IntervalProblem::new(2, a, c, Side::Left).unwrap(), f.as_ref()).unwrap();
        let g = Reflected::new(f, a, c);
        let right = interval_ratio(&IntervalProblem::new(2, a, c, Side::Right).unwrap(), &g).unwrap();
        assert!((left.ratio - right.ratio).abs() < 1e-12 * left.ratio);
    }

    #[test]
    fn zero_is_trivial() {
        let p = IntervalProblem::new(1, 0.0, 1.0, Side::Both).unwrap();
        assert!(matches!(interval_ratio(&p, &PowerExp::zero()), Err(Error::TrivialFunction { .. })));
    }

    #[test]
    fn vector_reduction() {
        let grid = default_ratio_grid();
        let g: SharedFunction = Arc::new(PowerExp::gamma_class(1.5, 1.0));
        let scalar = birman_ratio(1, g.as_ref(), &grid).unwrap();
        let e: Vec<SharedFunction> = vec![Arc::new(Scaled::new(g.clone(), 0.6)), Arc::new(Scaled::new(g, 0.8))];
        let v = vector_birman_ratio(1, &e, &grid).unwrap();
        assert!((v.ratio - scalar.ratio).abs() <= 1e-12 * scalar.ratio);
        assert_eq!(v.m, Some(2));
        assert!(vector_birman_ratio(1, &[], &grid).is_err());
    }

    #[test]
    fn vector_mediant() {
        // (x^{3/2} e^{-x}, x^{3/2} e^{-2x}): the ratio is 3/4 for each
        // component (scale invariance), so also for the pair
        let grid = default_ratio_grid();
        let f: Vec<SharedFunction> =
            vec![Arc::new(PowerExp::gamma_class(1.5, 1.0)), Arc::new(PowerExp::gamma_class(1.5, 2.0))];
        let v = vector_birman_ratio(1, &f, &grid).unwrap();
        assert!((v.ratio - 0.75).abs() < 1e-10);
        // (x^{3/2} e^{-x}, x^{5/2} e^{-x}) has component ratios 3/4 and 5/4
        let h: Vec<SharedFunction> =
            vec![Arc::new(PowerExp::gamma_class(1.5, 1.0)), Arc::new(PowerExp::gamma_class(2.5, 1.0))];
        let r1 = birman_ratio(1, h[0].as_ref(), &grid).unwrap().ratio;
        let r2 = birman_ratio(1, h[1].as_ref(), &grid).unwrap().ratio;
        let v = vector_birman_ratio(1, &h, &grid).unwrap().ratio;
        assert!(v > r1.min(r2) && v < r1.max(r2));
    }

    #[test]
    fn sampled_vector_ratio_is_close() {
        let grid = LogGrid::new(1e-8, 1e4, 4096).unwrap();
        let a = GridFunction::from_real_fn(grid.clone(), |x| x.powf(1.5) * (-x).exp());
        let b = GridFunction::from_real_fn(grid, |x| x.powf(1.5) * (-2.0 * x).exp());
        let r = vector_birman_ratio_sampled(1, &GridFunction::stack(&[a, b]).unwrap()).unwrap();
        assert!((r.ratio - 0.75).abs() < 1e-3, "{}", r.ratio);
    }

    #[test]
    fn boundary_probe_sweep() {
        let p = IntervalProblem::new(2, 0.0, 1.0, Side::Left).unwrap();
        let rs = interval_sharpness_sweep(&p, &[0.5, 0.1, 0.01]).unwrap();
        assert!(rs.windows(2).all(|w| w[0].ratio > w[1].ratio));
        let s: f64 = -0.49;
        let exact = ((1.0 + s) * (2.0 + s)).powi(2);
        assert!((rs[2].ratio - exact).abs() < 1e-10 * exact);
        assert!(rs.iter().all(|r| r.slack > 0.0));
        let both = IntervalProblem::new(2, 0.0, 1.0, Side::Both).unwrap();
        assert!(interval_sharpness_sweep(&both, &[0.1]).is_err());
    }
}
