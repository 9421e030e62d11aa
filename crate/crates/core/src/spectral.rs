//! The unitary Mellin transform and the spectral curves of `T_n`.
//!
//! With `u = ln x` and `g(u) = f(e^u) e^(u/2)`,
//!
//! ```text
//! (M f)(lambda) = (2 pi)^(-1/2) int_0^inf f(x) x^(-1/2 + i lambda) dx
//!              = (2 pi)^(-1/2) int g(u) e^(i lambda u) du,
//! ```
//!
//! a Fourier transform in `u`. On a log grid with `N = 2^k` nodes and step
//! `h` it is sampled at `lambda_m = (m - N/2) 2 pi / (N h)`; the discrete pair
//! is exactly unitary.
//!
//! `M` turns `f -> (x f)'` into multiplication by `1/2 - i lambda`. The
//! spectrum of `T_n` is the curve `r_n(1 + e^{i theta})`; for `n = 1` the
//! circle `|z - 1| = 1`. Only this geometry and the diagonalization residual
//! are checked numerically: absolute continuity of the spectrum is not
//! something samples can certify.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::analytic::{supports_order, AnalyticFunction};
use crate::constants::eval_r_n;
use crate::error::{Error, Result};
use crate::grid::{fmt17, GridFunction, LogGrid};

/// Relative size of `g` at the window ends above which the transform is
/// flagged as truncated.
pub const EDGE_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MellinData {
    grid: LogGrid,
    pub lambda: Vec<f64>,
    pub values: Vec<Complex64>,
    /// `max(|g(u_0)|, |g(u_{N-1})|) / max |g|`.
    pub edge_magnitude: f64,
}

impl MellinData {
    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn lambda_step(&self) -> f64 {
        2.0 * PI / (self.grid.len() as f64 * self.grid.step())
    }

    /// `false` when the input did not decay at the window ends.
    pub fn is_decaying(&self) -> bool {
        self.edge_magnitude <= EDGE_WARNING
    }

    /// `||f*||_{L^2}`, by the rectangle rule in `lambda`.
    pub fn l2_norm(&self) -> f64 {
        (self.lambda_step() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

fn log_grid_of(f: &GridFunction) -> Result<&LogGrid> {
    let g = f
        .grid()
        .as_log()
        .ok_or_else(|| Error::InvalidArgument("the Mellin transform needs a log grid".into()))?;
    if !g.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(g.len()));
    }
    Ok(g)
}

fn lambdas(grid: &LogGrid) -> Vec<f64> {
    let n = grid.len();
    let dl = 2.0 * PI / (n as f64 * grid.step());
    (0..n).map(|m| (m as f64 - (n / 2) as f64) * dl).collect()
}

/// `f*(lambda_m)` for a scalar function on a log grid with `2^k` nodes.
pub fn mellin_forward(f: &GridFunction) -> Result<MellinData> {
    let grid = log_grid_of(f)?.clone();
    let v = f.scalar()?;
    if let Some(i) = v.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidData(format!("non-finite sample at index {i}")));
    }
    let n = grid.len();
    let h = grid.step();
    let u0 = grid.log_min();
    let mut buf: Vec<Complex64> = grid
        .nodes()
        .iter()
        .zip(v)
        .enumerate()
        .map(|(k, (&x, &z))| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            z * (x.sqrt() * sign)
        })
        .collect();
    let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let edge_magnitude = if peak > 0.0 { buf[0].norm().max(buf[n - 1].norm()) / peak } else { 0.0 };
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let lambda = lambdas(&grid);
    let scale = h / (2.0 * PI).sqrt();
    let values = buf
        .iter()
        .zip(&lambda)
        .map(|(s, &l)| s * Complex64::from_polar(scale, l * u0))
        .collect();
    Ok(MellinData { grid, lambda, values, edge_magnitude })
}

/// The inverse transform, back onto the originating grid.
pub fn mellin_inverse(data: &MellinData) -> Result<GridFunction> {
    let grid = &data.grid;
    let n = grid.len();
    if data.values.len() != n {
        return Err(Error::MixedLengths { expected: n, found: data.values.len() });
    }
    let u0 = grid.log_min();
    let mut buf: Vec<Complex64> = data
        .values
        .iter()
        .zip(&data.lambda)
        .map(|(v, &l)| v * Complex64::from_polar(1.0, -l * u0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = data.lambda_step() / (2.0 * PI).sqrt();
    let values = grid
        .nodes()
        .iter()
        .zip(&buf)
        .enumerate()
        .map(|(k, (&x, s))| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            s * (scale * sign / x.sqrt())
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// `||M((x f)') - (1/2 - i lambda) M f|| / ||f||` on `grid`.
pub fn verify_diagonalization(f: &dyn AnalyticFunction, grid: &LogGrid) -> Result<f64> {
    supports_order(f, 1)?;
    let plain = GridFunction::from_real_fn(grid.clone(), |x| f.eval(0, x));
    let euler = GridFunction::from_real_fn(grid.clone(), |x| f.eval(0, x) + x * f.eval(1, x));
    let mf = mellin_forward(&plain)?;
    let me = mellin_forward(&euler)?;
    let dl = mf.lambda_step();
    let diff: f64 = me
        .values
        .iter()
        .zip(&mf.values)
        .zip(&mf.lambda)
        .map(|((e, v), &l)| (e - Complex64::new(0.5, -l) * v).norm_sqr())
        .sum::<f64>()
        * dl;
    let norm = mf.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(diff.sqrt() / norm)
}

/// Samples of `r_n(1 + e^{i theta})` at `theta_k = 2 pi k / (count - 1)`,
/// so the first and last points coincide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCurve {
    pub n: usize,
    pub theta: Vec<f64>,
    pub points: Vec<Complex64>,
}

pub const MIN_THETA_COUNT: usize = 16;

fn curve_point(n: usize, theta: f64) -> Complex64 {
    // 1 + e^{i theta} stays in Re z >= 0, away from the poles -1/k
    eval_r_n(n, Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, theta)).expect("no poles on the curve")
}

pub fn spectrum_curve(n: usize, theta_count: usize) -> Result<SpectrumCurve> {
    if n == 0 {
        return Err(Error::InvalidIndex("n must be at least 1".into()));
    }
    if theta_count < MIN_THETA_COUNT {
        return Err(Error::InvalidArgument(format!(
            "theta_count = {theta_count} is below the minimum {MIN_THETA_COUNT}"
        )));
    }
    let step = 2.0 * PI / (theta_count - 1) as f64;
    let theta: Vec<f64> = (0..theta_count).map(|k| if k == theta_count - 1 { 2.0 * PI } else { k as f64 * step }).collect();
    let points = theta.par_iter().map(|&t| curve_point(n, t)).collect();
    Ok(SpectrumCurve { n, theta, points })
}

/// `max |r_n(1 + e^{i theta})|`: the sampled maximum refined by
/// golden-section search on the neighbouring interval.
pub fn curve_max_modulus(curve: &SpectrumCurve) -> f64 {
    let (k, best) = curve
        .points
        .iter()
        .enumerate()
        .map(|(k, p)| (k, p.norm()))
        .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
    let m = curve.theta.len();
    let step = curve.theta[1] - curve.theta[0];
    let centre = curve.theta[k.min(m - 1)];
    let modulus = |t: f64| curve_point(curve.n, t).norm();
    let (mut lo, mut hi) = (centre - step, centre + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (modulus(c), modulus(d));
    for _ in 0..80 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = modulus(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = modulus(d);
        }
    }
    best.max(fc).max(fd)
}

impl SpectrumCurve {
    /// `theta,re,im` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "theta,re,im")?;
        for (t, p) in self.theta.iter().zip(&self.points) {
            writeln!(out, "{},{},{}", fmt17(*t), fmt17(p.re), fmt17(p.im))?;
        }
        Ok(())
    }

    /// A polyline of the curve with the coordinate axes, in a viewBox
    /// fitted to the curve.
    pub fn to_svg(&self, width: u32, height: u32) -> String {
        let (mut x0, mut x1, mut y0, mut y1) = (0f64, 0f64, 0f64, 0f64);
        for p in &self.points {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(-p.im);
            y1 = y1.max(-p.im);
        }
        let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
        let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
        let stroke = 0.004 * (x1 - x0).max(y1 - y0);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
            x0,
            y0,
            x1 - x0,
            y1 - y0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.6}" y1="0" x2="{x1:.6}" y2="0" stroke="gray" stroke-width="{stroke:.6}"/>"#
        );
        let _ = writeln!(
            s,
            r#"<line x1="0" y1="{y0:.6}" x2="0" y2="{y1:.6}" stroke="gray" stroke-width="{stroke:.6}"/>"#
        );
        let pts: Vec<String> = self.points.iter().map(|p| format!("{:.6},{:.6}", p.re, -p.im)).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="black" stroke-width="{stroke:.6}" points="{}"/>"#,
            pts.join(" ")
        );
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::GaussianLog;
    use crate::constants::cesaro_norm;
    use crate::grid::norm_sq;
    use num_traits::ToPrimitive;

    fn gaussian_samples(grid: &LogGrid, width: f64) -> GridFunction {
        let g = GaussianLog::new(0.2, width, -0.5).unwrap();
        GridFunction::from_real_fn(grid.clone(), |x| g.eval(0, x))
    }

    #[test]
    fn round_trip_and_parseval() {
        let grid = LogGrid::new(1e-6, 1e6, 4096).unwrap();
        let f = gaussian_samples(&grid, 1.0);
        let m = mellin_forward(&f).unwrap();
        assert!(m.is_decaying());
        let back = mellin_inverse(&m).unwrap();
        let err = back.axpy(Complex64::new(-1.0, 0.0), &f).unwrap().l2_norm() / f.l2_norm();
        assert!(err < 1e-10, "{err}");
        let nf = norm_sq(&f, 0.0).unwrap().sqrt();
        assert!((m.l2_norm() - nf).abs() < 1e-8 * nf);
    }

    #[test]
    fn gaussian_maps_to_gaussian() {
        // psi(u) = exp(-(u - c)^2 / (2 s^2)) -> s exp(-s^2 l^2 / 2) e^{i l c}
        let grid = LogGrid::new(1e-6, 1e6, 2048).unwrap();
        let (c, s) = (0.2, 1.0);
        let m = mellin_forward(&gaussian_samples(&grid, s)).unwrap();
        for (l, v) in m.lambda.iter().zip(&m.values) {
            let expect = Complex64::from_polar(s * (-s * s * l * l / 2.0).exp(), l * c);
            assert!((v - expect).norm() < 1e-12, "lambda = {l}");
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        let grid = LogGrid::new(1e-3, 1e3, 100).unwrap();
        assert!(matches!(mellin_forward(&GridFunction::zeros(grid)), Err(Error::NotPowerOfTwo(100))));
        let zero = GridFunction::zeros(LogGrid::new(1e-3, 1e3, 64).unwrap());
        let m = mellin_forward(&zero).unwrap();
        assert!(m.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn diagonalization_residual_shrinks() {
        let g = GaussianLog::new(0.0, 0.003, -0.5).unwrap();
        let r14 = verify_diagonalization(&g, &LogGrid::new(1e-6, 1e6, 1 << 14).unwrap()).unwrap();
        let r15 = verify_diagonalization(&g, &LogGrid::new(1e-6, 1e6, 1 << 15).unwrap()).unwrap();
        assert!(r14 <= 1e-3, "{r14}");
        assert!(r15 < r14, "{r15} vs {r14}");
        assert_eq!(
            verify_diagonalization(&crate::analytic::PowerExp::zero(), &LogGrid::new(1e-3, 1e3, 64).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn curve_geometry() {
        let c1 = spectrum_curve(1, 4097).unwrap();
        assert!(c1.points.iter().all(|p| ((p - 1.0).norm() - 1.0).abs() <= 1e-12));
        assert!((c1.points[1024] - Complex64::new(1.0, 1.0)).norm() < 1e-12);
        for n in 1..=5 {
            let c = spectrum_curve(n, 4097).unwrap();
            assert!(c.points[2048].norm() < 1e-15);
            assert!((c.points[0] - c.points[4096]).norm() < 1e-12);
            let exact = cesaro_norm(n).unwrap().to_f64().unwrap();
            assert!((curve_max_modulus(&c) - exact).abs() < 1e-9);
        }
        assert!((spectrum_curve(2, 16).unwrap().points[0].re - 4.0 / 3.0).abs() < 1e-15);
        assert!(spectrum_curve(1, 15).is_err());
    }

    #[test]
    fn csv_and_svg() {
        let c = spectrum_curve(2, 16).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("theta,re,im\n"));
        assert_eq!(text.lines().count(), 17);
        let svg = c.to_svg(400, 400);
        assert!(svg.contains("<polyline") && svg.trim_end().ends_with("</svg>"));
    }
}
