//! Property tests for the invariants of each module.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

use birman::analytic::{AnalyticFunction, GaussianLog, PowerExp, Reflected, Scaled, SharedFunction};
use birman::constants::{
    birman_constant, eval_p_n, eval_r_n, glazman_constant, leibniz_coeffs, SpectralPolynomials,
};
use birman::functional::{default_ratio_grid, probe_derivative, probe_eval, sharpness_sweep, ProbeSpec};
use birman::grid::{cumulative_integral, differentiate, integrate, norm_sq, GridFunction, LinearGrid, LogGrid};
use birman::interval::{interval_ratio, vector_birman_ratio, IntervalProblem, Side};
use birman::operators::norm::pair_norm_estimate;
use birman::operators::{apply_cesaro, PairSide, WeightedPairSpec};
use birman::spectral::{mellin_forward, mellin_inverse};
use birman::DEFAULT_SEED;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn falling(m: i64, k: usize) -> BigInt {
    (0..k as i64).fold(BigInt::one(), |acc, l| acc * BigInt::from(m - l))
}

#[test]
fn constants_identities_for_all_small_n() {
    for n in 1..=32 {
        let s = birman_constant(n).unwrap();
        assert_eq!(&s.c_n * &s.b_n * &s.b_n, BigRational::one());
        assert_eq!(glazman_constant(n, 0.0).unwrap(), s.c_n.to_f64().unwrap());
        let r = SpectralPolynomials::new(n).unwrap().r_exact(&BigRational::from_integer(2.into()));
        assert_eq!(r, Some(s.b_n.clone()));
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn leibniz_matches_falling_factorials(n in 1usize..=16, m in 0i64..12, k_frac in 0.0f64..=1.0) {
        let k = (k_frac * n as f64).round() as usize;
        let table = leibniz_coeffs(n, k).unwrap();
        // f = x^m: (x^n f)^(k) = sum_j a_j x^(n-k+j) (m)_j x^(m-j) = x^(n+m-k) sum_j a_j (m)_j
        let lhs: BigInt = table.coeffs.iter().enumerate().map(|(j, a)| a * falling(m, j)).sum();
        prop_assert_eq!(lhs, falling(n as i64 + m, k));
    }

    #[test]
    fn p_and_r_agree_with_their_definitions(n in 1usize..=12, re in -3.0f64..3.0, im in 0.1f64..3.0) {
        let z = Complex64::new(re, im);
        let p = (0..n).fold(Complex64::new(1.0, 0.0), |acc, k| acc * (z + k as f64));
        let den = (1..n).fold(Complex64::new(1.0, 0.0), |acc, k| acc * (1.0 + k as f64 * z));
        let r = z.powu(n as u32) / den;
        prop_assert!((eval_p_n(n, z).unwrap() - p).norm() <= 1e-12 * p.norm().max(1.0));
        prop_assert!((eval_r_n(n, z).unwrap() - r).norm() <= 1e-12 * r.norm().max(1.0));
    }

    #[test]
    fn p_exact_matches_float(n in 1usize..=10, num in -20i64..20, den in 1i64..8) {
        let q = BigRational::new(num.into(), den.into());
        let exact = SpectralPolynomials::new(n).unwrap().p_exact(&q).to_f64().unwrap();
        let float = eval_p_n(n, Complex64::new(num as f64 / den as f64, 0.0)).unwrap().re;
        prop_assert!((exact - float).abs() <= 1e-10 * exact.abs().max(1.0));
    }
}

fn log_gaussian(center: f64, width: f64, power: f64) -> impl Fn(f64) -> f64 {
    let g = GaussianLog::new(center, width, power).unwrap();
    move |x| g.eval(0, x)
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn integrate_is_linear(
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        c1 in -2.0f64..2.0,
        c2 in -2.0f64..2.0,
        w1 in 0.3f64..1.5,
        w2 in 0.3f64..1.5,
    ) {
        let grid = LogGrid::new(1e-6, 1e6, 1024).unwrap();
        let f = GridFunction::from_real_fn(grid.clone(), log_gaussian(c1, w1, 0.0));
        let g = GridFunction::from_real_fn(grid.clone(), log_gaussian(c2, w2, 0.0));
        let h = f.scale(alpha.into()).axpy(beta.into(), &g).unwrap();
        let lhs = integrate(&h, 0.0).unwrap().value;
        let rhs = integrate(&f, 0.0).unwrap().value * alpha + integrate(&g, 0.0).unwrap().value * beta;
        let scale = alpha.abs() * f.l2_norm() + beta.abs() * g.l2_norm();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn integrate_is_linear_on_linear_grids(
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        k in 0.5f64..6.0,
        p in 0.0f64..4.0,
    ) {
        let grid = LinearGrid::new(0.0, 2.0, 513).unwrap();
        let f = GridFunction::from_real_fn(grid.clone(), |x| (k * x).sin());
        let g = GridFunction::from_real_fn(grid.clone(), |x| x.powf(p));
        let h = f.scale(alpha.into()).axpy(beta.into(), &g).unwrap();
        let lhs = integrate(&h, 0.0).unwrap().value;
        let rhs = integrate(&f, 0.0).unwrap().value * alpha + integrate(&g, 0.0).unwrap().value * beta;
        let scale = alpha.abs() * f.l2_norm() + beta.abs() * g.l2_norm();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
    }

    #[test]
    fn cumulative_then_differentiate_recovers(center in -3.0f64..3.0, width in 0.5f64..2.0) {
        let grid = LogGrid::default_half_line();
        let f = GridFunction::from_real_fn(grid, log_gaussian(center, width, -0.5));
        let back = differentiate(&cumulative_integral(&f).unwrap(), 1).unwrap();
        let err = norm_sq(&back.axpy((-1.0).into(), &f).unwrap(), 0.0).unwrap().sqrt();
        let size = norm_sq(&f, 0.0).unwrap().sqrt();
        prop_assert!(err <= 1e-3 * size, "{}", err / size);
    }

    #[test]
    fn doubling_reduces_error(k in 0.5f64..4.0) {
        let exact = (1.0 - (-2.0 * k).exp()) / k;
        let err = |count: usize| {
            let g = LinearGrid::new(0.0, 2.0, count).unwrap();
            let f = GridFunction::from_real_fn(g, |x| (-k * x).exp());
            (integrate(&f, 0.0).unwrap().value.re - exact).abs()
        };
        let (coarse, fine) = (err(33), err(65));
        prop_assert!(coarse >= 3.0 * fine, "{} then {}", coarse, fine);
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn monomial_eigenrelation(n in 1usize..=4, sigma in -0.45f64..2.0) {
        let grid = LogGrid::default_half_line();
        let a = 10.0;
        let f = GridFunction::from_real_fn(grid.clone(), |t| if t <= a { t.powf(sigma) } else { 0.0 });
        let v = apply_cesaro(n, &f).unwrap();
        let v = v.scalar().unwrap();
        let p: f64 = (1..=n).map(|j| j as f64 + sigma).product();
        let x = grid.nodes();
        for i in (0..x.len() - 3).take_while(|&i| x[i + 3] <= a) {
            let exact = x[i].powf(sigma) / p;
            prop_assert!((v[i].re - exact).abs() <= 1e-8 * exact, "x = {}", x[i]);
        }
    }

    #[test]
    fn probe_nth_derivative_is_truncated_monomial(n in 1usize..=4, eps in 0.001f64..1.0, x in 1e-4f64..30.0) {
        let spec = ProbeSpec::new(n, -0.5 + eps, 10.0).unwrap();
        let expect = if x < 10.0 { x.powf(spec.sigma) } else { 0.0 };
        let got = probe_derivative(&spec, x, n).unwrap();
        prop_assert!((got - expect).abs() <= 1e-9 * expect.abs().max(1.0), "{} vs {}", got, expect);
    }

    #[test]
    fn probe_matches_cesaro_of_monomial(n in 1usize..=4, eps in 0.01f64..1.0) {
        let spec = ProbeSpec::new(n, -0.5 + eps, 10.0).unwrap();
        let grid = LogGrid::default_half_line();
        let f = GridFunction::from_real_fn(grid.clone(), |t| if t <= spec.a { t.powf(spec.sigma) } else { 0.0 });
        let g = apply_cesaro(n, &f).unwrap();
        let g = g.scalar().unwrap();
        let x = grid.nodes();
        for i in (0..x.len() - 3).take_while(|&i| x[i + 3] <= spec.a) {
            let lhs = g[i].re * x[i].powi(n as i32);
            let rhs = probe_eval(&spec, x[i]).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs(), "x = {}", x[i]);
        }
    }

    #[test]
    fn mellin_is_unitary(center in -4.0f64..4.0, width in 0.4f64..2.0, phase in 0.0f64..6.0) {
        let grid = LogGrid::new(1e-6, 1e6, 4096).unwrap();
        let g = GaussianLog::new(center, width, -0.5).unwrap();
        let f = GridFunction::from_fn(grid, |x| Complex64::from_polar(g.eval(0, x), phase * x.ln()));
        let there = mellin_forward(&f).unwrap();
        let back = mellin_inverse(&there).unwrap();
        let diff = back.axpy((-1.0).into(), &f).unwrap();
        prop_assert!(diff.l2_norm() <= 1e-10 * f.l2_norm());
        let again = mellin_forward(&back).unwrap();
        let d: f64 = again.values.iter().zip(&there.values).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let s: f64 = there.values.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(d <= 1e-10 * s);
    }
}

#[test]
fn sweeps_decrease_monotonically() {
    for n in 1..=4 {
        let s = sharpness_sweep(n, &[0.5, 0.25, 0.1, 0.05, 0.01, 1e-3], 10.0).unwrap();
        assert!(s.strictly_decreasing);
        assert!(s.reports.iter().all(|r| r.slack > 0.0));
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `x^left (1 - x)^right (c0 + c1 x + c2 x^2)` as ascending coefficients.
fn vanishing_poly(left: usize, right: usize, c: [f64; 3]) -> Vec<f64> {
    let mut p = c.to_vec();
    for _ in 0..left {
        p = poly_mul(&p, &[0.0, 1.0]);
    }
    for _ in 0..right {
        p = poly_mul(&p, &[1.0, -1.0]);
    }
    p
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn interval_ratio_is_strict(
        n in 1usize..=3,
        c0 in 0.5f64..1.5,
        c1 in -1.0f64..1.0,
        c2 in -1.0f64..1.0,
    ) {
        let f = PowerExp::polynomial(&vanishing_poly(n, n, [c0, c1, c2]));
        for side in [Side::Left, Side::Right, Side::Both] {
            let p = IntervalProblem::new(n, 0.0, 1.0, side).unwrap();
            let r = interval_ratio(&p, &f).unwrap();
            prop_assert!(r.slack > 0.0, "{:?}: {}", side, r.ratio);
        }
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn reflection_swaps_sides(
        n in 1usize..=3,
        c0 in 0.5f64..1.5,
        c1 in -1.0f64..1.0,
        c2 in -1.0f64..1.0,
        extra in 0usize..2,
    ) {
        // vanishes to order n at 0 only
        let f: SharedFunction = Arc::new(PowerExp::polynomial(&vanishing_poly(n, extra, [c0, c1, c2])));
        let left = IntervalProblem::new(n, 0.0, 1.0, Side::Left).unwrap();
        let right = IntervalProblem::new(n, 0.0, 1.0, Side::Right).unwrap();
        let reflected = Reflected::new(f.clone(), 0.0, 1.0);
        let a = interval_ratio(&left, f.as_ref()).unwrap().ratio;
        let b = interval_ratio(&right, &reflected).unwrap().ratio;
        prop_assert!((a - b).abs() <= 1e-12 * a, "{} vs {}", a, b);
    }

    #[test]
    fn vector_ratio_is_homogeneous(
        t in prop_oneof![Just(0.5f64), Just(2.0)],
        p1 in 1.2f64..3.0,
        p2 in 1.2f64..3.0,
        rate in 0.5f64..2.0,
    ) {
        let grid = default_ratio_grid();
        let g1: SharedFunction = Arc::new(PowerExp::gamma_class(p1, 1.0));
        let g2: SharedFunction = Arc::new(PowerExp::gamma_class(p2, rate));
        let single = |g: &SharedFunction| vector_birman_ratio(1, std::slice::from_ref(g), &grid).unwrap().ratio;
        let (r1, r2) = (single(&g1), single(&g2));
        let scaled: SharedFunction = Arc::new(Scaled::new(g1.clone(), t));
        let r = vector_birman_ratio(1, &[scaled, g2.clone()], &grid).unwrap();
        prop_assert!(r.slack > 0.0);
        prop_assert!(r.ratio >= r1.min(r2) * (1.0 - 1e-12) && r.ratio <= r1.max(r2) * (1.0 + 1e-12));
    }
}

#[test]
fn weighted_pair_norm_tends_to_twice_k() {
    let grid = LogGrid::default_half_line();
    let est = pair_norm_estimate(&WeightedPairSpec::cesaro(), PairSide::A, &grid, 10_000, 1e-6, DEFAULT_SEED).unwrap();
    assert!((est.extrapolated - 2.0).abs() <= 0.02 * 2.0, "{est:?}");
    assert!(est.raw < est.extrapolated);
}

#[test]
fn zero_sized_inputs_stay_rejected() {
    assert!(birman_constant(0).is_err());
    assert!(SpectralPolynomials::new(0).is_err());
    assert!(r_zero_is_zero());
}

fn r_zero_is_zero() -> bool {
    SpectralPolynomials::new(3).unwrap().r_exact(&BigRational::zero()) == Some(BigRational::zero())
}
