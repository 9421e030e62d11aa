//! Exact constants, coefficient tables, and the spectral polynomials.
//!
//! Everything here is computed in arbitrary-precision rationals and only
//! converted to `f64` on request: `[(2n-1)!!]^2` no longer fits in a `u64`
//! from `n = 17` on.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// `(2n-1)!! = (2n-1)(2n-3)...3*1`, with `(-1)!! = 1` for `n = 0`.
pub fn odd_double_factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(2 * k - 1))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

pub(crate) fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_index(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidIndex("n must be at least 1".into()));
    }
    Ok(())
}

/// The sharp constant of the `n`-th inequality together with the norm of
/// the generalized Cesaro operator `T_n`, its reciprocal square root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpConstant {
    pub n: usize,
    /// `[(2n-1)!!]^2 / 2^(2n)`
    pub c_n: BigRational,
    /// `2^n / (2n-1)!!`
    pub b_n: BigRational,
}

impl SharpConstant {
    pub fn c_f64(&self) -> f64 {
        self.c_n.to_f64().unwrap_or(f64::NAN)
    }

    pub fn b_f64(&self) -> f64 {
        self.b_n.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact Birman constant `c_n = [(2n-1)!!]^2 / 4^n` and `b_n = 2^n / (2n-1)!!`.
///
/// ```
/// let k = birman::constants::birman_constant(2).unwrap();
/// assert_eq!(k.c_n.to_string(), "9/16");
/// assert_eq!(k.b_n.to_string(), "4/3");
/// ```
pub fn birman_constant(n: usize) -> Result<SharpConstant> {
    check_index(n)?;
    let odd = odd_double_factorial(n);
    let pow = BigInt::one() << n;
    let c_n = BigRational::new(&odd * &odd, &pow * &pow);
    let b_n = BigRational::new(pow, odd);
    Ok(SharpConstant { n, c_n, b_n })
}

/// `||T_n|| = 2^n / (2n-1)!!`, exactly.
pub fn cesaro_norm(n: usize) -> Result<BigRational> {
    Ok(birman_constant(n)?.b_n)
}

/// Constant of the power-weighted inequality
/// `int x^alpha |f^(n)|^2 >= C int |f|^2 x^(alpha - 2n)`:
/// `C = [prod_{j=1}^n (2n + 1 - 2j - alpha)]^2 / 2^(2n)`.
///
/// Vanishes when `alpha = 2n + 1 - 2j` for some `1 <= j <= n`.
pub fn glazman_constant(n: usize, alpha: f64) -> Result<f64> {
    check_index(n)?;
    // every finite double is a rational, so the product is exact and the
    // result correctly rounded; at alpha = 0 it equals c_n to the last bit
    let alpha = BigRational::from_float(alpha)
        .ok_or_else(|| Error::InvalidArgument(format!("alpha = {alpha} must be finite")))?;
    let prod: BigRational = (1..=n)
        .map(|j| BigRational::from_integer(BigInt::from(2 * n + 1 - 2 * j)) - &alpha)
        .product();
    let four_n = BigRational::from_integer(BigInt::from(4).pow(n as u32));
    Ok((&prod * &prod / four_n).to_f64().unwrap_or(f64::INFINITY))
}

/// Coefficients of `(x^n f)^(k) = sum_j a_j(n,k) x^(n-k+j) f^(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeibnizTable {
    pub n: usize,
    pub k: usize,
    /// `coeffs[j] = a_j(n, k)` for `0 <= j <= k`.
    #[serde(serialize_with = "serialize_bigints")]
    pub coeffs: Vec<BigInt>,
}

fn serialize_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for b in v {
        seq.serialize_element(&b.to_string())?;
    }
    seq.end()
}

impl LeibnizTable {
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY))
            .collect()
    }
}

/// `a_j(n,k) = binom(k,j) * prod_{l=0}^{k-j-1} (n - l)`.
pub fn leibniz_coeffs(n: usize, k: usize) -> Result<LeibnizTable> {
    if k > n {
        return Err(Error::InvalidIndex(format!("k = {k} exceeds n = {n}")));
    }
    let coeffs = (0..=k)
        .map(|j| {
            let falling = (0..k - j).fold(BigInt::one(), |acc, l| acc * BigInt::from(n - l));
            binomial(k, j) * falling
        })
        .collect();
    Ok(LeibnizTable { n, k, coeffs })
}

/// Polynomial tail `sum_k b_k x^k` of the `n`-fold antiderivative of the
/// truncated power `x^sigma 1_(0,a)`, valid for `x > a`:
/// `b_k = (-1)^(n-k+1) a^(n-k+sigma) / (k! (n-k-1)! (n-k+sigma))`.
pub fn probe_tail_coeffs(n: usize, sigma: f64, a: f64) -> Result<Vec<f64>> {
    check_index(n)?;
    if !(sigma > -0.5) {
        return Err(Error::InvalidArgument(format!(
            "sigma = {sigma} must exceed -1/2 for the probe to be square integrable"
        )));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("cutoff a = {a} must be positive")));
    }
    Ok((0..n)
        .map(|k| {
            let m = (n - k) as f64;
            let sign = if (n - k + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * a.powf(m + sigma)
                / (factorial_f64(k) * factorial_f64(n - k - 1) * (m + sigma))
        })
        .collect())
}

/// `p_n(z) = prod_{k=0}^{n-1} (z + k)` and the rational function
/// `r_n(z) = z^n / prod_{k=1}^{n-1} (1 + k z)` linking `T_n` to `T_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralPolynomials {
    pub n: usize,
    /// Ascending coefficients of `p_n`.
    pub p: Vec<BigInt>,
    /// Ascending coefficients of the denominator of `r_n`; the numerator is `z^n`.
    pub r_denominator: Vec<BigInt>,
}

fn poly_mul_linear(poly: &[BigInt], c0: &BigInt, c1: &BigInt) -> Vec<BigInt> {
    // (c0 + c1 z) * poly
    let mut out = vec![BigInt::zero(); poly.len() + 1];
    for (i, a) in poly.iter().enumerate() {
        out[i] += a * c0;
        out[i + 1] += a * c1;
    }
    out
}

impl SpectralPolynomials {
    pub fn new(n: usize) -> Result<Self> {
        check_index(n)?;
        let one = BigInt::one();
        let mut p = vec![one.clone()];
        for k in 0..n {
            p = poly_mul_linear(&p, &BigInt::from(k), &one);
        }
        let mut den = vec![one.clone()];
        for k in 1..n {
            den = poly_mul_linear(&den, &one, &BigInt::from(k));
        }
        Ok(Self { n, p, r_denominator: den })
    }

    pub fn p_exact(&self, z: &BigRational) -> BigRational {
        horner_exact(&self.p, z)
    }

    /// `None` at a pole.
    pub fn r_exact(&self, z: &BigRational) -> Option<BigRational> {
        let den = horner_exact(&self.r_denominator, z);
        if den.is_zero() {
            return None;
        }
        let mut num = BigRational::one();
        for _ in 0..self.n {
            num *= z;
        }
        Some(num / den)
    }
}

fn horner_exact(coeffs: &[BigInt], z: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| {
        acc * z + BigRational::from_integer(c.clone())
    })
}

/// `p_n(z)`, evaluated in product form.
pub fn eval_p_n(n: usize, z: Complex64) -> Result<Complex64> {
    check_index(n)?;
    Ok((0..n).map(|k| z + k as f64).product())
}

const POLE_TOL: f64 = 1e-12;

/// `r_n(z)`, evaluated in product form; errors within `1e-12` of a pole.
pub fn eval_r_n(n: usize, z: Complex64) -> Result<Complex64> {
    check_index(n)?;
    let mut value = z.powu(n as u32);
    for k in 1..n {
        let d = Complex64::new(1.0, 0.0) + z * k as f64;
        if d.norm() <= POLE_TOL {
            return Err(Error::Pole { n, z: format!("{z}") });
        }
        value /= d;
    }
    Ok(value)
}
