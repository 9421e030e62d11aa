//! Named test functions selectable from the command line.

use std::path::PathBuf;
use std::sync::Arc;

use birman::analytic::{PowerExp, SharedFunction};
use birman::functional::{random_admissible_family, ProbeSpec};
use clap::ValueEnum;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HalfLineFunction {
    /// f = 0; rejected as trivial.
    Zero,
    /// x^(k+1/2) e^(-rate x).
    Gamma,
    /// The truncated-monomial probe with n-th derivative x^sigma on (0, a).
    Probe,
    /// Seeded x^n (c0 + c1 x + c2 x^2) e^(-x).
    Random,
    /// Samples from --csv; derivatives by finite differences.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntervalFunction {
    /// f = 0; rejected as trivial.
    Zero,
    /// (x - a)^n (b - x)^n.
    Bubble,
    /// The polynomial with ascending coefficients from --coeffs.
    Poly,
}

/// What `ratio` evaluates.
pub enum Selected {
    Analytic(Vec<SharedFunction>),
    Probe(ProbeSpec),
    Csv(PathBuf),
}

pub struct HalfLineArgs<'a> {
    pub n: usize,
    pub k: Option<f64>,
    pub rate: f64,
    pub sigma: f64,
    pub a: f64,
    pub seed: u64,
    pub m: usize,
    pub csv: Option<&'a PathBuf>,
}

pub fn half_line(choice: HalfLineFunction, args: &HalfLineArgs) -> Result<Selected, CliError> {
    if args.m != 1 && choice != HalfLineFunction::Random {
        return Err(CliError::Usage("--m above 1 is only available with --function random".into()));
    }
    Ok(match choice {
        HalfLineFunction::Zero => Selected::Analytic(vec![Arc::new(PowerExp::zero())]),
        HalfLineFunction::Gamma => {
            let k = args.k.unwrap_or(args.n as f64);
            if !(args.rate > 0.0) {
                return Err(CliError::Usage(format!("--rate must be positive, got {}", args.rate)));
            }
            Selected::Analytic(vec![Arc::new(PowerExp::gamma_class(k + 0.5, args.rate))])
        }
        HalfLineFunction::Probe => Selected::Probe(ProbeSpec::new(args.n, args.sigma, args.a)?),
        HalfLineFunction::Random => {
            let fams = random_admissible_family(args.n, args.m, args.seed);
            Selected::Analytic(fams.into_iter().map(|f| Arc::new(f) as SharedFunction).collect())
        }
        HalfLineFunction::Csv => match args.csv {
            Some(p) => Selected::Csv(p.clone()),
            None => return Err(CliError::Usage("--function csv needs --csv <FILE>".into())),
        },
    })
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, x) in p.iter().enumerate() {
        for (j, y) in q.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn interval(choice: IntervalFunction, n: usize, a: f64, b: f64, coeffs: &[f64]) -> Result<PowerExp, CliError> {
    Ok(match choice {
        IntervalFunction::Zero => PowerExp::zero(),
        IntervalFunction::Bubble => {
            let mut p = vec![1.0];
            for _ in 0..n {
                p = poly_mul(&p, &[-a, 1.0]);
                p = poly_mul(&p, &[b, -1.0]);
            }
            PowerExp::polynomial(&p)
        }
        IntervalFunction::Poly => {
            if coeffs.is_empty() {
                return Err(CliError::Usage("--function poly needs --coeffs c0,c1,...".into()));
            }
            PowerExp::polynomial(coeffs)
        }
    })
}
