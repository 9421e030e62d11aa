//! `birman`: command-line access to the constants, ratios, norms, spectra
//! and Mellin checks of the `birman` library.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when the numerics fail
//! (singular or divergent integrals, non-convergence), 1 on I/O errors.

mod output;
mod registry;

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use birman::analytic::{AnalyticFunction, GaussianLog};
use birman::constants::{birman_constant, glazman_constant};
use birman::functional::{
    birman_ratio, glazman_ratio, probe_ratio, sharpness_sweep, RatioReport, DEFAULT_CUTOFF, RATIO_COUNT, RATIO_WINDOW,
    SWEEP_EPSILONS,
};
use birman::grid::{norm_sq, GridFunction, LogGrid};
use birman::interval::{
    interval_ratio, interval_sharpness_sweep, splitting_parts, vector_birman_ratio, vector_birman_ratio_sampled,
    IntervalProblem, Side, SplitParts,
};
use birman::operators::norm::{cesaro_norm_estimate, pair_norm_estimate};
use birman::operators::{PairSide, WeightedPairSpec};
use birman::spectral::{curve_max_modulus, mellin_forward, spectrum_curve, verify_diagonalization};
use birman::DEFAULT_SEED;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use registry::{HalfLineArgs, HalfLineFunction, IntervalFunction, Selected};

#[derive(Debug)]
pub enum CliError {
    Lib(birman::Error),
    Usage(String),
    Io(String),
}

impl From<birman::Error> for CliError {
    fn from(e: birman::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 3,
            CliError::Lib(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "birman", version, about = "Sharp constants of higher-order Hardy inequalities, Cesaro operators and their spectra")]
struct Cli {
    /// Worker threads for sweeps, sampling and power iteration. Results do
    /// not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact constants c_n = [(2n-1)!!]^2 / 4^n and b_n = ||T_n|| = 2^n / (2n-1)!!.
    ///
    /// Prints c_n and b_n as exact rationals for n = 1..n_max, with the
    /// weighted constants C(n, alpha) = [prod_j (2n+1-2j-alpha)]^2 / 4^n of
    /// int x^alpha |f^(n)|^2 >= C int x^(alpha-2n) |f|^2 for each --alpha.
    Constants {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Comma-separated alpha values for the weighted constants.
        #[arg(long, value_delimiter = ',', default_values_t = [-1.0, -0.5, 0.0, 0.5], allow_negative_numbers = true)]
        alpha: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// The ratio int |f^(n)|^2 / int |f|^2 x^(-2n) against c_n.
    ///
    /// With --alpha the weighted ratio int x^alpha |f^(n)|^2 / int
    /// x^(alpha-2n) |f|^2 against C(n, alpha). With --m above 1 the
    /// vector-valued ratio sum_k int |f_k^(n)|^2 / sum_k int |f_k|^2 x^(-2n).
    /// Probes use the closed form of both integrals.
    Ratio(RatioArgs),
    /// Probe ratios at sigma = -1/2 + epsilon, decreasing to c_n as epsilon -> 0.
    ///
    /// The probe F has F^(n) = x^sigma on (0, a) and 0 beyond, so its ratio
    /// exceeds c_n for every epsilon > 0 and tends to it: c_n is sharp.
    Sharpness {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = SWEEP_EPSILONS)]
        epsilons: Vec<f64>,
        /// Cutoff of the probe.
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        a: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Power-iteration estimate of ||T_n|| = 2^n / (2n-1)!! on L^2(0, inf).
    ///
    /// T_n f(x) = x^(-n) int_0^x (x-t)^(n-1) f(t) dt / (n-1)!. The window is
    /// also halved and both estimates are extrapolated in 1/L^2, L the
    /// window length in ln x. With --pair the operator A (or B) of a
    /// weighted pair, with ||A|| <= 2K.
    Norm(NormArgs),
    /// The spectral curve r_n(1 + e^{i theta}), r_n(z) = z^n / prod_{k=1}^{n-1} (1 + k z).
    ///
    /// The spectrum of T_n is the image of the circle |z - 1| = 1 under r_n;
    /// for n = 1 it is that circle itself. Emits theta,re,im CSV or an SVG
    /// polyline.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8192)]
        theta_count: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Checks M[(x f)'](lambda) = (1/2 - i lambda) M[f](lambda) for the Mellin transform.
    ///
    /// M[f](lambda) = (2 pi)^(-1/2) int f(x) x^(-1/2 + i lambda) dx, computed
    /// by FFT in u = ln x. Reports the relative residual at N and 2N nodes
    /// and the Parseval defect | ||Mf|| - ||f|| | / ||f||. The test function
    /// is a Gaussian in ln x times x^(-1/2).
    MellinCheck(MellinArgs),
    /// The ratio int |f^(n)|^2 / int |f|^2 / d(x)^(2n) on (a, b) against c_n.
    ///
    /// d(x) = x - a, b - x or min(x - a, b - x) for --side left, right or
    /// both. For side both the splitting at the midpoint m,
    /// int_a^b |f|^2/d^(2n) = int_a^m |f|^2/(x-a)^(2n) + int_m^b |f|^2/(b-x)^(2n),
    /// is reported as well. --sweep runs the boundary probe
    /// (x - a)^(n + sigma) at sigma = -1/2 + epsilon instead.
    Interval(IntervalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    function: HalfLineFunction,
    /// Weight exponent; omitted means the unweighted ratio.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Gamma class: power k + 1/2 (default n).
    #[arg(long)]
    k: Option<f64>,
    /// Gamma class: decay rate.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Probe: epsilon in sigma = -1/2 + epsilon.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Probe: cutoff.
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    a: f64,
    /// Random functions: seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of vector components (random functions only).
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// CSV samples (columns x,re,im or x,re_1,im_1,...).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = RATIO_WINDOW.0)]
    x_min: f64,
    #[arg(long, default_value_t = RATIO_WINDOW.1)]
    x_max: f64,
    #[arg(long, default_value_t = RATIO_COUNT)]
    count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Pair {
    /// phi = 1, psi = 1/x, w = 1 on (0, inf): B = T_1, K = 1.
    Cesaro,
    /// phi = x, psi = 1/x^2, w = 1 on (0, inf): K = 1/3.
    RellichStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairSideArg {
    A,
    B,
}

#[derive(Args)]
struct NormArgs {
    /// Index of T_n (ignored with --pair).
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, value_enum)]
    pair: Option<Pair>,
    #[arg(long, value_enum, default_value_t = PairSideArg::A)]
    side: PairSideArg,
    #[arg(long, default_value_t = 1e-6)]
    x_min: f64,
    #[arg(long, default_value_t = 1e6)]
    x_max: f64,
    #[arg(long, default_value_t = 4096)]
    count: usize,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MellinArgs {
    /// Centre of the Gaussian in ln x.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    center: f64,
    /// Width of the Gaussian in ln x.
    #[arg(long, default_value_t = 0.003)]
    width: f64,
    #[arg(long, default_value_t = 1e-6)]
    x_min: f64,
    #[arg(long, default_value_t = 1e6)]
    x_max: f64,
    /// Grid size N, a power of two.
    #[arg(long, default_value_t = 1 << 14)]
    count: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IntervalArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, value_enum, default_value_t = SideArg::Both)]
    side: SideArg,
    #[arg(long, value_enum, default_value_t = IntervalFunction::Bubble)]
    function: IntervalFunction,
    /// Ascending polynomial coefficients for --function poly.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coeffs: Vec<f64>,
    /// Run the boundary-probe sweep (side left or right).
    #[arg(long)]
    sweep: bool,
    #[arg(long, value_delimiter = ',', default_values_t = SWEEP_EPSILONS)]
    epsilons: Vec<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Left,
    Right,
    Both,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
            SideArg::Both => Side::Both,
        }
    }
}

#[derive(Serialize)]
struct ConstantsRow {
    n: usize,
    c_n: String,
    b_n: String,
    c_n_value: f64,
    b_n_value: f64,
    weighted: Vec<WeightedConstant>,
}

#[derive(Serialize)]
struct WeightedConstant {
    alpha: f64,
    constant: f64,
}

#[derive(Serialize)]
struct Labelled<T: Serialize> {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    function: Option<String>,
    #[serde(flatten)]
    body: T,
}

fn labelled<T: Serialize>(command: &'static str, function: Option<String>, body: T) -> Labelled<T> {
    Labelled { command, function, body }
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    Ok(())
}

fn constants(n_max: usize, alphas: &[f64], output: Option<PathBuf>) -> Result<(), CliError> {
    check_n(n_max)?;
    let rows = (1..=n_max)
        .map(|n| {
            let s = birman_constant(n)?;
            let weighted = alphas
                .iter()
                .map(|&alpha| Ok(WeightedConstant { alpha, constant: glazman_constant(n, alpha)? }))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(ConstantsRow {
                n,
                c_n: s.c_n.to_string(),
                b_n: s.b_n.to_string(),
                c_n_value: s.c_f64(),
                b_n_value: s.b_f64(),
                weighted,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    #[derive(Serialize)]
    struct Table {
        rows: Vec<ConstantsRow>,
    }
    output::emit(&output::to_json(&labelled("constants", None, Table { rows }))?, output.as_deref())
}

fn read_samples(path: &PathBuf) -> Result<GridFunction, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(GridFunction::read_csv(BufReader::new(file))?)
}

fn ratio(args: RatioArgs) -> Result<(), CliError> {
    check_n(args.n)?;
    let choice = args.function;
    let selected = registry::half_line(
        choice,
        &HalfLineArgs {
            n: args.n,
            k: args.k,
            rate: args.rate,
            sigma: -0.5 + args.epsilon,
            a: args.a,
            seed: args.seed,
            m: args.m,
            csv: args.csv.as_ref(),
        },
    )?;
    let grid = LogGrid::new(args.grid.x_min, args.grid.x_max, args.grid.count)?;
    let report: RatioReport = match selected {
        Selected::Probe(spec) => {
            if args.alpha.is_some() {
                return Err(CliError::Usage("the probe ratio is unweighted; drop --alpha".into()));
            }
            probe_ratio(&spec)?
        }
        Selected::Csv(path) => {
            if args.alpha.is_some() {
                return Err(CliError::Usage("CSV input supports the unweighted ratio only".into()));
            }
            eprintln!("warning: CSV input uses numerical derivatives, degraded accuracy");
            vector_birman_ratio_sampled(args.n, &read_samples(&path)?)?
        }
        Selected::Analytic(funcs) if funcs.len() > 1 => {
            if args.alpha.is_some() {
                return Err(CliError::Usage("the vector ratio is unweighted; drop --alpha".into()));
            }
            vector_birman_ratio(args.n, &funcs, &grid)?
        }
        Selected::Analytic(funcs) => {
            let f: &dyn AnalyticFunction = funcs[0].as_ref();
            match args.alpha {
                Some(alpha) => glazman_ratio(args.n, alpha, f, &grid)?,
                None => birman_ratio(args.n, f, &grid)?,
            }
        }
    };
    let name = choice.to_possible_value().map(|v| v.get_name().to_string());
    output::emit(&output::to_json(&labelled("ratio", name, report))?, args.output.as_deref())
}

fn sharpness(n: usize, epsilons: &[f64], a: f64, output: Option<PathBuf>) -> Result<(), CliError> {
    check_n(n)?;
    let sweep = sharpness_sweep(n, epsilons, a)?;
    output::emit(&output::to_json(&labelled("sharpness", Some("probe".into()), sweep))?, output.as_deref())
}

#[derive(Serialize)]
struct NormReport {
    operator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    count: usize,
    x_min: f64,
    x_max: f64,
    seed: u64,
    raw: f64,
    half_window: f64,
    extrapolated: f64,
    iterations: usize,
    exact: Option<f64>,
    relative_error: Option<f64>,
}

fn norm(args: NormArgs) -> Result<(), CliError> {
    let grid = LogGrid::new(args.x_min, args.x_max, args.count)?;
    let (operator, n, est, exact) = match args.pair {
        None => {
            check_n(args.n)?;
            let est = cesaro_norm_estimate(args.n, &grid, args.max_iter, args.tol, args.seed)?;
            (format!("T_{}", args.n), Some(args.n), est, Some(birman_constant(args.n)?.b_f64()))
        }
        Some(pair) => {
            let spec = match pair {
                Pair::Cesaro => WeightedPairSpec::cesaro(),
                Pair::RellichStep => WeightedPairSpec::rellich_step(),
            };
            let side = match args.side {
                PairSideArg::A => PairSide::A,
                PairSideArg::B => PairSide::B,
            };
            let est = pair_norm_estimate(&spec, side, &grid, args.max_iter, args.tol, args.seed)?;
            let name = format!("{} ({}), side {:?}", pair.to_possible_value().expect("not skipped").get_name(), spec.label(), args.side);
            // the bound ||A|| <= 2K is attained for the power families
            (name, None, est, spec.k_exact().map(|k| 2.0 * k))
        }
    };
    let report = NormReport {
        operator,
        n,
        count: args.count,
        x_min: args.x_min,
        x_max: args.x_max,
        seed: args.seed,
        raw: est.raw,
        half_window: est.half_window,
        extrapolated: est.extrapolated,
        iterations: est.iterations,
        exact,
        relative_error: exact.map(|e| (est.extrapolated - e).abs() / e),
    };
    output::emit(&output::to_json(&labelled("norm", None, report))?, args.output.as_deref())
}

fn spectrum(n: usize, theta_count: usize, format: Format, output: Option<PathBuf>) -> Result<(), CliError> {
    check_n(n)?;
    let curve = spectrum_curve(n, theta_count)?;
    let text = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            curve.write_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
            String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))?
        }
        Format::Svg => curve.to_svg(640, 480),
    };
    output::emit(&text, output.as_deref())?;
    eprintln!("max |r_{n}(1 + e^(i theta))| = {}", birman::grid::fmt17(curve_max_modulus(&curve)));
    Ok(())
}

#[derive(Serialize)]
struct MellinReport {
    center: f64,
    width: f64,
    x_min: f64,
    x_max: f64,
    count: usize,
    residual: f64,
    residual_doubled: f64,
    decreasing: bool,
    parseval_defect: f64,
    edge_magnitude: f64,
}

fn mellin_check(args: MellinArgs) -> Result<(), CliError> {
    if !args.count.is_power_of_two() {
        return Err(birman::Error::NotPowerOfTwo(args.count).into());
    }
    let f = GaussianLog::new(args.center, args.width, -0.5)?;
    let grid = LogGrid::new(args.x_min, args.x_max, args.count)?;
    let doubled = LogGrid::new(args.x_min, args.x_max, 2 * args.count)?;
    let (r1, r2) = rayon::join(|| verify_diagonalization(&f, &grid), || verify_diagonalization(&f, &doubled));
    let (residual, residual_doubled) = (r1?, r2?);
    let samples = GridFunction::from_real_fn(grid, |x| f.eval(0, x));
    let transformed = mellin_forward(&samples)?;
    if !transformed.is_decaying() {
        eprintln!("warning: the transform is not negligible at the ends of the lambda range");
    }
    let size = norm_sq(&samples, 0.0)?.sqrt();
    let report = MellinReport {
        center: args.center,
        width: args.width,
        x_min: args.x_min,
        x_max: args.x_max,
        count: args.count,
        residual,
        residual_doubled,
        decreasing: residual_doubled < residual,
        parseval_defect: (transformed.l2_norm() - size).abs() / size,
        edge_magnitude: transformed.edge_magnitude,
    };
    output::emit(&output::to_json(&labelled("mellin-check", Some("gaussian-log".into()), report))?, args.output.as_deref())
}

#[derive(Serialize)]
struct IntervalReport {
    #[serde(flatten)]
    report: RatioReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    splitting: Option<SplitParts>,
}

fn interval(args: IntervalArgs) -> Result<(), CliError> {
    check_n(args.n)?;
    let problem = IntervalProblem::new(args.n, args.a, args.b, args.side.into())?;
    if args.sweep {
        #[derive(Serialize)]
        struct Sweep {
            epsilons: Vec<f64>,
            reports: Vec<RatioReport>,
        }
        let reports = interval_sharpness_sweep(&problem, &args.epsilons)?;
        let body = Sweep { epsilons: args.epsilons, reports };
        return output::emit(&output::to_json(&labelled("interval", Some("probe".into()), body))?, args.output.as_deref());
    }
    let f = registry::interval(args.function, args.n, args.a, args.b, &args.coeffs)?;
    let report = interval_ratio(&problem, &f)?;
    let splitting = if problem.side == Side::Both { Some(splitting_parts(&problem, &f)?) } else { None };
    let name = args.function.to_possible_value().map(|v| v.get_name().to_string());
    let body = IntervalReport { report, splitting };
    output::emit(&output::to_json(&labelled("interval", name, body))?, args.output.as_deref())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Io(e.to_string()))?;
    match cli.command {
        Command::Constants { n_max, alpha, output } => constants(n_max, &alpha, output),
        Command::Ratio(args) => ratio(args),
        Command::Sharpness { n, epsilons, a, output } => sharpness(n, &epsilons, a, output),
        Command::Norm(args) => norm(args),
        Command::Spectrum { n, theta_count, format, output } => spectrum(n, theta_count, format, output),
        Command::MellinCheck(args) => mellin_check(args),
        Command::Interval(args) => interval(args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
