use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use chen_core::chen::MAX_WORD_LEN;
use chen_core::tensor::{Cap, SignatureEngine};
use chen_core::{chen_coefficients, stratonovich_moment, CurvatureTensor};
use chen_heat::index::{verify_local_index, IndexMcSettings};
use chen_heat::paths::{empirical_moments, sample_brownian};
use chen_heat::semigroup::{convergence_study, random_model, McSettings};

/// Numerical checks for truncated Chen series of Brownian motion, heat
/// semigroup approximants, and the local index density.
#[derive(Parser)]
#[command(name = "chenheat", version, about)]
struct Cli {
    /// Worker threads for Monte Carlo loops; falls back to the
    /// CHENHEAT_THREADS environment variable, then to all cores. Results do
    /// not depend on this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Chen-Strichartz identity on random piecewise-linear paths.
    VerifyChen(VerifyChenArgs),
    /// Print the closed-form Stratonovich moment table, optionally with a
    /// Monte Carlo comparison column.
    Moments(MomentsArgs),
    /// Convergence-order study of the truncated semigroup approximant.
    Converge(ConvergeArgs),
    /// Top A-hat form coefficient of a curvature tensor.
    Agenus(AgenusArgs),
    /// Monte Carlo local index density against its closed form.
    IndexDensity(IndexDensityArgs),
}

#[derive(Args)]
struct VerifyChenArgs {
    /// Number of driving Brownian directions.
    #[arg(long, default_value_t = 2)]
    dim: u8,
    /// Truncation degree of the tensor algebra.
    #[arg(long = "order", visible_alias = "N", default_value_t = 4)]
    order: usize,
    /// Dyadic grid level: paths use 2^level segments.
    #[arg(long, visible_alias = "grid", default_value_t = 8)]
    level: u32,
    /// Independent random paths to check.
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Largest allowed coefficient discrepancy.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long, default_value_t = 2)]
    dim: u8,
    /// Include all words of length at most this.
    #[arg(long = "order", visible_alias = "N", default_value_t = 4)]
    order: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// When set, append Monte Carlo columns over this many paths.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, visible_alias = "grid", default_value_t = 8)]
    level: u32,
    /// Required when --samples is set.
    #[arg(long)]
    seed: Option<u64>,
    /// Disable the two-level grid-bias extrapolation of the Monte Carlo
    /// column.
    #[arg(long, default_value_t = false)]
    no_extrapolate: bool,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, default_value_t = 2)]
    dim: u8,
    /// Matrix size of the random model.
    #[arg(long, default_value_t = 4)]
    size: usize,
    /// Truncation order of the approximant.
    #[arg(long = "order", visible_alias = "N", default_value_t = 3)]
    order: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Smallest time; the grid halves from --tmax down to here.
    #[arg(long, default_value_t = 0.00390625)]
    tmin: f64,
    #[arg(long, default_value_t = 0.25)]
    tmax: f64,
    #[arg(long, visible_alias = "grid", default_value_t = 6)]
    level: u32,
    /// Disable the antithetic (mirrored-path) variance reduction.
    #[arg(long, default_value_t = false)]
    no_antithetic: bool,
}

#[derive(Args)]
struct AgenusArgs {
    #[arg(long, default_value_t = 4)]
    dim: u8,
    /// One of constant:<kappa>, product:<k1>,<k2>, random:<seed>.
    #[arg(long)]
    curvature: String,
}

#[derive(Args)]
struct IndexDensityArgs {
    #[arg(long, default_value_t = 4)]
    dim: u8,
    /// One of constant:<kappa>, product:<k1>,<k2>, random:<seed>.
    #[arg(long)]
    curvature: String,
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    #[arg(long, visible_alias = "grid", default_value_t = 10)]
    level: u32,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug)]
enum CliError {
    BadCurvature(String),
    SeedRequired,
    BadParams(String),
    Compute(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::BadCurvature(s) => write!(
                f,
                "bad curvature spec {s:?}: expected constant:<kappa>, \
                 product:<k1>,<k2>, or random:<seed>"
            ),
            CliError::SeedRequired => write!(f, "--seed is required for stochastic runs"),
            CliError::BadParams(s) => write!(f, "{s}"),
            CliError::Compute(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn parse_curvature(spec: &str, dim: u8) -> Result<CurvatureTensor, CliError> {
    let bad = || CliError::BadCurvature(spec.to_string());
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "constant" => {
            let kappa: f64 = rest.parse().map_err(|_| bad())?;
            Ok(CurvatureTensor::constant_curvature(dim, kappa))
        }
        "product" => {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            if dim != 4 {
                return Err(CliError::BadParams(
                    "product curvature requires --dim 4".into(),
                ));
            }
            let k1: f64 = a.parse().map_err(|_| bad())?;
            let k2: f64 = b.parse().map_err(|_| bad())?;
            Ok(CurvatureTensor::product_of_surfaces(k1, k2))
        }
        "random" => {
            let seed: u64 = rest.parse().map_err(|_| bad())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(CurvatureTensor::random_bianchi(
                dim,
                &mut rng as &mut dyn RngCore,
            ))
        }
        _ => Err(bad()),
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_verify_chen(args: &VerifyChenArgs, out: &Option<PathBuf>) -> Result<bool, CliError> {
    if args.dim == 0 || args.order == 0 || args.trials == 0 {
        return Err(CliError::BadParams(
            "need dim >= 1, order >= 1, trials >= 1".into(),
        ));
    }
    let engine = SignatureEngine::new(args.dim, Cap::ByDegree(args.order));
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for _ in 0..args.trials {
        let path = sample_brownian(args.dim, 1.0, args.level, &mut rng)
            .map_err(|e| CliError::Compute(e.to_string()))?;
        let increments = path.increments();
        let sig_vec = engine.signature_coeffs(&increments);
        let lam = chen_coefficients(&engine, &sig_vec)
            .map_err(|e| CliError::Compute(e.to_string()))?;
        let rebuilt = lam
            .lie_series()
            .exp()
            .map_err(|e| CliError::Compute(e.to_string()))?;
        let sig = engine.signature(&increments);
        worst = worst.max(rebuilt.max_abs_diff(&sig));
    }
    let pass = worst < args.tol;
    let text = format!(
        "max coefficient discrepancy over {} trials: {:e} (tolerance {:e}) -> {}\n",
        args.trials,
        worst,
        args.tol,
        if pass { "pass" } else { "FAIL" }
    );
    emit(out, &text)?;
    Ok(pass)
}

fn run_moments(args: &MomentsArgs, out: &Option<PathBuf>) -> Result<bool, CliError> {
    if args.dim == 0 || args.order == 0 || args.order > MAX_WORD_LEN {
        return Err(CliError::BadParams(format!(
            "need dim >= 1 and 1 <= order <= {MAX_WORD_LEN}"
        )));
    }
    if args.samples.is_some() && args.seed.is_none() {
        return Err(CliError::SeedRequired);
    }
    let engine = SignatureEngine::new(args.dim, Cap::ByLength(args.order));
    let words = engine.words();

    let empirical = match args.samples {
        None => None,
        Some(samples) => {
            if samples == 0 {
                return Err(CliError::BadParams("samples must be positive".into()));
            }
            let stats = empirical_moments(
                &engine,
                args.t,
                args.level,
                samples,
                args.seed.unwrap(),
                !args.no_extrapolate,
            )
            .map_err(|e| CliError::Compute(e.to_string()))?;
            Some(
                stats
                    .mean
                    .iter()
                    .zip(&stats.stderr)
                    .map(|(&m, &s)| (m, s))
                    .collect::<Vec<(f64, f64)>>(),
            )
        }
    };

    let mut text = String::new();
    let mut pass = true;
    match &empirical {
        None => text.push_str("word,exact\n"),
        Some(_) => text.push_str("word,exact,empirical,stderr,zscore\n"),
    }
    for (k, w) in words.iter().enumerate() {
        let exact = stratonovich_moment(w, args.t);
        let label: String = w
            .letters()
            .iter()
            .map(|c| char::from(b'0' + c))
            .collect();
        match &empirical {
            None => writeln!(text, "{label},{exact}").expect("string write"),
            Some(emp) => {
                let (mean, se) = emp[k];
                let z = if se > 0.0 { (mean - exact) / se } else { 0.0 };
                if z.abs() > 3.0 {
                    pass = false;
                }
                writeln!(text, "{label},{exact},{mean},{se},{z}").expect("string write");
            }
        }
    }
    emit(out, &text)?;
    Ok(pass)
}

#[derive(Serialize)]
struct ConvergeFooter {
    order: usize,
    fitted_order: Option<f64>,
    expected_order: f64,
    points_used: usize,
    pass: bool,
}

fn run_converge(args: &ConvergeArgs, out: &Option<PathBuf>) -> Result<bool, CliError> {
    if !(args.tmin > 0.0) || args.tmax < args.tmin {
        return Err(CliError::BadParams("need 0 < tmin <= tmax".into()));
    }
    let model = random_model(args.dim, args.size, args.seed)
        .map_err(|e| CliError::Compute(e.to_string()))?;
    let mut times = Vec::new();
    let mut t = args.tmax;
    while t >= args.tmin * (1.0 - 1e-12) {
        times.push(t);
        t /= 2.0;
    }
    let mc = McSettings {
        samples: args.samples,
        level: args.level,
        seed: args.seed,
        antithetic: !args.no_antithetic,
    };
    let report = convergence_study(&model, &[args.order], &times, &mc)
        .map_err(|e| CliError::Compute(e.to_string()))?;

    let mut text = String::from("t,error_exact,error_taylor,stderr,noise_limited\n");
    for row in &report.rows {
        writeln!(
            text,
            "{},{},{},{},{}",
            row.t, row.error_exact, row.error_taylor, row.stderr, row.noise_limited
        )
        .expect("string write");
    }
    let fit = report.fits[0];
    let pass = fit.slope.is_some_and(|s| s >= fit.expected - 0.3);
    let footer = ConvergeFooter {
        order: fit.order,
        fitted_order: fit.slope,
        expected_order: fit.expected,
        points_used: fit.points_used,
        pass,
    };
    writeln!(
        text,
        "{}",
        serde_json::to_string(&footer).expect("serializable")
    )
    .expect("string write");
    emit(out, &text)?;
    Ok(pass)
}

fn run_agenus(args: &AgenusArgs, out: &Option<PathBuf>) -> Result<bool, CliError> {
    let r = parse_curvature(&args.curvature, args.dim)?;
    let top =
        chen_core::a_genus_top(&r).map_err(|e| CliError::Compute(e.to_string()))?;
    emit(out, &format!("{top}\n"))?;
    Ok(true)
}

#[derive(Serialize)]
struct IndexReport {
    mc_value: f64,
    mc_value_im: f64,
    mc_stderr: f64,
    agenus_value: f64,
    reference: f64,
    reference_im: f64,
    tolerance: f64,
    samples: usize,
    pass: bool,
}

fn run_index_density(args: &IndexDensityArgs, out: &Option<PathBuf>) -> Result<bool, CliError> {
    let r = parse_curvature(&args.curvature, args.dim)?;
    let top =
        chen_core::a_genus_top(&r).map_err(|e| CliError::Compute(e.to_string()))?;
    let mc = IndexMcSettings {
        samples: args.samples,
        level: args.level,
        seed: args.seed,
    };
    let check = verify_local_index(&r, &mc).map_err(|e| CliError::Compute(e.to_string()))?;
    let report = IndexReport {
        mc_value: check.estimate.value.re,
        mc_value_im: check.estimate.value.im,
        mc_stderr: check.estimate.stderr,
        agenus_value: top,
        reference: check.reference.re,
        reference_im: check.reference.im,
        tolerance: check.tolerance,
        samples: check.estimate.samples,
        pass: check.pass,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializable");
    text.push('\n');
    emit(out, &text)?;
    Ok(check.pass)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let threads = cli.threads.or_else(|| {
        std::env::var("CHENHEAT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        // ignore the error when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match &cli.command {
        Command::VerifyChen(a) => run_verify_chen(a, &cli.output),
        Command::Moments(a) => run_moments(a, &cli.output),
        Command::Converge(a) => run_converge(a, &cli.output),
        Command::Agenus(a) => run_agenus(a, &cli.output),
        Command::IndexDensity(a) => run_index_density(a, &cli.output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
