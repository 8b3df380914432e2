//! The five subcommands. Each resolves its settings (flag, then config file,
//! then default), echoes them as `#` lines, and writes CSV.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use frankfit::estimators::{
    h_of_theta, log_likelihood, pseudo_observations, PseudoMode, RawBivariateData, DEFAULT_TOL,
};
use frankfit::fisher::{fisher_information, i2_monte_carlo, write_fisher_csv};
use frankfit::output::{fmt_f64, write_comment_header};
use frankfit::sampler::{sample_n, write_sample_csv};
use frankfit::simstudy::{study_grid, rd_rows, run_grid, write_metrics_csv, write_rd_csv, DEFAULT_REPLICATIONS};
use frankfit::{AssociationParameter, BivariateSample, Error, Method, SeedSpec, THETA_MAX};

use crate::config::{pick, required, resolve_seed, CliError, CliResult, ConfigFile};
use crate::input::read_two_columns;

const DEFAULT_FISHER_DRAWS: usize = 1_000_000;
const DEFAULT_SCAN_STEP: f64 = 0.01;
const DEFAULT_SCAN_EXCLUDE: f64 = 0.01;
const DEFAULT_SCAN_RANGE: [f64; 2] = [-10.0, 10.0];
const MAX_GRID_POINTS: usize = 10_000_000;

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

// ---------------------------------------------------------------------------
// shared plumbing

struct Output {
    path: Option<PathBuf>,
    writer: Box<dyn Write>,
}

impl Output {
    fn open(path: Option<&Path>) -> CliResult<Self> {
        let writer: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Self { path: path.map(Path::to_path_buf), writer })
    }

    fn finish(mut self) -> CliResult<()> {
        self.writer.flush().map_err(|e| self.io_error(e))
    }

    fn io_error(&self, e: io::Error) -> CliError {
        match &self.path {
            Some(p) => CliError::Io(format!("{}: {e}", p.display())),
            None => CliError::Io(format!("stdout: {e}")),
        }
    }

    fn write_with<F>(&mut self, f: F) -> CliResult<()>
    where
        F: FnOnce(&mut Box<dyn Write>) -> io::Result<()>,
    {
        f(&mut self.writer).map_err(|e| self.io_error(e))
    }
}

/// Resolved settings in the order they are echoed.
struct Echo(Vec<(String, String)>);

impl Echo {
    fn new(command: &str) -> Self {
        Echo(vec![
            ("frankfit".into(), env!("CARGO_PKG_VERSION").into()),
            ("command".into(), command.into()),
        ])
    }

    fn add(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.0.push((key.into(), value.to_string()));
        self
    }

    fn write(&self, out: &mut Output) -> CliResult<()> {
        out.write_with(|w| write_comment_header(w, &self.0))
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn path_or_stdout(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or_else(|| "-".to_string(), |p| p.display().to_string())
}

fn check_tol(tol: f64) -> CliResult<f64> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Usage(format!("tol must be positive, got {tol}")))
    }
}

/// `lo, lo + step, …` up to `hi`, with a small allowance for rounding at `hi`.
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Usage(format!("range must satisfy lo < hi, got {lo},{hi}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Usage(format!("step must be positive, got {step}")));
    }
    if step > hi - lo {
        return Err(CliError::Usage(format!("step {step} is larger than the range {lo},{hi}")));
    }
    let count = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if count > MAX_GRID_POINTS {
        return Err(CliError::Usage(format!("grid of {count} points is too large")));
    }
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

fn range_pair(range: &[f64]) -> CliResult<(f64, f64)> {
    match range {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(CliError::Usage(format!("range needs exactly two values lo,hi, got {}", range.len()))),
    }
}

// ---------------------------------------------------------------------------
// input handling shared by estimate and scan

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pseudo {
    /// Values are used as they are and must lie inside (0,1).
    None,
    Raw,
    Adjusted,
}

impl FromStr for Pseudo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Pseudo::None),
            "raw" => Ok(Pseudo::Raw),
            "adjusted" => Ok(Pseudo::Adjusted),
            other => Err(format!("unknown pseudo mode '{other}' (none, raw, adjusted)")),
        }
    }
}

impl fmt::Display for Pseudo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pseudo::None => "none",
            Pseudo::Raw => "raw",
            Pseudo::Adjusted => "adjusted",
        })
    }
}

fn load_sample(path: &Path, pseudo: Pseudo) -> CliResult<BivariateSample> {
    let (x1, x2) = read_two_columns(path)?;
    let mode = match pseudo {
        Pseudo::None => {
            return BivariateSample::from_columns(&x1, &x2).map_err(|e| {
                CliError::Usage(format!("{e}; values must lie strictly inside (0,1) with --pseudo none"))
            })
        }
        Pseudo::Raw => PseudoMode::Raw,
        Pseudo::Adjusted => PseudoMode::Adjusted,
    };
    let data = RawBivariateData::new(x1, x2).map_err(usage)?;
    pseudo_observations(&data, mode).map_err(|e| match e {
        Error::BoundaryValue { .. } => CliError::Usage(format!("{e}; use --pseudo adjusted for estimation")),
        e => usage(e),
    })
}

// ---------------------------------------------------------------------------
// generate

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Association parameter; 0 gives independent coordinates.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Number of pairs.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn generate(args: GenerateArgs, mut file: ConfigFile) -> CliResult<()> {
    let theta = required(pick(args.theta, file.take("theta")?), "theta")?;
    let n = required(pick(args.n, file.take("n")?), "n")?;
    let seed = resolve_seed(args.seed, &mut file)?;
    let out_path = pick(args.out, file.take("out")?);
    file.finish()?;

    let parameter = AssociationParameter::new(theta).map_err(usage)?;
    let sample = sample_n(parameter, n, SeedSpec::new(seed, 0)).map_err(usage)?;

    let mut out = Output::open(out_path.as_deref())?;
    Echo::new("generate")
        .add("theta", theta)
        .add("n", n)
        .add("seed", seed)
        .add("out", path_or_stdout(&out_path))
        .write(&mut out)?;
    out.write_with(|w| write_sample_csv(w, &sample))?;
    out.finish()
}

// ---------------------------------------------------------------------------
// estimate

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Two-column CSV; `#` lines are skipped and a header row is optional.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// How to turn the columns into pseudo-observations.
    #[arg(long)]
    pub pseudo: Option<Pseudo>,
    /// Comma-separated subset of ml, mm1, mm2.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// Residual tolerance of the root solvers.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn flags_of(r: &frankfit::EstimateResult) -> String {
    let mut flags = Vec::new();
    if r.independence_flag {
        flags.push("independence");
    }
    if r.multiplicity_warning {
        flags.push("multiple-roots");
    }
    if flags.is_empty() {
        "none".into()
    } else {
        flags.join(";")
    }
}

pub fn estimate(args: EstimateArgs, mut file: ConfigFile) -> CliResult<()> {
    let input: PathBuf = required(pick(args.input, file.take("in")?), "in")?;
    let pseudo = pick(args.pseudo, file.take("pseudo")?).unwrap_or(Pseudo::Adjusted);
    let methods = pick(args.methods, file.take_list("methods")?).unwrap_or_else(|| Method::ALL.to_vec());
    let tol = check_tol(pick(args.tol, file.take("tol")?).unwrap_or(DEFAULT_TOL))?;
    let out_path = pick(args.out, file.take("out")?);
    file.finish()?;
    if methods.is_empty() {
        return Err(CliError::Usage("no methods selected".into()));
    }

    let sample = load_sample(&input, pseudo)?;

    let mut out = Output::open(out_path.as_deref())?;
    Echo::new("estimate")
        .add("in", input.display())
        .add("pseudo", pseudo)
        .add("methods", join(&methods))
        .add("tol", tol)
        .add("n", sample.len())
        .add("out", path_or_stdout(&out_path))
        .write(&mut out)?;
    out.write_with(|w| writeln!(w, "method,theta_hat,residual,iterations,flags"))?;

    let mut failures = Vec::new();
    for m in methods {
        let line = match m.estimate(&sample, tol) {
            Ok(r) => format!(
                "{},{},{},{},{}",
                m,
                fmt_f64(r.theta_hat),
                fmt_f64(r.residual),
                r.iterations,
                flags_of(&r)
            ),
            Err(e) => {
                let (boundary, flag) = match &e {
                    Error::NoBracket { boundary_estimate } => (*boundary_estimate, "no-bracket"),
                    Error::MomentOutOfRange { boundary_estimate, .. } => (*boundary_estimate, "moment-out-of-range"),
                    Error::DegenerateSample => (f64::NAN, "degenerate"),
                    _ => (f64::NAN, "failed"),
                };
                failures.push(format!("{m}: {e}"));
                format!("{},{},{},0,{}", m, fmt_f64(boundary), fmt_f64(f64::NAN), flag)
            }
        };
        out.write_with(|w| writeln!(w, "{line}"))?;
    }
    out.finish()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Estimation(failures.join("; ")))
    }
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Replications per cell.
    #[arg(long = "L", visible_alias = "replications")]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of CPUs). Does not affect results.
    #[arg(long)]
    pub parallelism: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the relative difference between n·MSE(ML) and 1/I(θ).
    #[arg(long)]
    pub with_rd: bool,
    /// Where the RD table goes. Defaults to `<out stem>_rd.csv` next to
    /// `--out`, or to stdout after the metrics.
    #[arg(long)]
    pub rd_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `dir/metrics.csv` → `dir/metrics_rd.csv`.
pub fn derived_rd_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "metrics".into(), |s| s.to_string_lossy().into_owned());
    let ext = out.extension().map_or_else(|| "csv".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}_rd.{ext}"))
}

pub fn simulate(args: SimulateArgs, mut file: ConfigFile) -> CliResult<()> {
    let ns: Vec<usize> = required(pick(args.n, file.take_list("n")?), "n")?;
    let thetas: Vec<f64> = required(pick(args.theta, file.take_list("theta")?), "theta")?;
    let replications = pick(args.replications, file.take("L")?).unwrap_or(DEFAULT_REPLICATIONS);
    let seed = resolve_seed(args.seed, &mut file)?;
    let default_threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let parallelism = pick(args.parallelism, file.take("parallelism")?).unwrap_or(default_threads);
    let tol = check_tol(pick(args.tol, file.take("tol")?).unwrap_or(DEFAULT_TOL))?;
    let with_rd = args.with_rd || file.take("with-rd")?.unwrap_or(false);
    let rd_out = pick(args.rd_out, file.take("rd-out")?);
    let out_path = pick(args.out, file.take("out")?);
    file.finish()?;
    if ns.is_empty() || thetas.is_empty() {
        return Err(CliError::Usage("n and theta lists must be non-empty".into()));
    }
    if parallelism == 0 {
        return Err(CliError::Usage("parallelism must be at least 1".into()));
    }
    let rd_path = match (&rd_out, &out_path) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(o)) if with_rd => Some(derived_rd_path(o)),
        _ => None,
    };

    let mut cells = study_grid(&ns, &thetas, replications, seed).map_err(usage)?;
    for c in &mut cells {
        c.tol = tol;
    }
    let rows = run_grid(&cells, parallelism).map_err(usage)?;

    let mut echo = Echo::new("simulate");
    echo.add("n", join(&ns))
        .add("theta", join(&thetas))
        .add("L", replications)
        .add("seed", seed)
        .add("parallelism", parallelism)
        .add("tol", tol)
        .add("with-rd", with_rd)
        .add("rd-out", if with_rd { path_or_stdout(&rd_path) } else { "-".into() })
        .add("out", path_or_stdout(&out_path));

    let mut out = Output::open(out_path.as_deref())?;
    echo.write(&mut out)?;
    out.write_with(|w| write_metrics_csv(w, &rows))?;

    if with_rd {
        let rd = rd_rows(&rows).map_err(usage)?;
        match rd_path {
            Some(p) => {
                out.finish()?;
                let mut rd_file = Output::open(Some(&p))?;
                echo.write(&mut rd_file)?;
                rd_file.write_with(|w| write_rd_csv(w, &rd))?;
                rd_file.finish()?;
            }
            None => {
                out.write_with(|w| write_rd_csv(w, &rd))?;
                out.finish()?;
            }
        }
    } else {
        out.finish()?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// fisher

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherMode {
    Quadrature,
    MonteCarlo,
}

impl FromStr for FisherMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadrature" | "quad" => Ok(FisherMode::Quadrature),
            "mc" | "monte-carlo" => Ok(FisherMode::MonteCarlo),
            other => Err(format!("unknown Fisher method '{other}' (quadrature, mc)")),
        }
    }
}

impl fmt::Display for FisherMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FisherMode::Quadrature => "quadrature",
            FisherMode::MonteCarlo => "mc",
        })
    }
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "range")]
    pub theta: Option<Vec<f64>>,
    /// `lo,hi` grid instead of an explicit list; see `--step`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    #[arg(long, requires = "range")]
    pub step: Option<f64>,
    /// quadrature or mc.
    #[arg(long)]
    pub method: Option<FisherMode>,
    /// Monte Carlo draws per parameter value.
    #[arg(long = "M", visible_alias = "draws")]
    pub draws: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn fisher(args: FisherArgs, mut file: ConfigFile) -> CliResult<()> {
    let listed = pick(args.theta, file.take_list("theta")?);
    let range = pick(args.range, file.take_list("range")?);
    let step = pick(args.step, file.take("step")?);
    let mode = pick(args.method, file.take("method")?).unwrap_or(FisherMode::Quadrature);
    let draws = pick(args.draws, file.take("M")?).unwrap_or(DEFAULT_FISHER_DRAWS);
    let seed = resolve_seed(args.seed, &mut file)?;
    let out_path = pick(args.out, file.take("out")?);
    file.finish()?;

    let thetas = match (&listed, &range) {
        (Some(t), None) if !t.is_empty() => t.clone(),
        (None, Some(r)) => {
            let (lo, hi) = range_pair(r)?;
            linear_grid(lo, hi, required(step, "step")?)?
        }
        (Some(_), Some(_)) => return Err(CliError::Usage("give either theta or range, not both".into())),
        _ => return Err(CliError::Usage("missing required setting 'theta' (or 'range' with 'step')".into())),
    };

    let rows = thetas
        .iter()
        .map(|&t| match mode {
            FisherMode::Quadrature => fisher_information(t),
            FisherMode::MonteCarlo => i2_monte_carlo(t, draws, SeedSpec::new(seed, t.to_bits())),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(usage)?;

    let mut echo = Echo::new("fisher");
    match &range {
        Some(r) => echo.add("range", join(r)).add("step", step.map_or_else(String::new, |s| s.to_string())),
        None => echo.add("theta", join(&thetas)),
    };
    echo.add("method", mode);
    if mode == FisherMode::MonteCarlo {
        echo.add("M", draws).add("seed", seed);
    }
    echo.add("out", path_or_stdout(&out_path));

    let mut out = Output::open(out_path.as_deref())?;
    echo.write(&mut out)?;
    out.write_with(|w| write_fisher_csv(w, &rows))?;
    out.finish()
}

// ---------------------------------------------------------------------------
// scan

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanTarget {
    LogLik,
    H,
}

impl FromStr for ScanTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "loglik" => Ok(ScanTarget::LogLik),
            "h" => Ok(ScanTarget::H),
            other => Err(format!("unknown scan target '{other}' (loglik, h)")),
        }
    }
}

impl fmt::Display for ScanTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanTarget::LogLik => "loglik",
            ScanTarget::H => "h",
        })
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub pseudo: Option<Pseudo>,
    /// loglik (the log-likelihood) or h (the normal-equation function).
    #[arg(long)]
    pub what: Option<ScanTarget>,
    /// `lo,hi`; defaults to -10,10.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub range: Option<Vec<f64>>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Points with |θ| below this are left out; 0 keeps them all.
    #[arg(long)]
    pub exclude: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn scan(args: ScanArgs, mut file: ConfigFile) -> CliResult<()> {
    let input: PathBuf = required(pick(args.input, file.take("in")?), "in")?;
    let pseudo = pick(args.pseudo, file.take("pseudo")?).unwrap_or(Pseudo::Adjusted);
    let what = required(pick(args.what, file.take("what")?), "what")?;
    let range = pick(args.range, file.take_list("range")?).unwrap_or_else(|| DEFAULT_SCAN_RANGE.to_vec());
    let step = pick(args.step, file.take("step")?).unwrap_or(DEFAULT_SCAN_STEP);
    let exclude = pick(args.exclude, file.take("exclude")?).unwrap_or(DEFAULT_SCAN_EXCLUDE);
    let out_path = pick(args.out, file.take("out")?);
    file.finish()?;

    let (lo, hi) = range_pair(&range)?;
    if lo.abs() > THETA_MAX || hi.abs() > THETA_MAX {
        return Err(CliError::Usage(format!("range must lie within [-{THETA_MAX}, {THETA_MAX}]")));
    }
    if !(exclude.is_finite() && exclude >= 0.0) {
        return Err(CliError::Usage(format!("exclude must be non-negative, got {exclude}")));
    }
    let grid: Vec<f64> = linear_grid(lo, hi, step)?.into_iter().filter(|t| t.abs() >= exclude).collect();
    let sample = load_sample(&input, pseudo)?;

    let mut out = Output::open(out_path.as_deref())?;
    Echo::new("scan")
        .add("in", input.display())
        .add("pseudo", pseudo)
        .add("what", what)
        .add("range", join(&range))
        .add("step", step)
        .add("exclude", exclude)
        .add("out", path_or_stdout(&out_path))
        .write(&mut out)?;
    out.write_with(|w| writeln!(w, "theta,value"))?;
    for t in grid {
        let value = match what {
            ScanTarget::H => h_of_theta(&sample, t),
            ScanTarget::LogLik => log_likelihood(&sample, AssociationParameter::new(t).map_err(usage)?),
        };
        out.write_with(|w| writeln!(w, "{},{}", fmt_f64(t), fmt_f64(value)))?;
    }
    out.finish()
}
