//! `ousv` command line.
//!
//! Every option can also be set in a `--config` file of `key = value` lines
//! (`#` starts a comment) whose keys are the long flag names without dashes
//! prefix, e.g. `kappa = 4` or `l-terms = 6,8`. Precedence, highest first:
//! command-line flag, config file, built-in default (the benchmark parameters
//! with `T = 1`, `L = 6`, control variate and antithetic pairs on).
//!
//! Exit codes: 0 on success, 1 when a check fails or a run errors, 2 on usage errors.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiment::{run_table, threads_from_env, with_threads, write_csv, write_text, RunConfig, Scheme};
use crate::ou_analytics::ModelParams;
use crate::path_synth::build_path;
use crate::rng::substream;
use crate::series_check::check_series;
use rand::Rng;
use rand_distr::StandardNormal;

/// Comma-separated list argument.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<T>().map_err(|e| format!("invalid list item {x:?}: {e}")))
            .collect::<std::result::Result<Vec<T>, String>>()
            .and_then(|v| if v.is_empty() { Err("empty list".to_string()) } else { Ok(List(v)) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    KlExact,
    Euler,
}

impl FromStr for SchemeArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <SchemeArg as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Parser)]
#[command(name = "ousv", version, about = "Exact simulation of the OU-driven stochastic volatility model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price European calls; prints price, standard error and the implied spot.
    Price(RunArgs),
    /// Bias / RMSE table over pooled MC sets.
    Table(TableArgs),
    /// Volatility paths from the sine expansion at several truncation levels.
    Paths(PathArgs),
    /// Analytic series sums versus brute-force summation.
    CheckSeries(CheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    /// Maturity, or a comma-separated list.
    #[arg(long)]
    pub maturity: Option<List<f64>>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub strike: Option<List<f64>>,
    /// Number of explicit KL terms (even), or a list.
    #[arg(long)]
    pub l_terms: Option<List<usize>>,
    /// Paths per MC set, or a list.
    #[arg(long)]
    pub n_path: Option<List<usize>>,
    /// Pool size; must be a multiple of every n-path.
    #[arg(long)]
    pub n_total: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Time steps for the Euler scheme.
    #[arg(long)]
    pub euler_steps: Option<usize>,
    #[arg(long, overrides_with = "no_cv")]
    pub cv: bool,
    #[arg(long)]
    pub no_cv: bool,
    #[arg(long, overrides_with = "no_antithetic")]
    pub antithetic: bool,
    #[arg(long)]
    pub no_antithetic: bool,
    /// Reference price for bias/RMSE (defaults to the benchmark values where known).
    #[arg(long)]
    pub ref_price: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Omit the (non-reproducible) timing column.
    #[arg(long)]
    pub no_timing: bool,
    /// Exit non-zero if a row fails its statistical checks.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sine-term counts; all share one draw sequence.
    #[arg(long)]
    pub n_terms: Option<List<usize>>,
    /// Number of independent sample paths.
    #[arg(long)]
    pub n_paths: Option<usize>,
    /// Grid points per path.
    #[arg(long)]
    pub n_grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub lambda: Option<List<f64>>,
    /// Numbers of removed terms.
    #[arg(long = "l")]
    pub l: Option<List<usize>>,
    /// Terms in each brute-force sum.
    #[arg(long)]
    pub brute_terms: Option<usize>,
    /// Largest tolerated relative error.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// `key = value` settings from a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            Some(p) => Self::parse(&std::fs::read_to_string(p)?),
            None => Ok(Self::default()),
        }
    }

    /// Flag value if given, else the file's value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(s) => s
                .parse()
                .map_err(|e| Error::InvalidConfig(format!("config key {key}: {e}"))),
            None => Ok(default),
        }
    }

    fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|s| s.parse().map_err(|e| Error::InvalidConfig(format!("config key {key}: {e}"))))
            .transpose()
    }

    fn resolve_flag(&self, on: bool, off: bool, key: &str, default: bool) -> Result<bool> {
        let flag = match (on, off) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        self.resolve(flag, key, default)
    }
}

fn model_from(args: &ModelArgs, file: &ConfigFile, base: ModelParams) -> Result<(ModelParams, Vec<f64>)> {
    let p = ModelParams::new(
        file.resolve(args.s0, "s0", base.s0)?,
        file.resolve(args.sigma0, "sigma0", base.sigma0)?,
        file.resolve(args.theta, "theta", base.theta)?,
        file.resolve(args.kappa, "kappa", base.kappa)?,
        file.resolve(args.xi, "xi", base.xi)?,
        file.resolve(args.rho, "rho", base.rho)?,
        file.resolve(args.r, "r", base.r)?,
    )?;
    let maturities = file.resolve(args.maturity.clone(), "maturity", List(vec![1.0]))?.0;
    Ok((p, maturities))
}

/// Resolved `price`/`table` settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub cfg: RunConfig,
    pub use_cv: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub fn run_settings(args: &RunArgs, default_format: Format) -> Result<RunSettings> {
    let file = ConfigFile::load(args.model.config.as_ref())?;
    let (params, maturities) = model_from(&args.model, &file, ModelParams::benchmark())?;
    let d = RunConfig::default();
    let scheme = match file.resolve(args.scheme, "scheme", SchemeArg::KlExact)? {
        SchemeArg::KlExact => Scheme::KlExact,
        SchemeArg::Euler => Scheme::Euler {
            n_steps: file.resolve(args.euler_steps, "euler-steps", 64)?,
        },
    };
    let cfg = RunConfig {
        params,
        maturities,
        strikes: file.resolve(args.strike.clone(), "strike", List(d.strikes))?.0,
        l_values: file.resolve(args.l_terms.clone(), "l-terms", List(d.l_values))?.0,
        n_path_values: file.resolve(args.n_path.clone(), "n-path", List(d.n_path_values))?.0,
        n_total: file.resolve(args.n_total, "n-total", d.n_total)?,
        seed: file.resolve(args.seed, "seed", d.seed)?,
        antithetic: file.resolve_flag(args.antithetic, args.no_antithetic, "antithetic", true)?,
        scheme,
        reference_price: file.resolve_opt(args.ref_price, "ref-price")?,
    };
    cfg.validate()?;
    Ok(RunSettings {
        cfg,
        use_cv: file.resolve_flag(args.cv, args.no_cv, "cv", true)?,
        format: file.resolve(args.output.format, "format", default_format)?,
        out: file.resolve_opt(args.output.out.clone(), "out")?,
    })
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_price(args: &RunArgs) -> Result<i32> {
    let s = run_settings(args, Format::Text)?;
    let rows = with_threads(threads_from_env()?, || run_table(&s.cfg))??;
    let mut w = open_out(s.out.as_ref())?;
    if s.format == Format::Csv {
        writeln!(w, "scheme,maturity,strike,l,n_path,n_set,cv,price,stderr,spot_check")?;
    }
    for r in &rows {
        let stats = if s.use_cv { &r.cv } else { &r.opt };
        match s.format {
            Format::Csv => writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.scheme.name(),
                r.maturity,
                r.strike,
                r.l,
                r.n_path,
                r.n_set,
                s.use_cv,
                stats.mean,
                stats.stderr,
                r.spot.mean
            )?,
            Format::Text => {
                writeln!(
                    w,
                    "T={} K={} {}={} paths={}x{} cv={}",
                    r.maturity,
                    r.strike,
                    if matches!(r.scheme, Scheme::KlExact) { "L" } else { "steps" },
                    r.l,
                    r.n_set,
                    r.n_path,
                    if s.use_cv { "on" } else { "off" }
                )?;
                writeln!(w, "price      {:.6}", stats.mean)?;
                writeln!(w, "stderr     {:.6}", stats.stderr)?;
                writeln!(w, "spot_check {:.6}", r.spot.mean)?;
            }
        }
    }
    w.flush()?;
    Ok(0)
}

fn cmd_table(args: &TableArgs) -> Result<i32> {
    let s = run_settings(&args.run, Format::Csv)?;
    let rows = with_threads(threads_from_env()?, || run_table(&s.cfg))??;
    let timing = !args.no_timing;
    {
        let mut w = open_out(s.out.as_ref())?;
        match s.format {
            Format::Csv => write_csv(&rows, timing, &mut w)?,
            Format::Text => write_text(&rows, timing, &mut w)?,
        }
        w.flush()?;
    }
    if !args.check {
        return Ok(0);
    }
    let mut failed = false;
    for r in &rows {
        for (name, st) in [("spot", &r.spot), ("option", &r.opt), ("option-cv", &r.cv)] {
            if let (Some(b), Some(rmse)) = (st.bias, st.rmse) {
                if rmse * rmse < b * b * (1.0 - 1e-12) {
                    eprintln!("check failed: T={} L={} n_path={}: {name} rmse^2 < bias^2", r.maturity, r.l, r.n_path);
                    failed = true;
                }
            }
        }
        if let Some(b) = r.cv.bias {
            if r.n_set > 1 && b.abs() > 3.0 * r.cv.stderr {
                eprintln!(
                    "check failed: T={} L={} n_path={}: cv bias {b:e} exceeds 3 stderr ({:e})",
                    r.maturity, r.l, r.n_path, r.cv.stderr
                );
                failed = true;
            }
        }
    }
    Ok(if failed { 1 } else { 0 })
}

fn cmd_paths(args: &PathArgs) -> Result<i32> {
    let file = ConfigFile::load(args.model.config.as_ref())?;
    let (p, maturities) = model_from(&args.model, &file, ModelParams::benchmark())?;
    let t = maturities[0];
    let n_terms = file.resolve(args.n_terms.clone(), "n-terms", List(vec![2, 8, 16, 64]))?.0;
    let n_paths = file.resolve(args.n_paths, "n-paths", 2)?;
    let n_grid = file.resolve(args.n_grid, "n-grid", 513)?;
    let seed = file.resolve(args.seed, "seed", 1)?;
    let out = file.resolve_opt(args.out.clone(), "out")?;
    let max_terms = n_terms.iter().copied().max().unwrap_or(0);
    let mut w = open_out(out.as_ref())?;
    writeln!(w, "path,n_terms,t,sigma")?;
    for path in 0..n_paths {
        let mut rng = substream(seed, path as u64);
        let z0: f64 = rng.sample(StandardNormal);
        let z: Vec<f64> = (0..max_terms).map(|_| rng.sample(StandardNormal)).collect();
        for &n in &n_terms {
            let g = build_path(z0, &z[..n], &p, t, n_grid)?;
            for (ti, si) in g.t_grid.iter().zip(&g.sigma_vals) {
                writeln!(w, "{path},{n},{ti},{si}")?;
            }
        }
    }
    w.flush()?;
    Ok(0)
}

fn cmd_check_series(args: &CheckArgs) -> Result<i32> {
    let file = ConfigFile::load(args.config.as_ref())?;
    let lambdas = file
        .resolve(args.lambda.clone(), "lambda", List(vec![0.0, 1e-4, 0.1, 1.0, 4.0, 8.0, 20.0, 40.0]))?
        .0;
    let ls = file.resolve(args.l.clone(), "l", List(vec![2, 4, 6, 8, 10, 16]))?.0;
    if let Some(&l) = ls.iter().find(|&&l| l % 2 != 0) {
        return Err(Error::InvalidTerms(l));
    }
    let n_terms = file.resolve(args.brute_terms, "brute-terms", 10_000_000)?;
    let tol = file.resolve(args.tol, "tol", 1e-9)?;
    let format = file.resolve(args.output.format, "format", Format::Text)?;
    let out = file.resolve_opt(args.output.out.clone(), "out")?;

    let report = check_series(&lambdas, &ls, n_terms);
    let max = report.max_rel_err();
    let mut w = open_out(out.as_ref())?;
    match format {
        Format::Csv => {
            writeln!(w, "series,parity,lambda,l,analytic,brute,rel_err")?;
            for e in &report.entries {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    e.series.name(),
                    e.parity.name(),
                    e.lambda,
                    e.l_terms,
                    e.analytic,
                    e.brute,
                    e.rel_err
                )?;
            }
        }
        Format::Text => {
            for &lambda in &lambdas {
                let worst = report
                    .entries
                    .iter()
                    .filter(|e| e.lambda == lambda)
                    .map(|e| e.rel_err)
                    .fold(0.0, f64::max);
                writeln!(w, "lambda {lambda:<8} max rel err {worst:.3e}")?;
            }
            if let Some(e) = report.worst() {
                writeln!(
                    w,
                    "max relative error {max:.3e} ({} {} lambda={} L={}), tolerance {tol:e}: {}",
                    e.series.name(),
                    e.parity.name(),
                    e.lambda,
                    e.l_terms,
                    if max <= tol { "PASS" } else { "FAIL" }
                )?;
            }
        }
    }
    w.flush()?;
    Ok(if max <= tol { 0 } else { 1 })
}

/// Parses `args` and runs the subcommand, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Price(a) => cmd_price(a),
        Command::Table(a) => cmd_table(a),
        Command::Paths(a) => cmd_paths(a),
        Command::CheckSeries(a) => cmd_check_series(a),
    };
    match result {
        Ok(code) => code,
        Err(e @ (Error::InvalidTerms(_) | Error::InvalidConfig(_) | Error::InvalidParams(_))) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
