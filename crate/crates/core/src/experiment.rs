//! Bias/RMSE protocol over pooled MC sets.
//!
//! A pool of `n_total` paths is generated once per `(T, L)` and cut into
//! independent sets of `n_path` paths; each set yields a spot estimate and an
//! option estimate with and without the control variate, and the rows report
//! bias and RMSE of those estimates against reference values.
//!
//! The pool is split into blocks of `gcd(n_path values)` paths. Block `b`
//! draws from RNG substream `(seed, b)`, so every set size regroups the same
//! pool and the output does not depend on the number of worker threads.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::euler_baseline::{EulerConfig, EulerStepper};
use crate::kl_engine::{DrawBlock, TripletSampler};
use crate::ou_analytics::ModelParams;
use crate::pricing::{CondLaw, ForwardMap, OptionKind, PriceStats, SetPricer};
use crate::rng::{substream, StreamRng};
use crate::series_tails::make_tail;
use rand::Rng;
use rand_distr::StandardNormal;

/// Largest tolerated fraction of paths with `V` floored at `U²`.
pub const MAX_FLOOR_RATE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    KlExact,
    Euler { n_steps: usize },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::KlExact => "kl-exact",
            Scheme::Euler { .. } => "euler",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub maturities: Vec<f64>,
    pub strikes: Vec<f64>,
    /// KL truncation levels; ignored by the Euler scheme.
    pub l_values: Vec<usize>,
    pub n_path_values: Vec<usize>,
    pub n_total: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub scheme: Scheme,
    /// Overrides the built-in benchmark references for every row.
    pub reference_price: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::benchmark(),
            maturities: vec![1.0],
            strikes: vec![100.0],
            l_values: vec![6],
            n_path_values: vec![160_000],
            n_total: 2_560_000,
            seed: 1,
            antithetic: true,
            scheme: Scheme::KlExact,
            reference_price: None,
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.maturities.is_empty() || self.strikes.is_empty() || self.n_path_values.is_empty() {
            return bad("maturities, strikes and n_path values must be non-empty".into());
        }
        if let Some(t) = self.maturities.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return bad(format!("maturity must be positive, got {t}"));
        }
        if let Some(k) = self.strikes.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return bad(format!("strike must be positive, got {k}"));
        }
        match self.scheme {
            Scheme::KlExact => {
                if self.l_values.is_empty() {
                    return bad("at least one L value is required".into());
                }
                if let Some(&l) = self.l_values.iter().find(|&&l| l < 2 || l % 2 != 0) {
                    return Err(Error::InvalidTerms(l));
                }
            }
            Scheme::Euler { n_steps } => {
                if n_steps == 0 {
                    return bad("Euler scheme needs at least one step".into());
                }
            }
        }
        if self.n_total == 0 {
            return bad("n_total must be positive".into());
        }
        for &n in &self.n_path_values {
            if n == 0 || self.n_total % n != 0 {
                return bad(format!("n_total = {} is not divisible by n_path = {n}", self.n_total));
            }
            if self.antithetic && n % 2 != 0 {
                return bad(format!("n_path = {n} must be even with antithetic pairs"));
            }
        }
        Ok(())
    }

    /// Paths per RNG block: the gcd of all set sizes.
    pub fn block_size(&self) -> usize {
        self.n_path_values.iter().fold(0, |g, &n| gcd(g, n))
    }

    /// Discretisation levels scanned: the L values for KL, the step count for Euler.
    pub fn levels(&self) -> Vec<usize> {
        match self.scheme {
            Scheme::KlExact => self.l_values.clone(),
            Scheme::Euler { n_steps } => vec![n_steps],
        }
    }

    /// Reference price for `(T, K)`: the override if set, else the benchmark value.
    pub fn reference_for(&self, t: f64, k: f64) -> Option<f64> {
        self.reference_price.or_else(|| benchmark_reference(&self.params, t, k))
    }
}

/// Fourier-inversion call prices for the benchmark parameters at `K = 100`.
pub fn benchmark_reference(p: &ModelParams, t: f64, k: f64) -> Option<f64> {
    if *p != ModelParams::benchmark() || k != 100.0 {
        return None;
    }
    [(1.0, 13.21492), (5.0, 40.79769), (10.0, 62.76312)]
        .iter()
        .find(|(m, _)| *m == t)
        .map(|&(_, v)| v)
}

/// Per-block generation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockInfo {
    pub floor_events: usize,
    /// Sum of `σ̂_T` over the block (KL scheme only).
    pub sigma_hat_sum: f64,
    pub seconds: f64,
}

enum Generator {
    Kl { sampler: TripletSampler, map: ForwardMap },
    Euler { stepper: EulerStepper },
}

impl Generator {
    fn new(cfg: &RunConfig, t: f64, level: usize) -> Result<Self> {
        Ok(match cfg.scheme {
            Scheme::KlExact => {
                let tail = make_tail(cfg.params.kappa * t, level)?;
                Generator::Kl {
                    sampler: TripletSampler::new(cfg.params, t, tail)?,
                    map: ForwardMap::new(&cfg.params, t),
                }
            }
            Scheme::Euler { n_steps } => Generator::Euler {
                stepper: EulerStepper::new(cfg.params, t, EulerConfig::new(n_steps)?)?,
            },
        })
    }

    fn fill(&self, out: &mut [CondLaw], rng: &mut StreamRng, antithetic: bool) -> BlockInfo {
        let start = Instant::now();
        let mut floor_events = 0;
        let mut sigma_hat_sum = 0.0;
        match self {
            Generator::Kl { sampler, map } => {
                let mut d = DrawBlock::zeros(sampler.l_terms());
                let mut one = |d: &DrawBlock, slot: &mut CondLaw| {
                    let s = sampler.sample_unchecked(d);
                    floor_events += s.floored as usize;
                    *slot = map.law(&s.triplet);
                    sampler.sigma_hat(d.z0)
                };
                if antithetic {
                    for pair in out.chunks_exact_mut(2) {
                        d.fill(rng);
                        let a = one(&d, &mut pair[0]);
                        d.negate();
                        let b = one(&d, &mut pair[1]);
                        sigma_hat_sum += a + b;
                    }
                } else {
                    for slot in out.iter_mut() {
                        d.fill(rng);
                        sigma_hat_sum += one(&d, slot);
                    }
                }
            }
            Generator::Euler { stepper } => {
                let mut draws = vec![0.0; stepper.n_draws()];
                let one = |draws: &[f64], slot: &mut CondLaw| {
                    let s_t = stepper.simulate(draws).expect("draw buffer sized by stepper").s_t;
                    *slot = CondLaw { fwd: s_t, sig_total: 0.0 };
                };
                let refill = |draws: &mut [f64], rng: &mut StreamRng| {
                    draws.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                };
                if antithetic {
                    for pair in out.chunks_exact_mut(2) {
                        refill(&mut draws, rng);
                        one(&draws, &mut pair[0]);
                        draws.iter_mut().for_each(|x| *x = -*x);
                        one(&draws, &mut pair[1]);
                    }
                } else {
                    for slot in out.iter_mut() {
                        refill(&mut draws, rng);
                        one(&draws, slot);
                    }
                }
            }
        }
        BlockInfo {
            floor_events,
            sigma_hat_sum,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Conditional laws for the whole pool at one `(T, level)`.
#[derive(Debug, Clone)]
pub struct Pool {
    pub maturity: f64,
    pub level: usize,
    pub block_size: usize,
    pub laws: Vec<CondLaw>,
    pub blocks: Vec<BlockInfo>,
}

/// Per-set estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SetEstimate {
    /// `e^{−rT} mean(F_T)`.
    pub spot: f64,
    /// Same with the control variate; equals `S0` up to rounding.
    pub spot_cv: f64,
    pub mu: f64,
    /// One entry per strike.
    pub price: Vec<f64>,
    pub price_cv: Vec<f64>,
    /// Put counterparts of `price_cv`.
    pub put_cv: Vec<f64>,
    pub floor_events: usize,
    pub sigma_hat_mean: f64,
    pub generation_seconds: f64,
    pub pricing_seconds: f64,
}

/// Generates the pool for maturity `t` at truncation level / step count `level`.
pub fn simulate_pool(cfg: &RunConfig, t: f64, level: usize) -> Result<Pool> {
    cfg.validate()?;
    let generator = Generator::new(cfg, t, level)?;
    let block_size = cfg.block_size();
    let mut laws = vec![CondLaw { fwd: 0.0, sig_total: 0.0 }; cfg.n_total];
    let blocks: Vec<BlockInfo> = laws
        .par_chunks_mut(block_size)
        .enumerate()
        .map(|(b, chunk)| {
            let mut rng = substream(cfg.seed, b as u64);
            generator.fill(chunk, &mut rng, cfg.antithetic)
        })
        .collect();
    let events: usize = blocks.iter().map(|b| b.floor_events).sum();
    if events as f64 > MAX_FLOOR_RATE * cfg.n_total as f64 {
        return Err(Error::FloorRateExceeded {
            events,
            paths: cfg.n_total,
        });
    }
    Ok(Pool {
        maturity: t,
        level,
        block_size,
        laws,
        blocks,
    })
}

fn estimate_one(
    laws: &[CondLaw],
    blocks: &[BlockInfo],
    pricer: &SetPricer,
    strikes: &[f64],
) -> Result<SetEstimate> {
    let start = Instant::now();
    let mean_fwd = pricer.mean_forward(laws)?;
    let mu = pricer.cv_multiplier(laws)?;
    let mut price = Vec::with_capacity(strikes.len());
    let mut price_cv = Vec::with_capacity(strikes.len());
    let mut put_cv = Vec::with_capacity(strikes.len());
    for &k in strikes {
        price.push(pricer.price(laws, k, 1.0, OptionKind::Call)?);
        price_cv.push(pricer.price(laws, k, mu, OptionKind::Call)?);
        put_cv.push(pricer.price(laws, k, mu, OptionKind::Put)?);
    }
    let spot_cv = pricer.spot(laws, mu)?;
    let pricing_seconds = start.elapsed().as_secs_f64();
    Ok(SetEstimate {
        spot: pricer.discount() * mean_fwd,
        spot_cv,
        mu,
        price,
        price_cv,
        put_cv,
        floor_events: blocks.iter().map(|b| b.floor_events).sum(),
        sigma_hat_mean: blocks.iter().map(|b| b.sigma_hat_sum).sum::<f64>() / laws.len() as f64,
        generation_seconds: blocks.iter().map(|b| b.seconds).sum(),
        pricing_seconds,
    })
}

impl Pool {
    /// Splits the pool into sets of `n_path` paths and prices each set.
    pub fn estimate_sets(&self, p: &ModelParams, n_path: usize, strikes: &[f64]) -> Result<Vec<SetEstimate>> {
        if n_path == 0 || n_path % self.block_size != 0 || self.laws.len() % n_path != 0 {
            return Err(Error::InvalidConfig(format!(
                "n_path = {n_path} does not tile a pool of {} paths in blocks of {}",
                self.laws.len(),
                self.block_size
            )));
        }
        let pricer = SetPricer::new(p, self.maturity);
        let per_set = n_path / self.block_size;
        self.laws
            .par_chunks(n_path)
            .zip(self.blocks.par_chunks(per_set))
            .map(|(laws, blocks)| estimate_one(laws, blocks, &pricer, strikes))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scheme: Scheme,
    pub maturity: f64,
    pub strike: f64,
    /// `L` for the KL scheme, the step count for Euler.
    pub l: usize,
    pub n_path: usize,
    pub n_set: usize,
    pub spot: PriceStats,
    pub opt: PriceStats,
    pub cv: PriceStats,
    pub seconds_per_set: f64,
}

impl ReportRow {
    pub fn spot_bias(&self) -> f64 {
        self.spot.bias.unwrap_or(f64::NAN)
    }
    pub fn spot_rmse(&self) -> f64 {
        self.spot.rmse.unwrap_or(f64::NAN)
    }
    pub fn opt_bias(&self) -> Option<f64> {
        self.opt.bias
    }
    pub fn opt_rmse(&self) -> Option<f64> {
        self.opt.rmse
    }
    pub fn cv_bias(&self) -> Option<f64> {
        self.cv.bias
    }
    pub fn cv_rmse(&self) -> Option<f64> {
        self.cv.rmse
    }
}

fn rows_for(
    cfg: &RunConfig,
    pool: &Pool,
    n_path: usize,
    sets: &[SetEstimate],
) -> Vec<ReportRow> {
    let n_set = sets.len();
    let floors: usize = sets.iter().map(|s| s.floor_events).sum();
    let seconds = sets
        .iter()
        .map(|s| s.generation_seconds + s.pricing_seconds)
        .sum::<f64>()
        / n_set as f64;
    let spots: Vec<f64> = sets.iter().map(|s| s.spot).collect();
    let spot = PriceStats::from_sets(&spots, Some(cfg.params.s0), seconds, floors);
    cfg.strikes
        .iter()
        .enumerate()
        .map(|(ki, &k)| {
            let reference = cfg.reference_for(pool.maturity, k);
            let plain: Vec<f64> = sets.iter().map(|s| s.price[ki]).collect();
            let cv: Vec<f64> = sets.iter().map(|s| s.price_cv[ki]).collect();
            ReportRow {
                scheme: cfg.scheme,
                maturity: pool.maturity,
                strike: k,
                l: pool.level,
                n_path,
                n_set,
                spot,
                opt: PriceStats::from_sets(&plain, reference, seconds, floors),
                cv: PriceStats::from_sets(&cv, reference, seconds, floors),
                seconds_per_set: seconds,
            }
        })
        .collect()
}

/// Runs the full grid: for each maturity, level and set size, one row per strike.
pub fn run_table(cfg: &RunConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &t in &cfg.maturities {
        for level in cfg.levels() {
            let pool = simulate_pool(cfg, t, level)?;
            for &n_path in &cfg.n_path_values {
                let sets = pool.estimate_sets(&cfg.params, n_path, &cfg.strikes)?;
                rows.extend(rows_for(cfg, &pool, n_path, &sets));
            }
        }
    }
    Ok(rows)
}

/// Summary of a timing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingStats {
    /// Sets measured (the first, warm-up set is excluded when more than one exists).
    pub n_sets: usize,
    pub n_path: usize,
    pub median_seconds: f64,
    pub mean_seconds: f64,
    pub median_generation: f64,
    pub median_pricing: f64,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Wall-clock cost of one MC set (generation plus pricing) measured on the
/// calling thread, for the first maturity, level and set size of `cfg`.
pub fn timing_probe(cfg: &RunConfig) -> Result<TimingStats> {
    cfg.validate()?;
    let t = cfg.maturities[0];
    let level = cfg.levels()[0];
    let n_path = cfg.n_path_values[0];
    let n_set = cfg.n_total / n_path;
    let generator = Generator::new(cfg, t, level)?;
    let pricer = SetPricer::new(&cfg.params, t);
    let mut laws = vec![CondLaw { fwd: 0.0, sig_total: 0.0 }; n_path];
    let mut generation = Vec::with_capacity(n_set);
    let mut pricing = Vec::with_capacity(n_set);
    for set in 0..n_set {
        let start = Instant::now();
        let mut rng = substream(cfg.seed, set as u64);
        generator.fill(&mut laws, &mut rng, cfg.antithetic);
        let made = Instant::now();
        let mu = pricer.cv_multiplier(&laws)?;
        for &k in &cfg.strikes {
            std::hint::black_box(pricer.price(&laws, k, mu, OptionKind::Call)?);
        }
        generation.push((made - start).as_secs_f64());
        pricing.push(made.elapsed().as_secs_f64());
    }
    if n_set > 1 {
        generation.remove(0);
        pricing.remove(0);
    }
    let mut total: Vec<f64> = generation.iter().zip(&pricing).map(|(g, p)| g + p).collect();
    let mean_seconds = total.iter().sum::<f64>() / total.len() as f64;
    Ok(TimingStats {
        n_sets: total.len(),
        n_path,
        median_seconds: median(&mut total),
        mean_seconds,
        median_generation: median(&mut generation),
        median_pricing: median(&mut pricing),
    })
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = rayon's default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Worker cap from `OUSV_THREADS` (unset or 0 = automatic).
pub fn threads_from_env() -> Result<usize> {
    match std::env::var("OUSV_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("OUSV_THREADS must be a nonnegative integer, got {v:?}"))),
        _ => Ok(0),
    }
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const CSV_HEADER: &str = "scheme,maturity,strike,l,n_path,n_set,spot_mean,spot_stderr,spot_bias,spot_rmse,\
opt_mean,opt_stderr,opt_bias,opt_rmse,cv_mean,cv_stderr,cv_bias,cv_rmse,floor_events";

/// Writes rows as CSV. Timing is non-deterministic, so it is an optional trailing column.
pub fn write_csv<W: Write>(rows: &[ReportRow], include_timing: bool, mut w: W) -> Result<()> {
    write!(w, "{CSV_HEADER}")?;
    if include_timing {
        write!(w, ",seconds_per_set")?;
    }
    writeln!(w)?;
    for r in rows {
        write!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme.name(),
            r.maturity,
            r.strike,
            r.l,
            r.n_path,
            r.n_set,
            r.spot.mean,
            r.spot.stderr,
            opt_field(r.spot.bias),
            opt_field(r.spot.rmse),
            r.opt.mean,
            r.opt.stderr,
            opt_field(r.opt.bias),
            opt_field(r.opt.rmse),
            r.cv.mean,
            r.cv.stderr,
            opt_field(r.cv.bias),
            opt_field(r.cv.rmse),
            r.cv.n_floor_events,
        )?;
        if include_timing {
            write!(w, ",{}", r.seconds_per_set)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Aligned text table: biases in units of 1e-4, RMSEs in units of 1e-2.
pub fn write_text<W: Write>(rows: &[ReportRow], include_timing: bool, mut w: W) -> Result<()> {
    let scaled = |v: Option<f64>, s: f64| v.map(|x| format!("{:.2}", x / s)).unwrap_or_else(|| "-".into());
    write!(
        w,
        "{:>8} {:>6} {:>8} {:>4} {:>9} | {:>9} {:>9} | {:>9} {:>9} | {:>9} {:>9} | {:>11}",
        "scheme", "T", "K", "L", "n_path", "spot bias", "spot rmse", "opt bias", "opt rmse", "cv bias", "cv rmse", "cv mean"
    )?;
    if include_timing {
        write!(w, " | {:>9}", "sec/set")?;
    }
    writeln!(w)?;
    writeln!(w, "{:>50}(bias x1e-4, rmse x1e-2)", "")?;
    for r in rows {
        write!(
            w,
            "{:>8} {:>6} {:>8} {:>4} {:>9} | {:>9} {:>9} | {:>9} {:>9} | {:>9} {:>9} | {:>11.5}",
            r.scheme.name(),
            r.maturity,
            r.strike,
            r.l,
            r.n_path,
            scaled(r.spot.bias, 1e-4),
            scaled(r.spot.rmse, 1e-2),
            scaled(r.opt.bias, 1e-4),
            scaled(r.opt.rmse, 1e-2),
            scaled(r.cv.bias, 1e-4),
            scaled(r.cv.rmse, 1e-2),
            r.cv.mean,
        )?;
        if include_timing {
            write!(w, " | {:>9.4}", r.seconds_per_set)?;
        }
        writeln!(w)?;
    }
    Ok(())
}
