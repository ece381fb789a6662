//! Exact Monte Carlo simulation of the Ornstein–Uhlenbeck driven stochastic
//! volatility (OUSV) model.
//!
//! The centered volatility path, conditional on its terminal value, is an OU
//! bridge with a sine-series Karhunen–Loève expansion. Integrating that series
//! term by term gives the time-averaged volatility `U` and variance `V` as
//! sums of independent normals, so the whole sufficient triplet
//! `(σ_T, U, V)` is drawn from `L + 5` standard normals per path. The terminal
//! price is then conditionally log-normal and European options are priced by
//! averaging Black–Scholes values.
//!
//! ```text
//! dS/S = r dt + σ (ρ dZ + √(1−ρ²) dW)
//! dσ   = κ(θ − σ) dt + ξ dZ
//! ```
//!
//! Module map:
//!
//! * [`ou_analytics`]: `φ(x)`, KL weights, conditional/unconditional moments.
//! * [`series_tails`]: closed-form sums of the KL weight series and their
//!   truncated tails.
//! * [`kl_engine`]: per-path triplet sampler.
//! * [`path_synth`]: sine-series path reconstruction and trapezoid oracle.
//! * [`pricing`]: conditional forward, Black–Scholes, control variate.
//! * [`euler_baseline`]: time-stepping comparison scheme.
//! * [`experiment`]: pooled MC sets, bias/RMSE tables, timing.
//! * [`cli`]: the `ousv` command line.

pub mod cli;
pub mod error;
pub mod euler_baseline;
pub mod experiment;
pub mod kl_engine;
pub mod ou_analytics;
pub mod path_synth;
pub mod pricing;
pub mod rng;
pub mod series_check;
pub mod series_tails;
pub mod sum;

pub use error::{Error, Result};
pub use kl_engine::{DrawBlock, TailSample, TripletSampler};
pub use ou_analytics::{CondMoments, ModelParams, Triplet};
pub use pricing::{CondLaw, PriceStats};
pub use series_tails::SeriesTail;
