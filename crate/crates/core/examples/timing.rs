//! Per-set wall-clock cost on one thread for each benchmark maturity.

use ousv::experiment::{timing_probe, RunConfig};

fn main() -> ousv::Result<()> {
    for (t, l) in [(1.0, 6), (5.0, 8), (10.0, 8)] {
        let cfg = RunConfig {
            maturities: vec![t],
            l_values: vec![l],
            n_total: 160_000 * 6,
            ..RunConfig::default()
        };
        let s = timing_probe(&cfg)?;
        println!(
            "T={t:<3} L={l} {} paths: median {:.3} s/set (generation {:.3}, pricing {:.3}) over {} sets",
            s.n_path, s.median_seconds, s.median_generation, s.median_pricing, s.n_sets
        );
    }
    Ok(())
}
