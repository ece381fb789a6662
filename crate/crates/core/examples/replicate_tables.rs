//! Bias / RMSE tables for the benchmark maturities over 16 sets of 160k paths.
//!
//! `cargo run --release --example replicate_tables`

use ousv::experiment::{run_table, write_text, RunConfig};

fn main() -> ousv::Result<()> {
    let mut rows = Vec::new();
    for (t, ls) in [(1.0, vec![4, 6, 8]), (5.0, vec![6, 8, 10]), (10.0, vec![6, 8, 10])] {
        let cfg = RunConfig {
            maturities: vec![t],
            l_values: ls,
            n_path_values: vec![10_000, 40_000, 160_000],
            ..RunConfig::default()
        };
        rows.extend(run_table(&cfg)?);
    }
    write_text(&rows, true, std::io::stdout().lock())
}
