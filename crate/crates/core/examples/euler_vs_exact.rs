//! Discretisation bias of the log-Euler scheme against the exact sampler.

use ousv::experiment::{run_table, RunConfig, Scheme};

fn main() -> ousv::Result<()> {
    let base = RunConfig {
        n_path_values: vec![62_500],
        n_total: 1_000_000,
        ..RunConfig::default()
    };
    let mut schemes: Vec<Scheme> = [4, 16, 64, 256].iter().map(|&n| Scheme::Euler { n_steps: n }).collect();
    schemes.push(Scheme::KlExact);
    println!("{:>10} {:>6} {:>12} {:>12}", "scheme", "level", "bias", "3 stderr");
    for scheme in schemes {
        let cfg = RunConfig { scheme, ..base.clone() };
        let row = run_table(&cfg)?.remove(0);
        println!(
            "{:>10} {:>6} {:>12.5} {:>12.5}",
            scheme.name(),
            row.l,
            row.opt.bias.unwrap_or(f64::NAN),
            3.0 * row.opt.stderr
        );
    }
    Ok(())
}
