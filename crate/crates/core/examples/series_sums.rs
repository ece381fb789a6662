//! Closed-form KL weight sums and tails next to brute-force summation.

use ousv::series_check::check_series;
use ousv::series_tails::{make_tail, Series};

fn main() -> ousv::Result<()> {
    for lambda in [0.0, 0.5, 4.0, 40.0] {
        let sums: Vec<String> = Series::ALL
            .iter()
            .map(|s| format!("{}0={:.10e}", s.name(), s.full(lambda)))
            .collect();
        println!("λ={lambda:<5} {}", sums.join("  "));
    }

    let tail = make_tail(4.0, 8)?;
    println!(
        "λ=4 L=8: odd f {:.4e}, odd c {:.4e}, odd g {:.4e}, even g {:.4e}, c {:.4e}, b {:.4e}, ρ {:.6}",
        tail.odd_f, tail.odd_c, tail.odd_g, tail.even_g, tail.full_c, tail.full_b, tail.rho_l
    );

    let report = check_series(&[0.0, 1.0, 4.0, 20.0], &[2, 6, 16], 1_000_000);
    let worst = report.worst().expect("non-empty report");
    println!(
        "{} comparisons, worst rel err {:.2e} ({} {} λ={} L={})",
        report.entries.len(),
        worst.rel_err,
        worst.series.name(),
        worst.parity.name(),
        worst.lambda,
        worst.l_terms
    );
    Ok(())
}
