//! One volatility path at several truncation levels, sharing its draws, with
//! the integrals of each truncated path against the analytic time averages.

use ousv::kl_engine::{TailSample, TripletSampler};
use ousv::path_synth::{build_path, integrate_path};
use ousv::rng::substream;
use ousv::series_tails::make_tail;
use ousv::ModelParams;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> ousv::Result<()> {
    let p = ModelParams::benchmark();
    let t = 1.0;
    let mut rng = substream(7, 0);
    let z0: f64 = rng.sample(StandardNormal);
    let z: Vec<f64> = (0..64).map(|_| rng.sample(StandardNormal)).collect();

    println!("{:>4} {:>10} {:>10} {:>12} {:>12} {:>12}", "N", "min σ", "max σ", "U (grid)", "U (KL)", "V (KL)");
    for n in [2, 8, 16, 64] {
        let g = build_path(z0, &z[..n], &p, t, 4097)?;
        let (u, _) = integrate_path(&g)?;
        let lo = g.sigma_vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = g.sigma_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tail = make_tail(p.kappa * t, n)?;
        let vanish = TailSample::vanishing(&tail);
        let tr = TripletSampler::new(p, t, tail)?.sample_with_tail(z0, &z[..n], &vanish).triplet;
        println!("{n:>4} {lo:>10.5} {hi:>10.5} {u:>12.7} {:>12.7} {:>12.7}", tr.u_avg, tr.v_avg);
    }
    Ok(())
}
