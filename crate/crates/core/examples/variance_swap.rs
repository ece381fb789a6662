//! Fair strike of a continuous variance swap: closed form versus the sampled
//! mean of the realised variance `V`.

use ousv::kl_engine::{DrawBlock, TripletSampler};
use ousv::ou_analytics::uncond_means;
use ousv::rng::substream;
use ousv::series_tails::make_tail;
use ousv::ModelParams;

fn main() -> ousv::Result<()> {
    let p = ModelParams::new(100.0, 0.3, 0.2, 2.0, 0.15, -0.5, 0.03)?;
    for t in [0.25, 1.0, 5.0] {
        let sampler = TripletSampler::new(p, t, make_tail(p.kappa * t, 8)?)?;
        let mut rng = substream(11, 0);
        let mut block = DrawBlock::zeros(8);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            block.fill(&mut rng);
            let a = sampler.sample(&block)?.triplet.v_avg;
            block.negate();
            let b = sampler.sample(&block)?.triplet.v_avg;
            let pair = 0.5 * (a + b);
            sum += pair;
            sum_sq += pair * pair;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        let exact = uncond_means(&p, t).mean_v;
        println!(
            "T={t:<5} strike {:.4}%  (vol {:.4}%)  sampled {:.4}% ± {:.4}%",
            100.0 * exact,
            100.0 * exact.sqrt(),
            100.0 * mean,
            100.0 * se
        );
    }
    Ok(())
}
