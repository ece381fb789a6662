//! Prices a one-year at-the-money call by drawing triplets directly.

use ousv::kl_engine::{DrawBlock, TripletSampler};
use ousv::pricing::{price_call, price_put};
use ousv::rng::substream;
use ousv::series_tails::make_tail;
use ousv::ModelParams;

fn main() -> ousv::Result<()> {
    let p = ModelParams::benchmark();
    let (t, k, l) = (1.0, 100.0, 6);
    let sampler = TripletSampler::new(p, t, make_tail(p.kappa * t, l)?)?;

    let mut rng = substream(42, 0);
    let mut block = DrawBlock::zeros(l);
    let mut triplets = Vec::with_capacity(400_000);
    for _ in 0..200_000 {
        block.fill(&mut rng);
        triplets.push(sampler.sample(&block)?.triplet);
        block.negate();
        triplets.push(sampler.sample(&block)?.triplet);
    }

    let plain = price_call(&triplets, k, &p, t, false)?;
    let cv = price_call(&triplets, k, &p, t, true)?;
    let put = price_put(&triplets, k, &p, t, true)?;
    println!("call (no cv)   {:.5}", plain.price);
    println!("call (cv)      {:.5}  mu = {:.6}", cv.price, cv.mu);
    println!("put  (cv)      {:.5}", put.price);
    println!("implied spot   {:.5}", cv.spot_check);
    println!("reference      13.21492");
    Ok(())
}
