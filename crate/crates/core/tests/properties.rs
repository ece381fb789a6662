use std::f64::consts::PI;

use ousv::kl_engine::{DrawBlock, TripletSampler};
use ousv::ou_analytics::{cond_mean_u, ModelParams};
use ousv::path_synth::build_path;
use ousv::pricing::{cond_law, price_call, price_put, PriceStats};
use ousv::series_tails::{make_tail, tail_sum, Parity, Series};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (0.05f64..0.6, 0.05f64..0.4, 0.0f64..6.0, 0.02f64..0.5, -0.95f64..0.95, -0.02f64..0.1).prop_map(
        |(sigma0, theta, kappa, xi, rho, r)| ModelParams::new(100.0, sigma0, theta, kappa, xi, rho, r).unwrap(),
    )
}

fn block(l: usize) -> impl Strategy<Value = DrawBlock> {
    (-3.0f64..3.0, prop::collection::vec(-3.0f64..3.0, l), prop::array::uniform4(-3.0f64..3.0))
        .prop_map(|(z0, z, w)| DrawBlock { z0, z, w })
}

fn brute(series: Series, parity: Parity, lambda: f64, from: usize, n: usize) -> f64 {
    let mut acc = 0.0;
    for k in (from..=n).rev().filter(|&k| parity.includes(k)) {
        acc += series.term(k, lambda);
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sampled_triplets_respect_cauchy_schwarz(p in params(), t in 0.1f64..10.0, d in block(6)) {
        let sampler = TripletSampler::new(p, t, make_tail(p.kappa * t, 6).unwrap()).unwrap();
        let tr = sampler.sample(&d).unwrap().triplet;
        prop_assert!(tr.v_avg >= tr.u_avg * tr.u_avg);
        let law = cond_law(&tr, &p, t);
        prop_assert!(law.fwd > 0.0 && law.sig_total >= 0.0);
    }

    #[test]
    fn negation_flips_linear_parts(p in params(), t in 0.1f64..10.0, d in block(8)) {
        let sampler = TripletSampler::new(p, t, make_tail(p.kappa * t, 8).unwrap()).unwrap();
        let lambda = p.kappa * t;
        let mut neg = d.clone();
        neg.negate();
        let a = sampler.sample(&d).unwrap();
        let b = sampler.sample(&neg).unwrap();
        let (sa, ua, _) = a.triplet.to_centered(p.theta);
        let (sb, ub, _) = b.triplet.to_centered(p.theta);
        let decay = p.sigma_bar0() * (-lambda).exp();
        let (ha, hb) = (sa - decay, sb - decay);
        prop_assert!((ha + hb).abs() <= 1e-12);
        let ma = cond_mean_u(p.sigma_bar0(), ha, lambda);
        let mb = cond_mean_u(p.sigma_bar0(), hb, lambda);
        prop_assert!(((ua - ma) + (ub - mb)).abs() <= 1e-12);
    }

    #[test]
    fn path_endpoints_are_pinned(p in params(), t in 0.1f64..10.0, d in block(16), n_grid in 2usize..300) {
        let g = build_path(d.z0, &d.z, &p, t, n_grid).unwrap();
        let lambda = p.kappa * t;
        let sigma_hat = p.xi * (t * ousv::ou_analytics::phi(2.0 * lambda)).sqrt() * d.z0;
        prop_assert!((g.sigma_vals[0] - p.sigma0).abs() <= 1e-12);
        let end = p.theta + p.sigma_bar0() * (-lambda).exp() + sigma_hat;
        prop_assert!((g.sigma_vals[n_grid - 1] - end).abs() <= 1e-12);
        prop_assert!(g.t_grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tails_are_positive_decreasing_and_psd(lambda in 0.0f64..50.0, half in 1usize..16) {
        let l = 2 * half;
        let a = make_tail(lambda, l).unwrap();
        let b = make_tail(lambda, l + 2).unwrap();
        for (x, y) in [(a.odd_f, b.odd_f), (a.odd_c, b.odd_c), (a.odd_g, b.odd_g), (a.even_g, b.even_g), (a.full_c, b.full_c)] {
            prop_assert!(x > 0.0 && y > 0.0 && y < x);
        }
        prop_assert!(a.rho_l > 0.0 && a.rho_l <= 1.0);
        prop_assert!(a.odd_c * a.odd_c <= a.odd_f * a.odd_g * (1.0 + 1e-14));
    }

    #[test]
    fn fast_decaying_tails_match_direct_sums(lambda in 0.0f64..45.0, half in 1usize..10) {
        let l = 2 * half;
        for s in [Series::C, Series::D, Series::F, Series::G] {
            for parity in [Parity::All, Parity::Odd, Parity::Even] {
                let direct = brute(s, parity, lambda, l + 1, 200_000);
                let analytic = tail_sum(s, parity, lambda, l);
                prop_assert!((analytic - direct).abs() <= 1e-9 * direct, "{} {} {analytic} {direct}", s.name(), parity.name());
            }
        }
        // b decays like n⁻²: add the integral remainder
        let n = 200_000;
        let m = n as f64 + 0.5;
        let rem = if lambda == 0.0 { 2.0 / (PI * PI * m) } else { 2.0 / (PI * lambda) * (lambda / (PI * m)).atan() };
        let direct = brute(Series::B, Parity::All, lambda, l + 1, n) + rem;
        prop_assert!((tail_sum(Series::B, Parity::All, lambda, l) - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn parity_holds_for_any_stream(p in params(), t in 0.25f64..5.0, k in 50.0f64..200.0, draws in prop::collection::vec(block(4), 2..40)) {
        let sampler = TripletSampler::new(p, t, make_tail(p.kappa * t, 4).unwrap()).unwrap();
        let triplets: Vec<_> = draws.iter().map(|d| sampler.sample(d).unwrap().triplet).collect();
        let call = price_call(&triplets, k, &p, t, true).unwrap();
        let put = price_put(&triplets, k, &p, t, true).unwrap();
        let disc = (-p.r * t).exp();
        let rhs = p.s0 - disc * k;
        prop_assert!((call.price - put.price - rhs).abs() <= 1e-12 * p.s0.max(k));
    }

    #[test]
    fn rmse_dominates_bias(values in prop::collection::vec(0.0f64..100.0, 1..50), reference in 0.0f64..100.0) {
        let s = PriceStats::from_sets(&values, Some(reference), 0.0, 0);
        let (b, r) = (s.bias.unwrap(), s.rmse.unwrap());
        prop_assert!(r * r >= b * b * (1.0 - 1e-12));
    }
}
