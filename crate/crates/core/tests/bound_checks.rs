//! Cross-checks for the outer-bound polytope: the vertex-enumeration LP
//! against a dense grid search, and per-draw dominance over achievable
//! schemes under the full-power rho convention.

use rsic_core::bounds::mimo_outer_bound;
use rsic_core::channel::{sample_channel, AntennaConfig};
use rsic_core::precoding::{mrt, normalize_no_rs, slnr, zf_with_fallback, TxChannels};
use rsic_core::rates::{best_order_report, no_rs_rates};
use rsic_core::seeds::SeedSpace;
use rsic_core::testkit::{grid_search_weighted_max, random_precoders};

#[test]
fn lp_matches_grid_search() {
    let space = SeedSpace::new(717);
    let mut rng = space.stream("grid");
    for (cfg, snr) in [
        (AntennaConfig::siso(), 0.0),
        (AntennaConfig::siso(), 10.0),
        (AntennaConfig::symmetric(3, 1), 0.0),
        (AntennaConfig::symmetric(2, 2), 6.0),
    ] {
        for _ in 0..5 {
            let ch = sample_channel(cfg, snr, &mut rng);
            for beta in [0.5, 0.2, 1.0] {
                let b = mimo_outer_bound(&ch, 1.0, 1.0, beta);
                let grid = grid_search_weighted_max(&b, beta, 1e-3);
                assert!(
                    (b.weighted_max - grid).abs() <= 2e-3,
                    "LP {} vs grid {} (beta {beta})",
                    b.weighted_max,
                    grid
                );
                assert!(b.weighted_max >= grid - 1e-9, "LP must dominate the grid");
            }
        }
    }
}

#[test]
fn bound_dominates_achievable_schemes_per_draw() {
    let space = SeedSpace::new(818);
    let mut rng = space.stream("dominance");
    let beta = 0.5;
    for draw in 0..1000 {
        let cfg = if draw % 2 == 0 {
            AntennaConfig::siso()
        } else {
            AntennaConfig::symmetric(3, 1)
        };
        let snr = [0.0, 10.0, 20.0][draw % 3];
        let ch = sample_channel(cfg, snr, &mut rng);
        let bound = mimo_outer_bound(&ch, 1.0, 1.0, beta);

        let mut achieved: Vec<(&str, f64)> = Vec::new();

        // Rate splitting with random feasible precoders and the best order.
        let p = random_precoders(&mut rng, cfg);
        let (_, report) = best_order_report(&ch, &p, beta).unwrap();
        achieved.push(("rsma", report.reward));

        // The three closed-form precoders without rate splitting.
        let view1 = TxChannels::new(&ch.h1, &ch.g1);
        let view2 = TxChannels::new(&ch.h2, &ch.g2);
        let w = |raw: rsic_core::CMatrix| normalize_no_rs(&raw, 1.0).unwrap();
        let mrt1 = w(mrt(view1).unwrap());
        let mrt2 = w(mrt(view2).unwrap());
        achieved.push(("mrt", no_rs_rates(&ch, &mrt1, &mrt2, beta).unwrap().reward));
        let zf1 = w(zf_with_fallback(view1).unwrap().0);
        let zf2 = w(zf_with_fallback(view2).unwrap().0);
        achieved.push(("zf", no_rs_rates(&ch, &zf1, &zf2, beta).unwrap().reward));
        let sl1 = slnr(view1, ch.noise_power, 1.0, cfg.q1()).unwrap();
        let sl2 = slnr(view2, ch.noise_power, 1.0, cfg.q2()).unwrap();
        achieved.push(("slnr", no_rs_rates(&ch, &sl1, &sl2, beta).unwrap().reward));

        for (name, reward) in achieved {
            assert!(
                reward <= bound.weighted_max + 1e-6,
                "draw {draw}: {name} reward {reward} exceeds bound {}",
                bound.weighted_max
            );
        }
    }
}
