//! Independent oracles for the SIC rate calculus.
//!
//! Three cross-checks pin the matrix-form implementation: a scalar
//! SINR-chain oracle with hand-enumerated residual interference sets (SISO),
//! a literal transcription of the written per-receiver determinant formulas
//! for the (1, 0) order pair (MIMO), and the no-rate-splitting reduction.

use rsic_core::channel::{sample_channel, AntennaConfig, ChannelRealization};
use rsic_core::precoding::{normalize_rsma, RawRsmaDirections};
use rsic_core::rates::{
    best_order_report, no_rs_rates, rate_report, DecodingOrderPair, PrecoderSet,
};
use rsic_core::seeds::SeedSpace;
use rsic_core::testkit::{random_dirs, random_precoders, scalar_siso_report, transcription_rates_order_1_0};

#[test]
fn siso_matrix_rates_match_scalar_chain_all_orders() {
    let space = SeedSpace::new(101);
    let mut rng = space.stream("siso-oracle");
    for draw in 0..1000 {
        let snr_db = [-5.0, 0.0, 10.0, 20.0][draw % 4];
        let ch = sample_channel(AntennaConfig::siso(), snr_db, &mut rng);
        let p = random_precoders(&mut rng, AntennaConfig::siso());
        for order in DecodingOrderPair::ALL {
            let report = rate_report(&ch, &p, order, 0.5).unwrap();
            let (r1c, r2c, r1, r2, reward) = scalar_siso_report(&ch, &p, order, 0.5);
            assert!((report.r1c - r1c).abs() <= 1e-12, "r1c mismatch at draw {draw}");
            assert!((report.r2c - r2c).abs() <= 1e-12, "r2c mismatch at draw {draw}");
            assert!((report.r1 - r1).abs() <= 1e-12);
            assert!((report.r2 - r2).abs() <= 1e-12);
            assert!((report.reward - reward).abs() <= 1e-12);
        }
    }
}

#[test]
fn mimo_rates_match_written_formulas_for_order_1_0() {
    let space = SeedSpace::new(202);
    let mut rng = space.stream("transcription");
    let cfg = AntennaConfig::symmetric(3, 3);
    for draw in 0..1000 {
        let snr_db = [0.0, 10.0, 20.0][draw % 3];
        let ch = sample_channel(cfg, snr_db, &mut rng);
        let p = random_precoders(&mut rng, cfg);
        let [r2c_1, r1c_1, r1p, r2c_2, r1c_2, r2p] = transcription_rates_order_1_0(&ch, &p);
        let report = rate_report(&ch, &p, DecodingOrderPair::new(1, 0), 0.5).unwrap();
        let tol = 1e-10;
        assert!((report.per_receiver_common[1][0] - r2c_1).abs() <= tol, "R2c^1, draw {draw}");
        assert!((report.per_receiver_common[0][0] - r1c_1).abs() <= tol, "R1c^1, draw {draw}");
        assert!((report.r1p - r1p).abs() <= tol, "R1p, draw {draw}");
        assert!((report.per_receiver_common[1][1] - r2c_2).abs() <= tol, "R2c^2, draw {draw}");
        assert!((report.per_receiver_common[0][1] - r1c_2).abs() <= tol, "R1c^2, draw {draw}");
        assert!((report.r2p - r2p).abs() <= tol, "R2p, draw {draw}");
    }
}

#[test]
fn zero_common_power_reduces_to_no_rs() {
    let space = SeedSpace::new(303);
    let mut rng = space.stream("reduction");
    for draw in 0..1000 {
        let cfg = match draw % 3 {
            0 => AntennaConfig::siso(),
            1 => AntennaConfig::symmetric(2, 2),
            _ => AntennaConfig::symmetric(3, 1),
        };
        let ch = sample_channel(cfg, 10.0, &mut rng);
        let dirs = RawRsmaDirections {
            u1c: random_dirs(&mut rng, cfg.m1, cfg.q1()),
            u1p: random_dirs(&mut rng, cfg.m1, cfg.q1()),
            u2c: random_dirs(&mut rng, cfg.m2, cfg.q2()),
            u2p: random_dirs(&mut rng, cfg.m2, cfg.q2()),
        };
        let zeros1 = vec![0.0; cfg.q1()];
        let zeros2 = vec![0.0; cfg.q2()];
        let p = normalize_rsma(&dirs, &zeros1, &zeros2, 1.0, 1.0).unwrap();
        let baseline = no_rs_rates(&ch, &p.w1p, &p.w2p, 0.5).unwrap();
        for order in DecodingOrderPair::ALL {
            let report = rate_report(&ch, &p, order, 0.5).unwrap();
            assert!((report.r1 - baseline.r1).abs() <= 1e-10);
            assert!((report.r2 - baseline.r2).abs() <= 1e-10);
            assert!(report.r1c == 0.0 && report.r2c == 0.0);
        }
    }
}

#[test]
fn rates_are_scale_invariant_in_noise_and_power() {
    let space = SeedSpace::new(404);
    let mut rng = space.stream("scaling");
    for _ in 0..200 {
        let cfg = AntennaConfig::symmetric(2, 2);
        let ch = sample_channel(cfg, 10.0, &mut rng);
        let p = random_precoders(&mut rng, cfg);
        let c = 4.2f64;
        let scaled_ch = ChannelRealization {
            h1: ch.h1.clone(),
            h2: ch.h2.clone(),
            g1: ch.g1.clone(),
            g2: ch.g2.clone(),
            noise_power: ch.noise_power * c,
        };
        let scaled_p = PrecoderSet {
            w1c: p.w1c.scale(c.sqrt()),
            w1p: p.w1p.scale(c.sqrt()),
            w2c: p.w2c.scale(c.sqrt()),
            w2p: p.w2p.scale(c.sqrt()),
        };
        for order in DecodingOrderPair::ALL {
            let a = rate_report(&ch, &p, order, 0.5).unwrap();
            let b = rate_report(&scaled_ch, &scaled_p, order, 0.5).unwrap();
            assert!((a.r1 - b.r1).abs() <= 1e-10);
            assert!((a.r2 - b.r2).abs() <= 1e-10);
        }
    }
}

#[test]
fn common_power_never_decreases_common_rates() {
    let space = SeedSpace::new(505);
    let mut rng = space.stream("monotone");
    for _ in 0..200 {
        let cfg = AntennaConfig::symmetric(2, 2);
        let ch = sample_channel(cfg, 10.0, &mut rng);
        let p = random_precoders(&mut rng, cfg);
        let mut boosted = p.clone();
        boosted.w1c = p.w1c.scale(1.5);
        boosted.w2c = p.w2c.scale(1.5);
        for order in DecodingOrderPair::ALL {
            let a = rate_report(&ch, &p, order, 0.5).unwrap();
            let b = rate_report(&ch, &boosted, order, 0.5).unwrap();
            for i in 0..2 {
                for m in 0..2 {
                    assert!(
                        b.per_receiver_common[i][m] >= a.per_receiver_common[i][m] - 1e-12,
                        "common rate decreased when common power grew"
                    );
                }
            }
        }
    }
}

#[test]
fn best_order_dominates_every_fixed_order_and_rates_nonnegative() {
    let space = SeedSpace::new(606);
    let mut rng = space.stream("dominance");
    for _ in 0..300 {
        let cfg = AntennaConfig::symmetric(2, 2);
        let ch = sample_channel(cfg, 6.0, &mut rng);
        let p = random_precoders(&mut rng, cfg);
        let (_, best) = best_order_report(&ch, &p, 0.5).unwrap();
        for order in DecodingOrderPair::ALL {
            let report = rate_report(&ch, &p, order, 0.5).unwrap();
            assert!(best.reward >= report.reward - 1e-12);
            for v in [report.r1c, report.r2c, report.r1p, report.r2p] {
                assert!(v >= 0.0);
            }
        }
    }
}
