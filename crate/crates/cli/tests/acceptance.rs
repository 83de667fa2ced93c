//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (run with `--nocapture` to see them live).
//!
//! Fast criteria run in seconds. The training criteria use the desk-scale
//! budget (600-episode SISO runs, quarter of the published 2400); the
//! full-scale variant is provided as an `#[ignore]`d test.

use rsic_cli::config::{ExperimentConfig, Preset, Scheme};
use rsic_cli::runner::{evaluate_cell, run_sweep};
use rsic_core::bounds::mimo_outer_bound;
use rsic_core::channel::{sample_channel, AntennaConfig, CsitErrorMode};
use rsic_core::precoding::{mrt, normalize_no_rs, slnr, slnr_quotient, zf_with_fallback, TxChannels};
use rsic_core::rates::{no_rs_rates, rate_report, DecodingOrderPair};
use rsic_core::seeds::SeedSpace;
use rsic_core::testkit::{
    grid_search_weighted_max, random_precoders, scalar_siso_report, transcription_rates_order_1_0,
};
use rsic_learn::env::OrderChoice;
use rsic_learn::{MaddpgConfig, MaddpgSystem, OrderSource};
use std::time::Instant;

fn desk_config(antennas: AntennaConfig, snr_db: f64, seed: u64, rs: bool) -> MaddpgConfig {
    let mut cfg = MaddpgConfig::new(antennas, snr_db, seed);
    cfg.episodes = 600;
    cfg.rate_splitting = rs;
    cfg
}

/// Mean weighted bound and mean sum bound over the evaluation draw streams
/// of `seed` (paired with `MaddpgSystem::evaluate`).
fn bound_means(
    seed: u64,
    antennas: AntennaConfig,
    snr_db: f64,
    beta: f64,
    runs: usize,
    steps: usize,
) -> (f64, f64) {
    let seeds = SeedSpace::new(seed);
    let mut weighted = 0.0;
    let mut sum = 0.0;
    for run in 0..runs {
        let mut rng = seeds.stream_indexed("eval.channel", &[run as u64]);
        for _ in 0..steps {
            let ch = sample_channel(antennas, snr_db, &mut rng);
            let b = mimo_outer_bound(&ch, 1.0, 1.0, beta);
            weighted += b.weighted_max;
            sum += b.sum_max;
        }
    }
    let n = (runs * steps) as f64;
    (weighted / n, sum / n)
}

fn tail_mean_reward(rows: &[rsic_learn::TraceRow], tail: usize) -> f64 {
    let take = tail.min(rows.len());
    rows[rows.len() - take..]
        .iter()
        .map(|r| r.mean_reward)
        .sum::<f64>()
        / take as f64
}

#[test]
fn criterion_01_siso_scalar_chain_equivalence() {
    let start = Instant::now();
    let space = SeedSpace::new(9101);
    let mut rng = space.stream("c1");
    let mut worst: f64 = 0.0;
    for draw in 0..1000 {
        let snr_db = [-5.0, 0.0, 10.0, 20.0][draw % 4];
        let ch = sample_channel(AntennaConfig::siso(), snr_db, &mut rng);
        let p = random_precoders(&mut rng, AntennaConfig::siso());
        for order in DecodingOrderPair::ALL {
            let report = rate_report(&ch, &p, order, 0.5).unwrap();
            let (r1c, r2c, r1, r2, reward) = scalar_siso_report(&ch, &p, order, 0.5);
            for (a, b) in [
                (report.r1c, r1c),
                (report.r2c, r2c),
                (report.r1, r1),
                (report.r2, r2),
                (report.reward, reward),
            ] {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(worst <= 1e-12, "max abs error {worst:.3e} exceeds 1e-12");
    assert!(elapsed < 10.0, "oracle run took {elapsed:.1} s (limit 10 s)");
    println!(
        "criterion 1 PASS — 1000 SISO draws x 4 orders, max abs error {worst:.2e}, {elapsed:.2} s"
    );
}

#[test]
fn criterion_02_transcription_pin_order_1_0() {
    let space = SeedSpace::new(9102);
    let mut rng = space.stream("c2");
    let cfg = AntennaConfig::symmetric(3, 3);
    let mut worst: f64 = 0.0;
    for draw in 0..1000 {
        let snr_db = [0.0, 10.0, 20.0][draw % 3];
        let ch = sample_channel(cfg, snr_db, &mut rng);
        let p = random_precoders(&mut rng, cfg);
        let [r2c_1, r1c_1, r1p, r2c_2, r1c_2, r2p] = transcription_rates_order_1_0(&ch, &p);
        let report = rate_report(&ch, &p, DecodingOrderPair::new(1, 0), 0.5).unwrap();
        for (a, b) in [
            (report.per_receiver_common[1][0], r2c_1),
            (report.per_receiver_common[0][0], r1c_1),
            (report.r1p, r1p),
            (report.per_receiver_common[1][1], r2c_2),
            (report.per_receiver_common[0][1], r1c_2),
            (report.r2p, r2p),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst <= 1e-10, "max abs error {worst:.3e} exceeds 1e-10");
    println!("criterion 2 PASS — 1000 MIMO 3x3 draws, literal-formula max abs error {worst:.2e}");
}

#[test]
fn criterion_03_zero_common_reduction() {
    let space = SeedSpace::new(9103);
    let mut rng = space.stream("c3");
    let mut worst: f64 = 0.0;
    for draw in 0..1000 {
        let cfg = match draw % 3 {
            0 => AntennaConfig::siso(),
            1 => AntennaConfig::symmetric(2, 2),
            _ => AntennaConfig::symmetric(3, 1),
        };
        let ch = sample_channel(cfg, 10.0, &mut rng);
        let mut p = random_precoders(&mut rng, cfg);
        // Move each stream's full budget onto the private direction.
        let zero_common = |wc: &mut rsic_core::CMatrix, wp: &mut rsic_core::CMatrix| {
            for k in 0..wp.cols() {
                let c = wp.col(k);
                let pc: f64 = (0..wc.rows()).map(|r| wc[(r, k)].norm_sqr()).sum();
                let pp: f64 = (0..wp.rows()).map(|r| wp[(r, k)].norm_sqr()).sum();
                let scale = ((pc + pp) / pp).sqrt();
                wp.set_col(k, &c.scale(scale));
            }
            *wc = rsic_core::CMatrix::zeros(wc.rows(), wc.cols());
        };
        let (mut w1c, mut w1p, mut w2c, mut w2p) =
            (p.w1c.clone(), p.w1p.clone(), p.w2c.clone(), p.w2p.clone());
        zero_common(&mut w1c, &mut w1p);
        zero_common(&mut w2c, &mut w2p);
        p.w1c = w1c;
        p.w1p = w1p.clone();
        p.w2c = w2c;
        p.w2p = w2p.clone();
        let baseline = no_rs_rates(&ch, &w1p, &w2p, 0.5).unwrap();
        for order in DecodingOrderPair::ALL {
            let report = rate_report(&ch, &p, order, 0.5).unwrap();
            worst = worst.max((report.r1 - baseline.r1).abs());
            worst = worst.max((report.r2 - baseline.r2).abs());
        }
    }
    assert!(worst <= 1e-10, "max abs error {worst:.3e} exceeds 1e-10");
    println!("criterion 3 PASS — 1000 draws, zero-common vs no-RS max abs error {worst:.2e}");
}

#[test]
fn criterion_04_zf_leakage_and_slnr_dominance() {
    let space = SeedSpace::new(9104);
    let mut rng = space.stream("c4");
    let mut worst_leak: f64 = 0.0;
    let mut worst_margin: f64 = 0.0;
    for draw in 0..1000 {
        let cfg = if draw % 2 == 0 {
            AntennaConfig::symmetric(3, 1)
        } else {
            AntennaConfig::new(3, 3, 2, 2)
        };
        let ch = sample_channel(cfg, 10.0, &mut rng);
        let n0 = ch.noise_power;
        for (h, g, q) in [(&ch.h1, &ch.g1, cfg.q1()), (&ch.h2, &ch.g2, cfg.q2())] {
            let view = TxChannels::new(h, g);
            let (raw, _) = zf_with_fallback(view).unwrap();
            let w = normalize_no_rs(&raw, 1.0).unwrap();
            worst_leak = worst_leak.max(g.mul(&w).frobenius_norm() / w.frobenius_norm());

            let w_slnr = slnr(view, n0, 1.0, q).unwrap();
            let w_mrt = normalize_no_rs(&mrt(view).unwrap(), 1.0).unwrap();
            for k in 0..q {
                let q_slnr = slnr_quotient(view, k, n0, &w_slnr.col(k));
                let q_mrt = slnr_quotient(view, k, n0, &w_mrt.col(k));
                let q_zf = slnr_quotient(view, k, n0, &w.col(k));
                worst_margin = worst_margin
                    .max(q_mrt - q_slnr)
                    .max(q_zf - q_slnr - 1e-9);
            }
        }
    }
    assert!(worst_leak <= 1e-8, "ZF relative leakage {worst_leak:.3e} exceeds 1e-8");
    assert!(
        worst_margin <= 1e-9,
        "SLNR direction beaten by a competitor by {worst_margin:.3e}"
    );
    println!(
        "criterion 4 PASS — 1000 draws: ZF leakage max {worst_leak:.2e}, SLNR dominance margin {worst_margin:.2e}"
    );
}

#[test]
fn criterion_05_gradient_checks() {
    use ndarray::Array2;
    use rand::Rng;
    use rsic_learn::actions::ActionLayout;
    use rsic_learn::mlp::{Activation, Mlp};

    let mut rng = SeedSpace::new(9105).stream("c5");
    let h = 1e-5;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-3);

    // (i) parameter and input gradients of the published architecture.
    let dims = [20, 64, 64, 64, 64, 7];
    let net = Mlp::init(&dims, Activation::Relu, Activation::Linear, &mut rng);
    let x: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let w: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let project = |net: &Mlp, x: &[f64]| -> f64 {
        net.forward(x).iter().zip(&w).map(|(y, w)| y * w).sum()
    };
    let xa = Array2::from_shape_vec((1, 20), x.clone()).unwrap();
    let (_, cache) = net.forward_batch(&xa);
    let d_out = Array2::from_shape_vec((1, 7), w.clone()).unwrap();
    let (grads, d_in) = net.backward_batch(&cache, &d_out);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let layer = rng.gen_range(0..net.num_layers());
        let dim = grads.d_weights[layer].dim();
        let (r, c) = (rng.gen_range(0..dim.0), rng.gen_range(0..dim.1));
        let mut up = net.clone();
        up.weights_mut()[layer][(r, c)] += h;
        let mut dn = net.clone();
        dn.weights_mut()[layer][(r, c)] -= h;
        let fd = (project(&up, &x) - project(&dn, &x)) / (2.0 * h);
        worst = worst.max(rel(fd, grads.d_weights[layer][(r, c)]));
    }
    for i in 0..20 {
        let mut up = x.clone();
        up[i] += h;
        let mut dn = x.clone();
        dn[i] -= h;
        let fd = (project(&net, &up) - project(&net, &dn)) / (2.0 * h);
        worst = worst.max(rel(fd, d_in[(0, i)]));
    }
    assert!(worst <= 1e-4, "network gradient relative error {worst:.3e}");

    // (ii) chained actor-through-critic gradient on a reduced net.
    let layout = ActionLayout { m: 1, q: 1, rate_splitting: true };
    let actor = Mlp::init(&[2, 4, layout.dim()], Activation::Relu, Activation::Linear, &mut rng);
    let critic = Mlp::init(&[4 + layout.dim(), 4, 1], Activation::Relu, Activation::Linear, &mut rng);
    let o: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let objective = |actor: &Mlp| -> f64 {
        let action = layout.squash(&actor.forward(&o));
        let x: Vec<f64> = s.iter().chain(action.iter()).copied().collect();
        critic.forward(&x)[0]
    };
    let oa = Array2::from_shape_vec((1, 2), o.clone()).unwrap();
    let (pre, actor_cache) = actor.forward_batch(&oa);
    let action = layout.squash(&pre.row(0).to_vec());
    let xa: Vec<f64> = s.iter().chain(action.iter()).copied().collect();
    let xa = Array2::from_shape_vec((1, xa.len()), xa).unwrap();
    let (_, critic_cache) = critic.forward_batch(&xa);
    let (_, d_x) = critic.backward_batch(&critic_cache, &Array2::from_elem((1, 1), 1.0));
    let deriv = layout.squash_derivative_from_action(&action);
    let mut d_pre = Array2::zeros((1, layout.dim()));
    for c in 0..layout.dim() {
        d_pre[(0, c)] = d_x[(0, 4 + c)] * deriv[c];
    }
    let (actor_grads, _) = actor.backward_batch(&actor_cache, &d_pre);
    let mut worst_chain: f64 = 0.0;
    for layer in 0..actor.num_layers() {
        let dim = actor_grads.d_weights[layer].dim();
        for r in 0..dim.0 {
            for c in 0..dim.1 {
                let mut up = actor.clone();
                up.weights_mut()[layer][(r, c)] += h;
                let mut dn = actor.clone();
                dn.weights_mut()[layer][(r, c)] -= h;
                let fd = (objective(&up) - objective(&dn)) / (2.0 * h);
                worst_chain = worst_chain.max(rel(fd, actor_grads.d_weights[layer][(r, c)]));
            }
        }
    }
    assert!(worst_chain <= 1e-4, "chained gradient relative error {worst_chain:.3e}");
    println!(
        "criterion 5 PASS — gradient checks: network {worst:.2e}, actor-through-critic {worst_chain:.2e}"
    );
}

#[test]
fn criterion_06_bound_dominance_and_lp() {
    let beta = 0.5;
    let mut violations = 0usize;
    let mut max_excess = 0.0f64;
    let mut draws = 0usize;
    for (cfg_idx, antennas) in [AntennaConfig::siso(), AntennaConfig::symmetric(3, 1)]
        .into_iter()
        .enumerate()
    {
        // Untrained policies are valid (feasible) transmission strategies.
        let rs_sys = MaddpgSystem::new(desk_config(antennas, 10.0, 9200 + cfg_idx as u64, true));
        let nors_sys = MaddpgSystem::new(desk_config(antennas, 10.0, 9300 + cfg_idx as u64, false));
        let space = SeedSpace::new(9106 + cfg_idx as u64);
        let mut rng = space.stream("c6");
        let mut err_rng = space.stream("c6err");
        for draw in 0..10_000 {
            let snr = [0.0, 10.0, 20.0][draw % 3];
            let ch = sample_channel(antennas, snr, &mut rng);
            let est = rsic_core::channel::apply_estimation_error(
                &ch,
                CsitErrorMode::None,
                &mut err_rng,
            );
            let bound = mimo_outer_bound(&ch, 1.0, 1.0, beta);
            let mut rewards: Vec<f64> = Vec::with_capacity(6);
            let (a1, a2, order) = rs_sys.act(&est);
            rewards.push(rs_sys.env_step(&ch, &a1, &a2, order).unwrap().reward);
            let (b1, b2, _) = nors_sys.act(&est);
            rewards.push(
                nors_sys
                    .env_step(&ch, &b1, &b2, OrderChoice::Exhaustive)
                    .unwrap()
                    .reward,
            );
            let mut zf_fallbacks = 0usize;
            let _ = &mut zf_fallbacks;
            let view1 = TxChannels::new(&ch.h1, &ch.g1);
            let view2 = TxChannels::new(&ch.h2, &ch.g2);
            let w = |raw: rsic_core::CMatrix| normalize_no_rs(&raw, 1.0).unwrap();
            let mrt_pair = (w(mrt(view1).unwrap()), w(mrt(view2).unwrap()));
            rewards.push(no_rs_rates(&ch, &mrt_pair.0, &mrt_pair.1, beta).unwrap().reward);
            let zf_pair = (
                w(zf_with_fallback(view1).unwrap().0),
                w(zf_with_fallback(view2).unwrap().0),
            );
            rewards.push(no_rs_rates(&ch, &zf_pair.0, &zf_pair.1, beta).unwrap().reward);
            let sl_pair = (
                slnr(view1, ch.noise_power, 1.0, antennas.q1()).unwrap(),
                slnr(view2, ch.noise_power, 1.0, antennas.q2()).unwrap(),
            );
            rewards.push(no_rs_rates(&ch, &sl_pair.0, &sl_pair.1, beta).unwrap().reward);
            draws += 1;
            for r in rewards {
                let excess = r - bound.weighted_max;
                if excess > 1e-6 {
                    violations += 1;
                    max_excess = max_excess.max(excess);
                }
            }
        }
    }
    assert_eq!(
        violations, 0,
        "{violations} dominance violations, max excess {max_excess:.3e}"
    );

    // LP against the dense grid on a sample of draws.
    let space = SeedSpace::new(9107);
    let mut rng = space.stream("c6grid");
    let mut worst_gap: f64 = 0.0;
    for draw in 0..30 {
        let antennas = if draw % 2 == 0 {
            AntennaConfig::siso()
        } else {
            AntennaConfig::symmetric(3, 1)
        };
        let ch = sample_channel(antennas, [0.0, 10.0, 20.0][draw % 3], &mut rng);
        let b = mimo_outer_bound(&ch, 1.0, 1.0, beta);
        let grid = grid_search_weighted_max(&b, beta, 1e-3);
        worst_gap = worst_gap.max((b.weighted_max - grid).abs());
    }
    assert!(worst_gap <= 2e-3, "LP vs grid gap {worst_gap:.3e}");
    println!(
        "criterion 6 PASS — {draws} paired draws x 5 schemes, 0 violations; LP-grid gap {worst_gap:.2e}"
    );
}

#[test]
fn criterion_07_desk_scale_siso_training() {
    let seed = 2024;
    let snr = 20.0;
    let rs_handle = std::thread::spawn(move || {
        let mut sys = MaddpgSystem::new(desk_config(AntennaConfig::siso(), snr, seed, true));
        let rows = sys.train();
        let eval = sys.evaluate(10, 200, CsitErrorMode::None);
        (rows, eval)
    });
    let nors_handle = std::thread::spawn(move || {
        let mut sys = MaddpgSystem::new(desk_config(AntennaConfig::siso(), snr, seed, false));
        let rows = sys.train();
        let eval = sys.evaluate(10, 200, CsitErrorMode::None);
        (rows, eval)
    });
    let (rs_rows, rs_eval) = rs_handle.join().unwrap();
    let (nors_rows, nors_eval) = nors_handle.join().unwrap();
    let rs_tail = tail_mean_reward(&rs_rows, 200);
    let nors_tail = tail_mean_reward(&nors_rows, 200);
    let (bound_weighted, _) = bound_means(seed, AntennaConfig::siso(), snr, 0.5, 10, 200);
    let ratio_nors = rs_tail / nors_tail;
    let ratio_bound = rs_tail / bound_weighted;
    assert!(
        ratio_nors >= 1.05,
        "RSMA tail {rs_tail:.3} vs no-RS tail {nors_tail:.3}: ratio {ratio_nors:.3} < 1.05"
    );
    assert!(
        ratio_bound >= 0.60,
        "RSMA tail {rs_tail:.3} vs bound {bound_weighted:.3}: ratio {ratio_bound:.3} < 0.60"
    );
    println!(
        "criterion 7 PASS — 600-episode SISO at 20 dB: RSMA tail {rs_tail:.3} ({:.0}% of bound {bound_weighted:.3}), no-RS tail {nors_tail:.3} (ratio {ratio_nors:.2}); eval means rs {:.3} / nors {:.3}",
        100.0 * ratio_bound,
        rs_eval.mean_reward,
        nors_eval.mean_reward
    );
}

#[test]
fn criterion_08_monotone_snr_trend_and_growing_gap() {
    use rayon::prelude::*;
    let grid = [0.0, 6.0, 12.0, 18.0];
    let jobs: Vec<(f64, bool)> = grid
        .iter()
        .flat_map(|&snr| [(snr, true), (snr, false)])
        .collect();
    let results: Vec<(f64, bool, f64)> = jobs
        .par_iter()
        .map(|&(snr, rs)| {
            let mut cfg = desk_config(AntennaConfig::siso(), snr, 2025, rs);
            cfg.episodes = 150;
            let mut sys = MaddpgSystem::new(cfg);
            sys.train();
            let eval = sys.evaluate(10, 200, CsitErrorMode::None);
            (snr, rs, eval.mean_sum_rate)
        })
        .collect();
    let value = |snr: f64, rs: bool| {
        results
            .iter()
            .find(|&&(s, r, _)| s == snr && r == rs)
            .map(|&(_, _, v)| v)
            .unwrap()
    };
    let rsma: Vec<f64> = grid.iter().map(|&s| value(s, true)).collect();
    for w in rsma.windows(2) {
        assert!(
            w[1] > w[0],
            "RSMA mean sum-rate not strictly increasing: {rsma:?}"
        );
    }
    let gap_low = value(0.0, true) - value(0.0, false);
    let gap_high = value(18.0, true) - value(18.0, false);
    assert!(
        gap_high > gap_low,
        "RSMA-vs-no-RS gap did not grow: {gap_low:.3} at 0 dB vs {gap_high:.3} at 18 dB"
    );
    println!(
        "criterion 8 PASS — RSMA sum-rates {:?} strictly increasing; gap 0 dB {gap_low:.3} < gap 18 dB {gap_high:.3}",
        rsma.iter().map(|v| (v * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );
}

#[test]
fn criterion_09_learned_decoding_order() {
    // 20 dB is where order selection matters most; the desk-scale budget
    // still brings the learned order to the exhaustive oracle's level.
    let mut cfg = desk_config(AntennaConfig::siso(), 20.0, 2026, true);
    cfg.order_source = OrderSource::Learned;
    let mut sys = MaddpgSystem::new(cfg);
    sys.train();
    let (learned, exhaustive) = sys.order_efficiency(10, 200);
    let ratio = learned / exhaustive;
    assert!(
        ratio >= 0.90,
        "learned-order reward {learned:.3} vs exhaustive {exhaustive:.3}: ratio {ratio:.3} < 0.90"
    );
    println!(
        "criterion 9 PASS — learned order {learned:.3} vs exhaustive {exhaustive:.3} ({:.1}%)",
        100.0 * ratio
    );
}

#[test]
fn criterion_10_imperfect_csit_sanity() {
    let antennas = AntennaConfig::symmetric(3, 1);
    let snr = 18.0;
    let mut base = ExperimentConfig::default();
    base.antennas = antennas;
    base.snr_db = vec![snr];
    base.seed = 2027;
    base.eval_runs = 20;
    base.eval_steps = 200;
    base.preset = Preset::Full;
    let mut rel_deg = std::collections::HashMap::new();
    for scheme in [Scheme::Mrt, Scheme::Zf, Scheme::Slnr] {
        let mut perfect_cfg = base.clone();
        perfect_cfg.csit = CsitErrorMode::None;
        let perfect = evaluate_cell(&perfect_cfg, scheme, snr, None).unwrap();
        let mut noisy_cfg = base.clone();
        noisy_cfg.csit = CsitErrorMode::Fixed;
        let noisy = evaluate_cell(&noisy_cfg, scheme, snr, None).unwrap();
        assert!(
            noisy.mean_sum_rate <= perfect.mean_sum_rate,
            "{scheme}: imperfect-CSIT mean {:.4} exceeds perfect {:.4}",
            noisy.mean_sum_rate,
            perfect.mean_sum_rate
        );
        rel_deg.insert(
            scheme.as_str(),
            (perfect.mean_sum_rate - noisy.mean_sum_rate) / perfect.mean_sum_rate,
        );
    }
    let mrt_deg = rel_deg["mrt"];
    let zf_deg = rel_deg["zf"];
    assert!(
        mrt_deg < zf_deg,
        "MRT degradation {mrt_deg:.4} not smaller than ZF degradation {zf_deg:.4}"
    );
    println!(
        "criterion 10 PASS — relative degradation at 18 dB: mrt {:.2}% < zf {:.2}% (slnr {:.2}%)",
        100.0 * mrt_deg,
        100.0 * zf_deg,
        100.0 * rel_deg["slnr"]
    );
}

fn dir_snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn criterion_11_byte_identical_reruns() {
    let tmp = std::env::temp_dir().join(format!("rsic-accept-determinism-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&tmp);
    let mut cfg = ExperimentConfig::default();
    cfg.seed = 31337;
    cfg.snr_db = vec![10.0];
    cfg.schemes = vec![Scheme::MaddpgRs, Scheme::Mrt, Scheme::UpperBound];
    cfg.episodes = Some(2);
    cfg.steps = 60;
    cfg.batch_size = 32;
    cfg.eval_runs = 2;
    cfg.eval_steps = 30;
    for run in ["a", "b"] {
        let mut c = cfg.clone();
        c.out_dir = tmp.join(run);
        run_sweep(&c).unwrap();
    }
    let a = dir_snapshot(&tmp.join("a"));
    let b = dir_snapshot(&tmp.join("b"));
    assert_eq!(
        a.len(),
        b.len(),
        "re-run produced a different file set: {} vs {}",
        a.len(),
        b.len()
    );
    let mut checked = 0usize;
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a, name_b, "file sets diverge");
        assert_eq!(bytes_a, bytes_b, "file {name_a} differs between re-runs");
        checked += 1;
    }
    std::fs::remove_dir_all(&tmp).ok();
    println!("criterion 11 PASS — {checked} files byte-identical across re-runs (CSV + checkpoints)");
}

/// Full-scale optional check (about an hour): the published 2400-episode
/// SISO budget should push the tail reward to at least twice the untrained
/// policy's mean and at least 85% of the outer bound.
#[test]
#[ignore]
fn full_scale_siso_training() {
    let seed = 77;
    let snr = 20.0;
    let cfg = {
        let mut c = desk_config(AntennaConfig::siso(), snr, seed, true);
        c.episodes = 2400;
        c
    };
    let mut sys = MaddpgSystem::new(cfg);
    let untrained = sys.evaluate(10, 200, CsitErrorMode::None).mean_reward;
    let rows = sys.train();
    let tail = tail_mean_reward(&rows, 200);
    let (bound_weighted, _) = bound_means(seed, AntennaConfig::siso(), snr, 0.5, 10, 200);
    assert!(
        tail >= 2.0 * untrained,
        "tail {tail:.3} below 2x untrained {untrained:.3}"
    );
    assert!(
        tail >= 0.85 * bound_weighted,
        "tail {tail:.3} below 85% of bound {bound_weighted:.3}"
    );
    println!(
        "full-scale PASS — tail {tail:.3}, untrained {untrained:.3}, bound {bound_weighted:.3}"
    );
}
