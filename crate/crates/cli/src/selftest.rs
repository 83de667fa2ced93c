//! Fast invariant suite behind the `selftest` verb: one pass/fail line per
//! check, nonzero exit on any failure. Runs in seconds; the heavyweight
//! acceptance checks live in the test suite.

use ndarray::Array2;
use rsic_core::bounds::mimo_outer_bound;
use rsic_core::channel::{sample_channel, AntennaConfig, ChannelRealization};
use rsic_core::linalg::CMatrix;
use rsic_core::precoding::{
    mrt, normalize_no_rs, normalize_rsma, slnr, slnr_quotient, zf_with_fallback,
    RawRsmaDirections, TxChannels,
};
use rsic_core::rates::{no_rs_rates, rate_report, DecodingOrderPair};
use rsic_core::seeds::SeedSpace;
use rsic_learn::mlp::{Activation, Mlp};
use rsic_learn::{MaddpgConfig, MaddpgSystem};
use num_complex::Complex64 as C;
use rand::Rng;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, result: Result<String, String>) -> Outcome {
    match result {
        Ok(detail) => Outcome {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Outcome {
            name,
            passed: false,
            detail,
        },
    }
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols)
        .map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    CMatrix::from_vec(rows, cols, data)
}

fn linalg_identities() -> Result<String, String> {
    let seeds = SeedSpace::new(90001);
    let mut rng = seeds.stream("linalg");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = random_matrix(&mut rng, 3, 5);
        let lhs = CMatrix::identity(3)
            .add(&x.outer_gram())
            .logdet_hpd()
            .map_err(|e| e.to_string())?;
        let rhs = CMatrix::identity(5)
            .add(&x.inner_gram())
            .logdet_hpd()
            .map_err(|e| e.to_string())?;
        worst = worst.max((lhs - rhs).abs());
        let a = CMatrix::identity(4).add(&random_matrix(&mut rng, 4, 4).outer_gram());
        let b = random_matrix(&mut rng, 4, 2);
        let x = a.solve(&b).map_err(|e| e.to_string())?;
        let residual = a.mul(&x).sub(&b).frobenius_norm();
        if residual > 1e-9 * b.frobenius_norm() {
            return Err(format!("solve residual {residual:.3e}"));
        }
    }
    if worst > 1e-10 {
        return Err(format!("Sylvester identity deviation {worst:.3e}"));
    }
    Ok(format!("Sylvester deviation {worst:.2e}, solve residuals in bound"))
}

fn scalar_chain_equivalence() -> Result<String, String> {
    let seeds = SeedSpace::new(90002);
    let mut rng = seeds.stream("siso");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let ch = sample_channel(AntennaConfig::siso(), 10.0, &mut rng);
        let dirs = RawRsmaDirections {
            u1c: random_matrix(&mut rng, 1, 1),
            u1p: random_matrix(&mut rng, 1, 1),
            u2c: random_matrix(&mut rng, 1, 1),
            u2p: random_matrix(&mut rng, 1, 1),
        };
        let s1 = [rng.gen::<f64>()];
        let s2 = [rng.gen::<f64>()];
        let p = normalize_rsma(&dirs, &s1, &s2, 1.0, 1.0).map_err(|e| e.to_string())?;
        for order in DecodingOrderPair::ALL {
            let report = rate_report(&ch, &p, order, 0.5).map_err(|e| e.to_string())?;
            // Scalar SINR chain at receiver 1.
            let n0 = ch.noise_power;
            let h1 = ch.h1[(0, 0)].norm_sqr();
            let g2 = ch.g2[(0, 0)].norm_sqr();
            let (s_ic, s_ip) = (h1 * p.w1c[(0, 0)].norm_sqr(), h1 * p.w1p[(0, 0)].norm_sqr());
            let (s_jc, s_jp) = (g2 * p.w2c[(0, 0)].norm_sqr(), g2 * p.w2p[(0, 0)].norm_sqr());
            let rate = |sig: f64, interf: f64| (1.0 + sig / (interf + n0)).log2();
            let r1c_at1 = if order.eta1 == 1 {
                rate(s_ic, s_ip + s_jp)
            } else {
                rate(s_ic, s_jc + s_ip + s_jp)
            };
            worst = worst.max((report.per_receiver_common[0][0] - r1c_at1).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("matrix vs scalar deviation {worst:.3e}"));
    }
    Ok(format!("max deviation {worst:.2e} over 400 order evaluations"))
}

fn reduction_identity() -> Result<String, String> {
    let seeds = SeedSpace::new(90003);
    let mut rng = seeds.stream("reduce");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let cfg = AntennaConfig::symmetric(2, 2);
        let ch = sample_channel(cfg, 8.0, &mut rng);
        let dirs = RawRsmaDirections {
            u1c: random_matrix(&mut rng, 2, 2),
            u1p: random_matrix(&mut rng, 2, 2),
            u2c: random_matrix(&mut rng, 2, 2),
            u2p: random_matrix(&mut rng, 2, 2),
        };
        let zeros = [0.0, 0.0];
        let p = normalize_rsma(&dirs, &zeros, &zeros, 1.0, 1.0).map_err(|e| e.to_string())?;
        let baseline = no_rs_rates(&ch, &p.w1p, &p.w2p, 0.5).map_err(|e| e.to_string())?;
        let report = rate_report(&ch, &p, DecodingOrderPair::new(1, 0), 0.5)
            .map_err(|e| e.to_string())?;
        worst = worst.max((report.reward - baseline.reward).abs());
    }
    if worst > 1e-10 {
        return Err(format!("zero-common reduction deviation {worst:.3e}"));
    }
    Ok(format!("max deviation {worst:.2e}"))
}

fn precoder_properties() -> Result<String, String> {
    let seeds = SeedSpace::new(90004);
    let mut rng = seeds.stream("precoders");
    let mut worst_leak: f64 = 0.0;
    for _ in 0..100 {
        let ch = sample_channel(AntennaConfig::symmetric(3, 1), 10.0, &mut rng);
        let view = TxChannels::new(&ch.h1, &ch.g1);
        let (raw, _) = zf_with_fallback(view).map_err(|e| e.to_string())?;
        let w = normalize_no_rs(&raw, 1.0).map_err(|e| e.to_string())?;
        worst_leak = worst_leak.max(ch.g1.mul(&w).frobenius_norm() / w.frobenius_norm());
        let n0 = ch.noise_power;
        let w_slnr = slnr(view, n0, 1.0, 1).map_err(|e| e.to_string())?;
        let q_slnr = slnr_quotient(view, 0, n0, &w_slnr.col(0));
        let w_mrt =
            normalize_no_rs(&mrt(view).map_err(|e| e.to_string())?, 1.0).map_err(|e| e.to_string())?;
        let q_mrt = slnr_quotient(view, 0, n0, &w_mrt.col(0));
        let q_zf = slnr_quotient(view, 0, n0, &w.col(0));
        if q_slnr < q_mrt - 1e-9 * q_slnr || q_slnr < q_zf - 1e-9 * q_slnr {
            return Err(format!(
                "SLNR quotient {q_slnr:.6} below mrt {q_mrt:.6} or zf {q_zf:.6}"
            ));
        }
    }
    if worst_leak > 1e-8 {
        return Err(format!("ZF leakage {worst_leak:.3e}"));
    }
    Ok(format!("ZF leakage max {worst_leak:.2e}, SLNR dominates"))
}

fn bound_properties() -> Result<String, String> {
    let seeds = SeedSpace::new(90005);
    let mut rng = seeds.stream("bounds");
    for _ in 0..4 {
        let ch = sample_channel(AntennaConfig::siso(), 0.0, &mut rng);
        let b = mimo_outer_bound(&ch, 1.0, 1.0, 0.5);
        if (b.weighted_max - b.sum_max / 2.0).abs() > 1e-9 {
            return Err("weighted max at beta 0.5 is not half the sum max".into());
        }
        // Coarse grid cross-check.
        let step = 1e-3;
        let mut grid: f64 = 0.0;
        let coefs: [(f64, f64); 7] = [
            (1.0, 0.0),
            (0.0, 1.0),
            (1.0, 1.0),
            (1.0, 1.0),
            (1.0, 1.0),
            (2.0, 1.0),
            (1.0, 2.0),
        ];
        let n1 = (b.r1_max / step).ceil() as usize;
        for i in 0..=n1 {
            let r1 = i as f64 * step;
            let mut r2 = b.r2_max;
            while r2 >= 0.0 {
                if coefs
                    .iter()
                    .zip(&b.rhs)
                    .all(|(&(a, bb), &c)| a * r1 + bb * r2 <= c + 1e-12)
                {
                    grid = grid.max(0.5 * r1 + 0.5 * r2);
                    break;
                }
                r2 -= step;
            }
        }
        if (b.weighted_max - grid).abs() > 2e-3 {
            return Err(format!("LP {} vs grid {}", b.weighted_max, grid));
        }
    }
    Ok("vertex LP matches grid search within 2e-3".into())
}

fn gradient_check() -> Result<String, String> {
    let seeds = SeedSpace::new(90006);
    let mut rng = seeds.stream("grad");
    let net = Mlp::init(&[6, 16, 16, 3], Activation::Relu, Activation::Tanh, &mut rng);
    let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0_f64)).collect();
    let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0_f64)).collect();
    let project = |net: &Mlp, x: &[f64]| -> f64 {
        net.forward(x).iter().zip(&w).map(|(y, w)| y * w).sum()
    };
    let xa = Array2::from_shape_vec((1, 6), x.clone()).map_err(|e| e.to_string())?;
    let (_, cache) = net.forward_batch(&xa);
    let d_out = Array2::from_shape_vec((1, 3), w.clone()).map_err(|e| e.to_string())?;
    let (grads, _) = net.backward_batch(&cache, &d_out);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let layer = rng.gen_range(0..net.num_layers());
        let dim = grads.d_weights[layer].dim();
        let (r, c) = (rng.gen_range(0..dim.0), rng.gen_range(0..dim.1));
        let h = 1e-5;
        let mut up = net.clone();
        up.weights_mut()[layer][(r, c)] += h;
        let mut dn = net.clone();
        dn.weights_mut()[layer][(r, c)] -= h;
        let fd = (project(&up, &x) - project(&dn, &x)) / (2.0 * h);
        let an = grads.d_weights[layer][(r, c)];
        worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1e-3));
    }
    if worst > 1e-4 {
        return Err(format!("gradient relative error {worst:.3e}"));
    }
    Ok(format!("max relative error {worst:.2e}"))
}

fn training_determinism() -> Result<String, String> {
    let mut cfg = MaddpgConfig::new(AntennaConfig::siso(), 10.0, 424242);
    cfg.episodes = 1;
    cfg.steps_per_episode = 40;
    cfg.batch_size = 16;
    cfg.hidden_size = 16;
    let mut a = MaddpgSystem::new(cfg.clone());
    let mut b = MaddpgSystem::new(cfg);
    let ra = a.train();
    let rb = b.train();
    for (x, y) in ra.iter().zip(&rb) {
        if x.mean_reward.to_bits() != y.mean_reward.to_bits() {
            return Err("identical seeds produced different traces".into());
        }
    }
    let ea = a.evaluate(2, 20, rsic_core::channel::CsitErrorMode::None);
    let eb = b.evaluate(2, 20, rsic_core::channel::CsitErrorMode::None);
    if ea.mean_reward.to_bits() != eb.mean_reward.to_bits() {
        return Err("identical seeds produced different evaluations".into());
    }
    Ok("bit-identical traces and evaluations".into())
}

fn dominance_spotcheck() -> Result<String, String> {
    let seeds = SeedSpace::new(90007);
    let mut rng = seeds.stream("dom");
    for _ in 0..200 {
        let ch: ChannelRealization = sample_channel(AntennaConfig::symmetric(3, 1), 10.0, &mut rng);
        let bound = mimo_outer_bound(&ch, 1.0, 1.0, 0.5);
        let view1 = TxChannels::new(&ch.h1, &ch.g1);
        let view2 = TxChannels::new(&ch.h2, &ch.g2);
        let w1 = normalize_no_rs(&mrt(view1).map_err(|e| e.to_string())?, 1.0)
            .map_err(|e| e.to_string())?;
        let w2 = normalize_no_rs(&mrt(view2).map_err(|e| e.to_string())?, 1.0)
            .map_err(|e| e.to_string())?;
        let r = no_rs_rates(&ch, &w1, &w2, 0.5).map_err(|e| e.to_string())?;
        if r.reward > bound.weighted_max + 1e-6 {
            return Err(format!(
                "MRT reward {} exceeded bound {}",
                r.reward, bound.weighted_max
            ));
        }
    }
    Ok("no violations over 200 draws".into())
}

/// Run every check, print one line each, and report overall success.
pub fn run() -> bool {
    let checks: Vec<Outcome> = vec![
        check("linalg-identities", linalg_identities()),
        check("siso-scalar-chain", scalar_chain_equivalence()),
        check("zero-common-reduction", reduction_identity()),
        check("precoder-properties", precoder_properties()),
        check("bound-lp-grid", bound_properties()),
        check("mlp-gradient-check", gradient_check()),
        check("training-determinism", training_determinism()),
        check("bound-dominance", dominance_spotcheck()),
    ];
    let mut all = true;
    for c in &checks {
        println!(
            "{} {} — {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        all &= c.passed;
    }
    all
}
