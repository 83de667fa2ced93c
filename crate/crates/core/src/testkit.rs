//! Independent test oracles, compiled only with the `testkit` feature.
//!
//! Everything here deliberately re-derives results along a different path
//! than the production code: scalar SINR chains with hand-enumerated
//! interference sets, cofactor determinants, a literal transcription of the
//! written per-receiver rate formulas, and a dense grid search over the
//! bound polytope.

use crate::bounds::BoundReport;
use crate::channel::{AntennaConfig, ChannelRealization};
use crate::linalg::CMatrix;
use crate::precoding::{normalize_rsma, RawRsmaDirections};
use crate::rates::{DecodingOrderPair, PrecoderSet};
use num_complex::Complex64 as C;
use rand::Rng;

pub fn random_dirs<R: Rng>(rng: &mut R, m: usize, q: usize) -> CMatrix {
    let data = (0..m * q)
        .map(|_| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    CMatrix::from_vec(m, q, data)
}

/// Random feasible precoders through the production normalization map.
pub fn random_precoders<R: Rng>(rng: &mut R, cfg: AntennaConfig) -> PrecoderSet {
    let dirs = RawRsmaDirections {
        u1c: random_dirs(rng, cfg.m1, cfg.q1()),
        u1p: random_dirs(rng, cfg.m1, cfg.q1()),
        u2c: random_dirs(rng, cfg.m2, cfg.q2()),
        u2p: random_dirs(rng, cfg.m2, cfg.q2()),
    };
    let splits1: Vec<f64> = (0..cfg.q1()).map(|_| rng.gen::<f64>()).collect();
    let splits2: Vec<f64> = (0..cfg.q2()).map(|_| rng.gen::<f64>()).collect();
    normalize_rsma(&dirs, &splits1, &splits2, 1.0, 1.0).expect("feasible precoders")
}

/// Scalar SINR-chain rate accounting for a SISO draw, with every residual
/// interference set enumerated by hand. Returns
/// `(r1c, r2c, r1, r2, weighted reward)`.
pub fn scalar_siso_report(
    ch: &ChannelRealization,
    p: &PrecoderSet,
    order: DecodingOrderPair,
    beta: f64,
) -> (f64, f64, f64, f64, f64) {
    let n0 = ch.noise_power;
    let rate = |sig: f64, interf: f64| (1.0 + sig / (interf + n0)).log2();
    // Received stream powers (own common, own private, other common, other
    // private) at each receiver.
    let powers = |h: f64, g: f64, pc_own: f64, pp_own: f64, pc_oth: f64, pp_oth: f64| {
        (h * pc_own, h * pp_own, g * pc_oth, g * pp_oth)
    };
    let rx1 = powers(
        ch.h1[(0, 0)].norm_sqr(),
        ch.g2[(0, 0)].norm_sqr(),
        p.w1c[(0, 0)].norm_sqr(),
        p.w1p[(0, 0)].norm_sqr(),
        p.w2c[(0, 0)].norm_sqr(),
        p.w2p[(0, 0)].norm_sqr(),
    );
    let rx2 = powers(
        ch.h2[(0, 0)].norm_sqr(),
        ch.g1[(0, 0)].norm_sqr(),
        p.w2c[(0, 0)].norm_sqr(),
        p.w2p[(0, 0)].norm_sqr(),
        p.w1c[(0, 0)].norm_sqr(),
        p.w1p[(0, 0)].norm_sqr(),
    );
    // Returns (rate of other common, rate of own common, rate of own
    // private) for one receiver.
    let chain = |(s_ic, s_ip, s_jc, s_jp): (f64, f64, f64, f64), eta: u8| {
        if eta == 1 {
            // b_jc sees {ic, ip, jp}; b_ic sees {ip, jp}; b_ip sees {jp}.
            (
                rate(s_jc, s_ic + s_ip + s_jp),
                rate(s_ic, s_ip + s_jp),
                rate(s_ip, s_jp),
            )
        } else {
            // b_ic sees {jc, ip, jp}; b_jc sees {ip, jp}; b_ip sees {jp}.
            (
                rate(s_jc, s_ip + s_jp),
                rate(s_ic, s_jc + s_ip + s_jp),
                rate(s_ip, s_jp),
            )
        }
    };
    let (r2c_at1, r1c_at1, r1p) = chain(rx1, order.eta1);
    let (r1c_at2, r2c_at2, r2p) = chain(rx2, order.eta2);
    let r1c = r1c_at1.min(r1c_at2);
    let r2c = r2c_at1.min(r2c_at2);
    let r1 = r1c + r1p;
    let r2 = r2c + r2p;
    (r1c, r2c, r1, r2, beta * r1 + (1.0 - beta) * r2)
}

/// Complex determinant by cofactor expansion, independent of any
/// factorization code.
pub fn det_cofactor(m: &CMatrix) -> C {
    let n = m.rows();
    assert_eq!(n, m.cols());
    match n {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => {
            let mut det = C::new(0.0, 0.0);
            for c in 0..n {
                let mut minor = CMatrix::zeros(n - 1, n - 1);
                for r in 1..n {
                    let mut cc = 0;
                    for k in 0..n {
                        if k == c {
                            continue;
                        }
                        minor[(r - 1, cc)] = m[(r, k)];
                        cc += 1;
                    }
                }
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                det += m[(0, c)] * det_cofactor(&minor) * sign;
            }
            det
        }
    }
}

fn log2_det_real(m: &CMatrix) -> f64 {
    let det = det_cofactor(m);
    assert!(
        det.im.abs() <= 1e-8 * det.re.abs().max(1e-12),
        "determinant should be real, got {det}"
    );
    det.re.log2()
}

/// `log2 det(I + S · r^{-1})` exactly as written, with an explicit inverse.
fn written_rate(s: &CMatrix, r: &CMatrix) -> f64 {
    let n = s.rows();
    let r_inv = r.inverse().expect("interference covariance invertible");
    log2_det_real(&CMatrix::identity(n).add(&s.mul(&r_inv)))
}

/// The six written per-receiver rate expressions for the order pair (1, 0),
/// transcribed term by term:
/// `[R2c@1, R1c@1, R1p, R2c@2, R1c@2, R2p]`.
pub fn transcription_rates_order_1_0(ch: &ChannelRealization, p: &PrecoderSet) -> [f64; 6] {
    let n0 = ch.noise_power;
    let n1 = ch.h1.rows();
    let n2 = ch.h2.rows();
    let gram = |x: &CMatrix, w: &CMatrix| x.mul(w).outer_gram();
    let h1c = gram(&ch.h1, &p.w1c);
    let h1p = gram(&ch.h1, &p.w1p);
    let g2c = gram(&ch.g2, &p.w2c);
    let g2p = gram(&ch.g2, &p.w2p);
    let h2c = gram(&ch.h2, &p.w2c);
    let h2p = gram(&ch.h2, &p.w2p);
    let g1c = gram(&ch.g1, &p.w1c);
    let g1p = gram(&ch.g1, &p.w1p);
    let n0_1 = CMatrix::scaled_identity(n1, n0);
    let n0_2 = CMatrix::scaled_identity(n2, n0);

    let r_1_2c = h1c.add(&h1p).add(&g2p).add(&n0_1);
    let r_1_1c = h1p.add(&g2p).add(&n0_1);
    let r_1_1p = g2p.add(&n0_1);
    let r_2_2c = g1c.add(&g1p).add(&h2p).add(&n0_2);
    let r_2_1c = g1p.add(&h2p).add(&n0_2);
    let r_2_2p = g1p.add(&n0_2);

    [
        written_rate(&g2c, &r_1_2c),
        written_rate(&h1c, &r_1_1c),
        written_rate(&h1p, &r_1_1p),
        written_rate(&h2c, &r_2_2c),
        written_rate(&g1c, &r_2_1c),
        written_rate(&h2p, &r_2_2p),
    ]
}

/// Dense grid search of the weighted maximum over the bound polytope.
pub fn grid_search_weighted_max(b: &BoundReport, beta: f64, step: f64) -> f64 {
    let coefs = [
        (1.0, 0.0),
        (0.0, 1.0),
        (1.0, 1.0),
        (1.0, 1.0),
        (1.0, 1.0),
        (2.0, 1.0),
        (1.0, 2.0),
    ];
    let feasible = |r1: f64, r2: f64| {
        coefs
            .iter()
            .zip(&b.rhs)
            .all(|(&(a, bb), &c)| a * r1 + bb * r2 <= c + 1e-12)
    };
    let mut best = 0.0f64;
    let n1 = (b.r1_max / step).ceil() as usize;
    let n2 = (b.r2_max / step).ceil() as usize;
    for i in 0..=n1 {
        let r1 = (i as f64 * step).min(b.r1_max);
        let mut r2 = (n2 as f64) * step;
        while r2 >= 0.0 {
            if feasible(r1, r2) {
                best = best.max(beta * r1 + (1.0 - beta) * r2);
                break;
            }
            r2 -= step;
        }
    }
    best
}
