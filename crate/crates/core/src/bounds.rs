//! Capacity outer bounds used as reference ceilings.
//!
//! The MIMO outer bound is a system of seven log-determinant inequalities on
//! `(R1, R2)` with interference-drained terms `H_i K_i H_i^H`,
//! `K_i = (I + rho_ij G_i^H G_i)^{-1}`. The weighted maximum over the
//! resulting polytope is found exactly by vertex enumeration. The trivial
//! no-interference bound evaluates each user's single-link rate with the
//! cross channels removed.

use crate::channel::ChannelRealization;
use crate::linalg::CMatrix;
use crate::rates::RateError;

const LN_2: f64 = std::f64::consts::LN_2;

/// How the scalar gains `rho` of the bound system are formed.
///
/// `FullPower` sets `rho_ii = rho_ij = P_i/N0`, the SNR-parameterized form:
/// any feasible input covariance satisfies `Q_i ⪯ P_i·I`, so every
/// inequality upper-bounds the corresponding mutual information draw by
/// draw, and the bound is invariant under the joint rescaling
/// `H ← c·H, N0 ← c²·N0`. `PaperTrace` keeps the written per-draw trace
/// normalization `rho = Tr(X Q_i X^H)/(N_i·N0)` with the isotropic input
/// `Q_i = (P_i/M_i)·I`; it is reported for comparison but does not dominate
/// beamformed transmissions on weak channel draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoConvention {
    FullPower,
    PaperTrace,
}

impl RhoConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            RhoConvention::FullPower => "full_power",
            RhoConvention::PaperTrace => "paper_trace",
        }
    }
}

/// Bound evaluation for one channel draw: the rate-polytope maxima and the
/// seven inequality right-hand sides, all in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub r1_max: f64,
    pub r2_max: f64,
    pub sum_max: f64,
    /// Maximum of `beta·R1 + (1-beta)·R2` over the polytope.
    pub weighted_max: f64,
    pub beta: f64,
    /// Right-hand sides of the inequalities bounding, in order:
    /// R1, R2, R1+R2 (three forms), 2·R1+R2, R1+2·R2.
    pub rhs: [f64; 7],
}

fn log2det(m: &CMatrix) -> f64 {
    m.logdet_hpd()
        .expect("bound covariance I + PSD must be HPD")
        / LN_2
}

/// Symmetrized `(I + rho·G^H G)^{-1}`.
fn drain_matrix(g: &CMatrix, rho: f64) -> CMatrix {
    let m = g.cols();
    let inv = CMatrix::identity(m)
        .add(&g.inner_gram().scale(rho))
        .inverse()
        .expect("I + PSD is invertible");
    inv.add(&inv.hermitian()).scale(0.5)
}

/// Maximize `w1·R1 + w2·R2` over the polytope cut out by `coefs·R <= rhs`
/// and nonnegativity, by enumerating pairwise intersections of the bounding
/// lines.
fn polytope_max(coefs: &[(f64, f64)], rhs: &[f64], w1: f64, w2: f64) -> f64 {
    let mut lines: Vec<(f64, f64, f64)> = coefs
        .iter()
        .zip(rhs)
        .map(|(&(a, b), &c)| (a, b, c))
        .collect();
    lines.push((-1.0, 0.0, 0.0)); // R1 >= 0
    lines.push((0.0, -1.0, 0.0)); // R2 >= 0
    let feasible = |r1: f64, r2: f64| {
        lines
            .iter()
            .all(|&(a, b, c)| a * r1 + b * r2 <= c + 1e-9)
    };
    let mut best = 0.0f64; // origin is always feasible
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-12 {
                continue;
            }
            let r1 = (c1 * b2 - c2 * b1) / det;
            let r2 = (a1 * c2 - a2 * c1) / det;
            if r1.is_finite() && r2.is_finite() && feasible(r1, r2) {
                best = best.max(w1 * r1 + w2 * r2);
            }
        }
    }
    best
}

/// Evaluate the written outer-bound inequality system for one draw and
/// maximize the weighted rate over the polytope it defines.
pub fn mimo_outer_bound_with(
    ch: &ChannelRealization,
    p1: f64,
    p2: f64,
    beta: f64,
    convention: RhoConvention,
) -> BoundReport {
    let n0 = ch.noise_power;
    let (rho11, rho22, rho12, rho21) = match convention {
        RhoConvention::FullPower => (p1 / n0, p2 / n0, p1 / n0, p2 / n0),
        RhoConvention::PaperTrace => {
            let cfg = ch.config();
            let trace_rho = |x: &CMatrix, p: f64, m: usize, n: usize| {
                x.outer_gram().trace().re * (p / m as f64) / (n as f64 * n0)
            };
            (
                trace_rho(&ch.h1, p1, cfg.m1, cfg.n1),
                trace_rho(&ch.h2, p2, cfg.m2, cfg.n2),
                trace_rho(&ch.g1, p1, cfg.m1, cfg.n1),
                trace_rho(&ch.g2, p2, cfg.m2, cfg.n2),
            )
        }
    };
    let n1 = ch.h1.rows();
    let n2 = ch.h2.rows();
    let i1 = CMatrix::identity(n1);
    let i2 = CMatrix::identity(n2);
    let k1 = drain_matrix(&ch.g1, rho12);
    let k2 = drain_matrix(&ch.g2, rho21);

    let h1h1 = ch.h1.outer_gram().scale(rho11);
    let h2h2 = ch.h2.outer_gram().scale(rho22);
    let g1g1 = ch.g1.outer_gram().scale(rho12);
    let g2g2 = ch.g2.outer_gram().scale(rho21);
    let h1k1 = ch.h1.mul(&k1).mul(&ch.h1.hermitian()).scale(rho11);
    let h1k1 = h1k1.add(&h1k1.hermitian()).scale(0.5);
    let h2k2 = ch.h2.mul(&k2).mul(&ch.h2.hermitian()).scale(rho22);
    let h2k2 = h2k2.add(&h2k2.hermitian()).scale(0.5);

    let t_h1 = log2det(&i1.add(&h1h1));
    let t_h2 = log2det(&i2.add(&h2h2));
    let t_h1k = log2det(&i1.add(&h1k1));
    let t_h2k = log2det(&i2.add(&h2k2));
    let t_g1_h2 = log2det(&i2.add(&g1g1).add(&h2h2));
    let t_g2_h1 = log2det(&i1.add(&g2g2).add(&h1h1));
    let t_g2_h1k = log2det(&i1.add(&g2g2).add(&h1k1));
    let t_g1_h2k = log2det(&i2.add(&g1g1).add(&h2k2));

    let rhs = [
        t_h1,
        t_h2,
        t_g1_h2 + t_h1k,
        t_g2_h1 + t_h2k,
        t_g2_h1k + t_g1_h2k,
        t_g2_h1 + t_h1k + t_g1_h2k,
        t_g1_h2 + t_h2k + t_g2_h1k,
    ];
    let coefs = [
        (1.0, 0.0),
        (0.0, 1.0),
        (1.0, 1.0),
        (1.0, 1.0),
        (1.0, 1.0),
        (2.0, 1.0),
        (1.0, 2.0),
    ];
    BoundReport {
        r1_max: polytope_max(&coefs, &rhs, 1.0, 0.0),
        r2_max: polytope_max(&coefs, &rhs, 0.0, 1.0),
        sum_max: polytope_max(&coefs, &rhs, 1.0, 1.0),
        weighted_max: polytope_max(&coefs, &rhs, beta, 1.0 - beta),
        beta,
        rhs,
    }
}

/// Outer bound under the default `FullPower` convention.
pub fn mimo_outer_bound(ch: &ChannelRealization, p1: f64, p2: f64, beta: f64) -> BoundReport {
    mimo_outer_bound_with(ch, p1, p2, beta, RhoConvention::FullPower)
}

/// Single-link rates with all interference removed:
/// `R_i = log2 det(I + H_i W_i W_i^H H_i^H / N0)`.
pub fn no_interference_rates(
    ch: &ChannelRealization,
    w1: &CMatrix,
    w2: &CMatrix,
) -> Result<(f64, f64), RateError> {
    let rate = |h: &CMatrix, w: &CMatrix| {
        let n = h.rows();
        let cov = CMatrix::identity(n).add(&h.mul(w).outer_gram().scale(1.0 / ch.noise_power));
        Ok::<f64, RateError>(cov.logdet_hpd()? / LN_2)
    };
    Ok((rate(&ch.h1, w1)?, rate(&ch.h2, w2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, AntennaConfig};
    use crate::rates::no_rs_rates;
    use crate::seeds::SeedSpace;
    use num_complex::Complex64 as C;

    fn siso(h1: f64, h2: f64, g1: f64, g2: f64, n0: f64) -> ChannelRealization {
        let s = |v: f64| CMatrix::from_vec(1, 1, vec![C::new(v, 0.0)]);
        ChannelRealization {
            h1: s(h1),
            h2: s(h2),
            g1: s(g1),
            g2: s(g2),
            noise_power: n0,
        }
    }

    #[test]
    fn zero_cross_reduces_to_single_user_terms() {
        let ch = siso(1.0, 1.0, 0.0, 0.0, 1.0);
        let b = mimo_outer_bound(&ch, 1.0, 1.0, 0.5);
        assert!((b.r1_max - 1.0).abs() < 1e-12);
        assert!((b.r2_max - 1.0).abs() < 1e-12);
        assert!((b.sum_max - 2.0).abs() < 1e-12);
        // Third inequality is the sum of the single-user terms (K_i = I).
        assert!((b.rhs[2] - (b.rhs[0] + b.rhs[1])).abs() < 1e-12);
    }

    #[test]
    fn weighted_at_half_is_half_sum() {
        let s = SeedSpace::new(61);
        let mut rng = s.stream("draws");
        for _ in 0..50 {
            let ch = sample_channel(AntennaConfig::symmetric(2, 2), 10.0, &mut rng);
            let b = mimo_outer_bound(&ch, 1.0, 1.0, 0.5);
            assert!((b.weighted_max - b.sum_max / 2.0).abs() < 1e-9);
            assert!(b.sum_max <= b.r1_max + b.r2_max + 1e-9);
            assert!(b.rhs.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn scale_consistency_under_full_power() {
        let s = SeedSpace::new(62);
        let mut rng = s.stream("draws");
        for _ in 0..20 {
            let ch = sample_channel(AntennaConfig::symmetric(3, 1), 6.0, &mut rng);
            let b = mimo_outer_bound(&ch, 1.0, 1.0, 0.3);
            let c = 3.7f64;
            let scaled = ChannelRealization {
                h1: ch.h1.scale(c),
                h2: ch.h2.scale(c),
                g1: ch.g1.scale(c),
                g2: ch.g2.scale(c),
                noise_power: ch.noise_power * c * c,
            };
            let bs = mimo_outer_bound(&scaled, 1.0, 1.0, 0.3);
            for k in 0..7 {
                assert!(
                    (b.rhs[k] - bs.rhs[k]).abs() <= 1e-9 * b.rhs[k].max(1.0),
                    "inequality {k} not scale invariant"
                );
            }
            assert!((b.weighted_max - bs.weighted_max).abs() < 1e-9);
        }
    }

    #[test]
    fn no_interference_trivial_and_reduction() {
        let ch = siso(1.0, 1.0, 0.7, 0.7, 1.0);
        let w = CMatrix::from_vec(1, 1, vec![C::new(1.0, 0.0)]);
        let (r1, _) = no_interference_rates(&ch, &w, &w).unwrap();
        assert!((r1 - 1.0).abs() < 1e-12);

        // Equals no-RS rates once the cross links are zeroed.
        let s = SeedSpace::new(63);
        let mut rng = s.stream("draws");
        for _ in 0..200 {
            let mut ch = sample_channel(AntennaConfig::symmetric(2, 2), 8.0, &mut rng);
            ch.g1 = CMatrix::zeros(2, 2);
            ch.g2 = CMatrix::zeros(2, 2);
            let w1 = crate::precoding::normalize_no_rs(&ch.h1.hermitian(), 1.0).unwrap();
            let w2 = crate::precoding::normalize_no_rs(&ch.h2.hermitian(), 1.0).unwrap();
            let (r1, r2) = no_interference_rates(&ch, &w1, &w2).unwrap();
            let report = no_rs_rates(&ch, &w1, &w2, 0.5).unwrap();
            assert!((r1 - report.r1).abs() < 1e-10);
            assert!((r2 - report.r2).abs() < 1e-10);
        }
    }

    #[test]
    fn noise_increase_decreases_rate() {
        let ch = siso(1.0, 1.0, 0.0, 0.0, 1.0);
        let mut noisier = ch.clone();
        noisier.noise_power = 2.0;
        let w = CMatrix::from_vec(1, 1, vec![C::new(1.0, 0.0)]);
        let (a, _) = no_interference_rates(&ch, &w, &w).unwrap();
        let (b, _) = no_interference_rates(&noisier, &w, &w).unwrap();
        assert!(b < a);
    }

    #[test]
    fn paper_trace_convention_matches_on_unit_channels() {
        // At |h| = 1, P = 1, M = 1 the two conventions coincide.
        let ch = siso(1.0, 1.0, 0.0, 0.0, 1.0);
        let a = mimo_outer_bound_with(&ch, 1.0, 1.0, 0.5, RhoConvention::FullPower);
        let b = mimo_outer_bound_with(&ch, 1.0, 1.0, 0.5, RhoConvention::PaperTrace);
        assert!((a.r1_max - b.r1_max).abs() < 1e-12);
        assert!((a.sum_max - b.sum_max).abs() < 1e-12);
    }
}
