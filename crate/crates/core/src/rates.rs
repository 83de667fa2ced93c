//! Achievable-rate calculus for rate-splitting on the two-user interference
//! channel.
//!
//! Each receiver runs successive interference cancellation over three
//! streams: the other transmitter's common message, its own common message,
//! and its own private message, always treating the other private message as
//! noise. The decoding order of the two common messages is selected per
//! receiver by `eta` (1: other-common first, 0: own-common first). Stream
//! rates are log-determinant differences of nested noise-plus-interference
//! covariances, which keeps every determinant a Cholesky of an HPD matrix.

use crate::channel::ChannelRealization;
use crate::linalg::{CMatrix, LinalgError};
use thiserror::Error;

const LN_2: f64 = std::f64::consts::LN_2;
/// Slack allowed on the precoder power constraints.
pub const POWER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
    #[error("operation requires a single-antenna configuration")]
    NotSiso,
    #[error("precoder power constraint violated: {0}")]
    PowerViolation(String),
}

/// Common/private precoders for both transmitters. `w1c`/`w1p` are
/// `m1 × q1`, `w2c`/`w2p` are `m2 × q2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    pub w1c: CMatrix,
    pub w1p: CMatrix,
    pub w2c: CMatrix,
    pub w2p: CMatrix,
}

fn col_power(m: &CMatrix, k: usize) -> f64 {
    (0..m.rows()).map(|r| m[(r, k)].norm_sqr()).sum()
}

impl PrecoderSet {
    /// All-zero precoders for the given shapes.
    pub fn zeros(m1: usize, q1: usize, m2: usize, q2: usize) -> Self {
        PrecoderSet {
            w1c: CMatrix::zeros(m1, q1),
            w1p: CMatrix::zeros(m1, q1),
            w2c: CMatrix::zeros(m2, q2),
            w2p: CMatrix::zeros(m2, q2),
        }
    }

    /// Check the per-stream and total power constraints against uniform
    /// per-stream budgets `P_ik = P_i / Q_i`.
    pub fn validate(&self, p1: f64, p2: f64) -> Result<(), RateError> {
        for (name, wc, wp, total) in [
            ("tx1", &self.w1c, &self.w1p, p1),
            ("tx2", &self.w2c, &self.w2p, p2),
        ] {
            assert_eq!(wc.rows(), wp.rows());
            assert_eq!(wc.cols(), wp.cols());
            let q = wc.cols();
            let per_stream = total / q as f64;
            let mut sum = 0.0;
            for k in 0..q {
                let p = col_power(wc, k) + col_power(wp, k);
                if p > per_stream + POWER_TOL {
                    return Err(RateError::PowerViolation(format!(
                        "{name} stream {k}: {p} > {per_stream}"
                    )));
                }
                sum += p;
            }
            if sum > total + POWER_TOL {
                return Err(RateError::PowerViolation(format!(
                    "{name} total: {sum} > {total}"
                )));
            }
        }
        Ok(())
    }
}

/// SIC order selector per receiver. `eta = 1` decodes the other
/// transmitter's common message first, `eta = 0` the receiver's own common
/// message first; private messages always come last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DecodingOrderPair {
    pub eta1: u8,
    pub eta2: u8,
}

impl DecodingOrderPair {
    pub fn new(eta1: u8, eta2: u8) -> Self {
        assert!(eta1 <= 1 && eta2 <= 1);
        DecodingOrderPair { eta1, eta2 }
    }

    /// The four order pairs in lexicographic order.
    pub const ALL: [DecodingOrderPair; 4] = [
        DecodingOrderPair { eta1: 0, eta2: 0 },
        DecodingOrderPair { eta1: 0, eta2: 1 },
        DecodingOrderPair { eta1: 1, eta2: 0 },
        DecodingOrderPair { eta1: 1, eta2: 1 },
    ];

    pub fn eta(&self, receiver: usize) -> u8 {
        match receiver {
            1 => self.eta1,
            2 => self.eta2,
            _ => panic!("receiver index must be 1 or 2"),
        }
    }
}

/// All stream and user rates for one realization, order pair and weight.
/// Rates are in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub r1c: f64,
    pub r2c: f64,
    pub r1p: f64,
    pub r2p: f64,
    /// User rates `R_i = R_ic + R_ip`.
    pub r1: f64,
    pub r2: f64,
    /// Weighted reward `beta·R1 + (1-beta)·R2`.
    pub reward: f64,
    /// Pre-minimum common rates: `[i][m]` holds `R_(i+1)c` as decoded at
    /// receiver `m+1`.
    pub per_receiver_common: [[f64; 2]; 2],
    pub order: DecodingOrderPair,
    pub beta: f64,
}

impl RateReport {
    pub fn sum_rate(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Per-stream rates decoded at one receiver, in the fixed naming order
/// (other common `b_jc`, own common `b_ic`, own private `b_ip`).
pub fn sic_rates_at_receiver(
    ch: &ChannelRealization,
    p: &PrecoderSet,
    receiver: usize,
    eta: u8,
) -> Result<(f64, f64, f64), RateError> {
    assert!(eta <= 1);
    // Effective channel-precoder products seen by this receiver.
    let (l_jc, l_ic, l_ip, l_jp, n) = match receiver {
        1 => (
            ch.g2.mul(&p.w2c),
            ch.h1.mul(&p.w1c),
            ch.h1.mul(&p.w1p),
            ch.g2.mul(&p.w2p),
            ch.h1.rows(),
        ),
        2 => (
            ch.g1.mul(&p.w1c),
            ch.h2.mul(&p.w2c),
            ch.h2.mul(&p.w2p),
            ch.g1.mul(&p.w1p),
            ch.h2.rows(),
        ),
        _ => panic!("receiver index must be 1 or 2"),
    };
    let s_jc = l_jc.outer_gram();
    let s_ic = l_ic.outer_gram();
    let s_ip = l_ip.outer_gram();
    // The other private stream is never decoded here.
    let base = CMatrix::scaled_identity(n, ch.noise_power).add(&l_jp.outer_gram());

    // Decode sequence: eta = 1 is (jc, ic, ip); eta = 0 is (ic, jc, ip).
    // Telescoping logdets: cov_k adds the streams still undecoded when the
    // k-th one is being decoded.
    let (first, second) = if eta == 1 { (&s_jc, &s_ic) } else { (&s_ic, &s_jc) };
    let cov0 = base.clone();
    let cov1 = base.add(&s_ip);
    let cov2 = cov1.add(second);
    let cov3 = cov2.add(first);
    let ld0 = cov0.logdet_hpd()?;
    let ld1 = cov1.logdet_hpd()?;
    let ld2 = cov2.logdet_hpd()?;
    let ld3 = cov3.logdet_hpd()?;
    let rate_ip = (ld1 - ld0) / LN_2;
    let rate_second = (ld2 - ld1) / LN_2;
    let rate_first = (ld3 - ld2) / LN_2;
    let (rate_jc, rate_ic) = if eta == 1 {
        (rate_first, rate_second)
    } else {
        (rate_second, rate_first)
    };
    Ok((rate_jc.max(0.0), rate_ic.max(0.0), rate_ip.max(0.0)))
}

/// Full rate accounting for one decoding-order pair: per-stream rates at both
/// receivers, the common-rate minima, user rates and the weighted reward.
pub fn rate_report(
    ch: &ChannelRealization,
    p: &PrecoderSet,
    order: DecodingOrderPair,
    beta: f64,
) -> Result<RateReport, RateError> {
    assert!((0.0..=1.0).contains(&beta), "beta must lie in [0,1]");
    let (r2c_at1, r1c_at1, r1p) = sic_rates_at_receiver(ch, p, 1, order.eta1)?;
    let (r1c_at2, r2c_at2, r2p) = sic_rates_at_receiver(ch, p, 2, order.eta2)?;
    let r1c = r1c_at1.min(r1c_at2);
    let r2c = r2c_at1.min(r2c_at2);
    let r1 = r1c + r1p;
    let r2 = r2c + r2p;
    Ok(RateReport {
        r1c,
        r2c,
        r1p,
        r2p,
        r1,
        r2,
        reward: beta * r1 + (1.0 - beta) * r2,
        per_receiver_common: [[r1c_at1, r1c_at2], [r2c_at1, r2c_at2]],
        order,
        beta,
    })
}

/// Evaluate all four decoding-order pairs and return the reward maximizer.
/// Ties break toward the lexicographically smallest `(eta1, eta2)`.
pub fn best_order_report(
    ch: &ChannelRealization,
    p: &PrecoderSet,
    beta: f64,
) -> Result<(DecodingOrderPair, RateReport), RateError> {
    let mut best: Option<(DecodingOrderPair, RateReport)> = None;
    for order in DecodingOrderPair::ALL {
        let report = rate_report(ch, p, order, beta)?;
        let better = match &best {
            None => true,
            Some((_, b)) => report.reward > b.reward,
        };
        if better {
            best = Some((order, report));
        }
    }
    Ok(best.expect("four orders were evaluated"))
}

/// Rates without rate-splitting: each receiver treats the entire interfering
/// signal as noise. Common fields of the report are zero.
pub fn no_rs_rates(
    ch: &ChannelRealization,
    w1: &CMatrix,
    w2: &CMatrix,
    beta: f64,
) -> Result<RateReport, RateError> {
    let rate = |h: &CMatrix, w_own: &CMatrix, g: &CMatrix, w_other: &CMatrix| {
        let n = h.rows();
        let interf = CMatrix::scaled_identity(n, ch.noise_power)
            .add(&g.mul(w_other).outer_gram());
        let full = interf.add(&h.mul(w_own).outer_gram());
        Ok::<f64, RateError>(((full.logdet_hpd()? - interf.logdet_hpd()?) / LN_2).max(0.0))
    };
    let r1 = rate(&ch.h1, w1, &ch.g2, w2)?;
    let r2 = rate(&ch.h2, w2, &ch.g1, w1)?;
    Ok(RateReport {
        r1c: 0.0,
        r2c: 0.0,
        r1p: r1,
        r2p: r2,
        r1,
        r2,
        reward: beta * r1 + (1.0 - beta) * r2,
        per_receiver_common: [[0.0; 2]; 2],
        order: DecodingOrderPair::new(0, 0),
        beta,
    })
}

/// Interference regimes of the single-antenna channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceRegime {
    Weak,
    Mixed,
    Strong,
}

/// Classify a SISO realization by comparing interference-to-noise against
/// signal-to-noise ratios: weak when `INR1 < SNR2` and `INR2 < SNR1`, strong
/// when both inequalities reverse strictly, mixed otherwise.
pub fn classify_regime(
    ch: &ChannelRealization,
    p1: f64,
    p2: f64,
) -> Result<InterferenceRegime, RateError> {
    if !ch.config().is_siso() {
        return Err(RateError::NotSiso);
    }
    let snr1 = ch.h1[(0, 0)].norm_sqr() * p1 / ch.noise_power;
    let snr2 = ch.h2[(0, 0)].norm_sqr() * p2 / ch.noise_power;
    // Interference into UE1 comes from BS2 through g2, and vice versa.
    let inr1 = ch.g2[(0, 0)].norm_sqr() * p2 / ch.noise_power;
    let inr2 = ch.g1[(0, 0)].norm_sqr() * p1 / ch.noise_power;
    if inr1 < snr2 && inr2 < snr1 {
        Ok(InterferenceRegime::Weak)
    } else if inr1 > snr2 && inr2 > snr1 {
        Ok(InterferenceRegime::Strong)
    } else {
        Ok(InterferenceRegime::Mixed)
    }
}
