//! Channel sampling and the imperfect-CSIT error models.
//!
//! All four links of the two-user interference channel are drawn i.i.d.
//! circularly symmetric complex Gaussian with unit variance. Transmit power
//! is fixed to 1, so the SNR convention is `N0 = 10^(-snr_db/10)`. Estimation
//! errors, when enabled, perturb only the copies handed to precoder/action
//! computation; rates are always evaluated on the true channels.

use crate::linalg::CMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Antenna counts and the resulting stream counts `Q_i = min(M_i, N_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntennaConfig {
    /// Transmit antennas at each base station.
    pub m1: usize,
    pub m2: usize,
    /// Receive antennas at each user.
    pub n1: usize,
    pub n2: usize,
}

impl AntennaConfig {
    pub fn new(m1: usize, m2: usize, n1: usize, n2: usize) -> Self {
        assert!(m1 > 0 && m2 > 0 && n1 > 0 && n2 > 0);
        AntennaConfig { m1, m2, n1, n2 }
    }

    /// Symmetric configuration: both links use `m` transmit and `n` receive
    /// antennas.
    pub fn symmetric(m: usize, n: usize) -> Self {
        Self::new(m, m, n, n)
    }

    pub fn siso() -> Self {
        Self::symmetric(1, 1)
    }

    /// Streams carried by transmitter 1.
    pub fn q1(&self) -> usize {
        self.m1.min(self.n1)
    }

    /// Streams carried by transmitter 2.
    pub fn q2(&self) -> usize {
        self.m2.min(self.n2)
    }

    pub fn q(&self, tx: usize) -> usize {
        match tx {
            1 => self.q1(),
            2 => self.q2(),
            _ => panic!("transmitter index must be 1 or 2"),
        }
    }

    pub fn m(&self, tx: usize) -> usize {
        match tx {
            1 => self.m1,
            2 => self.m2,
            _ => panic!("transmitter index must be 1 or 2"),
        }
    }

    pub fn is_siso(&self) -> bool {
        self.m1 == 1 && self.m2 == 1 && self.n1 == 1 && self.n2 == 1
    }
}

/// One block-fading draw of the four links plus the noise power.
///
/// `g1` is the BS1→UE2 cross link (`n2 × m1`), `g2` the BS2→UE1 cross link
/// (`n1 × m2`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h1: CMatrix,
    pub h2: CMatrix,
    pub g1: CMatrix,
    pub g2: CMatrix,
    pub noise_power: f64,
}

impl ChannelRealization {
    pub fn config(&self) -> AntennaConfig {
        AntennaConfig {
            m1: self.h1.cols(),
            m2: self.h2.cols(),
            n1: self.h1.rows(),
            n2: self.h2.rows(),
        }
    }

    pub fn assert_consistent(&self) {
        let c = self.config();
        assert_eq!(self.g1.rows(), c.n2, "g1 rows");
        assert_eq!(self.g1.cols(), c.m1, "g1 cols");
        assert_eq!(self.g2.rows(), c.n1, "g2 rows");
        assert_eq!(self.g2.cols(), c.m2, "g2 cols");
        assert!(self.noise_power > 0.0, "noise power must be positive");
    }

    /// Linear SNR `1/N0` (total power is 1).
    pub fn snr_linear(&self) -> f64 {
        1.0 / self.noise_power
    }
}

/// Estimated copies of the four links, same shapes as the true channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedChannels {
    pub h1: CMatrix,
    pub h2: CMatrix,
    pub g1: CMatrix,
    pub g2: CMatrix,
}

impl EstimatedChannels {
    /// View with the estimated links in place of the true ones; noise power
    /// carries over from the true realization.
    pub fn as_realization(&self, noise_power: f64) -> ChannelRealization {
        ChannelRealization {
            h1: self.h1.clone(),
            h2: self.h2.clone(),
            g1: self.g1.clone(),
            g2: self.g2.clone(),
            noise_power,
        }
    }
}

/// How channel-state information at the transmitters is degraded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsitErrorMode {
    /// Perfect CSIT: estimates equal the true channels.
    None,
    /// Error entries drawn from `(10^-0.6 / 5) · CN(0,1)` regardless of SNR.
    Fixed,
    /// Error entries drawn from `(SNR^-0.6 / 5) · CN(0,1)`, SNR linear.
    SnrScaled,
}

impl CsitErrorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CsitErrorMode::None => "none",
            CsitErrorMode::Fixed => "fixed",
            CsitErrorMode::SnrScaled => "snr_scaled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(CsitErrorMode::None),
            "fixed" => Some(CsitErrorMode::Fixed),
            "snr_scaled" => Some(CsitErrorMode::SnrScaled),
            _ => None,
        }
    }

    /// Scale multiplying a standard complex normal draw.
    pub fn error_scale(&self, snr_linear: f64) -> f64 {
        match self {
            CsitErrorMode::None => 0.0,
            CsitErrorMode::Fixed => 10f64.powf(-0.6) / 5.0,
            CsitErrorMode::SnrScaled => snr_linear.powf(-0.6) / 5.0,
        }
    }
}

/// One `CN(0,1)` draw: real and imaginary parts are N(0, 1/2).
pub fn standard_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im).scale(std::f64::consts::FRAC_1_SQRT_2)
}

fn random_cn_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let data = (0..rows * cols).map(|_| standard_complex(rng)).collect();
    CMatrix::from_vec(rows, cols, data)
}

/// Draw a fresh i.i.d. `CN(0,1)` realization of all four links at the given
/// SNR. The draw order (h1, h2, g1, g2) is part of the determinism contract.
pub fn sample_channel<R: Rng>(config: AntennaConfig, snr_db: f64, rng: &mut R) -> ChannelRealization {
    assert!(snr_db.is_finite());
    let ch = ChannelRealization {
        h1: random_cn_matrix(rng, config.n1, config.m1),
        h2: random_cn_matrix(rng, config.n2, config.m2),
        g1: random_cn_matrix(rng, config.n2, config.m1),
        g2: random_cn_matrix(rng, config.n1, config.m2),
        noise_power: 10f64.powf(-snr_db / 10.0),
    };
    ch.assert_consistent();
    ch
}

/// Additive estimation error on every link. With `CsitErrorMode::None` the
/// estimates are bit-identical to the true channels and the RNG is untouched.
pub fn apply_estimation_error<R: Rng>(
    ch: &ChannelRealization,
    mode: CsitErrorMode,
    rng: &mut R,
) -> EstimatedChannels {
    if mode == CsitErrorMode::None {
        return EstimatedChannels {
            h1: ch.h1.clone(),
            h2: ch.h2.clone(),
            g1: ch.g1.clone(),
            g2: ch.g2.clone(),
        };
    }
    let scale = mode.error_scale(ch.snr_linear());
    let mut perturb = |m: &CMatrix| {
        let noise = random_cn_matrix(rng, m.rows(), m.cols()).scale(scale);
        m.add(&noise)
    };
    EstimatedChannels {
        h1: perturb(&ch.h1),
        h2: perturb(&ch.h2),
        g1: perturb(&ch.g1),
        g2: perturb(&ch.g2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::SeedSpace;

    #[test]
    fn snr_convention() {
        let s = SeedSpace::new(1);
        let ch0 = sample_channel(AntennaConfig::siso(), 0.0, &mut s.stream("c"));
        assert!((ch0.noise_power - 1.0).abs() < 1e-15);
        let ch20 = sample_channel(AntennaConfig::siso(), 20.0, &mut s.stream("c"));
        assert!((ch20.noise_power - 0.01).abs() < 1e-15);
    }

    #[test]
    fn stream_counts_follow_min_rule() {
        let c = AntennaConfig::new(3, 3, 1, 1);
        assert_eq!(c.q1(), 1);
        let c = AntennaConfig::symmetric(3, 3);
        assert_eq!(c.q2(), 3);
    }

    #[test]
    fn unit_variance_entries() {
        let s = SeedSpace::new(99);
        let mut rng = s.stream("moment");
        let n = 100_000;
        let mean_sq: f64 = (0..n)
            .map(|_| standard_complex(&mut rng).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean_sq - 1.0).abs() < 0.02,
            "mean modulus^2 {mean_sq} outside 1 +/- 0.02"
        );
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let s = SeedSpace::new(5);
        let a = sample_channel(AntennaConfig::symmetric(3, 1), 10.0, &mut s.stream("ch"));
        let b = sample_channel(AntennaConfig::symmetric(3, 1), 10.0, &mut s.stream("ch"));
        assert_eq!(a, b);
    }

    #[test]
    fn mode_none_is_bit_identical() {
        let s = SeedSpace::new(5);
        let ch = sample_channel(AntennaConfig::symmetric(2, 2), 10.0, &mut s.stream("ch"));
        let est = apply_estimation_error(&ch, CsitErrorMode::None, &mut s.stream("err"));
        assert_eq!(est.h1, ch.h1);
        assert_eq!(est.g2, ch.g2);
    }

    #[test]
    fn modes_with_error_differ_from_truth() {
        let s = SeedSpace::new(5);
        let ch = sample_channel(AntennaConfig::siso(), 10.0, &mut s.stream("ch"));
        for mode in [CsitErrorMode::Fixed, CsitErrorMode::SnrScaled] {
            let est = apply_estimation_error(&ch, mode, &mut s.stream("err"));
            assert_ne!(est.h1, ch.h1);
        }
    }

    #[test]
    fn fixed_error_variance() {
        let s = SeedSpace::new(17);
        let mut rng = s.stream("err");
        let ch = sample_channel(AntennaConfig::siso(), 0.0, &mut s.stream("ch"));
        let n = 100_000;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let est = apply_estimation_error(&ch, CsitErrorMode::Fixed, &mut rng);
            sum_sq += est.h1.sub(&ch.h1).frobenius_norm().powi(2);
        }
        let var = sum_sq / n as f64;
        let expect = (10f64.powf(-0.6) / 5.0).powi(2);
        assert!((expect - 2.52e-3).abs() < 0.01e-3, "scale sanity: {expect}");
        assert!(
            (var - expect).abs() < 0.03 * expect,
            "variance {var} not within 3% of {expect}"
        );
    }

    #[test]
    fn snr_scaled_error_at_zero_db() {
        assert!((CsitErrorMode::SnrScaled.error_scale(1.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn error_stream_independent_of_channel_stream() {
        // Toggling the error mode must not perturb the channel sequence:
        // separate streams guarantee it structurally.
        let s = SeedSpace::new(123);
        let mut ch_rng_a = s.stream("channel");
        let mut ch_rng_b = s.stream("channel");
        let mut err_rng = s.stream("error");
        let cfg = AntennaConfig::symmetric(2, 2);
        let a1 = sample_channel(cfg, 10.0, &mut ch_rng_a);
        let _ = apply_estimation_error(&a1, CsitErrorMode::Fixed, &mut err_rng);
        let a2 = sample_channel(cfg, 10.0, &mut ch_rng_a);
        let b1 = sample_channel(cfg, 10.0, &mut ch_rng_b);
        let b2 = sample_channel(cfg, 10.0, &mut ch_rng_b);
        assert_eq!(a1, b1);
        assert_eq!(a2, b2);
    }
}
