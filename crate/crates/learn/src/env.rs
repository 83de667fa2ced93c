//! Environment step: observations, action decoding and the collaborative
//! reward.
//!
//! Agents observe their own outgoing links (built from the estimated
//! channels when CSIT is imperfect); rewards are always computed on the true
//! channels.

use crate::actions::{decode_joint_rs, ActionLayout};
use rsic_core::channel::{AntennaConfig, ChannelRealization, EstimatedChannels};
use rsic_core::linalg::CMatrix;
use rsic_core::precoding::{normalize_no_rs, normalize_rsma, PrecoderError};
use rsic_core::rates::{best_order_report, no_rs_rates, rate_report, DecodingOrderPair, RateError, RateReport};
use thiserror::Error;

/// Total transmit power of each base station.
pub const P_TOTAL: f64 = 1.0;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("precoder decoding failed: {0}")]
    Precoder(#[from] PrecoderError),
    #[error("rate computation failed: {0}")]
    Rate(#[from] RateError),
}

/// How the decoding order is chosen at an environment step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderChoice {
    /// Evaluate all four pairs and take the reward maximizer.
    Exhaustive,
    /// Use the given pair (fixed by config or produced by the order head).
    Use(DecodingOrderPair),
}

/// Flatten one agent's outgoing links: real parts of `H_i`, imaginary parts
/// of `H_i`, then the same for `G_i`, all row-major.
pub fn observation(est: &EstimatedChannels, agent: usize) -> Vec<f64> {
    let (h, g) = match agent {
        1 => (&est.h1, &est.g1),
        2 => (&est.h2, &est.g2),
        _ => panic!("agent index must be 1 or 2"),
    };
    let mut obs = Vec::with_capacity(2 * (h.rows() * h.cols() + g.rows() * g.cols()));
    for m in [h, g] {
        obs.extend(m.data().iter().map(|z| z.re));
        obs.extend(m.data().iter().map(|z| z.im));
    }
    obs
}

pub fn obs_dim(cfg: AntennaConfig, agent: usize) -> usize {
    match agent {
        1 => 2 * cfg.n1 * cfg.m1 + 2 * cfg.n2 * cfg.m1,
        2 => 2 * cfg.n2 * cfg.m2 + 2 * cfg.n1 * cfg.m2,
        _ => panic!("agent index must be 1 or 2"),
    }
}

/// Decode both rate-splitting actions into a feasible precoder set and score
/// them on the true channels.
pub fn env_step_rs(
    ch_true: &ChannelRealization,
    layout1: ActionLayout,
    layout2: ActionLayout,
    a1: &[f64],
    a2: &[f64],
    order: OrderChoice,
    beta: f64,
) -> Result<RateReport, EnvError> {
    let (dirs, splits1, splits2) = decode_joint_rs(layout1, layout2, a1, a2);
    let precoders = normalize_rsma(&dirs, &splits1, &splits2, P_TOTAL, P_TOTAL)?;
    let report = match order {
        OrderChoice::Exhaustive => best_order_report(ch_true, &precoders, beta)?.1,
        OrderChoice::Use(pair) => rate_report(ch_true, &precoders, pair, beta)?,
    };
    Ok(report)
}

/// Decode both direction-only actions and score them without rate splitting.
pub fn env_step_no_rs(
    ch_true: &ChannelRealization,
    layout1: ActionLayout,
    layout2: ActionLayout,
    a1: &[f64],
    a2: &[f64],
    beta: f64,
) -> Result<RateReport, EnvError> {
    let w1 = normalize_no_rs(&layout1.decode_no_rs(a1), P_TOTAL)?;
    let w2 = normalize_no_rs(&layout2.decode_no_rs(a2), P_TOTAL)?;
    Ok(no_rs_rates(ch_true, &w1, &w2, beta)?)
}

/// Decoded no-rate-splitting precoders (used when pairing scheme evaluations
/// with bound columns).
pub fn decode_no_rs_precoders(
    layout: ActionLayout,
    action: &[f64],
) -> Result<CMatrix, EnvError> {
    Ok(normalize_no_rs(&layout.decode_no_rs(action), P_TOTAL)?)
}
