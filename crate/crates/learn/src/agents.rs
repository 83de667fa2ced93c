//! Actor and critic bundles.
//!
//! Each agent carries a precoder head and (with rate splitting) a power
//! head, plus a centralized critic that sees the full state and both
//! actions. Actor networks end in a linear layer; the box constraints are
//! applied by the action layout's squash map so exploration noise can be
//! injected pre-squash without leaving the feasible set.

use crate::actions::ActionLayout;
use crate::mlp::{Activation, AdamState, Mlp};
use rand::Rng;
use rand_distr::StandardNormal;
use rsic_core::rates::DecodingOrderPair;

/// Online network, its target copy and the optimizer state.
#[derive(Debug, Clone)]
pub struct Head {
    pub net: Mlp,
    pub target: Mlp,
    pub adam: AdamState,
}

impl Head {
    pub fn new<R: Rng>(dims: &[usize], learning_rate: f64, rng: &mut R) -> Self {
        let net = Mlp::init(dims, Activation::Relu, Activation::Linear, rng);
        let target = net.clone();
        let adam = AdamState::new(&net, learning_rate);
        Head { net, target, adam }
    }
}

/// One agent: its observation size, action layout, actor heads and critic.
#[derive(Debug, Clone)]
pub struct Agent {
    pub obs_dim: usize,
    pub layout: ActionLayout,
    /// Direction head (tanh slots of the action).
    pub precoder: Head,
    /// Split-coefficient head (sigmoid slots); absent without rate
    /// splitting.
    pub power: Option<Head>,
    pub critic: Head,
}

impl Agent {
    /// Pre-squash actor outputs in action-layout order (splits first, then
    /// directions), using either the online or the target networks.
    pub fn presquash(&self, obs: &[f64], use_target: bool) -> Vec<f64> {
        let mut pre = Vec::with_capacity(self.layout.dim());
        if let Some(power) = &self.power {
            let net = if use_target { &power.target } else { &power.net };
            pre.extend(net.forward(obs));
        }
        let net = if use_target { &self.precoder.target } else { &self.precoder.net };
        pre.extend(net.forward(obs));
        pre
    }

    /// Deterministic policy action, optionally with pre-squash Gaussian
    /// exploration noise of variance `noise_var`.
    pub fn select_action<R: Rng>(
        &self,
        obs: &[f64],
        explore: Option<(&mut R, f64)>,
    ) -> Vec<f64> {
        let mut pre = self.presquash(obs, false);
        if let Some((rng, noise_var)) = explore {
            let std = noise_var.sqrt();
            for v in &mut pre {
                let n: f64 = rng.sample(StandardNormal);
                *v += std * n;
            }
        }
        self.layout.squash(&pre)
    }
}

/// Threshold relaxed order values at 0.5; ties round up.
pub fn threshold_order(relaxed: [f64; 2]) -> DecodingOrderPair {
    let eta = |v: f64| if v >= 0.5 { 1u8 } else { 0u8 };
    DecodingOrderPair::new(eta(relaxed[0]), eta(relaxed[1]))
}

/// Relaxed (sigmoid) decoding-order values from the shared order head,
/// optionally with pre-squash exploration noise.
pub fn decode_order_action<R: Rng>(
    head: &Head,
    state: &[f64],
    explore: Option<(&mut R, f64)>,
    use_target: bool,
) -> ([f64; 2], DecodingOrderPair) {
    let net = if use_target { &head.target } else { &head.net };
    let mut pre = net.forward(state);
    assert_eq!(pre.len(), 2, "order head must output two values");
    if let Some((rng, noise_var)) = explore {
        let std = noise_var.sqrt();
        for v in &mut pre {
            let n: f64 = rng.sample(StandardNormal);
            *v += std * n;
        }
    }
    let relaxed = [
        1.0 / (1.0 + (-pre[0]).exp()),
        1.0 / (1.0 + (-pre[1]).exp()),
    ];
    (relaxed, threshold_order(relaxed))
}
