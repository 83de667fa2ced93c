//! Action vector layout and squashing.
//!
//! A rate-splitting action is `[split coefficients | common directions |
//! private directions]`: `Q` sigmoid-squashed splits in (0,1) followed by
//! `2·M` tanh-squashed real coordinates per direction per stream. Without
//! rate splitting only the private directions remain. Actions are stored and
//! replayed post-squash; exploration noise is injected pre-squash so every
//! executed action stays feasible.

use rsic_core::linalg::CMatrix;
use rsic_core::precoding::RawRsmaDirections;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionLayout {
    /// Transmit antennas of this agent.
    pub m: usize,
    /// Streams of this agent.
    pub q: usize,
    /// Whether the agent splits messages into common and private parts.
    pub rate_splitting: bool,
}

impl ActionLayout {
    pub fn dim(&self) -> usize {
        if self.rate_splitting {
            self.q + 4 * self.m * self.q
        } else {
            2 * self.m * self.q
        }
    }

    /// Number of leading sigmoid-squashed slots (the split coefficients).
    pub fn num_sigmoid(&self) -> usize {
        if self.rate_splitting {
            self.q
        } else {
            0
        }
    }

    /// Squash a pre-activation vector into the action box.
    pub fn squash(&self, pre: &[f64]) -> Vec<f64> {
        assert_eq!(pre.len(), self.dim());
        let ns = self.num_sigmoid();
        pre.iter()
            .enumerate()
            .map(|(i, &v)| {
                if i < ns {
                    1.0 / (1.0 + (-v).exp())
                } else {
                    v.tanh()
                }
            })
            .collect()
    }

    /// Derivative of the squash map expressed through the squashed values.
    pub fn squash_derivative_from_action(&self, action: &[f64]) -> Vec<f64> {
        assert_eq!(action.len(), self.dim());
        let ns = self.num_sigmoid();
        action
            .iter()
            .enumerate()
            .map(|(i, &a)| if i < ns { a * (1.0 - a) } else { 1.0 - a * a })
            .collect()
    }

    fn direction_from_slots(&self, slots: &[f64]) -> CMatrix {
        let (m, q) = (self.m, self.q);
        assert_eq!(slots.len(), 2 * m * q);
        let mut mat = CMatrix::zeros(m, q);
        for k in 0..q {
            let base = k * 2 * m;
            for j in 0..m {
                mat[(j, k)] = Complex64::new(slots[base + j], slots[base + m + j]);
            }
        }
        mat
    }

    /// Split coefficients and the raw common/private direction matrices of a
    /// rate-splitting action.
    pub fn decode_rs(&self, action: &[f64]) -> (Vec<f64>, CMatrix, CMatrix) {
        assert!(self.rate_splitting);
        assert_eq!(action.len(), self.dim());
        let q = self.q;
        let block = 2 * self.m * q;
        let splits = action[..q].to_vec();
        let uc = self.direction_from_slots(&action[q..q + block]);
        let up = self.direction_from_slots(&action[q + block..]);
        (splits, uc, up)
    }

    /// Raw direction matrix of a no-rate-splitting action.
    pub fn decode_no_rs(&self, action: &[f64]) -> CMatrix {
        assert!(!self.rate_splitting);
        self.direction_from_slots(action)
    }
}

/// Raw directions for both agents of a rate-splitting pair.
pub fn decode_joint_rs(
    layout1: ActionLayout,
    layout2: ActionLayout,
    a1: &[f64],
    a2: &[f64],
) -> (RawRsmaDirections, Vec<f64>, Vec<f64>) {
    let (splits1, u1c, u1p) = layout1.decode_rs(a1);
    let (splits2, u2c, u2p) = layout2.decode_rs(a2);
    (
        RawRsmaDirections { u1c, u1p, u2c, u2p },
        splits1,
        splits2,
    )
}
