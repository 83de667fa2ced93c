//! Benchmark precoders and the normalization maps that turn raw directions
//! into constraint-satisfying precoder sets.
//!
//! MRT matches the direct channel, ZF inverts the leakage Gram matrix, and
//! the leakage-based precoder maximizes per-stream SLNR through a dominant
//! generalized eigenvector. All three allocate zero common power; the
//! rate-splitting normalization splits each stream's budget between a common
//! and a private direction.

use crate::linalg::{dominant_gen_eigvec, CMatrix, LinalgError};
use crate::rates::PrecoderSet;
use thiserror::Error;

/// Tikhonov term used when the ZF Gram matrix is rank deficient.
pub const ZF_REGULARIZATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrecoderError {
    #[error("direct channel is identically zero")]
    ZeroChannel,
    #[error("direction with allocated power has zero norm (stream {0})")]
    ZeroDirection(usize),
    #[error("linear algebra failure: {0}")]
    Linalg(#[from] LinalgError),
}

/// Outgoing links of one transmitter: `h` is its direct channel
/// (`N_i × M_i`), `g` its leakage channel toward the other user
/// (`N_j × M_i`).
#[derive(Debug, Clone, Copy)]
pub struct TxChannels<'a> {
    pub h: &'a CMatrix,
    pub g: &'a CMatrix,
}

impl<'a> TxChannels<'a> {
    pub fn new(h: &'a CMatrix, g: &'a CMatrix) -> Self {
        assert_eq!(h.cols(), g.cols(), "both links share the transmit array");
        TxChannels { h, g }
    }
}

/// Maximum ratio transmission: the raw precoder is the conjugate-transposed
/// direct channel. Columns still need `normalize_no_rs`.
pub fn mrt(view: TxChannels) -> Result<CMatrix, PrecoderError> {
    if view.h.frobenius_norm() == 0.0 {
        return Err(PrecoderError::ZeroChannel);
    }
    Ok(view.h.hermitian())
}

/// Zero forcing: `(G^H G)^{-1} H^H`. Fails with the kernel's singularity
/// error when the Gram matrix is rank deficient (always the case when the
/// transmit array is larger than the victim's receive array); callers fall
/// back to [`zf_regularized`] and log the draw.
pub fn zf(view: TxChannels) -> Result<CMatrix, PrecoderError> {
    let gram = view.g.inner_gram();
    Ok(gram.solve(&view.h.hermitian())?)
}

/// Zero forcing through a Tikhonov-regularized Gram inverse
/// `(G^H G + 1e-12·I)^{-1} H^H`. For a rank-deficient Gram matrix this
/// amplifies the leakage null space, so after column normalization the
/// precoder lands in the null space and the residual leakage stays tiny.
pub fn zf_regularized(view: TxChannels) -> Result<CMatrix, PrecoderError> {
    let m = view.g.cols();
    let gram = view
        .g
        .inner_gram()
        .add(&CMatrix::scaled_identity(m, ZF_REGULARIZATION));
    // The regularized Gram is HPD but deliberately ill conditioned; skip the
    // condition gate.
    Ok(gram.solve_unchecked(&view.h.hermitian())?)
}

/// ZF with the documented fallback: the boolean reports whether the
/// regularized path was taken.
pub fn zf_with_fallback(view: TxChannels) -> Result<(CMatrix, bool), PrecoderError> {
    match zf(view) {
        Ok(w) => Ok((w, false)),
        Err(PrecoderError::Linalg(LinalgError::Singular { .. })) => {
            Ok((zf_regularized(view)?, true))
        }
        Err(e) => Err(e),
    }
}

/// Per-stream signal and leakage matrices entering the SLNR quotient: the
/// k-th receive dimension of each link, as a rank-one Gram pair. The written
/// per-stream selection indexes receive dimensions; a leakage channel with
/// fewer receive dimensions than streams shares its last row.
fn slnr_pencil(view: TxChannels, k: usize, n0: f64) -> (CMatrix, CMatrix) {
    let m = view.h.cols();
    let h_row = view.h.row(k.min(view.h.rows() - 1));
    let g_row = view.g.row(k.min(view.g.rows() - 1));
    let a = h_row.inner_gram();
    let b = CMatrix::scaled_identity(m, n0).add(&g_row.inner_gram());
    (a, b)
}

/// Leakage-based precoding: column `k` is the dominant generalized
/// eigenvector of the per-stream signal/leakage pencil, scaled to the uniform
/// per-stream budget `P/Q`.
pub fn slnr(view: TxChannels, n0: f64, p_total: f64, q: usize) -> Result<CMatrix, PrecoderError> {
    assert!(q >= 1);
    let m = view.h.cols();
    let per_stream = p_total / q as f64;
    let mut w = CMatrix::zeros(m, q);
    for k in 0..q {
        let (a, b) = slnr_pencil(view, k, n0);
        let v = dominant_gen_eigvec(&a, &b)?;
        w.set_col(k, &v.scale(per_stream.sqrt()));
    }
    Ok(w)
}

/// SLNR quotient of a candidate direction for stream `k`.
pub fn slnr_quotient(view: TxChannels, k: usize, n0: f64, dir: &CMatrix) -> f64 {
    let (a, b) = slnr_pencil(view, k, n0);
    crate::linalg::rayleigh_quotient(&a, &b, dir)
}

/// Unnormalized common/private directions for both transmitters
/// (`m_i × q_i` each).
#[derive(Debug, Clone)]
pub struct RawRsmaDirections {
    pub u1c: CMatrix,
    pub u1p: CMatrix,
    pub u2c: CMatrix,
    pub u2p: CMatrix,
}

fn normalize_split_columns(
    uc: &CMatrix,
    up: &CMatrix,
    splits: &[f64],
    per_stream: f64,
) -> Result<(CMatrix, CMatrix), PrecoderError> {
    let (m, q) = (uc.rows(), uc.cols());
    assert_eq!((up.rows(), up.cols()), (m, q));
    assert_eq!(splits.len(), q);
    let mut wc = CMatrix::zeros(m, q);
    let mut wp = CMatrix::zeros(m, q);
    for (k, &split) in splits.iter().enumerate() {
        assert!((0.0..=1.0).contains(&split), "split must lie in [0,1]");
        for (u, w, power) in [
            (uc, &mut wc, per_stream * split),
            (up, &mut wp, per_stream * (1.0 - split)),
        ] {
            if power == 0.0 {
                continue; // column stays zero
            }
            let dir = u.col(k);
            let norm = dir.frobenius_norm();
            if norm == 0.0 {
                return Err(PrecoderError::ZeroDirection(k));
            }
            w.set_col(k, &dir.scale(power.sqrt() / norm));
        }
    }
    Ok((wc, wp))
}

/// Map raw directions plus per-stream split coefficients to a
/// constraint-satisfying precoder set. Stream `k` of transmitter `i` gets
/// `sqrt(P_ik·p_ikc)` on the common direction and `sqrt(P_ik·(1-p_ikc))` on
/// the private one, with uniform budgets `P_ik = P_i/Q_i`.
pub fn normalize_rsma(
    dirs: &RawRsmaDirections,
    splits1: &[f64],
    splits2: &[f64],
    p1: f64,
    p2: f64,
) -> Result<PrecoderSet, PrecoderError> {
    let (w1c, w1p) =
        normalize_split_columns(&dirs.u1c, &dirs.u1p, splits1, p1 / dirs.u1c.cols() as f64)?;
    let (w2c, w2p) =
        normalize_split_columns(&dirs.u2c, &dirs.u2p, splits2, p2 / dirs.u2c.cols() as f64)?;
    Ok(PrecoderSet { w1c, w1p, w2c, w2p })
}

/// Scale every column of a raw no-rate-splitting precoder to the uniform
/// per-stream power `P/Q`.
pub fn normalize_no_rs(w_raw: &CMatrix, p_total: f64) -> Result<CMatrix, PrecoderError> {
    let q = w_raw.cols();
    let per_stream = p_total / q as f64;
    let mut w = CMatrix::zeros(w_raw.rows(), q);
    for k in 0..q {
        let col = w_raw.col(k);
        let norm = col.frobenius_norm();
        if norm == 0.0 {
            return Err(PrecoderError::ZeroDirection(k));
        }
        w.set_col(k, &col.scale(per_stream.sqrt() / norm));
    }
    Ok(w)
}
