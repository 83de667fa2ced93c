//! Multi-agent deterministic policy-gradient learning stack for the
//! rate-splitting interference channel: a from-scratch differentiable MLP,
//! experience replay, the two-agent training system with centralized
//! critics, the decoding-order head, and deterministic evaluation.

pub mod actions;
pub mod agents;
pub mod env;
pub mod mlp;
pub mod replay;
pub mod train;

pub use train::{EvalSummary, MaddpgConfig, MaddpgSystem, OrderSource, TraceRow};
