//! Experiment harness: configuration, sweep/convergence/region runners and
//! the fast invariant selftest. The `rsic` binary is a thin front end over
//! this library.

pub mod config;
pub mod runner;
pub mod selftest;
