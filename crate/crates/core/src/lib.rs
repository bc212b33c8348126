//! Quantitative supplier accountability for supply chains.
//!
//! The crate has three layers:
//!
//! - statistical accountability tests (Bayesian likelihood-ratio,
//!   closed-form Gaussian, Neyman-Pearson, M-ary MAP, decentralized fusion)
//!   together with AROC curves and AUC bounds for judging investigation
//!   quality;
//! - two desk-scale case studies: an adaptive-cruise-control platooning
//!   model (LQR design, faulty-sensor simulation, Monte Carlo validation of
//!   the closed forms) and a multi-stage supply-chain investigation over a
//!   directed supplier graph with costs and a budget;
//! - the economic layer: incentive-compatible penalty contracts,
//!   cyber-insurance premium and coverage design under risk aversion, and
//!   the investigation-vs-insurance trade-off.
//!
//! The `chainprobe` binary runs declarative scenario files and emits
//! deterministic CSV artifacts; see [`scenario`].

#![forbid(unsafe_code)]

pub mod aroc;
pub mod chain;
pub mod domain;
pub mod econ;
mod emit;
mod error;
pub mod hypotest;
pub mod platoon;
pub mod rng;
pub mod scenario;
pub mod stats;

pub use error::{Error, Result};
