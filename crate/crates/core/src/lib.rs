//! Barrier integral control (BRIC) for high-order MIMO control-affine
//! systems with unknown dynamics.
//!
//! The controller confines the top filtered error `s_k` to a funnel that is
//! unbounded at `t = 0` and decays to a positive floor, while two adaptation
//! integrators drive the regulation error to zero asymptotically. The crate
//! also ships a coupled inverted-pendulum benchmark, an integrator-chain
//! oracle plant, a prescribed-performance baseline, a fixed-step closed-loop
//! simulator and a scenario runner with CSV/JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod controllers;
pub mod error;
pub mod error_pipeline;
pub mod funnel;
pub mod plants;
pub mod sim;
pub mod transforms;

pub use error::{Diagnostic, Error, Result};
