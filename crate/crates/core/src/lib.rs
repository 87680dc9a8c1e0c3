//! Discrete-time control simulation and synthesis toolkit.
//!
//! The crate simulates a two-loop refrigeration surrogate plant built from
//! identified transfer functions with steady-state-gain scheduling, runs
//! PID / feedforward / conditional-integrator controller stacks against
//! timed reference and disturbance schedules, and scores the results with
//! relative performance indices.

// validation predicates are written as !(x > 0.0) so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod control;
pub mod error;
pub mod ffsynth;
pub mod lti;
pub mod metrics;
pub mod plant;
pub mod poly;
pub mod presets;
pub mod sim;
pub mod sysid;

pub use error::{Error, Result};
