//! Automatic antenna-orientation tuning, simulated end to end.
//!
//! RX dipole orientations (yaw/roll per antenna) drive a geometric MIMO-OFDM
//! channel simulator; orientations are scored by log-det channel capacity and
//! searched with GP-UCB Bayesian optimization or random/Sobol baselines. The
//! [`harness`] module reproduces strategy comparisons from a config file.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod channel;
pub mod environment;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kv;
pub mod optimizer;

pub use error::{ConfigError, CsvError, Error, Result, TraceError};
