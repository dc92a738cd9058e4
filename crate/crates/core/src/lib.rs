//! Simulation and control of series-compensated transmission lines.
//!
//! The crate covers sizing of series capacitors, state-space line models in
//! the abc and αβ frames, instantaneous power theory, direct power control
//! of a series converter, a fixed-step simulator and the spectral tools used
//! to measure subsynchronous resonance.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dpc;
pub mod error;
pub mod line_models;
pub mod power;
pub mod sim;
pub mod transforms;

pub use error::{Error, Result};
