//! Experiment harness: strict config parsing, deterministic multi-seed
//! execution, CSV and SVG artifacts, rate sweeps, and the certification
//! battery.

pub mod config;
pub mod csvio;
pub mod runner;
pub mod svg;
pub mod sweep;
pub mod verify;
