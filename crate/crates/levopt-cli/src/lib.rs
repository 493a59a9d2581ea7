//! Std companion to `levopt-core`: experiment harness (sweeps, slope
//! fits, method comparisons, adversarial stress runs), flat key-value
//! config files, CSV persistence, and the `levopt` command-line binary.

pub mod config;
pub mod harness;
