//! Noisy zeroth-order optimization over point grids.
//!
//! This crate implements an epoch-based successive-rejection optimizer for
//! functions observed only through noisy point evaluations, together with
//! the machinery it is built from:
//!
//! * [`oracle`] — budgeted, seeded evaluation oracles that log every query;
//! * [`testbed`] — benchmark families (power, constant, strongly convex,
//!   two-valley), smoothstep bump constructions for adversarial objectives,
//!   level-set volume/packing/covering estimators, and rate calculators;
//! * [`polyreg`] — local polynomial least squares with explicit
//!   bias/deviation error bounds;
//! * [`ci`] — per-point confidence-interval records and the data-driven
//!   bandwidth selection rule that keeps bias below deviation;
//! * [`optimizer`] — grid construction, pre-screening, the active
//!   successive-rejection loop, and a passive (sample-then-fit) baseline.
//!
//! Everything here is deterministic given a master seed: randomness flows
//! through named substreams ([`rng::RngStream`]) so that replications are
//! independent and reruns are bit-identical. The crate is `no_std`
//! (allocation is required); IO, file formats, and the experiment harness
//! live in the companion `levopt-cli` crate.
//!
//! # Example
//!
//! ```
//! use levopt_core::optimizer::{build_grid, run_active, GridDensity, OptimizerConfig};
//! use levopt_core::oracle::NoisyOracle;
//! use levopt_core::rng::RngStream;
//! use levopt_core::testbed::strongly_convex_family;
//!
//! let f = strongly_convex_family(1, 2.0, &[0.5]).unwrap();
//! let config = OptimizerConfig { n: 256, grid_size: 64, ..OptimizerConfig::default() };
//! let grid = build_grid(config.grid_size, 1, GridDensity::Uniform,
//!                       &mut RngStream::substream(7, &[1]));
//! let mut oracle = NoisyOracle::new(f.clone(), 1.0, 256, RngStream::substream(7, &[2]));
//! let run = run_active(&mut oracle, &grid, &config).unwrap();
//! assert_eq!(run.queries, 256 / 8 * 8); // T = 8 epochs of n/T queries each
//! assert!(f.eval(&run.x_hat) <= f.eval(&[0.0]));
//! ```
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ci;
pub mod error;
pub mod geom;
pub mod linalg;
pub mod oracle;
pub mod optimizer;
pub mod polyreg;
pub mod rng;
pub mod testbed;

pub use error::{Error, Result};
