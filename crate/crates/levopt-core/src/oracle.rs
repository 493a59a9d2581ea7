//! The noisy zeroth-order evaluation model: query a black-box objective at
//! a point, receive the value plus Gaussian noise, pay one unit of budget.
//!
//! Budget accounting lives here rather than in any algorithm, so nothing
//! built on top can overspend silently. Every query is appended to a
//! [`SampleLog`] for later analysis.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{in_unit_cube, Point, PointSet};
use crate::rng::RngStream;
use crate::testbed::FunctionSpec;

/// Append-only record of every query an oracle has answered, in query
/// order.
#[derive(Clone, Debug)]
pub struct SampleLog {
    points: PointSet,
    responses: Vec<f64>,
}

impl SampleLog {
    fn with_capacity(dim: usize, capacity: usize) -> Self {
        SampleLog {
            points: PointSet::with_capacity(dim, capacity),
            responses: Vec::with_capacity(capacity),
        }
    }

    /// Number of recorded queries.
    pub fn len(&self) -> usize {
        self.responses.len()
    }

    /// True when nothing has been queried yet.
    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    /// The `t`-th queried point.
    pub fn point(&self, t: usize) -> &[f64] {
        self.points.get(t)
    }

    /// The `t`-th response.
    pub fn response(&self, t: usize) -> f64 {
        self.responses[t]
    }

    /// All queried points.
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    /// All responses, in query order.
    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    fn push(&mut self, x: &[f64], y: f64) {
        self.points.push(x);
        self.responses.push(y);
    }
}

/// A budgeted noisy evaluation channel for one objective.
///
/// Each instance owns its random stream and its log; replications run as
/// independent instances with distinct substreams. The noise draw happens
/// on every query, even at `noise_sd = 0`, so the stream position depends
/// only on the call sequence and never on the noise level.
#[derive(Clone, Debug)]
pub struct NoisyOracle {
    objective: FunctionSpec,
    noise_sd: f64,
    budget: u64,
    used: u64,
    rng: RngStream,
    log: SampleLog,
}

impl NoisyOracle {
    /// Wrap `objective` with Gaussian noise of standard deviation
    /// `noise_sd` and a hard budget of `budget` queries.
    pub fn new(objective: FunctionSpec, noise_sd: f64, budget: u64, rng: RngStream) -> Self {
        debug_assert!(noise_sd >= 0.0);
        let log = SampleLog::with_capacity(objective.dim, budget.min(1 << 20) as usize);
        NoisyOracle { objective, noise_sd, budget, used: 0, rng, log }
    }

    /// The objective being queried.
    pub fn objective(&self) -> &FunctionSpec {
        &self.objective
    }

    /// Total query budget.
    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Queries spent so far.
    pub fn used(&self) -> u64 {
        self.used
    }

    /// Queries still available.
    pub fn remaining(&self) -> u64 {
        self.budget - self.used
    }

    /// The log of everything queried so far.
    pub fn log(&self) -> &SampleLog {
        &self.log
    }

    /// Evaluate at `x`, spending one query: returns `f(x) + noise_sd * g`
    /// with `g` standard normal.
    pub fn query(&mut self, x: &[f64]) -> Result<f64> {
        if x.len() != self.objective.dim {
            return Err(Error::DimensionMismatch { expected: self.objective.dim, got: x.len() });
        }
        if !in_unit_cube(x) {
            let bad = x.iter().copied().find(|c| !(0.0..=1.0).contains(c)).unwrap_or(f64::NAN);
            return Err(Error::DomainViolation { coordinate: bad });
        }
        if self.used >= self.budget {
            return Err(Error::BudgetExhausted { budget: self.remaining(), requested: 1 });
        }
        let y = self.objective.eval(x) + self.noise_sd * self.rng.standard_normal();
        if !y.is_finite() {
            return Err(Error::NonFiniteResponse);
        }
        self.used += 1;
        self.log.push(x, y);
        Ok(y)
    }

    /// Draw `count` points i.i.d. uniformly from the finite set `points`,
    /// query each, and return the pairs in draw order. Fails atomically —
    /// nothing is spent unless the whole batch fits in the budget.
    pub fn batch_uniform(
        &mut self,
        points: &PointSet,
        count: u64,
    ) -> Result<Vec<(Point, f64)>> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        if count > self.remaining() {
            return Err(Error::BudgetExhausted { budget: self.remaining(), requested: count });
        }
        let mut out = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let pick = self.rng.index(points.len());
            let x: Point = points.get(pick).to_vec();
            let y = self.query(&x)?;
            out.push((x, y));
        }
        Ok(out)
    }
}
