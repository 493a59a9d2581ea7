//! Benchmark objectives, adversarial constructions, and level-set geometry.
//!
//! A [`FunctionSpec`] bundles an objective with its declared smoothness
//! (`alpha`, `holder_m`), the locality radius `kappa` within which that
//! smoothness is promised, and optional analytic side information (minimum,
//! level-set volume law, volume exponent hint). Optimizers consume the
//! declaration; tests and experiments consume the side information.

mod bump;
mod families;
mod levelset;
mod rates;

pub use bump::{bump, make_adversarial, pack_level_set, smoothstep};
pub use families::{
    constant_family, constant_family_d, power_family, strongly_convex_family, two_valley_family,
};
pub use levelset::{check_a2, estimate_volume, A2Report, A2Row, LevelSetProfile, ProfileMethod};
pub use rates::{solve_eps_n, theoretical_rate, RateVariant, EPS_GRID_LEN, EPS_GRID_MIN};

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{in_unit_cube, Point};
use crate::rng::RngStream;

/// Seed tag for the internal streams behind brute-force minimization and
/// Monte Carlo fallbacks, so those helpers are deterministic without
/// threading a generator through every call site.
const INTERNAL_SEED: u64 = 0x1eef_0b57_ac1e_5eed;

/// An objective on the unit cube together with everything the toolkit needs
/// to optimize it honestly and to evaluate the result.
#[derive(Clone)]
pub struct FunctionSpec {
    /// Human-readable identity, e.g. `power(d=2,alpha=2,beta=1,a0=1)`.
    pub name: String,
    /// Domain dimension (1 to 8).
    pub dim: usize,
    /// Declared smoothness order; local fits use degree `floor(alpha)`.
    pub alpha: f64,
    /// Declared bound on the Hölder norm of order `alpha`.
    pub holder_m: f64,
    /// Radius of the level set on which the declaration holds;
    /// `f64::INFINITY` means "everywhere".
    pub kappa: f64,
    /// Volume-law exponent hint (`mu(eps) ~ eps^beta`), when known.
    pub beta_hint: Option<f64>,
    /// Exact minimum value, when known.
    pub analytic_min: Option<f64>,
    /// A known minimizer, when one is available.
    pub minimizer_hint: Option<Point>,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    /// Exact level-set volume `eps -> mu(eps)`; may decline (`None`) outside
    /// the range it covers, in which case callers fall back to Monte Carlo.
    volume_law: Option<Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>>,
}

impl core::fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FunctionSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("holder_m", &self.holder_m)
            .field("kappa", &self.kappa)
            .finish_non_exhaustive()
    }
}

impl FunctionSpec {
    /// Build a spec from scratch. `alpha`, `holder_m` and `kappa` must be
    /// positive and `dim` in `1..=8` (the box index used throughout the
    /// crate caps the dimension).
    pub fn new<F>(
        name: String,
        dim: usize,
        alpha: f64,
        holder_m: f64,
        kappa: f64,
        eval: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim == 0 || dim > 8 {
            return Err(Error::InvalidParameter("dim must be in 1..=8"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be positive and finite"));
        }
        if !(holder_m > 0.0) || !holder_m.is_finite() {
            return Err(Error::InvalidParameter("holder_m must be positive and finite"));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter("kappa must be positive"));
        }
        Ok(FunctionSpec {
            name,
            dim,
            alpha,
            holder_m,
            kappa,
            beta_hint: None,
            analytic_min: None,
            minimizer_hint: None,
            eval: Arc::new(eval),
            volume_law: None,
        })
    }

    pub fn with_volume_law<L>(mut self, law: L) -> Self
    where
        L: Fn(f64) -> Option<f64> + Send + Sync + 'static,
    {
        self.volume_law = Some(Arc::new(law));
        self
    }

    pub fn with_beta_hint(mut self, beta: f64) -> Self {
        self.beta_hint = Some(beta);
        self
    }

    pub fn with_analytic_min(mut self, min: f64, minimizer: Option<Point>) -> Self {
        self.analytic_min = Some(min);
        self.minimizer_hint = minimizer;
        self
    }

    /// Evaluate the objective. Callers are responsible for staying inside
    /// the unit cube; the oracle enforces that for real query traffic.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    /// Exact level-set volume at `eps` if the attached law covers it.
    pub fn volume_at(&self, eps: f64) -> Option<f64> {
        self.volume_law.as_ref().and_then(|law| law(eps))
    }

    pub fn has_volume_law(&self) -> bool {
        self.volume_law.is_some()
    }

    /// The reference minimum: analytic when known, brute force otherwise.
    pub fn min_value(&self) -> Result<f64> {
        match self.analytic_min {
            Some(m) => Ok(m),
            None => self.brute_force_min().map(|(v, _)| v),
        }
    }

    /// Brute-force reference minimum and minimizer: a uniform lattice of
    /// ~1e5 points for `dim <= 2`, 1e6 random points otherwise (fixed
    /// internal stream, so the answer is reproducible).
    pub fn brute_force_min(&self) -> Result<(f64, Point)> {
        let (mut best, mut arg) = (f64::INFINITY, Vec::new());
        let mut consider = |v: f64, x: &[f64]| {
            if v < best {
                best = v;
                arg = x.to_vec();
            }
        };
        match self.dim {
            1 => {
                let steps = 100_000usize;
                for i in 0..=steps {
                    let x = [i as f64 / steps as f64];
                    consider(self.eval(&x), &x);
                }
            }
            2 => {
                let side = 316usize; // ~1e5 lattice points
                for i in 0..=side {
                    for j in 0..=side {
                        let x = [i as f64 / side as f64, j as f64 / side as f64];
                        consider(self.eval(&x), &x);
                    }
                }
            }
            _ => {
                let mut rng = RngStream::substream(INTERNAL_SEED, &[self.dim as u64]);
                for _ in 0..1_000_000u32 {
                    let x = rng.uniform_point(self.dim);
                    consider(self.eval(&x), &x);
                }
            }
        }
        if best.is_finite() {
            Ok((best, arg))
        } else {
            Err(Error::NoMinimum)
        }
    }

    /// Optimality gap of `x`: `f(x) - min f`. This is the quantity every
    /// experiment reports.
    pub fn regret(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if !in_unit_cube(x) {
            let bad = x.iter().copied().find(|c| !(0.0..=1.0).contains(c)).unwrap_or(f64::NAN);
            return Err(Error::DomainViolation { coordinate: bad });
        }
        Ok(self.eval(x) - self.min_value()?)
    }
}
