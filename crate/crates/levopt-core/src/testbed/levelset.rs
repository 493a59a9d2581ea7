//! Level-set geometry: volume estimation, volume profiles, and empirical
//! covering/packing diagnostics.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
// Shadowed by std's inherent f64 methods whenever feature unification
// turns on num-traits/std; plain no_std builds resolve through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geom::{linf_dist, PointSet};
use crate::rng::RngStream;
use crate::testbed::FunctionSpec;

/// How a volume profile was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileMethod {
    /// Exact values from the family's attached volume law.
    Analytic,
    /// Empirical fractions from uniform sampling.
    MonteCarlo,
}

impl ProfileMethod {
    /// Stable lowercase token used in CSV output.
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileMethod::Analytic => "analytic",
            ProfileMethod::MonteCarlo => "monte-carlo",
        }
    }
}

/// The volume of the `eps`-level set as a function of `eps`: a sampled
/// version of the distribution function `mu(eps)`.
#[derive(Clone, Debug)]
pub struct LevelSetProfile {
    /// Strictly increasing positive levels.
    pub epsilons: Vec<f64>,
    /// Matching volumes in `[0,1]`, non-decreasing.
    pub volumes: Vec<f64>,
    /// Provenance of the volumes.
    pub method: ProfileMethod,
    /// Sample count behind Monte Carlo volumes; 0 for analytic ones.
    pub mc_samples: u64,
}

impl LevelSetProfile {
    fn validate_epsilons(epsilons: &[f64]) -> Result<()> {
        if epsilons.is_empty() {
            return Err(Error::InvalidParameter("profile needs at least one level"));
        }
        let increasing = epsilons.windows(2).all(|w| w[0] < w[1]);
        if !increasing || epsilons[0] <= 0.0 {
            return Err(Error::InvalidParameter("levels must be positive and increasing"));
        }
        Ok(())
    }

    /// Exact profile from the family's volume law. Fails if the law is
    /// missing or declines any of the requested levels.
    pub fn analytic(f0: &FunctionSpec, epsilons: &[f64]) -> Result<Self> {
        Self::validate_epsilons(epsilons)?;
        let mut volumes = Vec::with_capacity(epsilons.len());
        for &eps in epsilons {
            match f0.volume_at(eps) {
                Some(v) => volumes.push(v),
                None => {
                    return Err(Error::InvalidParameter(
                        "volume law does not cover a requested level",
                    ))
                }
            }
        }
        Ok(LevelSetProfile {
            epsilons: epsilons.to_vec(),
            volumes,
            method: ProfileMethod::Analytic,
            mc_samples: 0,
        })
    }

    /// Monte Carlo profile: one shared sample of `samples` uniform points
    /// serves every level, so the volumes are non-decreasing by
    /// construction (the level sets nest and so do the hit counts).
    pub fn monte_carlo(
        f0: &FunctionSpec,
        epsilons: &[f64],
        samples: u64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        Self::validate_epsilons(epsilons)?;
        if samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1"));
        }
        let fmin = f0.min_value()?;
        let mut excess: Vec<f64> = (0..samples)
            .map(|_| f0.eval(&rng.uniform_point(f0.dim)) - fmin)
            .collect();
        excess.sort_by(f64::total_cmp);
        let volumes = epsilons
            .iter()
            .map(|&eps| {
                let hits = excess.partition_point(|&v| v <= eps);
                hits as f64 / samples as f64
            })
            .collect();
        Ok(LevelSetProfile {
            epsilons: epsilons.to_vec(),
            volumes,
            method: ProfileMethod::MonteCarlo,
            mc_samples: samples,
        })
    }
}

/// Monte Carlo volume of the `eps`-level set: the fraction of `samples`
/// uniform draws with `f0 <= min + eps`. Standard error is at most
/// `1/(2 sqrt(samples))`.
pub fn estimate_volume(
    f0: &FunctionSpec,
    eps: f64,
    samples: u64,
    rng: &mut RngStream,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1"));
    }
    let threshold = f0.min_value()? + eps;
    let mut hits = 0u64;
    for _ in 0..samples {
        if f0.eval(&rng.uniform_point(f0.dim)) <= threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

/// One (eps, delta) diagnostic row.
#[derive(Clone, Copy, Debug)]
pub struct A2Row {
    /// Level of the set being covered/packed.
    pub eps: f64,
    /// Ball radius.
    pub delta: f64,
    /// Volume of the level set (from the profile).
    pub volume: f64,
    /// Greedy cover size.
    pub cover: usize,
    /// Greedy packing size (pairwise distance > delta).
    pub packing: usize,
    /// `cover / (1 + volume * delta^{-d})` — bounded above under (A2).
    pub cover_ratio: f64,
    /// `packing / (volume * delta^{-d})` — bounded below under (A2');
    /// NaN when the volume is zero.
    pub packing_ratio: f64,
}

/// Empirical covering/packing report over a grid of levels and radii.
#[derive(Clone, Debug)]
pub struct A2Report {
    /// One row per (eps, delta) pair, eps-major order.
    pub rows: Vec<A2Row>,
    /// Largest cover ratio seen: the implied covering constant.
    pub c0_hat: Option<f64>,
    /// Smallest packing ratio seen over rows with positive volume: the
    /// implied packing constant.
    pub c0_prime_hat: Option<f64>,
}

/// Lattice points of the level set at height `min + eps`, at a resolution
/// that keeps the scan around `budget` evaluations.
fn level_set_cloud(f0: &FunctionSpec, threshold: f64, budget: usize) -> PointSet {
    let d = f0.dim;
    let res = ((budget as f64).powf(1.0 / d as f64).floor() as usize).max(2);
    let mut cloud = PointSet::new(d);
    let mut point = vec![0.0; d];
    for idx in 0..res.pow(d as u32) {
        let mut rest = idx;
        for coord in point.iter_mut() {
            *coord = (rest % res) as f64 / (res - 1) as f64;
            rest /= res;
        }
        if f0.eval(&point) <= threshold {
            cloud.push(&point);
        }
    }
    cloud
}

/// Greedy cover of `cloud` by closed `l-infinity` balls of radius `delta`
/// centered on cloud points: scan in order, open a new center whenever a
/// point is not yet covered.
fn greedy_cover(cloud: &PointSet, delta: f64) -> usize {
    let mut centers: Vec<usize> = Vec::new();
    'points: for i in 0..cloud.len() {
        let p = cloud.get(i);
        for &c in &centers {
            if linf_dist(p, cloud.get(c)) <= delta {
                continue 'points;
            }
        }
        centers.push(i);
    }
    centers.len()
}

/// Greedy packing of `cloud`: accept points whose pairwise `l-infinity`
/// distance exceeds `delta`.
fn greedy_packing(cloud: &PointSet, delta: f64) -> usize {
    let mut accepted: Vec<usize> = Vec::new();
    'points: for i in 0..cloud.len() {
        let p = cloud.get(i);
        for &a in &accepted {
            if linf_dist(p, cloud.get(a)) <= delta {
                continue 'points;
            }
        }
        accepted.push(i);
    }
    accepted.len()
}

/// Estimate covering and packing numbers of each level set in `profile`
/// at each radius in `deltas`, and report the implied constants: the
/// largest `cover / (1 + volume * delta^{-d})` and the smallest
/// `packing / (volume * delta^{-d})`. Purely diagnostic — a greedy cover
/// overestimates and a greedy packing underestimates, so the constants
/// bracket rather than pin down the truth.
pub fn check_a2(
    profile: &LevelSetProfile,
    f0: &FunctionSpec,
    deltas: &[f64],
) -> Result<A2Report> {
    if deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidParameter("radii must be positive"));
    }
    let fmin = f0.min_value()?;
    let d = f0.dim;
    let budget = if d == 1 { 4096 } else { 10_000 };
    let mut rows = Vec::with_capacity(profile.epsilons.len() * deltas.len());
    let mut c0_hat: Option<f64> = None;
    let mut c0_prime_hat: Option<f64> = None;
    for (&eps, &volume) in profile.epsilons.iter().zip(&profile.volumes) {
        let cloud = level_set_cloud(f0, fmin + eps, budget);
        for &delta in deltas {
            let cover = greedy_cover(&cloud, delta);
            let packing = greedy_packing(&cloud, delta);
            let scale = volume * delta.powi(-(d as i32));
            let cover_ratio = cover as f64 / (1.0 + scale);
            let packing_ratio =
                if scale > 0.0 { packing as f64 / scale } else { f64::NAN };
            c0_hat = Some(c0_hat.map_or(cover_ratio, |c: f64| c.max(cover_ratio)));
            if packing_ratio.is_finite() {
                c0_prime_hat =
                    Some(c0_prime_hat.map_or(packing_ratio, |c: f64| c.min(packing_ratio)));
            }
            rows.push(A2Row { eps, delta, volume, cover, packing, cover_ratio, packing_ratio });
        }
    }
    Ok(A2Report { rows, c0_hat, c0_prime_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed::{constant_family, power_family, strongly_convex_family};
    use approx::assert_relative_eq;

    #[test]
    fn flat_function_fills_the_domain() {
        let f0 = constant_family();
        let mut rng = RngStream::from_seed(11);
        let v = estimate_volume(&f0, 1e-9, 1000, &mut rng).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn power_volume_matches_analytic() {
        // mu(0.25) = 0.5 for f(z) = z^2; a million samples pin it to
        // +/- 0.002 (4 binomial standard errors).
        let f0 = power_family(1, 2.0, 0.5, 1.0).unwrap();
        let mut rng = RngStream::substream(42, &[1]);
        let v = estimate_volume(&f0, 0.25, 1_000_000, &mut rng).unwrap();
        assert!((v - 0.5).abs() < 0.002, "v = {v}");
    }

    #[test]
    fn zero_level_set_has_zero_volume() {
        let f0 = strongly_convex_family(2, 2.0, &[0.5, 0.5]).unwrap();
        let mut rng = RngStream::from_seed(3);
        let v = estimate_volume(&f0, 0.0, 10_000, &mut rng).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn volume_is_monotone_in_eps_at_fixed_seed() {
        let f0 = strongly_convex_family(2, 2.0, &[0.4, 0.6]).unwrap();
        let mut last = 0.0;
        for eps in [0.001, 0.01, 0.05, 0.1, 0.5, 1.0] {
            // Fresh stream with the same seed: identical draws each call.
            let mut rng = RngStream::substream(7, &[9]);
            let v = estimate_volume(&f0, eps, 20_000, &mut rng).unwrap();
            assert!(v >= last, "volume dropped: {v} < {last} at eps={eps}");
            last = v;
        }
    }

    #[test]
    fn analytic_profile_reads_the_law() {
        let f0 = power_family(2, 2.0, 1.0, 1.0).unwrap();
        let eps = [0.1, 0.2, 0.4];
        let profile = LevelSetProfile::analytic(&f0, &eps).unwrap();
        assert_eq!(profile.method, ProfileMethod::Analytic);
        assert_eq!(profile.mc_samples, 0);
        for (e, v) in profile.epsilons.iter().zip(&profile.volumes) {
            assert_relative_eq!(*v, core::f64::consts::FRAC_PI_4 * e, epsilon = 1e-12);
        }
        // The law declines above a0; the analytic profile must refuse.
        assert!(LevelSetProfile::analytic(&f0, &[0.5, 1.5]).is_err());
    }

    #[test]
    fn monte_carlo_profile_is_monotone_and_close() {
        let f0 = power_family(1, 2.0, 0.5, 1.0).unwrap();
        let eps: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let mut rng = RngStream::substream(42, &[2]);
        let profile = LevelSetProfile::monte_carlo(&f0, &eps, 200_000, &mut rng).unwrap();
        assert_eq!(profile.method, ProfileMethod::MonteCarlo);
        assert!(profile.volumes.windows(2).all(|w| w[0] <= w[1]));
        assert!(profile.volumes.iter().all(|v| (0.0..=1.0).contains(v)));
        for (e, v) in profile.epsilons.iter().zip(&profile.volumes) {
            assert!((v - e.sqrt()).abs() < 0.005, "mu({e}) = {v}");
        }
    }

    #[test]
    fn profile_rejects_bad_levels() {
        let f0 = constant_family();
        assert!(LevelSetProfile::analytic(&f0, &[]).is_err());
        assert!(LevelSetProfile::analytic(&f0, &[0.2, 0.1]).is_err());
        assert!(LevelSetProfile::analytic(&f0, &[-0.1, 0.1]).is_err());
    }

    #[test]
    fn interval_cover_counts_match_arithmetic() {
        // Level set of the 1-D convex family at eps is the interval
        // [c - r, c + r] with r = sqrt(eps); covering it by delta-balls
        // takes about r/delta centers.
        let f0 = strongly_convex_family(1, 2.0, &[0.5]).unwrap();
        let profile = LevelSetProfile::analytic(&f0, &[0.04]).unwrap(); // r = 0.2
        let report = check_a2(&profile, &f0, &[0.05]).unwrap();
        let row = &report.rows[0];
        // Ideal cover of a 0.4-long interval by radius-0.05 balls is 4;
        // first-fit greedy pays up to a factor of two.
        assert!(
            (4..=9).contains(&row.cover),
            "cover = {}, expected within a factor of 2 of 4",
            row.cover
        );
        assert!(report.c0_hat.unwrap() > 0.0);
        assert!(report.c0_hat.unwrap() < 3.0);
    }

    #[test]
    fn huge_radius_covers_in_one_ball() {
        let f0 = strongly_convex_family(2, 2.0, &[0.5, 0.5]).unwrap();
        let profile = LevelSetProfile::analytic(&f0, &[0.01]).unwrap();
        let report = check_a2(&profile, &f0, &[2.0]).unwrap();
        assert_eq!(report.rows[0].cover, 1);
    }

    #[test]
    fn packing_at_delta_bounded_by_cover_at_half_delta() {
        // Standard inequality M(delta) <= N(delta/2), checked empirically
        // on the same cloud.
        let f0 = strongly_convex_family(2, 2.0, &[0.5, 0.5]).unwrap();
        let profile = LevelSetProfile::analytic(&f0, &[0.02]).unwrap();
        for delta in [0.02, 0.05, 0.1] {
            let report = check_a2(&profile, &f0, &[delta, delta / 2.0]).unwrap();
            let packing_at_delta = report.rows[0].packing;
            let cover_at_half = report.rows[1].cover;
            assert!(
                packing_at_delta <= cover_at_half,
                "M({delta}) = {packing_at_delta} > N({}) = {cover_at_half}",
                delta / 2.0
            );
        }
    }
}
