//! Built-in benchmark families.
//!
//! Each constructor returns a [`FunctionSpec`] whose declared smoothness is
//! an honest upper bound on the Hölder norm of the objective it builds, and
//! whose analytic side information (minimum, volume law, volume exponent)
//! is exact where provided.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::tgamma;
#[cfg_attr(test, allow(unused_imports))]
// Shadowed by std's inherent f64 methods whenever feature unification
// turns on num-traits/std; plain no_std builds resolve through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::testbed::FunctionSpec;

/// Falling factorial `p * (p-1) * ... * (p-j+1)`; `1` for `j = 0`.
fn falling(p: f64, j: usize) -> f64 {
    let mut out = 1.0;
    for i in 0..j {
        out *= p - i as f64;
    }
    out
}

/// Hölder-norm bound for a separable power `a0 * sum_i z_i^p` of order
/// `alpha` on the unit cube: sup-norms of all derivatives up to
/// `k = floor(alpha)` plus the Hölder seminorm of the order-`k` ones.
fn power_holder_m(d: usize, alpha: f64, p: f64, a0: f64) -> f64 {
    let k = alpha.floor() as usize;
    let mut m = 0.0;
    for j in 0..=k {
        m += d as f64 * a0 * falling(p, j).abs();
    }
    // Seminorm of z^(p-k): Lipschitz constant p-k when p-k >= 1, else the
    // exponent itself already matches and the coefficient is 1.
    m += d as f64 * a0 * falling(p, k).abs() * (p - k as f64).max(1.0);
    m
}

/// `f(z) = a0 * (z_1^p + ... + z_d^p)` with `p = d / beta`, so the level-set
/// volume scales as `eps^beta`. Requires `beta` in `(0, d/alpha]`, which
/// makes `p >= alpha` and keeps the function inside the declared class.
///
/// The attached volume law is exact for `eps <= a0` (the level set is the
/// positive orthant of a p-ball that fits in the cube) and at saturation
/// `eps >= a0 * d`; it declines in between.
pub fn power_family(d: usize, alpha: f64, beta: f64, a0: f64) -> Result<FunctionSpec> {
    if !(beta > 0.0) || beta > d as f64 / alpha {
        return Err(Error::InvalidBeta { beta });
    }
    if !(a0 > 0.0) || !a0.is_finite() {
        return Err(Error::InvalidParameter("a0 must be positive and finite"));
    }
    let p = d as f64 / beta;
    let holder_m = power_holder_m(d, alpha, p, a0);
    let name = format!("power(d={d},alpha={alpha},beta={beta},a0={a0})");
    let eval_p = p;
    let spec = FunctionSpec::new(name, d, alpha, holder_m, f64::INFINITY, move |z: &[f64]| {
        a0 * z.iter().map(|&c| c.powf(eval_p)).sum::<f64>()
    })?;
    // Volume of the positive orthant of the p-ball of radius r in R^d is
    // r^d * Gamma(1 + 1/p)^d / Gamma(1 + d/p).
    let orthant = tgamma(1.0 + 1.0 / p).powi(d as i32) / tgamma(1.0 + d as f64 / p);
    let law_d = d as f64;
    Ok(spec
        .with_analytic_min(0.0, Some(vec![0.0; d]))
        .with_beta_hint(beta)
        .with_volume_law(move |eps: f64| {
            if eps <= 0.0 {
                Some(0.0)
            } else if eps >= a0 * law_d {
                Some(1.0)
            } else if eps <= a0 {
                Some(orthant * (eps / a0).powf(beta))
            } else {
                None
            }
        }))
}

/// The flat objective `f = 0`: every point is optimal and every level set is
/// the whole cube. Declared with `alpha = 2` (it sits in every class).
pub fn constant_family() -> FunctionSpec {
    FunctionSpec::new("constant".into(), 1, 2.0, 1.0, f64::INFINITY, |_: &[f64]| 0.0)
        .expect("static parameters")
        .with_analytic_min(0.0, None)
        .with_beta_hint(0.0)
        .with_volume_law(|_eps: f64| Some(1.0))
}

/// The flat objective in `d` dimensions.
pub fn constant_family_d(d: usize) -> Result<FunctionSpec> {
    Ok(FunctionSpec::new(format!("constant(d={d})"), d, 2.0, 1.0, f64::INFINITY, |_: &[f64]| 0.0)?
        .with_analytic_min(0.0, None)
        .with_beta_hint(0.0)
        .with_volume_law(|_eps: f64| Some(1.0)))
}

/// Hölder-norm bound for `(sigma/2) * |z - c|^2` on the unit cube.
fn convex_holder_m(sigma: f64, center: &[f64]) -> f64 {
    let far: Vec<f64> = center.iter().map(|&c| c.max(1.0 - c)).collect();
    let sup_f = 0.5 * sigma * far.iter().map(|&r| r * r).sum::<f64>();
    let sup_grad_sum = sigma * far.iter().sum::<f64>();
    let sup_hess_sum = sigma * center.len() as f64;
    sup_f + sup_grad_sum + sup_hess_sum
}

/// `f(z) = (sigma/2) * ||z - center||_2^2`: smooth (`alpha = 2`), strongly
/// convex, with volume exponent `d/2`. The volume law is exact in one
/// dimension and, in higher dimensions, wherever the `eps`-ball around the
/// center fits inside the cube.
pub fn strongly_convex_family(d: usize, sigma: f64, center: &[f64]) -> Result<FunctionSpec> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter("sigma must be positive and finite"));
    }
    if center.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: center.len() });
    }
    if !center.iter().all(|&c| (0.0..=1.0).contains(&c)) {
        return Err(Error::InvalidParameter("center must lie in the unit cube"));
    }
    let c_eval: Vec<f64> = center.to_vec();
    let name = format!("convex(d={d},sigma={sigma})");
    let spec = FunctionSpec::new(
        name,
        d,
        2.0,
        convex_holder_m(sigma, center),
        f64::INFINITY,
        move |z: &[f64]| {
            0.5 * sigma
                * z.iter().zip(&c_eval).map(|(zi, ci)| (zi - ci) * (zi - ci)).sum::<f64>()
        },
    )?;
    let c_law: Vec<f64> = center.to_vec();
    // pi^{d/2} / Gamma(d/2 + 1), written via Gamma(3/2) = sqrt(pi)/2.
    let ball_unit =
        (2.0 * tgamma(1.0 + 0.5)).powi(d as i32) / tgamma(1.0 + d as f64 / 2.0);
    Ok(spec
        .with_analytic_min(0.0, Some(center.to_vec()))
        .with_beta_hint(d as f64 / 2.0)
        .with_volume_law(move |eps: f64| {
            if eps <= 0.0 {
                return Some(0.0);
            }
            let r = (2.0 * eps / sigma).sqrt();
            if c_law.len() == 1 {
                let c = c_law[0];
                Some(((c + r).min(1.0) - (c - r).max(0.0)).max(0.0))
            } else if c_law.iter().all(|&c| c.min(1.0 - c) >= r) {
                Some(ball_unit * r.powi(c_law.len() as i32))
            } else {
                None
            }
        }))
}

/// Two quadratic valleys split at `z_1 = 1/2`: the left floor sits at zero,
/// the right floor at `raise`. The jump across the split lies far above the
/// `kappa = raise/2` level set, so the declared smoothness only has to hold
/// near the true valley. Useful for exercising pre-screening.
pub fn two_valley_family(d: usize, curvature: f64, raise: f64) -> Result<FunctionSpec> {
    if !(curvature > 0.0) || !(raise > 0.0) {
        return Err(Error::InvalidParameter("curvature and raise must be positive"));
    }
    let mut left = vec![0.5; d];
    left[0] = 0.25;
    let mut right = vec![0.5; d];
    right[0] = 0.75;
    let (l_eval, r_eval) = (left.clone(), right.clone());
    let name = format!("two_valley(d={d},a={curvature},raise={raise})");
    let spec = FunctionSpec::new(
        name,
        d,
        2.0,
        convex_holder_m(2.0 * curvature, &left),
        raise / 2.0,
        move |z: &[f64]| {
            let (c, base) = if z[0] < 0.5 { (&l_eval, 0.0) } else { (&r_eval, raise) };
            base + curvature * z.iter().zip(c).map(|(zi, ci)| (zi - ci) * (zi - ci)).sum::<f64>()
        },
    )?;
    let law_valid = d == 1;
    Ok(spec
        .with_analytic_min(0.0, Some(left))
        .with_beta_hint(d as f64 / 2.0)
        .with_volume_law(move |eps: f64| {
            if !law_valid || eps >= raise {
                return None;
            }
            if eps <= 0.0 {
                return Some(0.0);
            }
            // Left valley only: the interval [0.25 - r, 0.25 + r] never
            // reaches the split while eps < raise <= split height.
            let r = (eps / curvature).sqrt();
            if 0.25 + r >= 0.5 {
                return None;
            }
            Some((0.25 + r) - (0.25 - r).max(0.0))
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_d1_beta_half_is_square() {
        // p = d/beta = 2, so f(z) = z^2.
        let f = power_family(1, 2.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(f.eval(&[0.3]), 0.09, epsilon = 1e-15);
        assert_eq!(f.analytic_min, Some(0.0));
        // mu(0.25) = |{z : z^2 <= 0.25}| = 0.5, exactly.
        assert_relative_eq!(f.volume_at(0.25).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn power_d2_beta_one_quarter_disc() {
        let f = power_family(2, 2.0, 1.0, 1.0).unwrap();
        // mu(eps) = (pi/4) eps for eps <= 1.
        for eps in [0.01, 0.2, 0.9] {
            assert_relative_eq!(
                f.volume_at(eps).unwrap(),
                core::f64::consts::FRAC_PI_4 * eps,
                epsilon = 1e-12
            );
        }
        assert_eq!(f.volume_at(2.5), Some(1.0)); // eps >= a0 * d saturates
        assert_eq!(f.volume_at(1.5), None); // in between: law declines
    }

    #[test]
    fn power_rejects_bad_beta() {
        assert!(matches!(power_family(1, 2.0, 0.7, 1.0), Err(Error::InvalidBeta { .. })));
        assert!(matches!(power_family(1, 2.0, 0.0, 1.0), Err(Error::InvalidBeta { .. })));
        assert!(power_family(1, 2.0, 0.5, 1.0).is_ok());
        assert!(power_family(2, 1.0, 2.0, 3.0).is_ok()); // beta = d/alpha boundary
    }

    #[test]
    fn constant_is_flat() {
        let f = constant_family();
        assert_eq!(f.eval(&[0.77]), 0.0);
        assert_eq!(f.volume_at(1e-6), Some(1.0));
        assert_eq!(f.beta_hint, Some(0.0));
        assert_eq!(f.min_value().unwrap(), 0.0);
    }

    #[test]
    fn convex_matches_hand_values() {
        let f = strongly_convex_family(1, 2.0, &[0.5]).unwrap();
        assert_eq!(f.eval(&[0.5]), 0.0);
        assert_relative_eq!(f.eval(&[0.9]), 0.16, epsilon = 1e-15);
        // r = sqrt(2 * 0.01 / 2) = 0.1 -> interval [0.4, 0.6].
        assert_relative_eq!(f.volume_at(0.01).unwrap(), 0.2, epsilon = 1e-12);
        assert_eq!(f.beta_hint, Some(0.5));
    }

    #[test]
    fn convex_law_clips_at_boundary() {
        let f = strongly_convex_family(1, 2.0, &[0.05]).unwrap();
        // r = 0.1: interval [-0.05, 0.15] clips to [0, 0.15].
        assert_relative_eq!(f.volume_at(0.01).unwrap(), 0.15, epsilon = 1e-12);
    }

    #[test]
    fn convex_d2_ball_law() {
        let f = strongly_convex_family(2, 2.0, &[0.5, 0.5]).unwrap();
        // r = 0.1 ball inside the cube: area pi r^2.
        assert_relative_eq!(
            f.volume_at(0.01).unwrap(),
            core::f64::consts::PI * 0.01,
            epsilon = 1e-12
        );
        // Ball pokes out of the cube: law declines.
        assert_eq!(f.volume_at(0.5), None);
    }

    #[test]
    fn two_valley_shape() {
        let f = two_valley_family(1, 16.0, 10.0).unwrap();
        assert_eq!(f.eval(&[0.25]), 0.0);
        assert_relative_eq!(f.eval(&[0.75]), 10.0, epsilon = 1e-15);
        assert!(f.eval(&[0.499]) < 1.0);
        assert!(f.eval(&[0.5]) >= 10.0);
        assert_eq!(f.kappa, 5.0);
        // r = sqrt(0.16/16) = 0.1 -> [0.15, 0.35].
        assert_relative_eq!(f.volume_at(0.16).unwrap(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn holder_bound_dominates_sampled_increments() {
        // Spot-check the declared class: |f(x) - f(y)| <= M * ||x - y||^min(alpha,1)
        // within the kappa level set (a coarse but always-valid consequence).
        use crate::rng::RngStream;
        let specs = [
            power_family(2, 2.0, 1.0, 1.0).unwrap(),
            strongly_convex_family(2, 2.0, &[0.5, 0.5]).unwrap(),
            two_valley_family(1, 16.0, 10.0).unwrap(),
        ];
        let mut rng = RngStream::from_seed(2024);
        for f in &specs {
            let fmin = f.min_value().unwrap();
            let mut checked = 0;
            while checked < 2000 {
                let x = rng.uniform_point(f.dim);
                let y = rng.uniform_point(f.dim);
                let (fx, fy) = (f.eval(&x), f.eval(&y));
                if fx - fmin > f.kappa || fy - fmin > f.kappa {
                    continue;
                }
                checked += 1;
                let dist = crate::geom::linf_dist(&x, &y);
                let bound = f.holder_m * dist.powf(f.alpha.min(1.0));
                assert!(
                    (fx - fy).abs() <= bound + 1e-12,
                    "{}: |df|={} > {}",
                    f.name,
                    (fx - fy).abs(),
                    bound
                );
            }
        }
    }
}
