//! Smoothstep bumps and the adversarial constructions built from them.
//!
//! The bump is a box-truncated well: inside the `h`-box around its center
//! it subtracts a polynomial smoothstep of the scaled `l1` offset, outside
//! it is identically zero. Planting one or more bumps under a base
//! objective yields functions that agree with the base away from small
//! boxes yet move the minimizer — the standard hard instances for
//! noisy zeroth-order optimization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
// Shadowed by std's inherent f64 methods whenever feature unification
// turns on num-traits/std; plain no_std builds resolve through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geom::{in_unit_cube, linf_dist, PointSet};
use crate::rng::RngStream;
use crate::testbed::{FunctionSpec, INTERNAL_SEED};

/// Binomial coefficient as a float (exact for the small orders used here).
fn binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// The polynomial part of the smoothstep, without domain checks.
fn smoothstep_poly(n_order: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    for j in 0..=n_order {
        sum += binom(n_order + j, j) * binom(2 * n_order + 1, n_order - j) * (-x).powi(j as i32);
    }
    x.powi(n_order as i32 + 1) * sum
}

/// Smoothstep of order `n_order`, scaled by `1/z_scale`:
/// `S_N(x) = (1/Z) x^{N+1} sum_{j=0}^{N} C(N+j,j) C(2N+1,N-j) (-x)^j`.
///
/// With `Z = 1` this rises from 0 to 1 over `[0,1]` with its first `N`
/// derivatives vanishing at both endpoints.
pub fn smoothstep(n_order: usize, z_scale: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::DomainViolation { coordinate: x });
    }
    if !(z_scale > 0.0) || !z_scale.is_finite() {
        return Err(Error::InvalidParameter("z_scale must be positive and finite"));
    }
    Ok(smoothstep_poly(n_order, x) / z_scale)
}

/// Depth of the bump well: `M h^alpha / 2`.
fn amplitude(h: f64, m_holder: f64, alpha: f64) -> f64 {
    0.5 * m_holder * h.powf(alpha)
}

/// Bump profile at scaled offset `u = (z - center)/h`, i.e.
/// `1 - S_N(||u||_1 / (2d))`. The argument never exceeds `1/2` on the
/// support, so the profile stays strictly positive there: the well is cut
/// off by the box indicator, not by the smoothstep saturating.
fn profile(n_order: usize, dim: usize, l1_scaled: f64) -> f64 {
    let a = 1.0 / (2.0 * dim as f64);
    1.0 - smoothstep_poly(n_order, (a * l1_scaled).min(1.0))
}

/// Evaluate the bump with center `center`, radius `h`, amplitude scale
/// `m_holder`, smoothness `alpha`, and smoothstep order `n_order` at `z`.
///
/// Zero outside the closed `l-infinity` box of radius `h`; maximal at the
/// center with value `M h^alpha / 2`. `n_order` should be at least
/// `ceil(alpha)` for the well to match the declared smoothness order.
pub fn bump(
    center: &[f64],
    h: f64,
    m_holder: f64,
    alpha: f64,
    n_order: usize,
    z: &[f64],
) -> f64 {
    debug_assert_eq!(center.len(), z.len());
    debug_assert!(h > 0.0);
    debug_assert!(n_order as f64 >= alpha.ceil());
    if linf_dist(center, z) > h {
        return 0.0;
    }
    let l1: f64 = center.iter().zip(z).map(|(c, zi)| (zi - c).abs()).sum::<f64>() / h;
    amplitude(h, m_holder, alpha) * profile(n_order, center.len(), l1)
}

/// Brute-force minimum of `f` over the part of the `h`-box around `center`
/// that lies inside the unit cube. Lattice scan in low dimension, random
/// scan above.
fn min_over_box<F: Fn(&[f64]) -> f64>(
    f: F,
    center: &[f64],
    h: f64,
) -> (f64, Vec<f64>) {
    let d = center.len();
    let lo: Vec<f64> = center.iter().map(|&c| (c - h).max(0.0)).collect();
    let hi: Vec<f64> = center.iter().map(|&c| (c + h).min(1.0)).collect();
    let mut best = f64::INFINITY;
    let mut best_at = center.to_vec();
    let mut consider = |z: &[f64]| {
        let v = f(z);
        if v < best {
            best = v;
            best_at = z.to_vec();
        }
    };
    match d {
        1 => {
            let steps = 100_000usize;
            for i in 0..=steps {
                let z = lo[0] + (hi[0] - lo[0]) * i as f64 / steps as f64;
                consider(&[z]);
            }
        }
        2 => {
            let side = 316usize;
            for i in 0..=side {
                for j in 0..=side {
                    let z = [
                        lo[0] + (hi[0] - lo[0]) * i as f64 / side as f64,
                        lo[1] + (hi[1] - lo[1]) * j as f64 / side as f64,
                    ];
                    consider(&z);
                }
            }
        }
        _ => {
            let mut rng = RngStream::substream(INTERNAL_SEED, &[0xb0, d as u64]);
            consider(center);
            let mut z = vec![0.0; d];
            for _ in 0..1_000_000 {
                for (zi, (&l, &u)) in z.iter_mut().zip(lo.iter().zip(&hi)) {
                    *zi = l + (u - l) * rng.uniform();
                }
                consider(&z);
            }
        }
    }
    (best, best_at)
}

/// Plant a bump of radius `h` at `center` under `f0`: the result agrees
/// with `f0` outside the box and dips below it inside, by `M h^alpha / 2`
/// at the center. The bump uses `f0`'s declared `M` and `alpha`.
///
/// The returned spec keeps `f0`'s smoothness order with a doubled norm
/// bound (base plus well), and shrinks `kappa` so the declared level set
/// stays clear of the box edge, where the truncated well is only as
/// regular as the indicator.
pub fn make_adversarial(
    f0: &FunctionSpec,
    center: &[f64],
    h: f64,
    n_order: usize,
) -> Result<FunctionSpec> {
    if center.len() != f0.dim {
        return Err(Error::DimensionMismatch { expected: f0.dim, got: center.len() });
    }
    if !in_unit_cube(center) {
        let bad =
            center.iter().copied().find(|c| !(0.0..=1.0).contains(c)).unwrap_or(f64::NAN);
        return Err(Error::DomainViolation { coordinate: bad });
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter("bump radius must be positive and finite"));
    }
    if (n_order as f64) < f0.alpha.ceil() {
        return Err(Error::InvalidParameter("smoothstep order must be at least ceil(alpha)"));
    }

    let base = f0.eval.clone();
    let (c_eval, h_eval) = (center.to_vec(), h);
    let (m, alpha, d) = (f0.holder_m, f0.alpha, f0.dim);
    let eval = move |z: &[f64]| base(z) - bump(&c_eval, h_eval, m, alpha, n_order, z);

    // Minimum: the bump only lowers the function, so the global minimum is
    // the smaller of f0's own minimum and the best value inside the box.
    let (box_min, box_argmin) = min_over_box(&eval, center, h);
    let f0_min = f0.min_value()?;
    let (adv_min, adv_argmin) = if box_min <= f0_min {
        (box_min, Some(box_argmin))
    } else {
        (f0_min, f0.minimizer_hint.clone())
    };

    // Clear of the box edge: at the edge the l1 offset is at least h (one
    // coordinate is pinned at the box face), so the well has already risen
    // by amplitude * S_N(1/(2d)) above its bottom. Half of that is a safe
    // locality radius.
    let edge_rise = amplitude(h, m, alpha) * smoothstep_poly(n_order, 1.0 / (2.0 * d as f64));
    let kappa = f0.kappa.min(0.5 * edge_rise);

    let name = format!("adv({},h={h},order={n_order})", f0.name);
    let spec = FunctionSpec::new(name, d, alpha, 2.0 * m, kappa, eval)?
        .with_analytic_min(adv_min, adv_argmin);
    Ok(spec)
}

/// Greedy packing of the `eps`-level set of `f0` by disjoint `h`-boxes.
///
/// Scans roughly `candidates` lattice points in a deterministic shuffled
/// order and accepts a point when its `h`-box (corners and center, clipped
/// to the cube) lies inside the level set and its center is more than `2h`
/// away from every accepted center. The result is a feasible packing, not
/// a maximum one.
pub fn pack_level_set(
    f0: &FunctionSpec,
    eps: f64,
    h: f64,
    candidates: usize,
) -> Result<PointSet> {
    if !(eps > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidParameter("eps and h must be positive"));
    }
    let threshold = f0.min_value()? + eps;
    let d = f0.dim;
    let res = ((candidates as f64).powf(1.0 / d as f64).floor() as usize).max(2);

    let mut order: Vec<usize> = (0..res.pow(d as u32)).collect();
    let mut rng = RngStream::substream(INTERNAL_SEED, &[0x9ac4, d as u64]);
    rng.shuffle(&mut order);

    let mut point = vec![0.0; d];
    let mut corner = vec![0.0; d];
    let mut accepted = PointSet::new(d);
    'candidates: for idx in order {
        let mut rest = idx;
        for coord in point.iter_mut() {
            *coord = (rest % res) as f64 / (res - 1) as f64;
            rest /= res;
        }
        if f0.eval(&point) > threshold {
            continue;
        }
        // Box containment: test all corners, clipped into the cube.
        for mask in 0..(1u32 << d) {
            for (j, c) in corner.iter_mut().enumerate() {
                let offset = if mask >> j & 1 == 1 { h } else { -h };
                *c = (point[j] + offset).clamp(0.0, 1.0);
            }
            if f0.eval(&corner) > threshold {
                continue 'candidates;
            }
        }
        // Disjointness against every accepted box.
        if accepted.iter().any(|a| linf_dist(a, &point) <= 2.0 * h) {
            continue;
        }
        accepted.push(&point);
    }
    Ok(accepted)
}
