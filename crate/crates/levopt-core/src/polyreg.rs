//! Local polynomial regression: centered monomial features over a
//! bandwidth window, least squares through a spectral pseudo-inverse, and
//! the finite-sample bias/deviation bound that drives every confidence
//! interval in the crate.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
// Shadowed by std's inherent f64 methods whenever feature unification
// turns on num-traits/std; plain no_std builds resolve through it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geom::{linf_dist, Point};
use crate::linalg::sym_eigen;
use crate::oracle::SampleLog;

/// Relative spectral cutoff for the pseudo-inverse: modes with eigenvalue
/// at most `RIDGE_TOL` times the largest are dropped.
pub const RIDGE_TOL: f64 = 1e-10;

/// The centered monomial basis of total degree at most `k` in `d`
/// variables: one feature per multi-index `(a_1..a_d)` with
/// `sum a_j <= k`, ordered by total degree and then lexicographically
/// (first coordinate heaviest). Feature 0 is the constant.
///
/// For `d = 2, k = 2` the exponents run `{00, 10, 01, 20, 11, 02}` —
/// six distinct monomials, `C(d+k, k)` in general.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureBasis {
    dim: usize,
    degree: usize,
    /// Flattened exponent rows: feature `f` has exponents
    /// `exponents[f*dim .. (f+1)*dim]`.
    exponents: Vec<u8>,
    /// Total degree of each feature.
    total_degree: Vec<u8>,
}

fn push_indices(d: usize, budget: usize, prefix: &mut Vec<u8>, out: &mut Vec<u8>) {
    if prefix.len() == d - 1 {
        prefix.push(budget as u8);
        out.extend_from_slice(prefix);
        prefix.pop();
        return;
    }
    for a in (0..=budget).rev() {
        prefix.push(a as u8);
        push_indices(d, budget - a, prefix, out);
        prefix.pop();
    }
}

impl FeatureBasis {
    /// Basis for `dim` variables and maximal total degree `degree`.
    pub fn new(dim: usize, degree: usize) -> Self {
        debug_assert!((1..=8).contains(&dim));
        let mut exponents = Vec::new();
        let mut prefix = Vec::with_capacity(dim);
        for g in 0..=degree {
            push_indices(dim, g, &mut prefix, &mut exponents);
        }
        let count = exponents.len() / dim;
        let total_degree = (0..count)
            .map(|f| exponents[f * dim..(f + 1) * dim].iter().sum())
            .collect();
        FeatureBasis { dim, degree, exponents, total_degree }
    }

    /// Basis matching a smoothness order: degree `floor(alpha)`.
    pub fn for_alpha(dim: usize, alpha: f64) -> Self {
        debug_assert!(alpha > 0.0);
        Self::new(dim, alpha.floor() as usize)
    }

    /// Number of variables.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Maximal total degree `k`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of features (distinct monomials).
    pub fn feature_count(&self) -> usize {
        self.total_degree.len()
    }

    /// Exponent row of feature `f`.
    pub fn exponents(&self, f: usize) -> &[u8] {
        &self.exponents[f * self.dim..(f + 1) * self.dim]
    }

    /// Total degree of feature `f`.
    pub fn total_degree(&self, f: usize) -> usize {
        self.total_degree[f] as usize
    }

    /// The deterministic feature norm bound `b = sqrt(feature_count)`:
    /// every monomial has magnitude at most 1 on the window.
    pub fn b_bound(&self) -> f64 {
        (self.feature_count() as f64).sqrt()
    }

    /// Fill `out` with the features of `z` for the window centered at `x`
    /// with bandwidth `h`: products of `((z_j - x_j)/h)^{a_j}`.
    pub fn fill_features(&self, x: &[f64], h: f64, z: &[f64], out: &mut [f64]) {
        debug_assert!(h > 0.0);
        debug_assert_eq!(out.len(), self.feature_count());
        self.fill_monomials_scaled(x, 1.0 / h, z, out);
    }

    /// Feature vector of `z` (constant first).
    pub fn feature_map(&self, x: &[f64], h: f64, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.feature_count()];
        self.fill_features(x, h, z, &mut out);
        out
    }

    /// Fill `out` with the raw centered monomials `prod (z_j - x_j)^{a_j}`
    /// (the `inv_h = 1` case); with a general `inv_h` each monomial picks
    /// up `inv_h^{total degree}`, which is exactly the feature map. Raw
    /// monomials let a caller accumulate bandwidth-independent moment sums
    /// and rescale per bandwidth afterwards.
    pub(crate) fn fill_monomials_scaled(
        &self,
        x: &[f64],
        inv_h: f64,
        z: &[f64],
        out: &mut [f64],
    ) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(z.len(), self.dim);
        for (f, slot) in out.iter_mut().enumerate() {
            let mut prod = 1.0;
            for (j, &e) in self.exponents(f).iter().enumerate() {
                if e > 0 {
                    prod *= ((z[j] - x[j]) * inv_h).powi(e as i32);
                }
            }
            *slot = prod;
        }
    }

    /// Per-feature scale factors `h^{-degree(f)}` used to convert raw
    /// moment sums into the Gram/right-hand side at bandwidth `h`.
    pub(crate) fn inv_h_powers(&self, h: f64) -> Vec<f64> {
        let inv_h = 1.0 / h;
        self.total_degree.iter().map(|&g| inv_h.powi(g as i32)).collect()
    }
}

/// A solved local least-squares problem at one center and bandwidth.
#[derive(Clone, Debug)]
pub struct LocalFit {
    /// Window center.
    pub center: Point,
    /// Window bandwidth (closed l-infinity radius).
    pub bandwidth: f64,
    /// Number of samples that fell inside the window.
    pub sample_count: usize,
    /// Least-squares coefficients in basis order; the constant term is the
    /// prediction at the center.
    pub coeffs: Vec<f64>,
    /// Least eigenvalue of the sample-normalized Gram matrix
    /// `(1/m) Psi^T Psi` (0 when the window is empty).
    pub sigma_min: f64,
    /// Deterministic feature norm bound `sqrt(feature_count)`.
    pub b_bound: f64,
    /// False when the window held no samples; `predict` refuses such fits.
    pub usable: bool,
}

/// Solve the normal equations from an explicit Gram matrix and right-hand
/// side: spectral pseudo-inverse with a relative cutoff, plus the least
/// eigenvalue for the error bound.
pub(crate) fn assemble_fit(
    basis: &FeatureBasis,
    gram: &[f64],
    rhs: &[f64],
    m: usize,
    center: &[f64],
    h: f64,
    ridge_tol: f64,
) -> LocalFit {
    let nf = basis.feature_count();
    if m == 0 {
        return LocalFit {
            center: center.to_vec(),
            bandwidth: h,
            sample_count: 0,
            coeffs: vec![0.0; nf],
            sigma_min: 0.0,
            b_bound: basis.b_bound(),
            usable: false,
        };
    }
    let eigen = sym_eigen(nf, gram, true);
    let lambda_max = eigen.values[nf - 1].max(0.0);
    let cutoff = ridge_tol * lambda_max;
    let vectors = eigen.vectors.as_ref().expect("eigenvectors requested");
    let mut coeffs = vec![0.0; nf];
    for (j, &lambda) in eigen.values.iter().enumerate() {
        if lambda <= cutoff || lambda <= 0.0 {
            continue;
        }
        let mut proj = 0.0;
        for i in 0..nf {
            proj += vectors[i * nf + j] * rhs[i];
        }
        let scale = proj / lambda;
        for i in 0..nf {
            coeffs[i] += scale * vectors[i * nf + j];
        }
    }
    LocalFit {
        center: center.to_vec(),
        bandwidth: h,
        sample_count: m,
        coeffs,
        sigma_min: (eigen.values[0] / m as f64).max(0.0),
        b_bound: basis.b_bound(),
        usable: true,
    }
}

/// Fit a degree-`k` polynomial to the log entries within the closed
/// `l-infinity` window of radius `h` around `x`.
///
/// `ridge_tol` is the relative spectral cutoff (see [`RIDGE_TOL`]): modes
/// of the Gram matrix with eigenvalue at most `ridge_tol` times the
/// largest are zeroed rather than inverted. An empty window yields a fit
/// flagged unusable with `sigma_min = 0`.
pub fn local_fit(
    basis: &FeatureBasis,
    log: &SampleLog,
    x: &[f64],
    h: f64,
    ridge_tol: f64,
) -> LocalFit {
    debug_assert!(h > 0.0);
    let nf = basis.feature_count();
    let mut gram = vec![0.0; nf * nf];
    let mut rhs = vec![0.0; nf];
    let mut row = vec![0.0; nf];
    let mut m = 0usize;
    for t in 0..log.len() {
        let z = log.point(t);
        if linf_dist(z, x) > h {
            continue;
        }
        m += 1;
        basis.fill_features(x, h, z, &mut row);
        let y = log.response(t);
        for i in 0..nf {
            rhs[i] += row[i] * y;
            for j in i..nf {
                gram[i * nf + j] += row[i] * row[j];
            }
        }
    }
    // Mirror the accumulated upper triangle.
    for i in 0..nf {
        for j in 0..i {
            gram[i * nf + j] = gram[j * nf + i];
        }
    }
    assemble_fit(basis, &gram, &rhs, m, x, h, ridge_tol)
}

impl LocalFit {
    /// Predicted value at `z`: the fitted polynomial evaluated in window
    /// coordinates. Fails on a fit flagged unusable.
    pub fn predict(&self, basis: &FeatureBasis, z: &[f64]) -> Result<f64> {
        if !self.usable {
            return Err(Error::UnusableFit);
        }
        let mut features = vec![0.0; basis.feature_count()];
        basis.fill_features(&self.center, self.bandwidth, z, &mut features);
        Ok(features.iter().zip(&self.coeffs).map(|(f, c)| f * c).sum())
    }
}

/// The two halves of the finite-sample regression error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBound {
    /// Approximation part: `(b^2 / sigma) M d^k h^alpha`.
    pub bias: f64,
    /// Stochastic part: `b sqrt(5 D ln(1/delta) / (sigma m))`.
    pub deviation: f64,
    /// `bias + deviation`.
    pub total: f64,
    /// Failure probability the deviation part is calibrated to.
    pub delta: f64,
}

/// Evaluate the error bound for `fit` under smoothness `(alpha, M)` at
/// confidence level `1 - delta`. An empty window or a singular normalized
/// Gram (`sigma_min = 0`) makes every component infinite — the bound
/// never pretends to certify an unidentified fit.
pub fn error_bound(
    basis: &FeatureBasis,
    fit: &LocalFit,
    holder_m: f64,
    alpha: f64,
    delta: f64,
) -> ErrorBound {
    debug_assert!(delta > 0.0 && delta < 0.5);
    let sigma = fit.sigma_min;
    let m = fit.sample_count;
    if sigma <= 0.0 || m == 0 {
        return ErrorBound {
            bias: f64::INFINITY,
            deviation: f64::INFINITY,
            total: f64::INFINITY,
            delta,
        };
    }
    let b = fit.b_bound;
    let d = basis.dim() as f64;
    let k = basis.degree() as i32;
    let nf = basis.feature_count() as f64;
    let bias = b * b / sigma * holder_m * d.powi(k) * fit.bandwidth.powf(alpha);
    let deviation = b * (5.0 * nf * (1.0 / delta).ln() / (sigma * m as f64)).sqrt();
    ErrorBound { bias, deviation, total: bias + deviation, delta }
}
