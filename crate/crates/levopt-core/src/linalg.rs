//! Dense symmetric eigendecomposition for small matrices.
//!
//! Local polynomial regression needs the least eigenvalue of a Gram matrix
//! (typically 3x3 to 10x10) and a pseudo-inverse solve through the same
//! decomposition. A cyclic Jacobi iteration is plenty at these sizes, has no
//! tuning parameters beyond a convergence threshold, and keeps the crate
//! free of heavyweight linear-algebra dependencies. Row-major storage.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(test, allow(unused_imports))]
// Shadowed by std's inherent f64 methods whenever feature unification
// turns on num-traits/std; plain no_std builds resolve through it.
#[allow(unused_imports)]
use num_traits::Float;

/// Eigenvalues in ascending order, with matching eigenvectors (column `j` of
/// `vectors` corresponds to `values[j]`) when requested.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Option<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition of the symmetric `n x n` matrix `a`.
///
/// Only the upper triangle of `a` is read. Convergence is quadratic; the
/// sweep count is capped defensively but never reached for the matrix sizes
/// used in this crate.
pub fn sym_eigen(n: usize, a: &[f64], want_vectors: bool) -> SymEigen {
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    // Symmetrize from the upper triangle so callers may fill either half.
    for p in 0..n {
        for q in (p + 1)..n {
            m[q * n + p] = m[p * n + q];
        }
    }
    let mut vecs = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        Some(v)
    } else {
        None
    };

    let scale: f64 = (0..n).map(|i| m[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-15 * scale;
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q.
                for i in 0..n {
                    let aip = m[i * n + p];
                    let aiq = m[i * n + q];
                    m[i * n + p] = c * aip - s * aiq;
                    m[i * n + q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = m[p * n + i];
                    let aqi = m[q * n + i];
                    m[p * n + i] = c * api - s * aqi;
                    m[q * n + i] = s * api + c * aqi;
                }
                if let Some(v) = vecs.as_mut() {
                    for i in 0..n {
                        let vip = v[i * n + p];
                        let viq = v[i * n + q];
                        v[i * n + p] = c * vip - s * viq;
                        v[i * n + q] = s * vip + c * viq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = vecs.map(|v| {
        let mut out = vec![0.0; n * n];
        for (jnew, &jold) in order.iter().enumerate() {
            for i in 0..n {
                out[i * n + jnew] = v[i * n + jold];
            }
        }
        out
    });
    SymEigen { values, vectors }
}

/// Solve `gram * x = rhs` in the pseudo-inverse sense: eigenmodes with
/// eigenvalue below `cutoff` are dropped. Returns the solution together
/// with the least and largest eigenvalues of `gram`.
pub fn solve_psd_pseudo(n: usize, gram: &[f64], rhs: &[f64], cutoff: f64) -> (Vec<f64>, f64, f64) {
    let eig = sym_eigen(n, gram, true);
    let v = eig.vectors.as_ref().unwrap();
    let mut x = vec![0.0; n];
    for j in 0..n {
        let lam = eig.values[j];
        if lam <= cutoff {
            continue;
        }
        let mut proj = 0.0;
        for i in 0..n {
            proj += v[i * n + j] * rhs[i];
        }
        let w = proj / lam;
        for i in 0..n {
            x[i] += w * v[i * n + j];
        }
    }
    (x, eig.values[0], eig.values[n - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::rng::RngStream;

    #[test]
    fn diagonal_matrix() {
        let a = [3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        let e = sym_eigen(3, &a, false);
        assert_relative_eq!(e.values[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.values[1], 2.0, epsilon = 1e-12);
        assert_relative_eq!(e.values[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn two_by_two_closed_form() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let e = sym_eigen(2, &[2.0, 1.0, 1.0, 2.0], true);
        assert_relative_eq!(e.values[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(e.values[1], 3.0, epsilon = 1e-12);
        let v = e.vectors.unwrap();
        // Eigenvector of 1 is (1, -1)/sqrt(2) up to sign.
        assert_relative_eq!((v[0] + v[2]).abs(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn matches_nalgebra_on_random_psd() {
        let mut rng = RngStream::from_seed(17);
        for n in 1..=8usize {
            for _ in 0..20 {
                // PSD matrix B^T B from a random rectangular B.
                let rows = n + 3;
                let b: Vec<f64> = (0..rows * n).map(|_| rng.uniform() * 2.0 - 1.0).collect();
                let mut gram = vec![0.0; n * n];
                for r in 0..rows {
                    for i in 0..n {
                        for j in 0..n {
                            gram[i * n + j] += b[r * n + i] * b[r * n + j];
                        }
                    }
                }
                let mine = sym_eigen(n, &gram, true);
                let na = nalgebra::DMatrix::from_row_slice(n, n, &gram)
                    .symmetric_eigen()
                    .eigenvalues;
                let mut want: Vec<f64> = na.iter().copied().collect();
                want.sort_by(f64::total_cmp);
                for (got, want) in mine.values.iter().zip(&want) {
                    assert_relative_eq!(got, want, epsilon = 1e-9, max_relative = 1e-9);
                }
                // Residual check: A v = lambda v for every pair.
                let v = mine.vectors.unwrap();
                for j in 0..n {
                    for i in 0..n {
                        let mut av = 0.0;
                        for k in 0..n {
                            av += gram[i * n + k] * v[k * n + j];
                        }
                        assert_relative_eq!(
                            av,
                            mine.values[j] * v[i * n + j],
                            epsilon = 1e-8,
                            max_relative = 1e-8
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pseudo_solve_drops_null_modes() {
        // Rank-1 Gram: only the spanned direction is solvable.
        let gram = [1.0, 1.0, 1.0, 1.0];
        let (x, lo, hi) = solve_psd_pseudo(2, &gram, &[2.0, 2.0], 1e-10 * 2.0);
        assert!(lo.abs() < 1e-12);
        assert_relative_eq!(hi, 2.0, epsilon = 1e-12);
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pseudo_solve_matches_direct_inverse() {
        let mut rng = RngStream::from_seed(23);
        for _ in 0..50 {
            let n = 3;
            let rows = 12;
            let b: Vec<f64> = (0..rows * n).map(|_| rng.uniform() * 2.0 - 1.0).collect();
            let mut gram = vec![0.0; n * n];
            for r in 0..rows {
                for i in 0..n {
                    for j in 0..n {
                        gram[i * n + j] += b[r * n + i] * b[r * n + j];
                    }
                }
            }
            let rhs: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let (x, _, hi) = solve_psd_pseudo(n, &gram, &rhs, 1e-10 * 3.0);
            let na = nalgebra::DMatrix::from_row_slice(n, n, &gram);
            let want = na
                .lu()
                .solve(&nalgebra::DVector::from_column_slice(&rhs))
                .expect("well-conditioned");
            assert!(hi > 0.0);
            for i in 0..n {
                assert_relative_eq!(x[i], want[i], epsilon = 1e-8, max_relative = 1e-8);
            }
        }
    }
}
