//! Dense symmetric eigensolver shared by the numeric and oracle paths.
//!
//! Backed by nalgebra's `SymmetricEigen` (Householder tridiagonalization
//! plus implicit symmetric QL); this wrapper adds the symmetry guard,
//! ascending ordering and deterministic sign fixing.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as the columns of the second component. Each eigenvector
/// is sign-fixed so its first component of significant magnitude is
/// positive.
pub fn eigh_symmetric(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSymmetric);
    }
    let scale = m.amax().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric);
            }
        }
    }

    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        vectors.set_column(dst, &col);
        fix_column_sign(&mut vectors, dst);
    }
    Ok((values, vectors))
}

/// Flips a column so its first component exceeding 1e-8 of the column
/// norm is positive; columns below that everywhere are left alone.
fn fix_column_sign(vectors: &mut DMatrix<f64>, col: usize) {
    let norm = vectors.column(col).norm();
    let thresh = 1e-8 * norm.max(f64::MIN_POSITIVE);
    let lead = vectors.column(col).iter().find(|x| x.abs() > thresh).copied();
    if let Some(v) = lead {
        if v < 0.0 {
            for r in 0..vectors.nrows() {
                vectors[(r, col)] = -vectors[(r, col)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &DMatrix<f64>, vals: &[f64], vecs: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let v = vecs.column(j);
            let r = m * v - vals[j] * v;
            worst = worst.max(r.amax());
        }
        worst
    }

    #[test]
    fn diagonal_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[2., 0., 0., 3.]);
        let (vals, vecs) = eigh_symmetric(&m).unwrap();
        assert_eq!(vals, vec![2.0, 3.0]);
        assert!((vecs - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn two_by_two_golden() {
        // characteristic polynomial l^2 - 3l + 1
        let m = DMatrix::from_row_slice(2, 2, &[1., -1., -1., 2.]);
        let (vals, vecs) = eigh_symmetric(&m).unwrap();
        let s5 = 5.0_f64.sqrt();
        assert!((vals[0] - (3.0 - s5) / 2.0).abs() < 1e-14);
        assert!((vals[1] - (3.0 + s5) / 2.0).abs() < 1e-14);
        assert!(residual(&m, &vals, &vecs) < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let m = DMatrix::zeros(2, 2);
        let (vals, vecs) = eigh_symmetric(&m).unwrap();
        assert_eq!(vals, vec![0.0, 0.0]);
        // any orthonormal basis is fine
        assert!((vecs.transpose() * &vecs - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn rejects_non_symmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1., 2., 0., 1.]);
        assert_eq!(eigh_symmetric(&m), Err(Error::NotSymmetric));
    }

    #[test]
    fn random_symmetric_residuals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [5, 23, 64] {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..=i {
                    let v = rng.gen_range(-1.0..1.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let (vals, vecs) = eigh_symmetric(&m).unwrap();
            let norm = m.amax();
            assert!(residual(&m, &vals, &vecs) < 1e-10 * norm.max(1.0));
            assert!(
                (vecs.transpose() * &vecs - DMatrix::identity(n, n)).amax() < 1e-10
            );
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            // completeness: trace equals eigenvalue sum
            let tr: f64 = (0..n).map(|i| m[(i, i)]).sum();
            assert!((vals.iter().sum::<f64>() - tr).abs() < 1e-9 * n as f64);
        }
    }
}
