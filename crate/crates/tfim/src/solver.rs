//! Generic numeric solution path: dense eigensolve of the tridiagonal
//! quadratic form for any coupling profile. This is the referee for the
//! analytic modules.

use nalgebra::DMatrix;

use crate::eigen::eigh_symmetric;
use crate::error::{Error, Result};
use crate::model::{
    build_companion_form, build_quadratic_form, ChainSpec, DifferenceOperator, QuadraticForm,
};

/// Absolute floor below which a quasiparticle energy is treated as an
/// exact zero mode (psi row zeroed and the mode flagged). The difference
/// operator has unit determinant, so finite chains never carry exact
/// zero modes; chains deep in the ordered phase carry genuinely tiny but
/// physical boundary modes whose psi vectors the observables still need,
/// so the flag only fires when psi stops being representable at all.
pub const ZERO_MODE_FLOOR: f64 = 1e-300;

/// Below this fraction of the top energy, psi rows obtained as
/// -D phi / Lambda lose relative accuracy and are refined by inverse
/// iteration on the companion form D D^T.
const PSI_POLISH_REL: f64 = 1e-4;

/// Below this fraction of the top energy the dense eigensolve of D^T D
/// cannot even separate clustered modes (their eigenvalues sit under the
/// roundoff floor of the matrix norm); those modes are recomputed from
/// the explicit inverse of D, where they are the dominant ones.
const CLUSTER_REL: f64 = 1e-6;

/// Quasiparticle energies and mode matrices of a solved chain.
///
/// Row `j` of `phi` / `psi` is mode `j` over sites; `lambdas` is
/// ascending and dimensionless (multiply by `h` for physical energies).
#[derive(Debug, Clone)]
pub struct FermionSolution {
    pub lambdas: Vec<f64>,
    pub phi: DMatrix<f64>,
    pub psi: DMatrix<f64>,
    pub spec: ChainSpec,
    /// Indices of modes whose energy fell below the zero-mode threshold.
    pub zero_modes: Vec<usize>,
}

impl FermionSolution {
    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// Dimensionless ground-state energy `-sum_j Lambda_j`.
    pub fn ground_energy(&self) -> f64 {
        -self.lambdas.iter().sum::<f64>()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambdas[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambdas[self.n() - 1]
    }

    pub fn has_zero_mode(&self) -> bool {
        !self.zero_modes.is_empty()
    }
}

/// `psi_i = (phi_i - j_i phi_{i+1}) / Lambda` with `phi_{N+1} = 0`.
///
/// Errors with `ZeroMode` when `lambda` is at or below 1e-12; the caller
/// substitutes a zero vector in that case.
pub fn compute_psi(phi_row: &[f64], lambda: f64, couplings: &[f64]) -> Result<Vec<f64>> {
    if !(lambda > 1e-12) {
        return Err(Error::ZeroMode);
    }
    let n = phi_row.len();
    assert_eq!(couplings.len() + 1, n);
    Ok((0..n)
        .map(|i| {
            let next = if i + 1 < n { couplings[i] * phi_row[i + 1] } else { 0.0 };
            (phi_row[i] - next) / lambda
        })
        .collect())
}

/// Solves the free-fermion problem for a chain numerically.
pub fn solve_numeric(spec: &ChainSpec) -> Result<FermionSolution> {
    let m = build_quadratic_form(&spec.couplings)?;
    let (_, vectors) = eigh_symmetric(&m.to_matrix())?;
    let n = m.n();
    let d = DifferenceOperator::new(&spec.couplings);
    let companion = build_companion_form(&spec.couplings);

    // Lambda = |D phi| is far more accurate than sqrt of the eigenvalue
    // for the near-zero boundary modes of the ordered phase.
    let mut modes: Vec<RawMode> = (0..n)
        .map(|q| {
            let phi: Vec<f64> = vectors.column(q).iter().copied().collect();
            let minus_dphi: Vec<f64> = d.apply(&phi).iter().map(|x| -x).collect();
            let lambda = norm(&minus_dphi);
            RawMode {
                lambda,
                phi,
                minus_dphi,
                psi: None,
            }
        })
        .collect();
    modes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    let lambda_max = modes.last().map(|m| m.lambda).unwrap_or(0.0);
    refine_tiny_cluster(&spec.couplings, lambda_max, &mut modes);
    modes.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    let mut lambdas = Vec::with_capacity(n);
    let mut phi = DMatrix::zeros(n, n);
    let mut psi = DMatrix::zeros(n, n);
    let mut zero_modes = Vec::new();

    for (q, mode) in modes.into_iter().enumerate() {
        let lambda = mode.lambda;
        lambdas.push(lambda);
        for i in 0..n {
            phi[(q, i)] = mode.phi[i];
        }
        if lambda <= ZERO_MODE_FLOOR {
            zero_modes.push(q); // psi row stays zero
            continue;
        }
        let psi_row = match mode.psi {
            Some(row) => row,
            None => {
                let mut row: Vec<f64> = mode.minus_dphi.iter().map(|x| x / lambda).collect();
                if lambda < PSI_POLISH_REL * lambda_max {
                    polish_psi(&companion, lambda, &mut row);
                }
                row
            }
        };
        if psi_row.iter().any(|x| !x.is_finite()) {
            zero_modes.push(q);
            continue;
        }
        for i in 0..n {
            psi[(q, i)] = psi_row[i];
        }
    }

    Ok(FermionSolution {
        lambdas,
        phi,
        psi,
        spec: spec.clone(),
        zero_modes,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A mode before assembly into the solution matrices. `psi` is `Some`
/// only for modes refined by [`refine_tiny_cluster`], which bypass the
/// `-D phi / Lambda` route and its polish.
struct RawMode {
    lambda: f64,
    phi: Vec<f64>,
    minus_dphi: Vec<f64>,
    psi: Option<Vec<f64>>,
}

/// Recomputes clustered near-zero modes through the explicit inverse of
/// `D`. `D` is unit upper bidiagonal up to sign, so it is always
/// invertible and `K = D^{-1}` has the cancellation-free closed form
/// `K[i][j] = -prod_{l=i..j} j_l` on and above the diagonal. The
/// smallest singular triplets of `D` are the dominant ones of `K`, where
/// a dense eigensolve separates them even when their energies sit far
/// below the roundoff floor of `D^T D`. Expects `modes` sorted ascending.
fn refine_tiny_cluster(couplings: &[f64], lambda_max: f64, modes: &mut [RawMode]) {
    let n = couplings.len() + 1;
    let cluster = modes
        .iter()
        .take_while(|m| m.lambda < CLUSTER_REL * lambda_max)
        .count();
    if cluster == 0 {
        return;
    }

    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut p = -1.0;
        k[(i, i)] = p;
        for j in i + 1..n {
            p *= couplings[j - 1];
            k[(i, j)] = p;
        }
    }
    if k.iter().any(|v| !v.is_finite()) {
        return; // coupling products overflow; leave the dense result
    }

    // Right singular vectors of D are eigenvectors of K K^T, left ones of
    // K^T K; eigenvalue theta = 1 / sigma^2, so the cluster occupies the
    // top of the ascending eigh output.
    let (thetas, v) = match eigh_symmetric(&(&k * k.transpose())) {
        Ok(r) => r,
        Err(_) => return,
    };
    let (_, u) = match eigh_symmetric(&(k.transpose() * &k)) {
        Ok(r) => r,
        Err(_) => return,
    };

    for c in 0..cluster {
        let col = n - 1 - c;
        let theta = thetas[col];
        if !(theta > 0.0) || !theta.is_finite() {
            return;
        }
        let lambda = 1.0 / theta.sqrt();
        let phi: Vec<f64> = v.column(col).iter().copied().collect();
        let mut psi: Vec<f64> = u.column(col).iter().copied().collect();
        // Pair orientation: for an exact triplet v^T K u = 1/sigma > 0,
        // so flip u when the dot is negative; psi = -u then satisfies
        // psi = -D phi / Lambda.
        let dot: f64 = (v.column(col).transpose() * &k * u.column(col))[(0, 0)];
        let sign = if dot < 0.0 { 1.0 } else { -1.0 };
        for x in psi.iter_mut() {
            *x *= sign;
        }
        modes[c] = RawMode {
            lambda,
            phi,
            minus_dphi: Vec::new(),
            psi: Some(psi),
        };
    }
}

/// Two rounds of inverse iteration of `(D D^T - lambda^2 I)` applied to
/// the raw psi direction. Keeps the starting orientation.
fn polish_psi(companion: &QuadraticForm, lambda: f64, psi: &mut Vec<f64>) {
    let start = psi.clone();
    for _ in 0..2 {
        let mut y = match solve_shifted_tridiagonal(companion, lambda * lambda, psi) {
            Some(y) => y,
            None => return,
        };
        let nrm = norm(&y);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return;
        }
        for v in y.iter_mut() {
            *v /= nrm;
        }
        *psi = y;
    }
    let dot: f64 = psi.iter().zip(&start).map(|(a, b)| a * b).sum();
    if dot < 0.0 {
        for v in psi.iter_mut() {
            *v = -*v;
        }
    }
}

/// Solves `(T - shift I) x = b` for symmetric tridiagonal `T` by banded
/// LU with partial pivoting (one extra superdiagonal of fill-in).
/// Zero pivots are nudged, which is exactly what inverse iteration wants.
fn solve_shifted_tridiagonal(t: &QuadraticForm, shift: f64, b: &[f64]) -> Option<Vec<f64>> {
    let n = t.n();
    let mut diag: Vec<f64> = t.diag.iter().map(|d| d - shift).collect();
    let mut sup1: Vec<f64> = t.off.clone(); // len n-1
    let mut sup2: Vec<f64> = vec![0.0; n.saturating_sub(2)];
    let mut sub: Vec<f64> = t.off.clone(); // len n-1
    let mut x: Vec<f64> = b.to_vec();

    let scale = t
        .diag
        .iter()
        .chain(t.off.iter())
        .fold(shift.abs(), |a, v| a.max(v.abs()));
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    for i in 0..n - 1 {
        if sub[i].abs() > diag[i].abs() {
            // swap row i and i+1
            x.swap(i, i + 1);
            std::mem::swap(&mut diag[i], &mut sub[i]);
            // row i's superdiagonals after swap come from old row i+1
            let old_sup1_i = sup1[i];
            sup1[i] = diag[i + 1];
            diag[i + 1] = old_sup1_i;
            if i + 2 < n {
                sup2[i] = sup1[i + 1];
                sup1[i + 1] = 0.0;
            }
        }
        if diag[i].abs() < tiny {
            diag[i] = if diag[i] >= 0.0 { tiny } else { -tiny };
        }
        let factor = sub[i] / diag[i];
        diag[i + 1] -= factor * sup1[i];
        if i + 2 < n {
            sup1[i + 1] -= factor * sup2[i];
        }
        x[i + 1] -= factor * x[i];
    }
    if diag[n - 1].abs() < tiny {
        diag[n - 1] = if diag[n - 1] >= 0.0 { tiny } else { -tiny };
    }

    // back substitution
    for i in (0..n).rev() {
        let mut v = x[i];
        if i + 1 < n {
            v -= sup1[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= sup2[i] * x[i + 2];
        }
        x[i] = v / diag[i];
        if !x[i].is_finite() {
            return None;
        }
    }
    Some(x)
}
