//! Physical quantities of a solved chain: the Green matrix, spin-spin
//! correlators as determinants of its sub-blocks, transverse
//! magnetization and the spectral gap. Sites are 1-based everywhere,
//! energies dimensionless (multiply by h for physical units).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::solver::FermionSolution;

/// `G = -psi^T phi`. Sign flips of whole (phi, psi) mode pairs cancel,
/// so G is independent of the eigenvector sign convention.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    pub g: DMatrix<f64>,
    /// True when the solution contained a zeroed-out zero mode, whose
    /// contribution to G is then missing.
    pub zero_mode_flag: bool,
}

impl GreenMatrix {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }
}

pub fn green_matrix(sol: &FermionSolution) -> GreenMatrix {
    GreenMatrix {
        g: -(sol.psi.transpose() * &sol.phi),
        zero_mode_flag: sol.has_zero_mode(),
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i < 1 || j < 1 || i > n || j > n || i >= j {
        return Err(Error::InvalidSitePair { i, j });
    }
    Ok(())
}

/// `<sigma_i^x sigma_j^x>`: determinant of the G block with rows i..j-1
/// and columns i+1..j.
pub fn corr_xx(gm: &GreenMatrix, i: usize, j: usize) -> Result<f64> {
    check_pair(gm.n(), i, j)?;
    let d = j - i;
    let block = DMatrix::from_fn(d, d, |r, c| gm.g[(i - 1 + r, i + c)]);
    Ok(block.determinant())
}

/// `<sigma_i^y sigma_j^y>`: determinant of the transposed arrangement,
/// rows i+1..j and columns i..j-1.
pub fn corr_yy(gm: &GreenMatrix, i: usize, j: usize) -> Result<f64> {
    check_pair(gm.n(), i, j)?;
    let d = j - i;
    let block = DMatrix::from_fn(d, d, |r, c| gm.g[(i + r, i - 1 + c)]);
    Ok(block.determinant())
}

/// `<sigma_i^z sigma_j^z> = G_ii G_jj - G_ji G_ij`.
pub fn corr_zz(gm: &GreenMatrix, i: usize, j: usize) -> Result<f64> {
    let n = gm.n();
    if i < 1 || j < 1 || i > n || j > n || i == j {
        return Err(Error::InvalidSitePair { i, j });
    }
    let g = &gm.g;
    Ok(g[(i - 1, i - 1)] * g[(j - 1, j - 1)] - g[(j - 1, i - 1)] * g[(i - 1, j - 1)])
}

/// `<sigma_i^z> = 1 - 2 sum_q ((psi_qi - phi_qi) / 2)^2`.
pub fn magnetization_site(sol: &FermionSolution, i: usize) -> f64 {
    assert!(i >= 1 && i <= sol.n(), "site {i} out of range");
    let col = i - 1;
    let sum: f64 = (0..sol.n())
        .map(|q| {
            let d = 0.5 * (sol.psi[(q, col)] - sol.phi[(q, col)]);
            d * d
        })
        .sum();
    1.0 - 2.0 * sum
}

/// Arithmetic mean of the per-site transverse magnetization.
pub fn magnetization_total(sol: &FermionSolution) -> f64 {
    let n = sol.n();
    (1..=n).map(|i| magnetization_site(sol, i)).sum::<f64>() / n as f64
}

/// Spectral gap `2 Lambda_min` in dimensionless units.
pub fn energy_gap(sol: &FermionSolution) -> f64 {
    2.0 * sol.lambda_min()
}
