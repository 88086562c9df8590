//! Chain specifications and the quadratic-form matrices of the
//! free-fermion problem.
//!
//! All internal math is dimensionless: couplings are stored as
//! `j_i = J_i / h` and the transverse field is normalized to 1.
//! Physical energies are recovered by multiplying by `h` at the
//! reporting layer.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Which inhomogeneity pattern the chain carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Single modified bond J2 between sites N/2 and N/2+1 (N even).
    Impurity,
    /// Two half-chains with couplings J1 and J2 fused at the center (N odd).
    Junction,
    /// Arbitrary positive coupling profile; numeric path only.
    Custom,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Impurity => "impurity",
            ModelKind::Junction => "junction",
            ModelKind::Custom => "custom",
        }
    }
}

/// A fully specified chain: model kind, size and couplings.
///
/// `couplings[i]` is the dimensionless bond `j_{i+1} = J_{i+1}/h` between
/// sites `i+1` and `i+2` (sites are 1-based throughout).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub kind: ModelKind,
    pub n_sites: usize,
    pub j1: f64,
    pub j2: f64,
    pub h: f64,
    pub couplings: Vec<f64>,
}

impl ChainSpec {
    pub fn new(kind: ModelKind, n: usize, j1: f64, j2: f64, h: f64) -> Result<Self> {
        let couplings = build_couplings(kind, n, j1, j2, h)?;
        Ok(ChainSpec {
            kind,
            n_sites: n,
            j1,
            j2,
            h,
            couplings,
        })
    }

    pub fn impurity(n: usize, j1: f64, j2: f64, h: f64) -> Result<Self> {
        Self::new(ModelKind::Impurity, n, j1, j2, h)
    }

    pub fn junction(n: usize, j1: f64, j2: f64, h: f64) -> Result<Self> {
        Self::new(ModelKind::Junction, n, j1, j2, h)
    }

    /// Chain with an arbitrary dimensionless coupling profile.
    pub fn custom(couplings: Vec<f64>, h: f64) -> Result<Self> {
        if couplings.is_empty() {
            return Err(Error::InvalidParameter("empty coupling profile".into()));
        }
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("h = {h} must be > 0")));
        }
        if let Some(bad) = couplings.iter().find(|&&j| !(j > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "coupling {bad} must be > 0"
            )));
        }
        Ok(ChainSpec {
            kind: ModelKind::Custom,
            n_sites: couplings.len() + 1,
            j1: 1.0,
            j2: 1.0,
            h,
            couplings,
        })
    }

    /// The center bond correlations are reported across:
    /// (N/2, N/2+1) for the impurity model, ((N-1)/2, (N+1)/2) for the
    /// junction, and the middle bond otherwise.
    pub fn center_pair(&self) -> (usize, usize) {
        let i = match self.kind {
            ModelKind::Impurity => self.n_sites / 2,
            ModelKind::Junction => (self.n_sites - 1) / 2,
            ModelKind::Custom => (self.n_sites).div_euclid(2).max(1),
        };
        (i, i + 1)
    }
}

/// Dimensionless coupling profile for the two named models.
pub fn build_couplings(
    kind: ModelKind,
    n: usize,
    j1: f64,
    j2: f64,
    h: f64,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidModelSize(format!("n = {n} < 2")));
    }
    for (name, v) in [("j1", j1), ("j2", j2), ("h", h)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")));
        }
    }
    let a = j1 / h;
    let b = j2 / h;
    match kind {
        ModelKind::Impurity => {
            if n % 2 != 0 {
                return Err(Error::InvalidModelSize(format!(
                    "impurity model needs even n, got {n}"
                )));
            }
            let mut j = vec![a; n - 1];
            j[n / 2 - 1] = b; // bond N/2 sits between sites N/2 and N/2+1
            Ok(j)
        }
        ModelKind::Junction => {
            if n % 2 != 1 {
                return Err(Error::InvalidModelSize(format!(
                    "junction model needs odd n, got {n}"
                )));
            }
            let mut j = vec![a; n - 1];
            for jb in j.iter_mut().skip((n - 1) / 2) {
                *jb = b; // bonds (N+1)/2 .. N-1 carry J2
            }
            Ok(j)
        }
        ModelKind::Custom => Err(Error::InvalidParameter(
            "custom profiles are built via ChainSpec::custom".into(),
        )),
    }
}

/// The upper-bidiagonal difference operator D with `D_ii = -1`,
/// `D_{i,i+1} = j_i`. Acting on a vector: `(Dx)_i = j_i x_{i+1} - x_i`
/// with `x_{N+1} = 0`.
#[derive(Debug, Clone)]
pub struct DifferenceOperator {
    couplings: Vec<f64>,
}

impl DifferenceOperator {
    pub fn new(couplings: &[f64]) -> Self {
        DifferenceOperator {
            couplings: couplings.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.couplings.len() + 1
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                if i + 1 < n {
                    self.couplings[i] * x[i + 1] - x[i]
                } else {
                    -x[i]
                }
            })
            .collect()
    }

    /// `(D^T y)_i = j_{i-1} y_{i-1} - y_i`.
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(y.len(), n);
        (0..n)
            .map(|i| {
                if i > 0 {
                    self.couplings[i - 1] * y[i - 1] - y[i]
                } else {
                    -y[i]
                }
            })
            .collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            d[(i, i)] = -1.0;
            if i + 1 < n {
                d[(i, i + 1)] = self.couplings[i];
            }
        }
        d
    }
}

/// The symmetric tridiagonal quadratic form `M = D^T D` whose eigenvalues
/// are the squared quasiparticle energies.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl QuadraticForm {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }
}

/// `M = D^T D`: `M_ii = j_{i-1}^2 + 1` (with `j_0 = 0`),
/// `M_{i,i+1} = -j_i`.
pub fn build_quadratic_form(couplings: &[f64]) -> Result<QuadraticForm> {
    if couplings.is_empty() {
        return Err(Error::InvalidParameter("empty coupling profile".into()));
    }
    if let Some(bad) = couplings.iter().find(|&&j| !(j > 0.0)) {
        return Err(Error::InvalidParameter(format!("coupling {bad} must be > 0")));
    }
    let n = couplings.len() + 1;
    let diag: Vec<f64> = (0..n)
        .map(|i| if i == 0 { 1.0 } else { couplings[i - 1].powi(2) + 1.0 })
        .collect();
    let off: Vec<f64> = couplings.iter().map(|j| -j).collect();
    Ok(QuadraticForm { diag, off })
}

/// Companion tridiagonal `D D^T`: same spectrum as `M`, eigenvectors are
/// the psi modes. `(DD^T)_ii = j_i^2 + 1` (with `j_N = 0`),
/// `(DD^T)_{i,i+1} = -j_i`.
pub fn build_companion_form(couplings: &[f64]) -> QuadraticForm {
    let n = couplings.len() + 1;
    let diag: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { couplings[i].powi(2) + 1.0 } else { 1.0 })
        .collect();
    let off: Vec<f64> = couplings.iter().map(|j| -j).collect();
    QuadraticForm { diag, off }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impurity_profile_places_center_bond() {
        let j = build_couplings(ModelKind::Impurity, 10, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(j, vec![1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn impurity_uniform_reduction() {
        let j = build_couplings(ModelKind::Impurity, 10, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(j, vec![1.0; 9]);
    }

    #[test]
    fn junction_profile_is_piecewise() {
        let j = build_couplings(ModelKind::Junction, 9, 1.0, 3.0, 2.0).unwrap();
        assert_eq!(j, vec![0.5, 0.5, 0.5, 0.5, 1.5, 1.5, 1.5, 1.5]);
    }

    #[test]
    fn parity_violations_are_rejected() {
        assert!(matches!(
            build_couplings(ModelKind::Impurity, 9, 1.0, 1.0, 1.0),
            Err(Error::InvalidModelSize(_))
        ));
        assert!(matches!(
            build_couplings(ModelKind::Junction, 10, 1.0, 1.0, 1.0),
            Err(Error::InvalidModelSize(_))
        ));
        assert!(matches!(
            build_couplings(ModelKind::Impurity, 10, -1.0, 1.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn quadratic_form_entries() {
        let m = build_quadratic_form(&[1.0, 1.0]).unwrap().to_matrix();
        let want = DMatrix::from_row_slice(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 2.]);
        assert_eq!(m, want);

        let m = build_quadratic_form(&[1.0, 2.0, 1.0]).unwrap().to_matrix();
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[1., -1., 0., 0., -1., 2., -2., 0., 0., -2., 5., -1., 0., 0., -1., 2.],
        );
        assert_eq!(m, want);

        assert!(build_quadratic_form(&[]).is_err());
    }

    #[test]
    fn quadratic_form_is_dtd() {
        let j = [0.7, 2.3, 0.2, 1.1];
        let d = DifferenceOperator::new(&j).to_matrix();
        let m = build_quadratic_form(&j).unwrap().to_matrix();
        assert!((d.transpose() * &d - &m).amax() < 1e-14);

        let c = build_companion_form(&j).to_matrix();
        assert!((&d * d.transpose() - &c).amax() < 1e-14);
    }

    #[test]
    fn difference_operator_action() {
        let d = DifferenceOperator::new(&[2.0, 3.0]);
        let x = [1.0, 1.0, 1.0];
        assert_eq!(d.apply(&x), vec![1.0, 2.0, -1.0]);
        let dm = d.to_matrix();
        let via_matrix = &dm * nalgebra::DVector::from_row_slice(&x);
        assert_eq!(d.apply(&x), via_matrix.iter().copied().collect::<Vec<_>>());
    }
}
