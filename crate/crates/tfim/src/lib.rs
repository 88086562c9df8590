//! Exact solvers for inhomogeneous transverse-field Ising chains.
//!
//! Two chain geometries are covered: a single modified bond at the chain
//! center (impurity model) and two half-chains with different couplings
//! fused at the center (junction model). Both map to free fermions; the
//! quasiparticle spectrum comes out of either a dense eigensolve of the
//! tridiagonal quadratic form (`solver`) or the closed-form ansatz with
//! its transcendental quantization conditions (`analytic`). Observables
//! (correlators, transverse magnetization, spectral gap) are determinants
//! over the Green matrix (`observables`), and everything can be
//! cross-checked against a brute-force 2^N spin-space diagonalization
//! (`oracle`).

pub mod analytic;
pub mod eigen;
pub mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod solver;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{build_couplings, build_quadratic_form, ChainSpec, ModelKind};
pub use solver::{solve_numeric, FermionSolution};
