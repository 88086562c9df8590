use std::fmt;

/// Errors shared across the solver stack.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Chain length does not match the model's parity requirement.
    InvalidModelSize(String),
    /// A coupling, field or size parameter is out of range.
    InvalidParameter(String),
    /// Input matrix is not symmetric.
    NotSymmetric,
    /// Eigensolver did not converge within its sweep budget.
    ConvergenceFailure,
    /// Quasiparticle energy at (or below) the zero-mode threshold.
    ZeroMode,
    /// A candidate quasi-momentum yields a negative dispersion.
    InvalidRoot { lambda2: f64 },
    /// The transcendental equation has a pole at this momentum.
    PoleAtK,
    /// Complex-branch evaluation produced an unexpected residue component.
    BranchError { imag: f64 },
    /// Root search did not account for all N modes.
    IncompleteSpectrum {
        expected: usize,
        real: usize,
        imag: usize,
        pi_imag: usize,
    },
    /// The closed-form row normalization degenerated.
    AnsatzSingular,
    /// Correlator site pair is out of order or coincident.
    InvalidSitePair { i: usize, j: usize },
    /// Spin-space oracle guard: 2^N would not fit in memory.
    TooLarge { n: usize, max: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidModelSize(msg) => write!(f, "invalid model size: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::NotSymmetric => write!(f, "matrix is not symmetric"),
            Error::ConvergenceFailure => write!(f, "eigensolver failed to converge"),
            Error::ZeroMode => write!(f, "quasiparticle energy below zero-mode threshold"),
            Error::InvalidRoot { lambda2 } => {
                write!(f, "candidate root has negative dispersion ({lambda2:e})")
            }
            Error::PoleAtK => write!(f, "transcendental equation has a pole here"),
            Error::BranchError { imag } => {
                write!(f, "complex-branch residue not real (off-component {imag:e})")
            }
            Error::IncompleteSpectrum {
                expected,
                real,
                imag,
                pi_imag,
            } => write!(
                f,
                "found {} of {expected} modes (real: {real}, iu: {imag}, pi-iv: {pi_imag})",
                real + imag + pi_imag
            ),
            Error::AnsatzSingular => write!(f, "closed-form row is numerically null"),
            Error::InvalidSitePair { i, j } => write!(f, "invalid site pair ({i}, {j})"),
            Error::TooLarge { n, max } => {
                write!(f, "chain of {n} sites exceeds oracle limit of {max}")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
