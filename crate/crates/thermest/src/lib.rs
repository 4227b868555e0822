//! Work accounting for quantum channels in the resource theory of
//! Gibbs-preserving operations, applied to single-qubit phase estimation.
//!
//! Conventions used throughout:
//! - work is measured in units of kT ln 2, so every formula uses log base 2;
//! - Hamiltonians are diagonal in the computational basis and specified by
//!   their energy eigenvalues in units of kT ln 2;
//! - composite indices are row-major, subsystem 0 most significant.

pub mod channel;
pub mod cli;
pub mod entropy;
pub mod estimation;
pub mod io;
pub mod numopt;
pub mod phasequbit;
pub mod protocol;
pub mod qmat;
pub mod sample;

pub use channel::{HamiltonianSpec, KrausChannel};
pub use estimation::{ConfidenceInterval, Domain, OutcomeModel, ALPHA_ONE_SIGMA};
pub use protocol::{ProbeFamily, ProtocolSpec, Regime, WorkReport};
pub use qmat::{CMatrix, DensityOperator, PureState, C64};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {dev:.3e})")]
    NotHermitian { dev: f64 },
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("invalid pure state: {0}")]
    InvalidState(String),
    #[error("probability out of range: {0}")]
    InvalidProbability(f64),
    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystem(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),
    #[error("input state is rank-deficient where a full-rank state is required")]
    RankDeficient,
    #[error("memory initial state must be diagonal in the energy basis")]
    NonDiagonalMemory,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver failed: {0}")]
    SolverFailure(String),
    #[error("confidence region is not a single interval")]
    MultiInterval,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("target value lies outside the bracketed range")]
    TargetOutOfRange,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
