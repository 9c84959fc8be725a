//! Supersymmetric partner Hamiltonians on a uniform 1-D grid.
//!
//! Wavefunctions vanish at the two grid endpoints (hard walls), so every
//! operator acts on the `n − 2` interior samples. Vectors passed to
//! [`GridOperator::apply`] are full-length grid samples whose endpoint values
//! are ignored.

mod band;
mod grid;
mod ladder;
mod spectrum;

pub use band::{count_below, eigenvalue_by_bisection, inverse_iteration, BandMatrix, LowestEigenpairs};
pub use grid::{
    ground_state_from_w, BoundaryPolicy, GridWavefunction, PhysParams, SpatialGrid, SuperpotentialField, DECAY_TOL,
};
pub use ladder::{
    base_hamiltonian, commutator_defect, ladder_operators, partner_hamiltonians, partner_potentials, probe_functions,
    Boundary, GridOperator, PartnerPotentials, LADDER_STENCIL,
};
pub use spectrum::{
    analyze, annihilation_defect, invariance_check, pairing_report, shift_identity_check, InvarianceCheck,
    ModeClass, PairRow, PairingReport, Partner, ShiftCheck, SpectrumReport, SusyProblem,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SusyError {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("{name} has {got} samples, grid has {expected}")]
    SampleLength { name: &'static str, got: usize, expected: usize },
    #[error("{0} samples are not finite")]
    NonFinite(&'static str),
    #[error("ground state is not normalizable: edge amplitude {edge_ratio:.3e} of the maximum")]
    NonNormalizable { edge_ratio: f64 },
    #[error("operators live on different grids or sizes")]
    GridMismatch,
    #[error("psi0 is not the ground state of H: overlap {overlap:.9} below {threshold}")]
    GroundStateMismatch { overlap: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, SusyError>;
