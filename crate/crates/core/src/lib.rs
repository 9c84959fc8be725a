//! Numerical toolkit for operators obeying the Liouville–von Neumann
//! equation: Lewis–Riesenfeld invariants and their phases, density-matrix
//! evolution of a driven two-level system, and supersymmetric partner
//! Hamiltonians on a spatial grid.

pub mod density;
pub mod invariant;
pub mod models;
pub mod numeric;
pub mod operator;
pub mod susy;

pub use operator::{
    commutator, eigh, step_propagator, ComplexMatrix, OperatorError, OperatorPath, StateVector,
    TimeGrid,
};
