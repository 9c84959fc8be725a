//! Lewis–Riesenfeld invariants of a time-dependent Hamiltonian.
//!
//! An invariant `I(t)` obeys `∂I/∂t + (1/i)[I, H] = 0`. Its eigenvalues are
//! constant in time, and its eigenvectors dressed with the phases
//! `φ_n(t) = ∫⟨λ_n| H − i∂_t |λ_n⟩ dt′` solve the Schrödinger equation.
//!
//! Invariants are built by unitary transport of a Hermitian seed `I(t0)`
//! with the same midpoint propagator used by [`direct_schrodinger`], so the
//! Liouville–von Neumann residual measures the integrator and not the input.

mod frame;
mod phase;
mod reduction;
mod solution;

pub use frame::{track_eigenframe, track_path, EigenframePath, FrameOptions};
pub use phase::{compute_phases, PhaseOptions, PhaseRecord};
pub use reduction::{check_reduced_diagonal, unitary_reduce, DiagonalCheck, ReductionResult};
pub use solution::{assemble_solution, direct_schrodinger, project_initial, LrSolution};

use num_complex::Complex64;
use thiserror::Error;

use crate::operator::{
    commutator, ensure_hermitian, step_propagator, ComplexMatrix, OperatorError, OperatorPath,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LrError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("invariant residual {value:.3e} at step {step} exceeds tolerance {tol:.3e}")]
    ResidualExceeded { step: usize, value: f64, tol: f64 },
    #[error("degenerate invariant spectrum at step {step}: gap {gap:.3e} below threshold {threshold:.3e}")]
    Degenerate { step: usize, gap: f64, threshold: f64 },
    #[error("eigenframe jump at step {step}: best squared overlap {overlap_sq:.3} < 0.5, reduce the time step")]
    StepTooLarge { step: usize, overlap_sq: f64 },
    #[error("{quantity} phase integrand of mode {mode} has imaginary part {value:.3e} at step {step}; eigenframe gauge is broken")]
    NonRealIntegrand {
        quantity: &'static str,
        mode: usize,
        step: usize,
        value: f64,
    },
    #[error("mode count mismatch: {left} vs {right}")]
    ModeMismatch { left: usize, right: usize },
    #[error("path needs at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, LrError>;

/// Time-sampled invariant together with its per-step residuals.
#[derive(Debug, Clone)]
pub struct InvariantPath {
    path: OperatorPath,
    /// Residual at interior step `k` is stored at index `k - 1`.
    residuals: Vec<f64>,
}

impl InvariantPath {
    /// Wraps an externally constructed operator path, evaluating its
    /// residuals against `h_path`.
    pub fn from_samples(path: OperatorPath, h_path: &OperatorPath) -> Result<Self> {
        path.ensure_hermitian()?;
        let residuals = invariant_residual(&path, h_path)?;
        Ok(Self { path, residuals })
    }

    pub fn path(&self) -> &OperatorPath {
        &self.path
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Errors with the first interior step whose residual exceeds `tol`.
    pub fn ensure_residual_within(&self, tol: f64) -> Result<()> {
        match self.residuals.iter().position(|&r| r > tol || r.is_nan()) {
            Some(i) => Err(LrError::ResidualExceeded {
                step: i + 1,
                value: self.residuals[i],
                tol,
            }),
            None => Ok(()),
        }
    }

    /// Largest spread of the sorted spectrum across all samples.
    pub fn sorted_spectrum_spread(&self) -> Result<f64> {
        let spectra = self
            .path
            .samples()
            .iter()
            .map(|s| crate::operator::eigh(s).map(|e| e.values))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let n = self.path.dim();
        Ok((0..n)
            .map(|m| {
                let (lo, hi) = spectra
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[m]), hi.max(s[m])));
                hi - lo
            })
            .fold(0.0, f64::max))
    }
}

/// Unitary propagators `exp(−i H(t_k + dt/2) dt)` for every interval, with
/// the midpoint Hamiltonian linearly interpolated between samples.
pub fn midpoint_propagators(h_path: &OperatorPath) -> Result<Vec<ComplexMatrix>> {
    let dt = h_path.grid().dt();
    (0..h_path.len() - 1)
        .map(|k| step_propagator(&h_path.midpoint(k), dt).map_err(LrError::from))
        .collect()
}

/// Transports the seed `i0` along `h_path`: `I(t_k) = U_k i0 U_k†`.
pub fn propagate_invariant(h_path: &OperatorPath, i0: &ComplexMatrix) -> Result<InvariantPath> {
    ensure_hermitian(i0)?;
    h_path.ensure_hermitian()?;
    if i0.dim() != h_path.dim() {
        return Err(OperatorError::DimensionMismatch { left: i0.dim(), right: h_path.dim() }.into());
    }
    let steps = midpoint_propagators(h_path)?;
    let mut u = ComplexMatrix::identity(i0.dim());
    let mut samples = Vec::with_capacity(h_path.len());
    samples.push(i0.hermitian_part());
    for step in &steps {
        u = step * &u;
        samples.push(i0.conjugated_by(&u.adjoint()).hermitian_part());
    }
    let path = OperatorPath::new(*h_path.grid(), samples)?;
    let residuals = invariant_residual(&path, h_path)?;
    Ok(InvariantPath { path, residuals })
}

/// Max-entry norm of `(I_{k+1} − I_{k−1})/(2dt) + (1/i)[I_k, H_k]` at every
/// interior step.
pub fn invariant_residual(i_path: &OperatorPath, h_path: &OperatorPath) -> Result<Vec<f64>> {
    i_path.grid().ensure_matches(h_path.grid())?;
    if i_path.dim() != h_path.dim() {
        return Err(OperatorError::DimensionMismatch { left: i_path.dim(), right: h_path.dim() }.into());
    }
    let inv_2dt = 0.5 / i_path.grid().dt();
    let minus_i = Complex64::new(0.0, -1.0);
    (1..i_path.len().saturating_sub(1))
        .map(|k| {
            let d = &(i_path.sample(k + 1) - i_path.sample(k - 1)) * inv_2dt;
            let bracket = commutator(i_path.sample(k), h_path.sample(k))?;
            Ok((&d + &bracket.scale(minus_i)).max_norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CircularDrive;
    use crate::operator::{pauli, TimeGrid};

    pub(crate) const DRIVE: CircularDrive = CircularDrive {
        splitting: 1.0,
        coupling: 0.25,
        drive_frequency: 1.0,
    };

    #[test]
    fn static_hamiltonian_is_its_own_invariant() {
        let h = pauli::combination([0.2, 0.7, -0.1, 0.4]);
        let grid = TimeGrid::new(0.0, 0.01, 200).unwrap();
        let h_path = OperatorPath::constant(grid, &h);
        let inv = propagate_invariant(&h_path, &h).unwrap();
        for s in inv.path().samples() {
            assert!((s - &h).max_norm() < 1e-13);
        }
        assert!(inv.max_residual() < 1e-11);
    }

    #[test]
    fn zero_hamiltonian_keeps_seed() {
        let grid = TimeGrid::new(0.0, 0.05, 40).unwrap();
        let h_path = OperatorPath::constant(grid, &ComplexMatrix::zeros(2));
        let seed = pauli::combination([0.0, 0.3, 0.2, 1.0]);
        let inv = propagate_invariant(&h_path, &seed).unwrap();
        assert!(inv.path().samples().iter().all(|s| (s - &seed).max_norm() < 1e-15));
        assert_eq!(inv.max_residual(), 0.0);
    }

    #[test]
    fn driven_spectrum_is_preserved() {
        let grid = TimeGrid::spanning(0.0, 6.0, 1000).unwrap();
        let h_path = DRIVE.hamiltonian_path(grid).unwrap();
        let inv = propagate_invariant(&h_path, &pauli::z()).unwrap();
        for s in inv.path().samples() {
            let e = crate::operator::eigh(s).unwrap();
            assert!((e.values[0] + 1.0).abs() < 1e-10 && (e.values[1] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn residual_is_second_order() {
        let residual = |n| {
            let grid = TimeGrid::spanning(0.0, 1.0, n).unwrap();
            let h_path = DRIVE.hamiltonian_path(grid).unwrap();
            propagate_invariant(&h_path, &pauli::z()).unwrap().max_residual()
        };
        let (coarse, fine) = (residual(200), residual(400));
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn non_invariant_is_flagged() {
        let grid = TimeGrid::new(0.0, 0.01, 10).unwrap();
        let h_path = OperatorPath::constant(grid, &pauli::z());
        let i_path = OperatorPath::constant(grid, &pauli::x());
        let r = invariant_residual(&i_path, &h_path).unwrap();
        assert!(r.iter().all(|v| (v - 2.0).abs() < 1e-14));
        let inv = InvariantPath::from_samples(i_path, &h_path).unwrap();
        assert!(matches!(
            inv.ensure_residual_within(1e-6),
            Err(LrError::ResidualExceeded { step: 1, .. })
        ));
    }

    #[test]
    fn residual_rejects_grid_mismatch() {
        let a = OperatorPath::constant(TimeGrid::new(0.0, 0.01, 10).unwrap(), &pauli::z());
        let b = OperatorPath::constant(TimeGrid::new(0.0, 0.02, 10).unwrap(), &pauli::z());
        assert_eq!(
            invariant_residual(&a, &b).unwrap_err(),
            LrError::Operator(OperatorError::GridMismatch)
        );
    }

    #[test]
    fn non_hermitian_seed_rejected() {
        let grid = TimeGrid::new(0.0, 0.01, 10).unwrap();
        let h_path = OperatorPath::constant(grid, &pauli::z());
        let bad = &pauli::x() * Complex64::new(0.0, 1.0);
        assert!(matches!(
            propagate_invariant(&h_path, &bad),
            Err(LrError::Operator(OperatorError::NotHermitian { .. }))
        ));
    }
}
