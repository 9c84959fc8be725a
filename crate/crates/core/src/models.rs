//! Closed-form driven two-level models used as scenario inputs and oracles.

use num_complex::Complex64;

use crate::operator::{pauli, step_propagator, ComplexMatrix, OperatorPath, Result, TimeGrid};

/// Spin-½ driven by a circularly polarized field,
/// `H(t) = (ω₀/2)σz + Ω(cos ωt·σx + sin ωt·σy)`.
///
/// The frame rotating with the drive, `R(t) = exp(−iωtσz/2)`, removes the
/// time dependence: `H(t) = R H(0) R†` and the propagator from `t = 0` is
/// `R(t)·exp(−i H_rot t)` with `H_rot = ((ω₀ − ω)/2)σz + Ωσx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularDrive {
    pub splitting: f64,
    pub coupling: f64,
    pub drive_frequency: f64,
}

impl CircularDrive {
    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let phase = self.drive_frequency * t;
        pauli::combination([
            0.0,
            self.coupling * phase.cos(),
            self.coupling * phase.sin(),
            0.5 * self.splitting,
        ])
    }

    /// Rotating-frame Hamiltonian `H_rot`.
    pub fn rotating_hamiltonian(&self) -> ComplexMatrix {
        pauli::combination([
            0.0,
            self.coupling,
            0.0,
            0.5 * (self.splitting - self.drive_frequency),
        ])
    }

    /// `R(t) = exp(−iωtσz/2)`.
    pub fn frame(&self, t: f64) -> ComplexMatrix {
        let half = 0.5 * self.drive_frequency * t;
        let zero = Complex64::new(0.0, 0.0);
        ComplexMatrix::from_row_slice(
            2,
            &[Complex64::from_polar(1.0, -half), zero, zero, Complex64::from_polar(1.0, half)],
        )
    }

    /// Exact propagator from `t = 0`.
    pub fn propagator(&self, t: f64) -> Result<ComplexMatrix> {
        Ok(&self.frame(t) * &step_propagator(&self.rotating_hamiltonian(), t)?)
    }

    /// Exact invariant `R(t)·I_rot·R(t)†` generated by a seed commuting with
    /// `H_rot`; with `I_rot = H_rot` this is `R(t) H_rot R(t)†`.
    pub fn rotating_invariant(&self, t: f64) -> ComplexMatrix {
        let r = self.frame(t);
        self.rotating_hamiltonian().conjugated_by(&r.adjoint())
    }

    pub fn hamiltonian_path(&self, grid: TimeGrid) -> Result<OperatorPath> {
        OperatorPath::from_fn(grid, |t| self.hamiltonian(t))
    }

    pub fn frame_path(&self, grid: TimeGrid) -> Result<OperatorPath> {
        OperatorPath::from_fn(grid, |t| self.frame(t))
    }

    pub fn invariant_path(&self, grid: TimeGrid) -> Result<OperatorPath> {
        OperatorPath::from_fn(grid, |t| self.rotating_invariant(t))
    }
}
