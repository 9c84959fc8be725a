use num_complex::Complex64;

use super::{midpoint_propagators, EigenframePath, LrError, PhaseRecord, Result};
use crate::operator::{OperatorError, OperatorPath, StateVector};

/// Solution assembled from invariant eigenstates.
#[derive(Debug, Clone)]
pub struct LrSolution {
    pub coefficients: Vec<Complex64>,
    /// One state per grid point.
    pub states: Vec<StateVector>,
}

impl LrSolution {
    pub fn coefficient_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Expansion coefficients `C_n = ⟨λ_n, t0|Ψ(t0)⟩`.
pub fn project_initial(psi0: &StateVector, frame_t0: &[StateVector]) -> Result<Vec<Complex64>> {
    psi0.ensure_normalized()?;
    if let Some(v) = frame_t0.iter().find(|v| v.dim() != psi0.dim()) {
        return Err(OperatorError::DimensionMismatch { left: psi0.dim(), right: v.dim() }.into());
    }
    Ok(frame_t0.iter().map(|v| v.inner(psi0)).collect())
}

/// `Ψ(t_k) = Σ_n C_n exp[(1/i)φ_n(t_k)] |λ_n, t_k⟩`.
pub fn assemble_solution(c: &[Complex64], phases: &PhaseRecord, frame: &EigenframePath) -> Result<LrSolution> {
    if c.len() != frame.n_modes() {
        return Err(LrError::ModeMismatch { left: c.len(), right: frame.n_modes() });
    }
    if phases.n_modes() != frame.n_modes() {
        return Err(LrError::ModeMismatch { left: phases.n_modes(), right: frame.n_modes() });
    }
    phases.grid.ensure_matches(frame.grid())?;
    let dim = frame.vector(0, 0).dim();
    let states = (0..frame.len())
        .map(|k| {
            c.iter().enumerate().fold(StateVector::zeros(dim), |acc, (n, cn)| {
                let phase = Complex64::from_polar(1.0, -phases.total[n][k]);
                acc.add(&frame.vector(k, n).scale(cn * phase))
            })
        })
        .collect();
    Ok(LrSolution {
        coefficients: c.to_vec(),
        states,
    })
}

/// Steps `Ψ` with the midpoint unitary propagator; one state per grid point.
pub fn direct_schrodinger(h_path: &OperatorPath, psi0: &StateVector) -> Result<Vec<StateVector>> {
    psi0.ensure_normalized()?;
    h_path.ensure_hermitian()?;
    if psi0.dim() != h_path.dim() {
        return Err(OperatorError::DimensionMismatch { left: psi0.dim(), right: h_path.dim() }.into());
    }
    let mut states = Vec::with_capacity(h_path.len());
    states.push(psi0.clone());
    for u in midpoint_propagators(h_path)? {
        let next = u.apply(states.last().expect("seeded"));
        states.push(next);
    }
    Ok(states)
}
