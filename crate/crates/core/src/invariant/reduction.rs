use num_complex::Complex64;

use super::{EigenframePath, LrError, PhaseRecord, Result};
use crate::numeric::cumulative_trapezoid;
use crate::operator::{check_hermitian, eigh, ensure_unitary, OperatorError, OperatorPath, StateVector};

/// Invariant and Hamiltonian seen from the frame `V(t)`:
/// `I_V = V†IV` and `H_V = V†HV − iV†∂_tV`.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub v_path: OperatorPath,
    pub i_v: OperatorPath,
    pub h_v: OperatorPath,
    /// `max_k ‖I_V(t_k) − I_V(t0)‖` (max-entry norm).
    pub i_v_variation: f64,
    pub h_v_hermitian_defect: f64,
}

impl ReductionResult {
    /// Eigenvectors of `I_V(t0)` in ascending eigenvalue order.
    pub fn eigenbasis(&self) -> Result<Vec<StateVector>> {
        Ok(eigh(self.i_v.sample(0))?.vectors)
    }
}

/// `H_V` expressed in a fixed basis.
#[derive(Debug, Clone)]
pub struct DiagonalCheck {
    /// `d_n(t_k) = ⟨n|H_V(t_k)|n⟩`, indexed `[mode][step]`.
    pub diagonals: Vec<Vec<f64>>,
    /// Trapezoid integral of `d_n` from `t0`.
    pub integrated: Vec<Vec<f64>>,
    /// Largest `|⟨m|H_V|n⟩|` with `m ≠ n` over all steps.
    pub off_diagonal_defect: f64,
    /// Fixed basis the check was carried out in.
    pub basis: Vec<StateVector>,
}

impl DiagonalCheck {
    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.off_diagonal_defect <= tol
    }

    /// Per-mode `max_k |∫d_n − φ_n|`, with `φ_n` from a gauge-fixed frame of
    /// the untransformed invariant.
    ///
    /// The two phases refer to different eigenvector gauges, `|λ_n⟩` and
    /// `V|n⟩ = e^{iγ_n}|λ_n⟩`, so the comparison is made against
    /// `φ_n + γ_n(t) − γ_n(t0)`. Modes are paired by maximal overlap at `t0`.
    pub fn phase_mismatch(&self, phases: &PhaseRecord, frame: &EigenframePath, v_path: &OperatorPath) -> Result<Vec<f64>> {
        phases.grid.ensure_matches(frame.grid())?;
        frame.grid().ensure_matches(v_path.grid())?;
        if frame.n_modes() != self.basis.len() {
            return Err(LrError::ModeMismatch { left: self.basis.len(), right: frame.n_modes() });
        }
        let mut out = Vec::with_capacity(self.basis.len());
        for (n, b) in self.basis.iter().enumerate() {
            let v0 = v_path.sample(0).apply(b);
            let m = (0..frame.n_modes())
                .max_by(|&x, &y| {
                    let ox = frame.vector(0, x).inner(&v0).norm_sqr();
                    let oy = frame.vector(0, y).inner(&v0).norm_sqr();
                    ox.total_cmp(&oy)
                })
                .expect("non-empty frame");
            let mut gamma = Vec::with_capacity(frame.len());
            for k in 0..frame.len() {
                let vk = v_path.sample(k).apply(b);
                let arg = frame.vector(k, m).inner(&vk).arg();
                gamma.push(match gamma.last() {
                    Some(&prev) => unwrap_near(arg, prev),
                    None => arg,
                });
            }
            let worst = (0..frame.len())
                .map(|k| (self.integrated[n][k] - (phases.total[m][k] + gamma[k] - gamma[0])).abs())
                .fold(0.0, f64::max);
            out.push(worst);
        }
        Ok(out)
    }
}

fn unwrap_near(arg: f64, prev: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    arg + tau * ((prev - arg) / tau).round()
}

pub fn unitary_reduce(v_path: &OperatorPath, i_path: &OperatorPath, h_path: &OperatorPath) -> Result<ReductionResult> {
    v_path.grid().ensure_matches(i_path.grid())?;
    v_path.grid().ensure_matches(h_path.grid())?;
    for p in [i_path, h_path] {
        if p.dim() != v_path.dim() {
            return Err(OperatorError::DimensionMismatch { left: v_path.dim(), right: p.dim() }.into());
        }
    }
    if v_path.len() < 3 {
        return Err(LrError::TooShort { needed: 3, got: v_path.len() });
    }
    for v in v_path.samples() {
        ensure_unitary(v)?;
    }
    i_path.ensure_hermitian()?;
    h_path.ensure_hermitian()?;

    let minus_i = Complex64::new(0.0, -1.0);
    let dv = v_path.derivative();
    let mut i_v = Vec::with_capacity(v_path.len());
    let mut h_v = Vec::with_capacity(v_path.len());
    for (k, v) in v_path.samples().iter().enumerate() {
        i_v.push(i_path.sample(k).conjugated_by(v));
        let correction = (&v.adjoint() * &dv[k]).scale(minus_i);
        h_v.push(&h_path.sample(k).conjugated_by(v) + &correction);
    }
    let i_v_variation = i_v.iter().map(|s| (s - &i_v[0]).max_norm()).fold(0.0, f64::max);
    let h_v_hermitian_defect = h_v.iter().map(|s| check_hermitian(s, 0.0).defect).fold(0.0, f64::max);
    let grid = *v_path.grid();
    Ok(ReductionResult {
        v_path: v_path.clone(),
        i_v: OperatorPath::new(grid, i_v)?,
        h_v: OperatorPath::new(grid, h_v)?,
        i_v_variation,
        h_v_hermitian_defect,
    })
}

/// Expresses `H_V(t_k)` in `basis` (normally [`ReductionResult::eigenbasis`]).
pub fn check_reduced_diagonal(red: &ReductionResult, basis: &[StateVector]) -> DiagonalCheck {
    let dt = red.h_v.grid().dt();
    let mut off: f64 = 0.0;
    let mut diagonals = vec![Vec::with_capacity(red.h_v.len()); basis.len()];
    for h in red.h_v.samples() {
        for (a, va) in basis.iter().enumerate() {
            for (b, vb) in basis.iter().enumerate() {
                let z = h.matrix_element(va, vb);
                if a == b {
                    diagonals[a].push(z.re);
                } else {
                    off = off.max(z.norm());
                }
            }
        }
    }
    let integrated = diagonals.iter().map(|d| cumulative_trapezoid(d, dt)).collect();
    DiagonalCheck {
        diagonals,
        integrated,
        off_diagonal_defect: off,
        basis: basis.to_vec(),
    }
}
