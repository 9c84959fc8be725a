use num_complex::Complex64;

use super::{EigenframePath, LrError, Result};
use crate::numeric::{cumulative_trapezoid, derivative_stencil};
use crate::operator::{OperatorPath, StateVector, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseOptions {
    /// Largest tolerated imaginary part of either phase integrand.
    pub imag_tol: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        Self { imag_tol: 1e-6 }
    }
}

/// Lewis–Riesenfeld phases `φ_n(t_k)` of every mode, split into the
/// dynamical part `∫⟨λ_n|H|λ_n⟩` and the geometric part `∫⟨λ_n|−i∂_t|λ_n⟩`.
/// Indexed `[mode][step]`.
#[derive(Debug, Clone)]
pub struct PhaseRecord {
    pub grid: TimeGrid,
    pub total: Vec<Vec<f64>>,
    pub dynamical: Vec<Vec<f64>>,
    pub geometric: Vec<Vec<f64>>,
    /// Largest imaginary part seen in the dynamical and geometric integrands.
    pub max_imag: (f64, f64),
}

impl PhaseRecord {
    pub fn n_modes(&self) -> usize {
        self.total.len()
    }

    /// Largest `|total − (dynamical + geometric)|`.
    pub fn split_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 0..self.n_modes() {
            for k in 0..self.total[n].len() {
                let d = self.total[n][k] - self.dynamical[n][k] - self.geometric[n][k];
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

pub fn compute_phases(frame: &EigenframePath, h_path: &OperatorPath, opts: PhaseOptions) -> Result<PhaseRecord> {
    frame.grid().ensure_matches(h_path.grid())?;
    let len = frame.len();
    if len < 3 {
        return Err(LrError::TooShort { needed: 3, got: len });
    }
    let dt = frame.grid().dt();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut record = PhaseRecord {
        grid: *frame.grid(),
        total: Vec::new(),
        dynamical: Vec::new(),
        geometric: Vec::new(),
        max_imag: (0.0, 0.0),
    };

    for mode in 0..frame.n_modes() {
        let mut dyn_integrand = Vec::with_capacity(len);
        let mut geo_integrand = Vec::with_capacity(len);
        for k in 0..len {
            let v = frame.vector(k, mode);
            let e = h_path.sample(k).matrix_element(v, v);
            let dv = derivative_stencil(k, len)
                .iter()
                .fold(StateVector::zeros(v.dim()), |acc, &(j, w)| {
                    acc.add(&frame.vector(j, mode).scale(Complex64::new(w / dt, 0.0)))
                });
            let g = v.inner(&dv) * minus_i;
            for (quantity, z, slot) in [
                ("dynamical", e, &mut record.max_imag.0),
                ("geometric", g, &mut record.max_imag.1),
            ] {
                *slot = slot.max(z.im.abs());
                if z.im.abs() > opts.imag_tol || !z.im.is_finite() {
                    return Err(LrError::NonRealIntegrand { quantity, mode, step: k, value: z.im });
                }
            }
            dyn_integrand.push(e.re);
            geo_integrand.push(g.re);
        }
        let total: Vec<f64> = dyn_integrand.iter().zip(&geo_integrand).map(|(a, b)| a + b).collect();
        record.dynamical.push(cumulative_trapezoid(&dyn_integrand, dt));
        record.geometric.push(cumulative_trapezoid(&geo_integrand, dt));
        record.total.push(cumulative_trapezoid(&total, dt));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::{propagate_invariant, track_path, FrameOptions};
    use crate::operator::{eigh, pauli, step_propagator, ComplexMatrix};

    #[test]
    fn static_phases_are_energy_times_time() {
        let h = pauli::combination([0.5, 0.3, 0.0, 0.8]);
        let grid = TimeGrid::new(0.0, 0.01, 1000).unwrap();
        let h_path = OperatorPath::constant(grid, &h);
        let inv = propagate_invariant(&h_path, &h).unwrap();
        let frame = track_path(inv.path(), FrameOptions::default()).unwrap();
        let p = compute_phases(&frame, &h_path, PhaseOptions::default()).unwrap();
        let energies = eigh(&h).unwrap().values;
        for (n, e) in energies.iter().enumerate() {
            for (k, t) in grid.times().enumerate() {
                assert!((p.total[n][k] - e * t).abs() <= 1e-10);
                assert!(p.geometric[n][k].abs() <= 1e-10);
            }
        }
        assert!(p.split_defect() < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_phase_is_purely_geometric() {
        let grid = TimeGrid::new(0.0, 0.005, 400).unwrap();
        let h_path = OperatorPath::constant(grid, &ComplexMatrix::zeros(2));
        let i_path = OperatorPath::from_fn(grid, |t| {
            let r = step_propagator(&pauli::y(), 0.4 * t).unwrap();
            ComplexMatrix::from_real_diagonal(&[1.0, 2.0]).conjugated_by(&r.adjoint())
        })
        .unwrap();
        let frame = track_path(&i_path, FrameOptions::default()).unwrap();
        let p = compute_phases(&frame, &h_path, PhaseOptions::default()).unwrap();
        for n in 0..2 {
            assert!(p.dynamical[n].iter().all(|v| *v == 0.0));
            assert_eq!(p.total[n], p.geometric[n]);
        }
    }

    #[test]
    fn broken_gauge_detected() {
        let grid = TimeGrid::new(0.0, 0.01, 20).unwrap();
        let h_path = OperatorPath::constant(grid, &pauli::z());
        let frames = (0..grid.len())
            .map(|k| {
                let phase = Complex64::from_polar(1.0, 0.3 * (k * k) as f64);
                vec![StateVector::basis(2, 0).scale(phase), StateVector::basis(2, 1)]
            })
            .collect();
        let frame = EigenframePath::from_frames(grid, vec![1.0, -1.0], frames).unwrap();
        assert!(matches!(
            compute_phases(&frame, &h_path, PhaseOptions::default()),
            Err(LrError::NonRealIntegrand { quantity: "geometric", mode: 0, .. })
        ));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let grid = TimeGrid::new(0.0, 0.01, 20).unwrap();
        let other = TimeGrid::new(0.0, 0.01, 21).unwrap();
        let frame = track_path(&OperatorPath::constant(grid, &pauli::z()), FrameOptions::default()).unwrap();
        let h_path = OperatorPath::constant(other, &pauli::z());
        assert!(compute_phases(&frame, &h_path, PhaseOptions::default()).is_err());
    }
}
