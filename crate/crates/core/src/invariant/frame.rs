use num_complex::Complex64;

use super::{InvariantPath, LrError, Result};
use crate::operator::{eigh, OperatorPath, StateVector, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    /// Smallest admissible gap between neighbouring eigenvalues.
    pub min_gap: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        Self { min_gap: 1e-8 }
    }
}

/// Mode-matched, gauge-fixed eigenvectors of an invariant over time.
///
/// Modes are labelled by ascending eigenvalue at the first sample and then
/// followed by maximal overlap; every vector is phased so that its overlap
/// with the same mode at the previous sample is real and positive.
#[derive(Debug, Clone)]
pub struct EigenframePath {
    grid: TimeGrid,
    eigenvalues: Vec<f64>,
    step_eigenvalues: Vec<Vec<f64>>,
    frames: Vec<Vec<StateVector>>,
}

impl EigenframePath {
    /// Frame with explicitly chosen vectors, e.g. `V(t)|λ_n⟩`. No gauge fixing
    /// is applied.
    pub fn from_frames(grid: TimeGrid, eigenvalues: Vec<f64>, frames: Vec<Vec<StateVector>>) -> Result<Self> {
        if frames.len() != grid.len() {
            return Err(crate::operator::OperatorError::PathLength {
                samples: frames.len(),
                expected: grid.len(),
            }
            .into());
        }
        if let Some(bad) = frames.iter().find(|f| f.len() != eigenvalues.len()) {
            return Err(LrError::ModeMismatch { left: eigenvalues.len(), right: bad.len() });
        }
        let step_eigenvalues = vec![eigenvalues.clone(); frames.len()];
        Ok(Self { grid, eigenvalues, step_eigenvalues, frames })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues at the first sample, one per mode.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Mode-matched eigenvalues at sample `k`.
    pub fn eigenvalues_at(&self, k: usize) -> &[f64] {
        &self.step_eigenvalues[k]
    }

    pub fn frame(&self, k: usize) -> &[StateVector] {
        &self.frames[k]
    }

    pub fn vector(&self, k: usize, mode: usize) -> &StateVector {
        &self.frames[k][mode]
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// `max_n (max_k λ_n(t_k) − min_k λ_n(t_k))`.
    pub fn spectrum_spread(&self) -> f64 {
        (0..self.n_modes())
            .map(|n| {
                let (lo, hi) = self
                    .step_eigenvalues
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[n]), hi.max(s[n])));
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// Smallest real part of a consecutive same-mode overlap.
    pub fn min_consecutive_overlap(&self) -> f64 {
        self.frames
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a.inner(b).re))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest imaginary part of a consecutive same-mode overlap.
    pub fn max_consecutive_overlap_imag(&self) -> f64 {
        self.frames
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| a.inner(b).im.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest deviation of any frame's Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for f in &self.frames {
            for (a, va) in f.iter().enumerate() {
                for (b, vb) in f.iter().enumerate() {
                    let want = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((va.inner(vb) - Complex64::new(want, 0.0)).norm());
                }
            }
        }
        worst
    }
}

pub fn track_eigenframe(inv: &InvariantPath, opts: FrameOptions) -> Result<EigenframePath> {
    track_path(inv.path(), opts)
}

/// Per-sample diagonalization, overlap matching and parallel-transport
/// gauge fixing of an arbitrary Hermitian path.
pub fn track_path(path: &OperatorPath, opts: FrameOptions) -> Result<EigenframePath> {
    let first = eigh(path.sample(0))?;
    check_gap(0, &first.values, opts)?;
    let eigenvalues = first.values.clone();
    let mut step_eigenvalues = vec![first.values];
    let mut frames = vec![first.vectors];
    let n = eigenvalues.len();

    for k in 1..path.len() {
        let e = eigh(path.sample(k))?;
        check_gap(k, &e.values, opts)?;
        let prev = &frames[k - 1];
        let mut taken = vec![false; n];
        let mut frame = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for p in prev {
            let (best, overlap) = e
                .vectors
                .iter()
                .enumerate()
                .map(|(m, v)| (m, p.inner(v)))
                .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
                .expect("non-empty frame");
            let overlap_sq = overlap.norm_sqr();
            if overlap_sq < 0.5 || taken[best] {
                return Err(LrError::StepTooLarge { step: k, overlap_sq });
            }
            taken[best] = true;
            let gauge = overlap.conj() / overlap.norm();
            frame.push(e.vectors[best].scale(gauge));
            values.push(e.values[best]);
        }
        frames.push(frame);
        step_eigenvalues.push(values);
    }

    Ok(EigenframePath {
        grid: *path.grid(),
        eigenvalues,
        step_eigenvalues,
        frames,
    })
}

fn check_gap(step: usize, values: &[f64], opts: FrameOptions) -> Result<()> {
    let gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if gap < opts.min_gap {
        return Err(LrError::Degenerate { step, gap, threshold: opts.min_gap });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::propagate_invariant;
    use crate::invariant::tests::DRIVE;
    use crate::operator::{pauli, step_propagator, ComplexMatrix};

    /// `R(t) diag(1, 2) R(t)†` with `R(t) = exp(−i·0.3t·σy)·exp(−i·0.2t·σz)`.
    fn rotating(t: f64) -> ComplexMatrix {
        let r = &step_propagator(&pauli::y(), 0.3 * t).unwrap() * &step_propagator(&pauli::z(), 0.2 * t).unwrap();
        ComplexMatrix::from_real_diagonal(&[1.0, 2.0]).conjugated_by(&r.adjoint())
    }

    #[test]
    fn constant_frame() {
        let grid = TimeGrid::new(0.0, 0.1, 20).unwrap();
        let path = OperatorPath::constant(grid, &ComplexMatrix::from_real_diagonal(&[1.0, 2.0]));
        let f = track_path(&path, FrameOptions::default()).unwrap();
        assert_eq!(f.eigenvalues(), &[1.0, 2.0]);
        for k in 0..f.len() {
            assert_eq!(f.frame(k), f.frame(0));
        }
    }

    #[test]
    fn rotating_frame_is_parallel_transported() {
        let grid = TimeGrid::new(0.0, 0.01, 500).unwrap();
        let path = OperatorPath::from_fn(grid, rotating).unwrap();
        let f = track_path(&path, FrameOptions::default()).unwrap();
        assert!(f.spectrum_spread() < 1e-13);
        assert!((f.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((f.eigenvalues()[1] - 2.0).abs() < 1e-14);
        assert!(f.min_consecutive_overlap() > 0.99);
        assert!(f.max_consecutive_overlap_imag() < 1e-15);
        assert!(f.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn driven_invariant_spectrum_constant() {
        let grid = TimeGrid::spanning(0.0, 6.0, 1000).unwrap();
        let h = DRIVE.hamiltonian_path(grid).unwrap();
        let inv = propagate_invariant(&h, &pauli::combination([0.0, 0.4, 0.0, 1.0])).unwrap();
        let f = track_eigenframe(&inv, FrameOptions::default()).unwrap();
        assert!(f.spectrum_spread() <= 1e-10);
    }

    #[test]
    fn crossing_is_followed_by_overlap() {
        // the two levels cross between samples; sorting would swap the labels
        let grid = TimeGrid::new(0.05, 0.1, 10).unwrap();
        let path = OperatorPath::from_fn(grid, |t| &pauli::z() * (t - 0.5)).unwrap();
        let f = track_path(&path, FrameOptions::default()).unwrap();
        assert!(f.eigenvalues_at(0)[0] < f.eigenvalues_at(0)[1]);
        assert!(f.eigenvalues_at(10)[0] > f.eigenvalues_at(10)[1]);
        assert_eq!(f.vector(10, 0), f.vector(0, 0));
    }

    #[test]
    fn degenerate_step_named() {
        let grid = TimeGrid::new(0.0, 0.1, 10).unwrap();
        let path = OperatorPath::from_fn(grid, |t| &pauli::z() * (t - 0.5)).unwrap();
        match track_path(&path, FrameOptions::default()) {
            Err(LrError::Degenerate { step, .. }) => assert_eq!(step, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coarse_step_rejected() {
        // jump from the standard basis to the Fourier basis: every overlap is 1/3
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        let f = ComplexMatrix::from_fn(3, |a, b| w.powu((a * b) as u32) / 3f64.sqrt());
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let rotated = d.conjugated_by(&f.adjoint());
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let path = OperatorPath::new(grid, vec![d, rotated.clone(), rotated]).unwrap();
        match track_path(&path, FrameOptions::default()) {
            Err(LrError::StepTooLarge { step, overlap_sq }) => {
                assert_eq!(step, 1);
                assert!((overlap_sq - 1.0 / 3.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
