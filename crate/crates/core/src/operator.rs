//! Dense complex operators on small Hilbert spaces: matrices, states, time
//! grids and time-sampled operator paths.
//!
//! Defects are measured with the max-entry norm; Frobenius norms are offered
//! for residual summaries.

use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::numeric::derivative_stencil;

/// Relative tolerance used when an operation requires a Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Tolerance used when an operation requires a unitary input.
pub const UNITARY_TOL: f64 = 1e-10;

/// Tolerance used when an operation requires a normalized state.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (max-entry defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not unitary (max-entry defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("state is not normalized (norm {norm:.15})")]
    NotNormalized { norm: f64 },
    #[error("non-finite entry")]
    NonFinite,
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("path holds {samples} samples but its grid has {expected} points")]
    PathLength { samples: usize, expected: usize },
    #[error("time grids differ")]
    GridMismatch,
}

pub type Result<T> = std::result::Result<T, OperatorError>;

/// Square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from `dim * dim` entries listed row by row.
    pub fn from_row_slice(dim: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), dim * dim, "expected {} entries", dim * dim);
        Self(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_inner(m: DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(m + m†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `u† self u`.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Self {
        Self(u.0.adjoint() * &self.0 * &u.0)
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector(&self.0 * &v.0)
    }

    /// `⟨a| self |b⟩`.
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> Complex64 {
        a.inner(&self.apply(b))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> ComplexMatrix {
        ComplexMatrix(&self.0 * Complex64::new(rhs, 0.0))
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        ComplexMatrix(&self.0 * rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Pauli matrices.
pub mod pauli {
    use super::ComplexMatrix;
    use num_complex::Complex64;

    const O: Complex64 = Complex64::new(0.0, 0.0);
    const I: Complex64 = Complex64::new(0.0, 1.0);
    const R: Complex64 = Complex64::new(1.0, 0.0);

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[O, R, R, O])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[O, -I, I, O])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, &[R, O, O, -R])
    }

    /// `c[0]·1 + c[1]·σx + c[2]·σy + c[3]·σz`.
    pub fn combination(c: [f64; 4]) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        let terms = [&id * c[0], &x() * c[1], &y() * c[2], &z() * c[3]];
        terms
            .iter()
            .fold(ComplexMatrix::zeros(2), |acc, t| &acc + t)
    }
}

/// Complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self(DVector::from_vec(amplitudes))
    }

    pub fn from_real(amplitudes: &[f64]) -> Self {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Self(v)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self(&self.0 / Complex64::new(n, 0.0))
    }

    /// Errors unless the norm is within [`NORM_TOL`] of one.
    pub fn ensure_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL || !norm.is_finite() {
            return Err(OperatorError::NotNormalized { norm });
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.dotc(&other.0)
    }

    /// `|⟨self|other⟩|`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn add(&self, other: &StateVector) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &StateVector) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `|self⟩⟨self|`.
    pub fn outer(&self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * self.0.adjoint())
    }
}

/// Uniform time grid `t_k = t0 + k·dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(OperatorError::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(OperatorError::InvalidGrid("t0 must be finite".into()));
        }
        if n_steps == 0 {
            return Err(OperatorError::InvalidGrid("n_steps must be positive".into()));
        }
        Ok(Self { t0, dt, n_steps })
    }

    /// Grid covering `[t0, t_end]` with `n_steps` intervals.
    pub fn spanning(t0: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(OperatorError::InvalidGrid("n_steps must be positive".into()));
        }
        Self::new(t0, (t_end - t0) / n_steps as f64, n_steps)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    /// Same span with `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt / factor as f64,
            n_steps: self.n_steps * factor,
        }
    }

    pub fn matches(&self, other: &TimeGrid) -> bool {
        self.n_steps == other.n_steps
            && (self.t0 - other.t0).abs() <= 1e-12 * self.dt
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
    }

    pub fn ensure_matches(&self, other: &TimeGrid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(OperatorError::GridMismatch)
        }
    }
}

/// Operator sampled at every point of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPath {
    grid: TimeGrid,
    samples: Vec<ComplexMatrix>,
}

impl OperatorPath {
    pub fn new(grid: TimeGrid, samples: Vec<ComplexMatrix>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(OperatorError::PathLength {
                samples: samples.len(),
                expected: grid.len(),
            });
        }
        let dim = samples[0].dim();
        for s in &samples {
            if s.dim() != dim {
                return Err(OperatorError::DimensionMismatch { left: dim, right: s.dim() });
            }
            if !s.is_finite() {
                return Err(OperatorError::NonFinite);
            }
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> ComplexMatrix) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect())
    }

    pub fn constant(grid: TimeGrid, m: &ComplexMatrix) -> Self {
        Self {
            grid,
            samples: vec![m.clone(); grid.len()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, k: usize) -> &ComplexMatrix {
        &self.samples[k]
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        &self.samples
    }

    /// Linear interpolation between samples `k` and `k + 1`.
    pub fn interpolate(&self, k: usize, frac: f64) -> ComplexMatrix {
        &(&self.samples[k] * (1.0 - frac)) + &(&self.samples[k + 1] * frac)
    }

    /// Operator at the midpoint of interval `k`.
    pub fn midpoint(&self, k: usize) -> ComplexMatrix {
        self.interpolate(k, 0.5)
    }

    /// Time derivative by second-order differences (centered inside,
    /// one-sided at the ends). Needs at least three samples.
    pub fn derivative(&self) -> Vec<ComplexMatrix> {
        let n = self.len();
        let inv_dt = 1.0 / self.grid.dt();
        (0..n)
            .map(|k| {
                derivative_stencil(k, n)
                    .iter()
                    .fold(ComplexMatrix::zeros(self.dim()), |acc, &(j, w)| {
                        &acc + &(&self.samples[j] * (w * inv_dt))
                    })
            })
            .collect()
    }

    /// Largest Hermiticity defect over all samples.
    pub fn max_hermitian_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| check_hermitian(s, 0.0).defect)
            .fold(0.0, f64::max)
    }

    /// Errors if any sample fails the relative [`HERMITIAN_TOL`] check.
    pub fn ensure_hermitian(&self) -> Result<()> {
        for s in &self.samples {
            ensure_hermitian(s)?;
        }
        Ok(())
    }
}

/// `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(OperatorError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(&(a * b) - &(b * a))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianCheck {
    pub hermitian: bool,
    /// Max-entry norm of `m − m†`.
    pub defect: f64,
}

pub fn check_hermitian(m: &ComplexMatrix, tol: f64) -> HermitianCheck {
    let defect = (m - &m.adjoint()).max_norm();
    HermitianCheck {
        hermitian: defect <= tol,
        defect,
    }
}

/// Errors unless `m` is finite and Hermitian within the relative
/// [`HERMITIAN_TOL`].
pub fn ensure_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_finite() {
        return Err(OperatorError::NonFinite);
    }
    let check = check_hermitian(m, HERMITIAN_TOL * m.max_norm().max(1.0));
    if check.hermitian {
        Ok(())
    } else {
        Err(OperatorError::NotHermitian { defect: check.defect })
    }
}

/// Max-entry norm of `u†u − 1`.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.dim())).max_norm()
}

pub fn ensure_unitary(u: &ComplexMatrix) -> Result<()> {
    let defect = unitarity_defect(u);
    if defect <= UNITARY_TOL && u.is_finite() {
        Ok(())
    } else {
        Err(OperatorError::NotUnitary { defect })
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, `vectors[n]` belongs to `values[n]`.
    pub vectors: Vec<StateVector>,
}

impl EigenDecomposition {
    /// `Σ f(λ_n) |v_n⟩⟨v_n|`.
    pub fn function(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let dim = self.values.len();
        let mut acc = ComplexMatrix::zeros(dim);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            acc = &acc + &v.outer().scale(f(*lambda));
        }
        acc
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.function(|l| Complex64::new(l, 0.0))
    }

    /// Smallest gap between consecutive eigenvalues (infinite for dim 1).
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
///
/// Each eigenvector is phased so its largest-magnitude component is real and
/// positive, which makes the output a deterministic function of the input.
pub fn eigh(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    ensure_hermitian(m)?;
    let herm = m.hermitian_part();
    let eig = SymmetricEigen::new(herm.0);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = Vec::with_capacity(order.len());
    let mut vectors = Vec::with_capacity(order.len());
    for idx in order {
        values.push(eig.eigenvalues[idx]);
        let col: DVector<Complex64> = eig.eigenvectors.column(idx).into_owned();
        let pivot = col
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, z)| if z.norm() > best.1 + 1e-12 { (i, z.norm()) } else { best })
            .0;
        let phase = col[pivot].conj() / col[pivot].norm();
        let v = StateVector(col * phase);
        vectors.push(v.normalized());
    }
    Ok(EigenDecomposition { values, vectors })
}

/// `exp(−i·h·dt)` built from the eigendecomposition of `h`.
pub fn step_propagator(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    let eig = eigh(h)?;
    Ok(eig.function(|l| Complex64::from_polar(1.0, -l * dt)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
        let raw = ComplexMatrix::from_fn(dim, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        raw.hermitian_part()
    }

    #[test]
    fn pauli_commutator() {
        let got = commutator(&pauli::z(), &pauli::x()).unwrap();
        let want = pauli::y().scale(c(0.0, 2.0));
        assert!((&got - &want).max_norm() < 1e-15);
    }

    #[test]
    fn self_commutator_vanishes() {
        let h = pauli::combination([0.3, 1.0, -0.5, 2.0]);
        assert_eq!(commutator(&h, &h).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn diagonal_offdiagonal_commutator() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let got = commutator(&d, &pauli::x()).unwrap();
        let want = ComplexMatrix::from_row_slice(2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(got, want);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let err = commutator(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).unwrap_err();
        assert_eq!(err, OperatorError::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn hermitian_checks() {
        let sx = check_hermitian(&pauli::x(), 1e-12);
        assert!(sx.hermitian);
        assert_eq!(sx.defect, 0.0);

        let m = ComplexMatrix::from_row_slice(2, &[c(0.0, 0.0), I, I, c(0.0, 0.0)]);
        let chk = check_hermitian(&m, 1e-12);
        assert!(!chk.hermitian);
        assert!((chk.defect - 2.0).abs() < 1e-15);

        let z = check_hermitian(&ComplexMatrix::zeros(3), 0.0);
        assert!(z.hermitian && z.defect == 0.0);
    }

    #[test]
    fn eigh_diagonal_and_sigma_x() {
        let e = eigh(&ComplexMatrix::from_real_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);

        let e = eigh(&pauli::x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let minus = StateVector::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
        let plus = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!((e.vectors[0].fidelity(&minus) - 1.0).abs() < 1e-14);
        assert!((e.vectors[1].fidelity(&plus) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hermitian(&mut rng, 4);
        let e = eigh(&m).unwrap();
        assert!((&e.reconstruct() - &m).max_norm() <= 1e-12);
        for (a, va) in e.vectors.iter().enumerate() {
            for (b, vb) in e.vectors.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((va.inner(vb) - c(want, 0.0)).norm() < 1e-13);
            }
            let residual = m.apply(va).sub(&va.scale(c(e.values[a], 0.0))).max_norm();
            assert!(residual < 1e-13);
        }
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(eigh(&m), Err(OperatorError::NotHermitian { .. })));
        assert!(matches!(step_propagator(&m, 0.1), Err(OperatorError::NotHermitian { .. })));
    }

    #[test]
    fn propagator_examples() {
        let u = step_propagator(&ComplexMatrix::zeros(2), 0.7).unwrap();
        assert!((&u - &ComplexMatrix::identity(2)).max_norm() < 1e-15);

        let u = step_propagator(&pauli::z(), PI).unwrap();
        assert!((&u + &ComplexMatrix::identity(2)).max_norm() < 1e-15);

        let half = step_propagator(&pauli::x(), PI / 2.0).unwrap();
        let want = pauli::x().scale(-I);
        assert!((&half - &want).max_norm() < 1e-15);
        // squaring agrees with the full-angle exponential
        let full = step_propagator(&pauli::x(), PI).unwrap();
        assert!((&(&half * &half) - &full).max_norm() < 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, -1e-3, 10).is_err());
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1e-3, 0).is_err());
        let g = TimeGrid::spanning(0.0, 1.0, 4).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.t_end(), 1.0);
        assert!(g.refined(2).matches(&TimeGrid::new(0.0, 0.125, 8).unwrap()));
    }

    #[test]
    fn path_derivative_is_second_order_exact_for_quadratic() {
        let grid = TimeGrid::new(0.0, 0.1, 10).unwrap();
        let path = OperatorPath::from_fn(grid, |t| &pauli::x() * (t * t)).unwrap();
        for (k, d) in path.derivative().iter().enumerate() {
            let want = &pauli::x() * (2.0 * grid.time(k));
            assert!((d - &want).max_norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn propagator_is_unitary(seed in any::<u64>(), dim in 1usize..7, dt in -5.0f64..5.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = &random_hermitian(&mut rng, dim) * 3.0;
            let u = step_propagator(&h, dt).unwrap();
            prop_assert!(unitarity_defect(&u) <= 1e-12);
        }

        #[test]
        fn eigh_reconstruction_relative(seed in any::<u64>(), dim in 1usize..16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_hermitian(&mut rng, dim);
            let e = eigh(&m).unwrap();
            prop_assert!((&e.reconstruct() - &m).max_norm() <= 1e-12 * m.max_norm().max(1e-300));
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn commutator_antisymmetry(seed in any::<u64>(), dim in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = ComplexMatrix::from_fn(dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let b = ComplexMatrix::from_fn(dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let ab = commutator(&a, &b).unwrap();
            let ba = commutator(&b, &a).unwrap();
            prop_assert_eq!(ab, -&ba);
        }
    }
}
