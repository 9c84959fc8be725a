//! Density-matrix evolution under the Liouville–von Neumann equation
//! `∂ρ/∂t + (1/i)[ρ, H] = 0`, for a general Hamiltonian path and in the
//! component form of a two-level atom with `H = diag(ω_a, ω_b) + V`,
//! `V = [[0, V_ab], [V_ab*, 0]]`.

use num_complex::Complex64;
use thiserror::Error;

use crate::operator::{
    check_hermitian, commutator, eigh, ensure_hermitian, ComplexMatrix, OperatorError, OperatorPath, StateVector,
    TimeGrid,
};

/// Hermiticity, trace and positivity tolerance for a valid density matrix.
pub const DENSITY_TOL: f64 = 1e-10;

/// Trace defect beyond which integration aborts.
pub const TRACE_ABORT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("invalid density matrix: {0}")]
    Invalid(String),
    #[error("guard breach at step {step}: {metric} {value:.3e} exceeds {limit:.3e}")]
    GuardBreach {
        step: usize,
        metric: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("non-finite density matrix at step {step}")]
    NonFinite { step: usize },
    #[error("trajectory lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, DensityError>;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, positivity and the purity range.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(OperatorError::NonFinite.into());
        }
        let herm = check_hermitian(&m, DENSITY_TOL);
        if !herm.hermitian {
            return Err(DensityError::Invalid(format!("hermiticity defect {:.3e}", herm.defect)));
        }
        let trace = m.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(DensityError::Invalid(format!("trace {trace}")));
        }
        let lowest = eigh(&m)?.values[0];
        if lowest < -DENSITY_TOL {
            return Err(DensityError::Invalid(format!("negative eigenvalue {lowest:.3e}")));
        }
        let rho = Self(m);
        let p = rho.purity();
        let dim = rho.dim() as f64;
        if p < 1.0 / dim - DENSITY_TOL || p > 1.0 + DENSITY_TOL {
            return Err(DensityError::Invalid(format!("purity {p}")));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(&ComplexMatrix::identity(dim) * (1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.0[(a, b)]
    }

    /// `Re Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

/// `ρ = |Ψ⟩⟨Ψ|`.
pub fn density_from_state(psi: &StateVector) -> Result<DensityMatrix> {
    psi.ensure_normalized()?;
    Ok(DensityMatrix(psi.outer()))
}

/// `∂ρ/∂t = −i[H, ρ]`.
pub fn lvn_rhs(rho: &DensityMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_hermitian(h)?;
    Ok(matrix_rhs(&rho.0, h)?)
}

fn matrix_rhs(rho: &ComplexMatrix, h: &ComplexMatrix) -> std::result::Result<ComplexMatrix, OperatorError> {
    Ok(commutator(h, rho)?.scale(Complex64::new(0.0, -1.0)))
}

/// Two-level atom: level frequencies and coupling samples `V_ab(t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelParams {
    omega_a: f64,
    omega_b: f64,
    grid: TimeGrid,
    coupling: Vec<Complex64>,
}

impl TwoLevelParams {
    pub fn new(omega_a: f64, omega_b: f64, grid: TimeGrid, coupling: Vec<Complex64>) -> Result<Self> {
        if !omega_a.is_finite() || !omega_b.is_finite() || coupling.iter().any(|c| !c.is_finite()) {
            return Err(OperatorError::NonFinite.into());
        }
        if coupling.len() != grid.len() {
            return Err(OperatorError::PathLength {
                samples: coupling.len(),
                expected: grid.len(),
            }
            .into());
        }
        Ok(Self { omega_a, omega_b, grid, coupling })
    }

    pub fn from_fn(omega_a: f64, omega_b: f64, grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(omega_a, omega_b, grid, grid.times().map(f).collect())
    }

    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }

    pub fn omega_b(&self) -> f64 {
        self.omega_b
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn coupling(&self) -> &[Complex64] {
        &self.coupling
    }

    /// `V_ab` linearly interpolated between samples, held constant outside
    /// the grid.
    pub fn coupling_at(&self, t: f64) -> Complex64 {
        let x = (t - self.grid.t0()) / self.grid.dt();
        let last = self.coupling.len() - 1;
        if x <= 0.0 {
            return self.coupling[0];
        }
        if x >= last as f64 {
            return self.coupling[last];
        }
        let k = (x.floor() as usize).min(last - 1);
        self.interpolated(k, x - k as f64)
    }

    fn interpolated(&self, k: usize, frac: f64) -> Complex64 {
        self.coupling[k] * (1.0 - frac) + self.coupling[k + 1] * frac
    }

    /// `H(t) = H₀ + V(t)`.
    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        self.hamiltonian_with(self.coupling_at(t))
    }

    fn hamiltonian_with(&self, v: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            2,
            &[Complex64::new(self.omega_a, 0.0), v, v.conj(), Complex64::new(self.omega_b, 0.0)],
        )
    }

    /// `H(t_k)` at every grid point.
    pub fn hamiltonian_path(&self) -> Result<OperatorPath> {
        let samples = self.coupling.iter().map(|v| self.hamiltonian_with(*v)).collect();
        Ok(OperatorPath::new(self.grid, samples)?)
    }
}

/// Independent components `(ρ_aa, ρ_bb, ρ_ab)`; `ρ_ba = ρ_ab*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelComponents {
    pub rho_aa: f64,
    pub rho_bb: f64,
    pub rho_ab: Complex64,
}

impl TwoLevelComponents {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            rho_aa: rho.entry(0, 0).re,
            rho_bb: rho.entry(1, 1).re,
            rho_ab: rho.entry(0, 1),
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            2,
            &[
                Complex64::new(self.rho_aa, 0.0),
                self.rho_ab,
                self.rho_ab.conj(),
                Complex64::new(self.rho_bb, 0.0),
            ],
        )
    }

    fn axpy(&self, h: f64, d: &Self) -> Self {
        Self {
            rho_aa: self.rho_aa + h * d.rho_aa,
            rho_bb: self.rho_bb + h * d.rho_bb,
            rho_ab: self.rho_ab + d.rho_ab * h,
        }
    }
}

/// Component equations of motion at time `t`.
pub fn two_level_rhs(c: &TwoLevelComponents, params: &TwoLevelParams, t: f64) -> TwoLevelComponents {
    components_rhs(c, params.omega_a, params.omega_b, params.coupling_at(t))
}

fn components_rhs(c: &TwoLevelComponents, omega_a: f64, omega_b: f64, v_ab: Complex64) -> TwoLevelComponents {
    let i = Complex64::new(0.0, 1.0);
    let exchange = 2.0 * (i * v_ab * c.rho_ab.conj()).re;
    TwoLevelComponents {
        rho_aa: -exchange,
        rho_bb: exchange,
        rho_ab: -i * (omega_a - omega_b) * c.rho_ab + i * v_ab * (c.rho_aa - c.rho_bb),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardMetrics {
    /// `|Tr ρ − 1|`.
    pub trace_defect: f64,
    /// Max-entry norm of `ρ − ρ†`.
    pub hermiticity_defect: f64,
    pub purity: f64,
}

impl GuardMetrics {
    fn of(m: &ComplexMatrix) -> Self {
        Self {
            trace_defect: (m.trace() - Complex64::new(1.0, 0.0)).norm(),
            hermiticity_defect: check_hermitian(m, 0.0).defect,
            purity: (m * m).trace().re,
        }
    }
}

/// Integrated trajectory with per-step guard metrics. Samples are not
/// renormalized, so drift shows up in the guards.
#[derive(Debug, Clone)]
pub struct DensityPath {
    grid: TimeGrid,
    samples: Vec<DensityMatrix>,
    guards: Vec<GuardMetrics>,
}

impl DensityPath {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[DensityMatrix] {
        &self.samples
    }

    pub fn sample(&self, k: usize) -> &DensityMatrix {
        &self.samples[k]
    }

    pub fn guards(&self) -> &[GuardMetrics] {
        &self.guards
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.guards.iter().map(|g| g.trace_defect).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.guards.iter().map(|g| g.hermiticity_defect).fold(0.0, f64::max)
    }

    /// `max_k |Tr ρ_k² − Tr ρ_0²|`.
    pub fn purity_drift(&self) -> f64 {
        let p0 = self.guards[0].purity;
        self.guards.iter().map(|g| (g.purity - p0).abs()).fold(0.0, f64::max)
    }

    pub fn to_operator_path(&self) -> Result<OperatorPath> {
        Ok(OperatorPath::new(self.grid, self.samples.iter().map(|s| s.0.clone()).collect())?)
    }
}

/// What drives the evolution.
#[derive(Debug, Clone, Copy)]
pub enum LvnDrive<'a> {
    /// Component equations of the two-level atom.
    TwoLevel(&'a TwoLevelParams),
    /// Full matrix equation for a sampled Hamiltonian.
    Matrix(&'a OperatorPath),
}

impl LvnDrive<'_> {
    pub fn grid(&self) -> &TimeGrid {
        match self {
            LvnDrive::TwoLevel(p) => p.grid(),
            LvnDrive::Matrix(h) => h.grid(),
        }
    }
}

/// Classical fixed-step RK4 over the drive's grid. Samples between grid
/// points are linearly interpolated.
pub fn integrate_lvn(drive: LvnDrive<'_>, rho0: &DensityMatrix) -> Result<DensityPath> {
    let grid = *drive.grid();
    let dt = grid.dt();
    let mut samples = Vec::with_capacity(grid.len());
    let mut guards = Vec::with_capacity(grid.len());
    let mut push = |step: usize, m: ComplexMatrix| -> Result<()> {
        if !m.is_finite() {
            return Err(DensityError::NonFinite { step });
        }
        let g = GuardMetrics::of(&m);
        if g.trace_defect > TRACE_ABORT {
            return Err(DensityError::GuardBreach {
                step,
                metric: "trace drift",
                value: g.trace_defect,
                limit: TRACE_ABORT,
            });
        }
        samples.push(DensityMatrix(m));
        guards.push(g);
        Ok(())
    };

    match drive {
        LvnDrive::TwoLevel(params) => {
            if rho0.dim() != 2 {
                return Err(OperatorError::DimensionMismatch { left: 2, right: rho0.dim() }.into());
            }
            let (wa, wb) = (params.omega_a, params.omega_b);
            let mut c = TwoLevelComponents::from_density(rho0);
            push(0, c.to_matrix())?;
            for k in 0..grid.n_steps() {
                let v0 = params.coupling[k];
                let vm = params.interpolated(k, 0.5);
                let v1 = params.coupling[k + 1];
                let k1 = components_rhs(&c, wa, wb, v0);
                let k2 = components_rhs(&c.axpy(0.5 * dt, &k1), wa, wb, vm);
                let k3 = components_rhs(&c.axpy(0.5 * dt, &k2), wa, wb, vm);
                let k4 = components_rhs(&c.axpy(dt, &k3), wa, wb, v1);
                c = c
                    .axpy(dt / 6.0, &k1)
                    .axpy(dt / 3.0, &k2)
                    .axpy(dt / 3.0, &k3)
                    .axpy(dt / 6.0, &k4);
                push(k + 1, c.to_matrix())?;
            }
        }
        LvnDrive::Matrix(h_path) => {
            h_path.ensure_hermitian()?;
            if rho0.dim() != h_path.dim() {
                return Err(OperatorError::DimensionMismatch { left: h_path.dim(), right: rho0.dim() }.into());
            }
            let mut rho = rho0.0.clone();
            push(0, rho.clone())?;
            for k in 0..grid.n_steps() {
                let h_mid = h_path.midpoint(k);
                let k1 = matrix_rhs(&rho, h_path.sample(k))?;
                let k2 = matrix_rhs(&(&rho + &(&k1 * (0.5 * dt))), &h_mid)?;
                let k3 = matrix_rhs(&(&rho + &(&k2 * (0.5 * dt))), &h_mid)?;
                let k4 = matrix_rhs(&(&rho + &(&k3 * dt)), h_path.sample(k + 1))?;
                let incr = &(&(&k1 + &(&k2 * 2.0)) + &(&k3 * 2.0)) + &k4;
                rho = &rho + &(&incr * (dt / 6.0));
                push(k + 1, rho.clone())?;
            }
        }
    }
    Ok(DensityPath { grid, samples, guards })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub populations: Vec<f64>,
    /// `ρ_ab` (zero for a single level).
    pub coherence: Complex64,
    pub purity: f64,
    pub trace: f64,
}

pub fn observables(rho: &DensityMatrix) -> Observables {
    Observables {
        populations: (0..rho.dim()).map(|n| rho.entry(n, n).re).collect(),
        coherence: if rho.dim() > 1 { rho.entry(0, 1) } else { Complex64::new(0.0, 0.0) },
        purity: rho.purity(),
        trace: rho.trace().re,
    }
}

/// `max_k ‖ρ_k − |ψ_k⟩⟨ψ_k|‖_max`.
pub fn cross_check(dp: &DensityPath, states: &[StateVector]) -> Result<f64> {
    if dp.len() != states.len() {
        return Err(DensityError::LengthMismatch { left: dp.len(), right: states.len() });
    }
    let mut worst: f64 = 0.0;
    for (rho, psi) in dp.samples.iter().zip(states) {
        if psi.dim() != rho.dim() {
            return Err(OperatorError::DimensionMismatch { left: rho.dim(), right: psi.dim() }.into());
        }
        worst = worst.max((&rho.0 - &psi.outer()).max_norm());
    }
    Ok(worst)
}
