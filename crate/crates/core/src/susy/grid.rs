use super::{Result, SusyError};
use crate::numeric::{cumulative_trapezoid, trapezoid_weights};

/// Reduced Planck constant and particle mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysParams {
    /// `ħ = 1`, `m = 1/2`, so that `ħ/√(2m) = 1`.
    fn default() -> Self {
        Self { hbar: 1.0, mass: 0.5 }
    }
}

impl PhysParams {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0 && mass > 0.0 && hbar.is_finite() && mass.is_finite()) {
            return Err(SusyError::InvalidParams(format!("hbar = {hbar}, mass = {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// `ħ/√(2m)`, the scale of `d/dx` in the ladder operators.
    pub fn ladder_scale(&self) -> f64 {
        self.hbar / (2.0 * self.mass).sqrt()
    }

    /// `ħ²/2m`.
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

/// Uniform grid on `[x_min, x_max]` including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(SusyError::InvalidGrid(format!("bounds [{x_min}, {x_max}]")));
        }
        if n_points < 3 {
            return Err(SusyError::InvalidGrid(format!("{n_points} points, need at least 3")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.n_points - 1 {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Same interval with the spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points().into_iter().map(f).collect()
    }

    /// `sqrt(Σ w_j v_j²)` with trapezoid weights.
    pub fn norm(&self, v: &[f64]) -> f64 {
        trapezoid_weights(v.len(), self.dx())
            .iter()
            .zip(v)
            .map(|(w, x)| w * x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// `sqrt(dx Σ_{j ∈ rows} v_j²)`.
    pub fn partial_norm(&self, v: &[f64], rows: std::ops::Range<usize>) -> f64 {
        (self.dx() * v[rows].iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    /// Trapezoid inner product.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        trapezoid_weights(a.len(), self.dx())
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }
}

/// `W(x)` and `W′(x)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpotentialField {
    grid: SpatialGrid,
    w: Vec<f64>,
    w_prime: Vec<f64>,
}

impl SuperpotentialField {
    /// Both `W` and `W′` supplied.
    pub fn new(grid: SpatialGrid, w: Vec<f64>, w_prime: Vec<f64>) -> Result<Self> {
        for (name, v) in [("W", &w), ("W'", &w_prime)] {
            if v.len() != grid.len() {
                return Err(SusyError::SampleLength { name, got: v.len(), expected: grid.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(SusyError::NonFinite(name));
            }
        }
        Ok(Self { grid, w, w_prime })
    }

    /// `W′` from second-order differences of the `W` samples.
    pub fn from_samples(grid: SpatialGrid, w: Vec<f64>) -> Result<Self> {
        if w.len() != grid.len() {
            return Err(SusyError::SampleLength { name: "W", got: w.len(), expected: grid.len() });
        }
        let n = w.len();
        let dx = grid.dx();
        let w_prime = (0..n)
            .map(|k| {
                crate::numeric::derivative_stencil(k, n)
                    .iter()
                    .map(|&(j, c)| c * w[j])
                    .sum::<f64>()
                    / dx
            })
            .collect();
        Self::new(grid, w, w_prime)
    }

    pub fn from_fn(grid: SpatialGrid, w: impl Fn(f64) -> f64, w_prime: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.sample(w), grid.sample(w_prime))
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn w_prime(&self) -> &[f64] {
        &self.w_prime
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().all(|v| *v == 0.0)
    }
}

/// What to do with a wavefunction that has not decayed at the box edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPolicy {
    /// Bound state of the unbounded problem: both edges must be negligible.
    RequireDecay,
    /// The box walls are physical; any profile is accepted.
    FiniteBox,
}

/// Edge amplitude below which a state counts as decayed, relative to its
/// maximum.
pub const DECAY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    grid: SpatialGrid,
    samples: Vec<f64>,
}

impl GridWavefunction {
    pub fn new(grid: SpatialGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(SusyError::SampleLength { name: "psi", got: samples.len(), expected: grid.len() });
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(SusyError::NonFinite("psi"));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn norm(&self) -> f64 {
        self.grid.norm(&self.samples)
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|v| v / n).collect(),
        }
    }

    /// `max(|ψ(x_min)|, |ψ(x_max)|) / max|ψ|`.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.samples.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let edge = self.samples[0].abs().max(self.samples[self.samples.len() - 1].abs());
        edge / peak
    }

    pub fn decays(&self) -> bool {
        self.edge_ratio() <= DECAY_TOL
    }

    /// Number of sign changes, ignoring samples below `1e-12 × max|ψ|`.
    pub fn node_count(&self) -> usize {
        let peak = self.samples.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let mut last = 0.0;
        let mut nodes = 0;
        for &v in &self.samples {
            if v.abs() <= 1e-12 * peak {
                continue;
            }
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                nodes += 1;
            }
            last = v;
        }
        nodes
    }
}

/// `ψ₀(x) ∝ exp[−(√(2m)/ħ) ∫_{x_min}^x W]`, normalized with trapezoid
/// weights. The integral is the cumulative trapezoid with the
/// `−h²/12·ΔW′` end correction, fourth order like the ladder stencil.
pub fn ground_state_from_w(
    w: &SuperpotentialField,
    params: PhysParams,
    policy: BoundaryPolicy,
) -> Result<GridWavefunction> {
    let grid = *w.grid();
    let h = grid.dx();
    let mut integral = cumulative_trapezoid(w.w(), h);
    let wp = w.w_prime();
    for (j, v) in integral.iter_mut().enumerate() {
        *v -= h * h / 12.0 * (wp[j] - wp[0]);
    }
    let k = 1.0 / params.ladder_scale();
    let exponents: Vec<f64> = integral.iter().map(|i| -k * i).collect();
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let psi = GridWavefunction::new(grid, exponents.iter().map(|e| (e - top).exp()).collect())?.normalized();
    if policy == BoundaryPolicy::RequireDecay && !psi.decays() {
        return Err(SusyError::NonNormalizable { edge_ratio: psi.edge_ratio() });
    }
    Ok(psi)
}
