use std::f64::consts::PI;
use std::ops::Range;

use super::{BandMatrix, PhysParams, Result, SpatialGrid, SuperpotentialField, SusyError};

/// Fourth-order central first difference (unscaled by the spacing).
pub const LADDER_STENCIL: [(isize, f64); 4] = [(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Wavefunction zero at and beyond both grid endpoints.
    Dirichlet,
}

/// Real operator on the interior samples of a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    grid: SpatialGrid,
    matrix: BandMatrix,
    boundary: Boundary,
}

impl GridOperator {
    pub fn new(grid: SpatialGrid, matrix: BandMatrix) -> Result<Self> {
        if matrix.n() != grid.len() - 2 {
            return Err(SusyError::GridMismatch);
        }
        if !matrix.is_finite() {
            return Err(SusyError::NonFinite("operator"));
        }
        Ok(Self {
            grid,
            matrix,
            boundary: Boundary::Dirichlet,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &BandMatrix {
        &self.matrix
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn halfwidth(&self) -> usize {
        self.matrix.lower().max(self.matrix.upper())
    }

    /// Applies to full-length grid samples; endpoint values are ignored and
    /// returned as zero.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.grid.len());
        let inner = self.matrix.matvec(&f[1..f.len() - 1]);
        let mut out = Vec::with_capacity(f.len());
        out.push(0.0);
        out.extend(inner);
        out.push(0.0);
        out
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            ..self.clone()
        }
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        Ok(Self {
            matrix: self.matrix.mul(&other.matrix),
            ..self.clone()
        })
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        Ok(Self {
            matrix: self.matrix.sub(&other.matrix),
            ..self.clone()
        })
    }

    /// `self − c·1`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            matrix: self.matrix.add_diagonal(&vec![-c; self.matrix.n()]),
            ..self.clone()
        }
    }

    fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid && self.matrix.n() == other.matrix.n() {
            Ok(())
        } else {
            Err(SusyError::GridMismatch)
        }
    }

    /// Full-grid indices at least `margin` cells away from both walls.
    pub fn interior(&self, margin: usize) -> Range<usize> {
        let n = self.grid.len();
        (1 + margin).min(n - 1)..(n - 1).saturating_sub(margin)
    }

    /// Default margin for defect norms: two cells, or twice the stencil
    /// reach of `self` when that is larger.
    pub fn default_margin(&self) -> usize {
        (2 * self.halfwidth()).max(2)
    }

    /// `max_f ‖(self·f)|_interior‖ / ‖f‖` over `probes`.
    pub fn probe_norm(&self, probes: &[Vec<f64>], margin: usize) -> f64 {
        let rows = self.interior(margin);
        probes
            .iter()
            .map(|f| self.grid.partial_norm(&self.apply(f), rows.clone()) / self.grid.norm(f))
            .fold(0.0, f64::max)
    }
}

/// Partner potentials `V± = W² ± (ħ/√(2m))·W′` on every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartnerPotentials {
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
}

pub fn partner_potentials(w: &SuperpotentialField, params: PhysParams) -> PartnerPotentials {
    let s = params.ladder_scale();
    let (v_plus, v_minus) = w
        .w()
        .iter()
        .zip(w.w_prime())
        .map(|(w, dw)| (w * w + s * dw, w * w - s * dw))
        .unzip();
    PartnerPotentials { v_plus, v_minus }
}

/// `A = (ħ/√(2m))·D + W` and `A† = −(ħ/√(2m))·D + W`, with `D` the
/// fourth-order central difference. `D` is antisymmetric, so `A† = Aᵀ`
/// exactly.
pub fn ladder_operators(w: &SuperpotentialField, params: PhysParams) -> Result<(GridOperator, GridOperator)> {
    let grid = *w.grid();
    let n = grid.len() - 2;
    let d = BandMatrix::from_stencil(n, &LADDER_STENCIL).scale(params.ladder_scale() / grid.dx());
    let w_inner = &w.w()[1..grid.len() - 1];
    let a = d.add_diagonal(w_inner);
    let adag = d.scale(-1.0).add_diagonal(w_inner);
    Ok((GridOperator::new(grid, a)?, GridOperator::new(grid, adag)?))
}

/// `(H₋, H₊) = (A†A, AA†)`.
pub fn partner_hamiltonians(a: &GridOperator, adag: &GridOperator) -> Result<(GridOperator, GridOperator)> {
    Ok((adag.product(a)?, a.product(adag)?))
}

/// Lowest `count` box modes `sin(kπ(x − x_min)/L)`.
pub fn probe_functions(grid: &SpatialGrid, count: usize) -> Vec<Vec<f64>> {
    (1..=count)
        .map(|k| grid.sample(|x| (k as f64 * PI * (x - grid.x_min()) / grid.length()).sin()))
        .collect()
}

/// `max_f ‖([A, A†] − (2ħ/√(2m))W′)f‖ / ‖f‖` over the lowest five box
/// modes, interior rows only.
pub fn commutator_defect(a: &GridOperator, adag: &GridOperator, w_prime: &[f64], params: PhysParams) -> Result<f64> {
    let grid = *a.grid();
    if w_prime.len() != grid.len() {
        return Err(SusyError::SampleLength { name: "W'", got: w_prime.len(), expected: grid.len() });
    }
    let bracket = a.product(adag)?.difference(&adag.product(a)?)?;
    let target: Vec<f64> = w_prime[1..grid.len() - 1]
        .iter()
        .map(|d| 2.0 * params.ladder_scale() * d)
        .collect();
    let defect = GridOperator::new(grid, bracket.matrix().add_diagonal(&target.iter().map(|t| -t).collect::<Vec<_>>()))?;
    Ok(defect.probe_norm(&probe_functions(&grid, 5), a.default_margin()))
}

/// `H = −(ħ²/2m)·D₂ + V` with the three-point second difference.
pub fn base_hamiltonian(v: &[f64], grid: &SpatialGrid, params: PhysParams) -> Result<GridOperator> {
    if v.len() != grid.len() {
        return Err(SusyError::SampleLength { name: "V", got: v.len(), expected: grid.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(SusyError::NonFinite("V"));
    }
    let c = params.kinetic_scale() / (grid.dx() * grid.dx());
    let kinetic = BandMatrix::from_stencil(grid.len() - 2, &[(-1, -c), (0, 2.0 * c), (1, -c)]);
    GridOperator::new(*grid, kinetic.add_diagonal(&v[1..grid.len() - 1]))
}
