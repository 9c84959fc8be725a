use log::warn;

use super::{
    base_hamiltonian, commutator_defect, ground_state_from_w, ladder_operators, partner_hamiltonians,
    partner_potentials, probe_functions, BoundaryPolicy, GridOperator, GridWavefunction, LowestEigenpairs,
    PhysParams, Result, SuperpotentialField, SusyError,
};

/// Smallest accepted `|⟨ψ₀|ground state of H⟩|` for the shift identity.
pub const GROUND_OVERLAP_MIN: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partner {
    Plus,
    Minus,
}

impl Partner {
    pub fn label(&self) -> &'static str {
        match self {
            Partner::Plus => "V+",
            Partner::Minus => "V-",
        }
    }
}

/// `V± ≟ V − ε₀` for both partners.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCheck {
    pub epsilon0: f64,
    /// `|⟨ψ₀|ground state of H⟩|`.
    pub overlap: f64,
    pub plus_deviation: f64,
    pub minus_deviation: f64,
    /// Partner with the smaller deviation.
    pub matched: Partner,
}

impl ShiftCheck {
    pub fn deviation(&self, p: Partner) -> f64 {
        match p {
            Partner::Plus => self.plus_deviation,
            Partner::Minus => self.minus_deviation,
        }
    }

    /// Partners whose deviation is within `tol`.
    pub fn matching(&self, tol: f64) -> Vec<Partner> {
        [Partner::Plus, Partner::Minus]
            .into_iter()
            .filter(|p| self.deviation(*p) <= tol)
            .collect()
    }
}

/// Computes `ε₀` from `H = −(ħ²/2m)d²/dx² + V`, confirms that `ψ₀` built from
/// `W` is its ground state, and reports `max |V± − (V − ε₀)|` two cells in
/// from the walls.
pub fn shift_identity_check(v: &[f64], w: &SuperpotentialField, params: PhysParams) -> Result<ShiftCheck> {
    let grid = *w.grid();
    let h = base_hamiltonian(v, &grid, params)?;
    let mut lowest = LowestEigenpairs::new(h.matrix());
    let (epsilon0, ground) = lowest.pair(0);
    let psi0 = ground_state_from_w(w, params, BoundaryPolicy::FiniteBox)?;
    let inner = &psi0.samples()[1..grid.len() - 1];
    let dot: f64 = inner.iter().zip(ground).map(|(a, b)| a * b).sum();
    let norm = inner.iter().map(|a| a * a).sum::<f64>().sqrt();
    let overlap = (dot / norm).abs();
    if overlap < GROUND_OVERLAP_MIN || overlap.is_nan() {
        return Err(SusyError::GroundStateMismatch { overlap, threshold: GROUND_OVERLAP_MIN });
    }
    let partners = partner_potentials(w, params);
    let rows = h.interior(2);
    let deviation = |vp: &[f64]| rows.clone().map(|j| (vp[j] - (v[j] - epsilon0)).abs()).fold(0.0, f64::max);
    let plus_deviation = deviation(&partners.v_plus);
    let minus_deviation = deviation(&partners.v_minus);
    Ok(ShiftCheck {
        epsilon0,
        overlap,
        plus_deviation,
        minus_deviation,
        matched: if minus_deviation <= plus_deviation { Partner::Minus } else { Partner::Plus },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceCheck {
    /// `‖[H − ε₀, H]‖_∞`.
    pub self_commutator: f64,
    /// `‖H‖_∞²`.
    pub h_norm_sq: f64,
    /// `max_f ‖[H_partner, H]f‖/‖f‖` over smooth probes, interior rows.
    pub partner_commutator: f64,
    /// `max_f ‖(H_partner − (H − ε₀))f‖/‖f‖` over smooth probes, interior rows.
    pub discretization_defect: f64,
    /// `‖H_partner‖_∞·‖H‖_∞`, the scale of the partner commutator.
    pub commutator_scale: f64,
}

pub fn invariance_check(h: &GridOperator, partner: &GridOperator, epsilon0: f64) -> Result<InvarianceCheck> {
    let shifted = h.shifted(epsilon0);
    let self_bracket = shifted.product(h)?.difference(&h.product(&shifted)?)?;
    let probes = probe_functions(h.grid(), 5);
    let partner_bracket = partner.product(h)?.difference(&h.product(partner)?)?;
    let gap = partner.difference(&shifted)?;
    Ok(InvarianceCheck {
        self_commutator: self_bracket.matrix().inf_norm(),
        h_norm_sq: h.matrix().inf_norm().powi(2),
        partner_commutator: partner_bracket.probe_norm(&probes, partner_bracket.default_margin()),
        discretization_defect: gap.probe_norm(&probes, gap.default_margin()),
        commutator_scale: partner.matrix().inf_norm() * h.matrix().inf_norm(),
    })
}

/// How an eigenpair of a grid Hamiltonian was classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeClass {
    pub value: f64,
    /// Sign-alternating grid mode of the central difference (a "doubler"),
    /// with no continuum counterpart.
    pub staggered: bool,
    pub decays: bool,
    /// Below the potential at the box edges.
    pub below_threshold: bool,
}

impl ModeClass {
    pub fn physical(&self) -> bool {
        !self.staggered && self.decays && self.below_threshold
    }
}

/// Largest wall amplitude, relative to the peak, of a mode counted as bound.
/// Weakly bound states reach the walls long before their energy is affected
/// (the shift scales with the square of this ratio), so this is much looser
/// than the normalizability test of `ψ₀`.
pub const MODE_EDGE_TOL: f64 = 1e-3;

fn classify(value: f64, v: &[f64], threshold: f64, policy: BoundaryPolicy) -> ModeClass {
    let (mut smooth, mut rough) = (0.0, 0.0);
    for w in v.windows(2) {
        smooth += (w[1] + w[0]).powi(2);
        rough += (w[1] - w[0]).powi(2);
    }
    let peak = v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let edge = v[0].abs().max(v[v.len() - 1].abs());
    ModeClass {
        value,
        staggered: rough > smooth,
        decays: policy == BoundaryPolicy::FiniteBox || edge <= MODE_EDGE_TOL * peak,
        below_threshold: value < threshold,
    }
}

/// Physical eigenpairs, lowest first, as full-grid wavefunctions.
struct PhysicalModes {
    values: Vec<f64>,
    states: Vec<Vec<f64>>,
    rejected: Vec<ModeClass>,
}

fn physical_modes(h: &GridOperator, threshold: f64, wanted: usize, policy: BoundaryPolicy) -> PhysicalModes {
    let mut solver = LowestEigenpairs::new(h.matrix());
    let limit = solver.dim().min(6 * wanted + 24);
    let mut out = PhysicalModes {
        values: Vec::new(),
        states: Vec::new(),
        rejected: Vec::new(),
    };
    for k in 0..limit {
        let (value, v) = solver.pair(k);
        if value >= threshold {
            break;
        }
        let class = classify(value, v, threshold, policy);
        if class.physical() {
            let mut full = Vec::with_capacity(v.len() + 2);
            full.push(0.0);
            full.extend_from_slice(v);
            full.push(0.0);
            out.values.push(value);
            out.states.push(full);
            if out.values.len() == wanted {
                break;
            }
        } else {
            out.rejected.push(class);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub n: usize,
    /// `E₋_{n+1}`.
    pub e_minus: f64,
    /// `E₊_n`.
    pub e_plus: f64,
    /// `|E₊_n − E₋_{n+1}|`.
    pub deviation: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingReport {
    pub e_minus: Vec<f64>,
    pub e_plus: Vec<f64>,
    pub rows: Vec<PairRow>,
    /// Pairs asked for; `rows.len()` is smaller if too few bound states
    /// were found.
    pub requested: usize,
    /// `max ‖(A H₋ − H₊ A)ψ‖/‖ψ‖` over the paired `H₋` states.
    pub intertwining: f64,
    /// `intertwining / (‖A‖_∞‖H₋‖_∞)`.
    pub intertwining_relative: f64,
    /// `max ‖H₊(Aψ_n) − E₋_n Aψ_n‖/‖Aψ_n‖` over excited `H₋` states.
    pub mapped_residual: f64,
    /// Doublers, unbound and non-decaying modes skipped while searching.
    pub rejected_minus: Vec<ModeClass>,
    pub rejected_plus: Vec<ModeClass>,
}

impl PairingReport {
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.deviation).fold(0.0, f64::max)
    }
}

/// Pairs `E₊_n ↔ E₋_{n+1}` for the lowest `k` bound states. `thresholds`
/// are the `(H₋, H₊)` continuum edges, normally the partner potentials at
/// the walls. Under [`BoundaryPolicy::FiniteBox`] modes touching the walls
/// are kept.
pub fn pairing_report(
    h_minus: &GridOperator,
    h_plus: &GridOperator,
    a: &GridOperator,
    k: usize,
    thresholds: (f64, f64),
    policy: BoundaryPolicy,
) -> Result<PairingReport> {
    let minus = physical_modes(h_minus, thresholds.0, k + 1, policy);
    let plus = physical_modes(h_plus, thresholds.1, k, policy);
    let found = k.min(minus.values.len().saturating_sub(1)).min(plus.values.len());
    if found < k {
        warn!("only {found} of {k} partner pairs are bound below the box threshold");
    }
    let rows = (0..found)
        .map(|n| {
            let (em, ep) = (minus.values[n + 1], plus.values[n]);
            let deviation = (ep - em).abs();
            PairRow {
                n,
                e_minus: em,
                e_plus: ep,
                deviation,
                relative_deviation: deviation / em.abs().max(f64::MIN_POSITIVE),
            }
        })
        .collect();

    let grid = *a.grid();
    let mut intertwining: f64 = 0.0;
    let mut mapped_residual: f64 = 0.0;
    for (n, psi) in minus.states.iter().enumerate().take(found + 1) {
        let a_psi = a.apply(psi);
        let lhs = a.apply(&h_minus.apply(psi));
        let rhs = h_plus.apply(&a_psi);
        let d: Vec<f64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
        intertwining = intertwining.max(grid.norm(&d) / grid.norm(psi));
        if n > 0 {
            let e = minus.values[n];
            let r: Vec<f64> = rhs.iter().zip(&a_psi).map(|(x, y)| x - e * y).collect();
            mapped_residual = mapped_residual.max(grid.norm(&r) / grid.norm(&a_psi));
        }
    }
    let scale = a.matrix().inf_norm() * h_minus.matrix().inf_norm();
    Ok(PairingReport {
        e_minus: minus.values,
        e_plus: plus.values,
        rows,
        requested: k,
        intertwining,
        intertwining_relative: intertwining / scale,
        mapped_residual,
        rejected_minus: minus.rejected,
        rejected_plus: plus.rejected,
    })
}

/// `‖Aψ‖/‖ψ‖` on interior rows.
pub fn annihilation_defect(a: &GridOperator, psi: &GridWavefunction) -> f64 {
    let rows = a.interior(a.default_margin());
    a.grid().partial_norm(&a.apply(psi.samples()), rows) / psi.norm()
}

/// Inputs of a complete partner-spectrum analysis.
#[derive(Debug, Clone)]
pub struct SusyProblem {
    pub w: SuperpotentialField,
    /// Base potential `V` on the same grid.
    pub v: Vec<f64>,
    pub params: PhysParams,
    pub pairs: usize,
    pub policy: BoundaryPolicy,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Ground-state energy of `H`.
    pub epsilon0: f64,
    /// Lowest `pairs + 1` eigenvalues of `H`.
    pub e_base: Vec<f64>,
    pub pairing: PairingReport,
    pub annihilation: f64,
    pub commutator: f64,
    /// [`SusyError::GroundStateMismatch`] when `ψ₀` built from `W` is not the
    /// ground state of `H`; the two Hamiltonians are then unrelated.
    pub shift: Result<ShiftCheck>,
    /// For the matched partner; `None` when the shift check failed.
    pub invariance: Option<InvarianceCheck>,
    /// `W ≡ 0`: `H₊ = H₋` and the pairing only compares neighbouring levels
    /// of one spectrum.
    pub free: bool,
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
}

pub fn analyze(problem: &SusyProblem) -> Result<SpectrumReport> {
    let w = &problem.w;
    let grid = *w.grid();
    let params = problem.params;
    let psi0 = ground_state_from_w(w, params, problem.policy)?;
    let (a, adag) = ladder_operators(w, params)?;
    let (h_minus, h_plus) = partner_hamiltonians(&a, &adag)?;
    let partners = partner_potentials(w, params);
    // hard walls have no continuum edge
    let edge = |v: &[f64]| match problem.policy {
        BoundaryPolicy::RequireDecay => v[0].min(v[v.len() - 1]),
        BoundaryPolicy::FiniteBox => f64::INFINITY,
    };
    let pairing = pairing_report(
        &h_minus,
        &h_plus,
        &a,
        problem.pairs,
        (edge(&partners.v_minus), edge(&partners.v_plus)),
        problem.policy,
    )?;
    let h = base_hamiltonian(&problem.v, &grid, params)?;
    let shift = match shift_identity_check(&problem.v, w, params) {
        Err(e @ SusyError::GroundStateMismatch { .. }) => Err(e),
        other => Ok(other?),
    };
    let invariance = match &shift {
        Ok(sc) => {
            let partner = match sc.matched {
                Partner::Minus => &h_minus,
                Partner::Plus => &h_plus,
            };
            Some(invariance_check(&h, partner, sc.epsilon0)?)
        }
        Err(_) => None,
    };
    let mut base = LowestEigenpairs::new(h.matrix());
    let e_base: Vec<f64> = (0..=problem.pairs).map(|k| base.value(k)).collect();
    Ok(SpectrumReport {
        epsilon0: e_base[0],
        e_base,
        annihilation: annihilation_defect(&a, &psi0),
        commutator: commutator_defect(&a, &adag, w.w_prime(), params)?,
        pairing,
        shift,
        invariance,
        free: w.is_zero(),
        v_plus: partners.v_plus,
        v_minus: partners.v_minus,
    })
}
