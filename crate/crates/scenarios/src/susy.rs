use lvn_core::numeric::observed_order;
use lvn_core::susy::{
    analyze, base_hamiltonian, ground_state_from_w, invariance_check, ladder_operators, partner_hamiltonians,
    shift_identity_check, BoundaryPolicy, InvarianceCheck, Partner, PhysParams, ShiftCheck, SpatialGrid,
    SuperpotentialField, SusyError, SusyProblem,
};

use crate::config::{BasePotential, Boundary, Superpotential, SusyConfig};
use crate::report::{Check, RunReport, Table};
use crate::{Outcome, Result};

fn sech2(x: f64) -> f64 {
    1.0 / x.cosh().powi(2)
}

fn superpotential(cfg: &SusyConfig, grid: SpatialGrid) -> Result<SuperpotentialField> {
    let l = cfg.lambda;
    Ok(match cfg.superpotential {
        Superpotential::Linear => SuperpotentialField::from_fn(grid, |x| l * x, |_| l)?,
        Superpotential::Tanh => SuperpotentialField::from_fn(grid, |x| l * x.tanh(), |x| l * sech2(x))?,
        Superpotential::Zero => SuperpotentialField::from_fn(grid, |_| 0.0, |_| 0.0)?,
    })
}

fn base_potential(cfg: &SusyConfig, grid: &SpatialGrid, s: f64) -> Vec<f64> {
    let l = cfg.lambda;
    match cfg.potential {
        BasePotential::Harmonic => grid.sample(|x| l * l * x * x),
        BasePotential::PoschlTeller => grid.sample(|x| -l * (l + s) * sech2(x)),
        BasePotential::Free => grid.sample(|_| 0.0),
    }
}

/// Closed-form `(V₋, V₊)` at `x`.
fn closed_partners(cfg: &SusyConfig, x: f64, s: f64) -> (f64, f64) {
    let l = cfg.lambda;
    match cfg.superpotential {
        Superpotential::Linear => (l * l * x * x - s * l, l * l * x * x + s * l),
        Superpotential::Tanh => (l * l - (l * l + s * l) * sech2(x), l * l + (s * l - l * l) * sech2(x)),
        Superpotential::Zero => (0.0, 0.0),
    }
}

/// Ground-state energy of `V` when `W` is its superpotential.
fn closed_epsilon0(cfg: &SusyConfig, s: f64) -> Option<f64> {
    match (cfg.superpotential, cfg.potential) {
        (Superpotential::Linear, BasePotential::Harmonic) if cfg.lambda > 0.0 => Some(s * cfg.lambda),
        (Superpotential::Tanh, BasePotential::PoschlTeller) if cfg.lambda > 0.0 => Some(-cfg.lambda * cfg.lambda),
        _ => None,
    }
}

#[allow(clippy::needless_range_loop)]
pub(crate) fn run(cfg: &SusyConfig) -> Result<Outcome> {
    let params = PhysParams::new(cfg.hbar, cfg.mass)?;
    let s = params.ladder_scale();
    let policy = match cfg.boundary {
        Boundary::Decay => BoundaryPolicy::RequireDecay,
        Boundary::Box => BoundaryPolicy::FiniteBox,
    };
    let grid = SpatialGrid::new(cfg.x_min, cfg.x_max, cfg.points)?;
    let w = superpotential(cfg, grid)?;
    let v = base_potential(cfg, &grid, s);
    let problem = SusyProblem { w: w.clone(), v: v.clone(), params, pairs: cfg.pairs, policy };
    let r = analyze(&problem)?;

    let mut report = RunReport::new("susy");
    if r.free {
        report.warnings.push("W is identically zero: H+ = H- and the pairing compares one spectrum with itself".into());
    }
    if r.pairing.rows.len() < cfg.pairs {
        report.warnings.push(format!(
            "only {} of {} requested pairs are bound below the box threshold",
            r.pairing.rows.len(),
            cfg.pairs
        ));
    }

    let partner_error = (0..grid.len())
        .map(|j| {
            let (m, p) = closed_partners(cfg, grid.x(j), s);
            (r.v_minus[j] - m).abs().max((r.v_plus[j] - p).abs())
        })
        .fold(0.0, f64::max);
    report.check("partner_potentials", Check::le(partner_error, cfg.potential_tol));
    report.check("annihilation", Check::le(r.annihilation, cfg.annihilation_tol));
    report.check("pairs_found", Check::ge(r.pairing.rows.len() as f64, cfg.pairs as f64));
    report.check("pair_deviation", Check::le(r.pairing.max_deviation(), cfg.pair_tol));
    match closed_epsilon0(cfg, s) {
        Some(e) => report.check("epsilon0", Check::le((r.epsilon0 - e).abs(), cfg.epsilon_tol)),
        None => report.warnings.push("no closed-form ground-state energy for this W and V".into()),
    }

    match (&r.shift, &r.invariance) {
        (Ok(shift), Some(inv)) => shift_checks(cfg, &mut report, shift, inv, params, s, grid)?,
        (Err(SusyError::GroundStateMismatch { overlap, threshold }), _) => {
            report.check("ground_state_overlap", Check::ge(*overlap, *threshold));
            report.warnings.push("psi0 from W is not the ground state of H; shift and invariance checks skipped".into());
        }
        (Err(e), _) => return Err(e.clone().into()),
        (Ok(_), None) => unreachable!("invariance accompanies a successful shift check"),
    }

    report.metric("epsilon0", r.epsilon0);
    report.metric("ladder_commutator_defect", r.commutator);
    report.metric("intertwining_relative", r.pairing.intertwining_relative);
    report.metric("mapped_residual", r.pairing.mapped_residual);
    report.metric("free", f64::from(u8::from(r.free)));
    report.metric("rejected_minus_modes", r.pairing.rejected_minus.len() as f64);
    report.metric("rejected_plus_modes", r.pairing.rejected_plus.len() as f64);
    report.metric("e_minus_0", r.pairing.e_minus.first().copied().unwrap_or(f64::NAN));

    let mut spectrum = Table::new("spectrum.csv", "n,E_minus,E_plus,pair_deviation");
    for row in &r.pairing.rows {
        spectrum.row(&[row.n], &[row.e_minus, row.e_plus, row.deviation]);
    }
    let psi0 = ground_state_from_w(&w, params, BoundaryPolicy::FiniteBox)?.normalized();
    let mut potentials = Table::new("potentials.csv", "x,V,V_minus,V_plus,W,psi0");
    for j in 0..grid.len() {
        potentials.row(&[], &[grid.x(j), v[j], r.v_minus[j], r.v_plus[j], w.w()[j], psi0.samples()[j]]);
    }
    Ok(Outcome { report, tables: vec![spectrum, potentials] })
}

/// Shift identity `V± = V − ε₀` and `[H_partner, H] = 0`, each also on the
/// grid with `dx` halved.
fn shift_checks(
    cfg: &SusyConfig,
    report: &mut RunReport,
    shift: &ShiftCheck,
    inv: &InvarianceCheck,
    params: PhysParams,
    s: f64,
    grid: SpatialGrid,
) -> Result<()> {
    let matched = shift.matched;
    report.check("shift_matching_partners", Check::eq(shift.matching(cfg.shift_tol).len() as f64, 1.0));
    report.check("shift_deviation", Check::le(shift.deviation(matched), cfg.shift_tol));

    let fine_grid = grid.refined();
    let fine_w = superpotential(cfg, fine_grid)?;
    let fine_v = base_potential(cfg, &fine_grid, s);
    let fine_shift = shift_identity_check(&fine_v, &fine_w, params)?;
    report.check(
        "shift_refinement_ratio",
        Check::ge(shift.deviation(matched) / fine_shift.deviation(matched), cfg.shift_ratio_min),
    );
    let (fa, fadag) = ladder_operators(&fine_w, params)?;
    let (fm, fp) = partner_hamiltonians(&fa, &fadag)?;
    let fine_h = base_hamiltonian(&fine_v, &fine_grid, params)?;
    let fine_partner = if matched == Partner::Minus { &fm } else { &fp };
    let fine_inv = invariance_check(&fine_h, fine_partner, fine_shift.epsilon0)?;
    let order = observed_order(inv.discretization_defect, fine_inv.discretization_defect);
    report.check("discretization_order", Check::ge(order, cfg.order_min));
    report.check("self_commutator_relative", Check::le(inv.self_commutator / inv.h_norm_sq, cfg.commutator_rel_tol));

    report.metric("ground_state_overlap", shift.overlap);
    report.metric("matched_partner_is_minus", f64::from(u8::from(matched == Partner::Minus)));
    report.metric("shift_deviation_plus", shift.plus_deviation);
    report.metric("shift_deviation_minus", shift.minus_deviation);
    report.metric("shift_deviation_fine", fine_shift.deviation(matched));
    report.metric("partner_commutator", inv.partner_commutator);
    report.metric("partner_commutator_relative", inv.partner_commutator / inv.commutator_scale);
    report.metric("discretization_defect", inv.discretization_defect);
    report.metric("discretization_defect_fine", fine_inv.discretization_defect);
    Ok(())
}
