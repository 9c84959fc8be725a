use lvn_core::invariant::{
    assemble_solution, compute_phases, direct_schrodinger, project_initial, propagate_invariant,
    track_eigenframe, FrameOptions, PhaseOptions,
};
use lvn_core::models::CircularDrive;
use lvn_core::operator::pauli;
use lvn_core::{eigh, OperatorPath, StateVector, TimeGrid};

use crate::config::InvariantConfig;
use crate::report::{Check, RunReport, Table};
use crate::{Outcome, Result};

pub(crate) fn run(cfg: &InvariantConfig) -> Result<Outcome> {
    let drive = CircularDrive {
        splitting: cfg.splitting,
        coupling: cfg.coupling,
        drive_frequency: cfg.drive_frequency,
    };
    let seed = pauli::combination(cfg.seed);
    let grid = TimeGrid::spanning(0.0, cfg.t_end, cfg.steps)?;
    let h_path = drive.hamiltonian_path(grid)?;
    let inv = propagate_invariant(&h_path, &seed)?;
    let half = propagate_invariant(&drive.hamiltonian_path(grid.refined(2))?, &seed)?;

    let mut report = RunReport::new("invariant");
    let residual = inv.max_residual();
    report.check("invariant_residual", Check::le(residual, cfg.residual_tol));
    report.check("residual_halving_ratio", Check::ge(residual / half.max_residual(), cfg.order_ratio_min));
    report.check("spectrum_spread", Check::le(inv.sorted_spectrum_spread()?, cfg.spread_tol));

    let frame = track_eigenframe(&inv, FrameOptions::default())?;
    let phases = compute_phases(&frame, &h_path, PhaseOptions::default())?;
    let psi0 = StateVector::basis(2, 0);
    let lr = assemble_solution(&project_initial(&psi0, frame.frame(0))?, &phases, &frame)?;
    let direct = direct_schrodinger(&h_path, &psi0)?;
    let infidelity = lr
        .states
        .iter()
        .zip(&direct)
        .map(|(a, b)| 1.0 - a.fidelity(b))
        .fold(0.0, f64::max);
    report.check("lr_vs_direct_infidelity", Check::le(infidelity, cfg.fidelity_tol));

    // with H constant the invariant is H itself
    let h0 = drive.hamiltonian(grid.t0());
    let static_path = OperatorPath::constant(grid, &h0);
    let static_frame = track_eigenframe(&propagate_invariant(&static_path, &h0)?, FrameOptions::default())?;
    let static_phases = compute_phases(&static_frame, &static_path, PhaseOptions::default())?;
    let energies = eigh(&h0)?.values;
    let mut dynamic_dev: f64 = 0.0;
    let mut geometric: f64 = 0.0;
    for (n, e) in energies.iter().enumerate() {
        for k in 0..grid.len() {
            let t = grid.time(k) - grid.t0();
            dynamic_dev = dynamic_dev.max((static_phases.total[n][k] - e * t).abs());
            geometric = geometric.max(static_phases.geometric[n][k].abs());
        }
    }
    report.check("static_phase_deviation", Check::le(dynamic_dev, cfg.static_tol));
    report.check("static_geometric_phase", Check::le(geometric, cfg.static_tol));

    report.metric("residual_half_step", half.max_residual());
    report.metric("frame_spectrum_spread", frame.spectrum_spread());
    report.metric("min_consecutive_overlap", frame.min_consecutive_overlap());
    report.metric("phase_split_defect", phases.split_defect());
    report.metric("max_imag_dynamical", phases.max_imag.0);
    report.metric("max_imag_geometric", phases.max_imag.1);
    report.metric("lr_max_norm_defect", lr.max_norm_defect());
    for (n, g) in phases.geometric.iter().enumerate() {
        report.metric(&format!("final_geometric_phase_{n}"), g[g.len() - 1]);
    }

    let mut table = Table::new("phases.csv", "t,mode,phi_total,phi_dynamical,phi_geometric");
    for k in 0..grid.len() {
        for n in 0..phases.n_modes() {
            table.row_split(
                &[grid.time(k)],
                &[n],
                &[phases.total[n][k], phases.dynamical[n][k], phases.geometric[n][k]],
            );
        }
    }
    Ok(Outcome { report, tables: vec![table] })
}
