use lvn_core::invariant::{
    check_reduced_diagonal, compute_phases, track_path, unitary_reduce, FrameOptions, InvariantPath, PhaseOptions,
};
use lvn_core::models::CircularDrive;
use lvn_core::{ComplexMatrix, OperatorPath, TimeGrid};

use crate::config::{ReduceConfig, ReductionFrame};
use crate::report::{Check, RunReport, Table};
use crate::{Outcome, Result};

pub(crate) fn run(cfg: &ReduceConfig) -> Result<Outcome> {
    let drive = CircularDrive {
        splitting: cfg.splitting,
        coupling: cfg.coupling,
        drive_frequency: cfg.drive_frequency,
    };
    let grid = TimeGrid::spanning(0.0, cfg.t_end, cfg.steps)?;
    let h_path = drive.hamiltonian_path(grid)?;
    let i_path = drive.invariant_path(grid)?;
    let v_path = match cfg.frame {
        ReductionFrame::Rotating => drive.frame_path(grid)?,
        ReductionFrame::Lab => OperatorPath::constant(grid, &ComplexMatrix::identity(2)),
    };

    let red = unitary_reduce(&v_path, &i_path, &h_path)?;
    let diag = check_reduced_diagonal(&red, &red.eigenbasis()?);
    let frame = track_path(&i_path, FrameOptions::default())?;
    let phases = compute_phases(&frame, &h_path, PhaseOptions::default())?;
    let mismatch = diag.phase_mismatch(&phases, &frame, &v_path)?;

    let mut report = RunReport::new("reduce");
    report.check("i_v_variation", Check::le(red.i_v_variation, cfg.variation_tol));
    report.check("h_v_off_diagonal", Check::le(diag.off_diagonal_defect, cfg.off_diagonal_tol));
    report.check(
        "phase_mismatch",
        Check::le(mismatch.iter().copied().fold(0.0, f64::max), cfg.phase_tol),
    );
    report.metric("h_v_hermitian_defect", red.h_v_hermitian_defect);
    report.metric(
        "invariant_residual",
        InvariantPath::from_samples(i_path.clone(), &h_path)?.max_residual(),
    );
    for (n, m) in mismatch.iter().enumerate() {
        report.metric(&format!("phase_mismatch_{n}"), *m);
    }

    let mut table = Table::new("reduction.csv", "t,mode,d_n,integrated_d_n,phi_total");
    for k in 0..grid.len() {
        for n in 0..diag.diagonals.len() {
            table.row_split(
                &[grid.time(k)],
                &[n],
                &[diag.diagonals[n][k], diag.integrated[n][k], phases.total[n][k]],
            );
        }
    }
    Ok(Outcome { report, tables: vec![table] })
}
