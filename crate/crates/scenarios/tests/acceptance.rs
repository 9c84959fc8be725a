//! Acceptance criteria over the reference scenarios. Prints one PASS/FAIL
//! line per criterion and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use lvn_scenarios::report::sha256_hex;
use lvn_scenarios::{run_scenario, RunReport, ScenarioConfig};

struct Run {
    dir: PathBuf,
    report: RunReport,
}

impl Run {
    fn check(&self, name: &str) -> f64 {
        match self.report.checks.get(name) {
            Some(c) => c.value,
            None => f64::NAN,
        }
    }

    fn metric(&self, name: &str) -> f64 {
        self.report.metrics.get(name).copied().unwrap_or(f64::NAN)
    }

    fn csv(&self, name: &str) -> Vec<Vec<f64>> {
        let body = fs::read_to_string(self.dir.join(name)).expect("csv written");
        body.lines()
            .skip(1)
            .map(|l| l.split(',').map(|c| c.parse().expect("numeric cell")).collect())
            .collect()
    }

    /// File name → sha256 of every CSV, plus the report payload.
    fn hashes(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> = self
            .report
            .files
            .iter()
            .map(|f| (f.path.clone(), sha256_hex(&fs::read(self.dir.join(&f.path)).expect("file written"))))
            .collect();
        out.insert("report".into(), sha256_hex(self.report.payload().as_bytes()));
        out
    }
}

fn run(kind: &str, root: &Path, tag: &str) -> Run {
    let cfg = ScenarioConfig::reference(kind).expect("known kind");
    let dir = root.join(format!("{kind}_{tag}"));
    let report = run_scenario(&cfg, &dir).unwrap_or_else(|e| panic!("{kind} scenario failed: {e}"));
    Run { dir, report }
}

/// One criterion: every `(label, value, ok)` part must hold.
struct Criterion {
    id: usize,
    title: &'static str,
    parts: Vec<(String, f64, bool)>,
}

impl Criterion {
    fn new(id: usize, title: &'static str) -> Self {
        Self { id, title, parts: Vec::new() }
    }

    fn le(mut self, label: &str, value: f64, tol: f64) -> Self {
        self.parts.push((format!("{label} <= {tol:e}"), value, value <= tol));
        self
    }

    fn ge(mut self, label: &str, value: f64, min: f64) -> Self {
        self.parts.push((format!("{label} >= {min}"), value, value >= min));
        self
    }

    fn holds(mut self, label: &str, value: f64, ok: bool) -> Self {
        self.parts.push((label.to_string(), value, ok));
        self
    }

    fn pass(&self) -> bool {
        self.parts.iter().all(|p| p.2)
    }

    fn print(&self) {
        let status = if self.pass() { "PASS" } else { "FAIL" };
        let detail: Vec<String> = self
            .parts
            .iter()
            .map(|(l, v, ok)| format!("{l}: {v:.3e}{}", if *ok { "" } else { " [x]" }))
            .collect();
        println!("{status} {:>2} {}: {}", self.id, self.title, detail.join("; "));
    }
}

fn main() -> ExitCode {
    let root = tempfile::tempdir().expect("temp dir");
    let rabi = run("rabi", root.path(), "a");
    let inv = run("invariant", root.path(), "a");
    let red = run("reduce", root.path(), "a");
    let susy = run("susy", root.path(), "a");

    let traces = rabi.csv("rabi_traces.csv");
    let closed = traces.iter().map(|r| (r[1] - r[0].cos().powi(2)).abs()).fold(0.0, f64::max);
    let t_end = traces.last().map(|r| r[0]).unwrap_or(0.0);

    let spectrum = susy.csv("spectrum.csv");
    let pair_dev = spectrum.iter().map(|r| (r[2] - r[1]).abs()).fold(0.0, f64::max);
    let ladder_dev = spectrum
        .iter()
        .map(|r| (r[1] - 2.0 * (r[0] + 1.0)).abs().max((r[2] - 2.0 * (r[0] + 1.0)).abs()))
        .fold(0.0, f64::max);

    let order = susy.check("discretization_order");

    let mut deterministic = true;
    for first in [&rabi, &inv, &red, &susy] {
        let again = run(&first.report.kind, root.path(), "b");
        let (a, b) = (first.hashes(), again.hashes());
        if a != b || a.len() < 2 {
            deterministic = false;
        }
    }

    let criteria = [
        Criterion::new(1, "Rabi closed form")
            .le("max|rho_aa - cos^2 t|", closed, 1e-6)
            .le("dt/10 self-convergence", rabi.check("refinement_deviation"), 1e-6)
            .holds("span reaches 2pi", t_end, (t_end - std::f64::consts::TAU).abs() < 1e-12)
            .holds("dt", rabi.metric("dt"), rabi.metric("dt") <= 1e-3),
        Criterion::new(2, "Conservation guards")
            .le("trace drift", rabi.check("trace_drift"), 1e-10)
            .le("hermiticity defect", rabi.check("hermiticity_defect"), 1e-10)
            .le("purity drift", rabi.check("purity_drift"), 1e-8),
        Criterion::new(3, "Invariant residual")
            .le("max residual (1000 steps)", inv.check("invariant_residual"), 1e-6)
            .ge("dt-halving ratio", inv.check("residual_halving_ratio"), 3.5),
        Criterion::new(4, "Spectrum constancy").le("eigenvalue spread", inv.check("spectrum_spread"), 1e-10),
        Criterion::new(5, "LR solution fidelity")
            .le("1 - |<LR|direct>|", inv.check("lr_vs_direct_infidelity"), 1e-8)
            .le("static |phi - E t|", inv.check("static_phase_deviation"), 1e-10)
            .le("static geometric", inv.check("static_geometric_phase"), 1e-10),
        Criterion::new(6, "Unitary reduction")
            .le("I_V variation", red.check("i_v_variation"), 1e-8)
            .le("H_V off-diagonal", red.check("h_v_off_diagonal"), 1e-8)
            .le("int d_n - phi_n", red.check("phase_mismatch"), 1e-6),
        Criterion::new(7, "SUSY oscillator")
            .le("V+- vs x^2 +- 1", susy.check("partner_potentials"), 1e-12)
            .le("|A psi0|/|psi0|", susy.check("annihilation"), 1e-6)
            .holds("pairs", spectrum.len() as f64, spectrum.len() == 5)
            .le("|E+_n - E-_n+1|", pair_dev, 1e-3)
            .le("|E - 2(n+1)|", ladder_dev, 1e-2)
            .le("|eps0 - 1|", (susy.metric("epsilon0") - 1.0).abs(), 1e-4),
        Criterion::new(8, "Shift identity and invariance")
            .holds("matching partners", susy.check("shift_matching_partners"), susy.check("shift_matching_partners") == 1.0)
            .le("matched deviation", susy.check("shift_deviation"), 1e-4)
            .ge("dx-halving ratio", susy.check("shift_refinement_ratio"), 4.0)
            .le("|[H - eps0, H]| / |H|^2", susy.check("self_commutator_relative"), 1e-12)
            .holds("order of |A+A - (H - eps0)|", order, (1.8..=2.2).contains(&order)),
        Criterion::new(9, "Cross-formalism consistency")
            .le("rho(LvN) vs |psi_direct>", rabi.check("lvn_vs_direct"), 1e-7)
            .le("rho(LvN) vs |psi_LR>", rabi.check("lvn_vs_lr"), 1e-7)
            .le("1 - |<LR|direct>|", rabi.check("lr_vs_direct_infidelity"), 1e-7),
        Criterion::new(10, "Determinism").holds("CSV and report hashes equal", 0.0, deterministic),
    ];

    let mut failed = 0;
    for c in &criteria {
        c.print();
        if !c.pass() {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
