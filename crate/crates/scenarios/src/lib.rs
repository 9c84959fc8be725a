//! Configuration-driven scenarios over `lvn-core`, each writing CSV traces
//! and a JSON report with pass/fail checks into its own directory.

pub mod config;
mod invariant;
mod rabi;
mod reduce;
pub mod report;
mod susy;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{parse_config, ConfigError, KindConfig, ScenarioConfig};
pub use report::{Check, Comparison, FileEntry, RunReport, Table};

use lvn_core::density::DensityError;
use lvn_core::invariant::LrError;
use lvn_core::susy::SusyError;
use lvn_core::OperatorError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ScenarioError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => EXIT_CONFIG,
            ScenarioError::Numeric(_) => EXIT_NUMERIC,
            ScenarioError::Io { .. } => 1,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for ScenarioError {
            fn from(e: $t) -> Self {
                ScenarioError::Numeric(e.to_string())
            }
        }
    )*};
}

numeric_from!(DensityError, LrError, SusyError, OperatorError);

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// Checks, metrics and CSV tables of a finished run, before writing.
pub(crate) struct Outcome {
    pub report: RunReport,
    pub tables: Vec<Table>,
}

/// Runs the scenario and writes its outputs into `out`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    log::info!("running {} scenario into {}", cfg.kind(), out.display());
    let Outcome { mut report, tables } = match &cfg.params {
        KindConfig::Rabi(c) => rabi::run(c)?,
        KindConfig::Invariant(c) => invariant::run(c)?,
        KindConfig::Reduce(c) => reduce::run(c)?,
        KindConfig::Susy(c) => susy::run(c)?,
    };
    for w in &report.warnings {
        log::warn!("{w}");
    }
    report.duration_seconds = start.elapsed().as_secs_f64();
    report::write_outputs(out, &tables, &mut report)?;
    Ok(report)
}

/// Exit code of a finished run; failed checks only count with `check`.
pub fn exit_code(report: &RunReport, check: bool) -> i32 {
    if check && !report.passed() {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    }
}
