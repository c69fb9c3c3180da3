//! Scenario configuration, runs, parameter scans and export.

mod config;
mod exec;
pub mod export;
pub mod presets;
mod scan;
mod scenario;
mod table2;

pub use config::{
    parse_sign, ConfigError, ConfigMap, DelayCoupling, DetuningSource, DeviationSpec, ScenarioConfig,
    DEFAULT_SAMPLES,
};
pub use exec::{Execution, THREADS_ENV};
pub use export::ExportError;
pub use scan::{scan_grid, scan_preset, GridCell, Quantity, ScanAxis, ScanGrid, ScanParameter, ScanSpec, DEFAULT_GRID_CAP, SCAN_PRESETS};
pub use scenario::{design_options, effective_pulse, resolve_detuning, run_scenario, ScenarioRun, Summary};
pub use table2::{table2_report, trend_violations, DeviationRow, Table2Entry, REFERENCE_TABLE2};

use crate::design::DesignError;
use crate::propagate::PropagateError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Propagate(#[from] PropagateError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error("invalid scan: {0}")]
    InvalidScan(String),
}
