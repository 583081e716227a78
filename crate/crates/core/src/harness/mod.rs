//! Scenario configuration, oracle-versus-prediction runs, sweeps and reports.

pub mod config;
pub mod report;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use config::{Config, Constants, GridConfig, Model1dConfig, RegimeConfig, SweepAxis, SweepConfig};
pub use report::{emit_report, summary_csv, sweep_svg, Manifest, ReportFiles};
pub use run::{csv_row, load_runs, oracle_count, persist_run, prediction, run_scenario, RunOptions, RunReport, SUMMARY_HEADER};
pub use scenario::{PsiSpec, Scenario, ScenarioConfig, ScenarioKind};
pub use sweep::{point_config, summarize, sweep_and_fit, FitSummary, ModelComparison, SweepPoint};

#[cfg(test)]
mod tests;
