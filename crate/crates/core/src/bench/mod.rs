//! Scenario configuration, the Monte Carlo runner and its CSV/SVG output.

mod config;
mod report;
mod runner;

pub use config::{Estimator, Placement, ScenarioConfig, DEFAULT_CONFIG_TOML, MAX_REFLECTION_ORDER};
pub use report::{
    emit_csv, emit_plot, emit_trials_csv, results_csv, scenario_svg, trials_csv, CSV_HEADER,
};
pub use runner::{
    run, run_scenario, scenarios, EstimatorOutcome, ResultRow, ResultsTable, RunOptions, RunOutput,
    Scenario, TrialRecord, EVM_CLAMP_DB,
};
