//! Data generation and the experiment drivers: base run, inventory matrix
//! and parameter sweeps.

mod matrix;
mod random;
mod run;
mod sweep;
mod synth;

pub use matrix::{inventory_matrix, InventoryCell, InventoryMatrixResult, MatrixCell, NESTING_TOL};
pub use random::{random_instance, CapMode, RandomOptions};
pub use run::{
    analyse, daily_certificate_revenue, run_scenario, RevenueBreakdown, ScenarioOptions,
    ScenarioResult,
};
pub use sweep::{
    default_grid, linear_grid, parameter_sweep, SweepPoint, SweepResult, DEFAULT_POINTS,
    MONOTONE_TOL, THREADS_VAR, TREND_TOL,
};
pub use synth::{synth_data, tou_band, SynthSpec};
