//! Scenario documents, initial-profile presets, CSV writers and the mode drivers.

mod config;
mod driver;
mod output;
mod profiles;

pub use config::{parse_scenario, GridSpec, InitSpec, Mode, Scenario, StudySpec};
pub use driver::{
    build_grid, execute, initial_state, load_scenario, mesh_study, nu_sweep, simulate, smoothing_study,
    temporal_study, ConvergenceReport, DecayRow, NuRow, OrderRow, Outcome, RunSummary, Simulation,
    SmoothingRow, SteadySummary,
};
pub use output::{
    format_timeseries, read_snapshot, write_snapshot, write_timeseries, NA, TIMESERIES_COLUMNS,
};
pub use profiles::{read_nodal_csv, Profile, ProfileKind};
