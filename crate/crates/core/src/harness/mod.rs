//! Scenarios, presets, deterministic parallel execution and result files.

mod output;
mod presets;
mod run;
mod scenario;

pub use output::{csv_string, emit, parse_csv, plotdata_strings, Bound, Curve, Format, ResultRow, BUILD_ID, CSV_COLUMNS};
pub use presets::{preset, PRESETS, TABLE_D};
pub use run::{run_point, run_scenario};
pub use scenario::{Experiment, Geometry, Mode, PowerRule, Scenario, Series, Sweep, SweepVar, MIN_RATE_TRIALS};
