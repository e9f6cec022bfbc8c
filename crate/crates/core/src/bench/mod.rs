//! Benchmark harness, reports and route plots.

mod config;
mod runner;
mod svg;

pub use config::{parse_key_values, ConfigError, RunConfig, SamplerChoice, Variant};
pub use runner::{
    deviation, emit_deviation_summary, make_resequencer, report_records, run_benchmark, run_once, write_run_outputs, BenchError,
    BenchReport, DeviationRow, DeviationSummary, ReportRow, RunOutcome, RunTiming,
};
pub use svg::{render_routes_svg, NoCoordinates};
