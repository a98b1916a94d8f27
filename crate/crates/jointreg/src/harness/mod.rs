//! Simulation and reporting harness: seeded replicate grids over the three
//! generators, tau/skew-binned aggregation, runtime benchmarks and real-data
//! application fits, all emitting plot-ready CSV.

mod application;
mod bench;
mod config;
mod grid;
mod ingest;
pub mod io;
mod report;
mod run;

pub use application::{fit_application, write_application_csv, AppRow};
pub use bench::{
    benchmark_runtimes, default_bench_models, extreme_gamma_scenario, hardware_description,
    mean_times, write_bench_csv, BenchRow,
};
pub use config::SimConfig;
pub use grid::{default_models, ExperimentGrid, GeneratorKind, ModelKind};
pub use ingest::{ingest_csv, IngestReport};
pub use report::{
    aggregate_report, bic_winners_per_cell, read_records_csv, selection_summary, skew_bin,
    skew_bin_label, tau_bin, tau_bin_label, two_way_bias, write_records_csv, write_selection_csv,
    write_summary_csv, Axis, SelectionSummaryRow, SummaryRow, SKEW_BINS, TAU_BINS,
};
pub use run::{fit_model, mix_seed, run_grid, FitRecord, ScenarioReport};
