//! Experiment configuration, convergence sweeps and report emission.
//!
//! A run turns an [`ExperimentConfig`] into a [`RunOutput`]; [`write_run`] stores its
//! tables as CSV files with `#` header lines (run id, config hash, column units) next to a
//! JSON record holding the resolved configuration, summary values and fits.

pub mod config;
pub mod experiments;
pub mod output;
pub mod report;
pub mod sweep;

pub use config::{config_schema, Experiment, ExperimentConfig, FermiInitial, Packet};
pub use output::{parse_csv, render_csv, write_run, Column, RunOutput, RunRecord, Table, TableRecord};
pub use report::{emit_report, plot_script, ReportFiles, REPORT_JSON, REPORT_PLOT};
pub use sweep::{converge_hartree, converge_hf, ConvergenceReport, DISTANCE_FLOOR, SWEEP_BASIS_LIMIT};

use crate::error::Result;

/// Runs every kind except `report`, which reads existing runs instead of producing one.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match &cfg.experiment {
        Experiment::Scatter(p) => experiments::scatter(p),
        Experiment::Hartree(p) => experiments::hartree(p),
        Experiment::Gp(p) => experiments::gp(p),
        Experiment::Hf(p) => experiments::hf(p),
        Experiment::Exact(p) => experiments::exact(p),
        Experiment::ConvergeHartree(p) => Ok(converge_hartree(p)?.into_output("convergence", "1")),
        Experiment::ConvergeHf(p) => Ok(converge_hf(p)?.into_output("convergence", "1")),
        Experiment::Fluct(p) => experiments::fluct(p),
        Experiment::Tf(p) => experiments::tf(p),
        Experiment::Semiclass(p) => experiments::semiclass(p),
        Experiment::Bbgky(p) => experiments::bbgky(p, cfg.seed),
        Experiment::Report(_) => Err(crate::Error::Contract("report runs are handled by emit_report".into())),
    }
}
