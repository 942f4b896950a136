//! Batch driver for the voting contract: honest elections, attack scenarios,
//! scaling sweeps and cost-model calibration.

pub mod config;
pub mod election;
pub mod sweep;

use std::path::Path;

use zkovn::ledger::{CostReport, Function, Rejection};

pub use config::{resolve_variant, RunConfig, Scenario, Schedule, VoteSpec};
pub use election::{run_attack, run_election, Election, RunReport};
pub use sweep::{calibration_run, recalibrate, scaling_sweep, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] zkovn::Error),
    #[error("ledger rejected a driver step: {0}")]
    Ledger(#[from] Rejection),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            _ => 2,
        }
    }
}

/// CSV label of a cost record: the function, plus the circuit for verifying keys.
pub fn cost_label(function: Function, detail: Option<&str>) -> String {
    match detail {
        Some(d) => format!("{function}:{d}"),
        None => function.to_string(),
    }
}

/// One row per (function, verifying key) with the most expensive accepted call.
pub fn cost_rows(n: usize, variant: &str, report: &CostReport) -> Vec<CostRow> {
    let mut rows: Vec<CostRow> = Vec::new();
    for r in &report.records {
        let label = cost_label(r.function, r.detail.as_deref());
        let row = CostRow {
            n,
            variant: variant.to_string(),
            function: label,
            statement_elems: r.statement_elems(),
            hash_calls: r.hash_calls(),
            model_cost: r.model_cost,
        };
        match rows.iter_mut().find(|x| x.function == row.function) {
            Some(x) if x.model_cost < row.model_cost => *x = row,
            Some(_) => {}
            None => rows.push(row),
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CostRow {
    pub n: usize,
    pub variant: String,
    pub function: String,
    pub statement_elems: u64,
    pub hash_calls: u64,
    pub model_cost: u64,
}

pub fn write_cost_csv(path: &Path, n: usize, variant: &str, report: &CostReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    for row in cost_rows(n, variant, report) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
