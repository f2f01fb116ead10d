//! Experiment orchestration: JSON configs, resumable batch runs persisted as
//! JSON lines, human-data ingestion and report emission.

mod bargaining;
mod config;
mod ingest;
mod persist;
mod report;
mod tasks;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agent::AgentError;
use crate::bargaining::BargainingError;
use crate::focal::FocalError;
use crate::tasks::TaskError;

pub use bargaining::{run_bargaining_experiment, IterationRecord, SeatRecord};
pub use config::{
    AgentBinding, AgentSpec, BargainingExperimentConfig, ExperimentConfig, RoleBinding,
    TaskExperimentConfig,
};
pub use ingest::{
    ingest_human_data, load_human_history, parse_human_history, HumanHistory, HumanRecord,
    IngestKind, Ingested,
};
pub use persist::{read_records, Record};
pub use report::{
    bargaining_report, emit_report, task_report, write_report, Cell, ReportBundle, ReportOptions,
    Table,
};
pub use tasks::run_task_experiment;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config: {0}")]
    Config(String),
    #[error("ingestion: {0}")]
    Ingest(String),
    #[error("no records to report")]
    EmptyInput,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Record {
        path: String,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Bargaining(#[from] BargainingError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Focal(#[from] FocalError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl RunnerError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        RunnerError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit code: 2 for bad configs or input data, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Config(_)
            | RunnerError::Ingest(_)
            | RunnerError::EmptyInput
            | RunnerError::Record { .. }
            | RunnerError::Task(_)
            | RunnerError::Bargaining(_)
            | RunnerError::Focal(_)
            | RunnerError::Agent(AgentError::Config(_) | AgentError::Policy(_)) => 2,
            _ => 1,
        }
    }
}

/// Test hooks for batch runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Stop after persisting this many new records, as if the process were
    /// killed.
    pub stop_after: Option<usize>,
}

/// Outcome counts of one invocation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    /// Records found in the output file before this invocation.
    pub resumed: usize,
    /// Work items started in this invocation.
    pub issued: usize,
    /// Records appended in this invocation.
    pub persisted: usize,
    /// Items that produced no record, with reasons.
    pub failures: Vec<String>,
    /// Records marked failed (kept in the file but excluded from metrics).
    pub failed_records: usize,
    /// The run stopped before covering every item.
    pub incomplete: bool,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.incomplete || !self.failures.is_empty() || self.failed_records > 0 {
            1
        } else {
            0
        }
    }
}

/// Stable 64-bit seed from a base seed and identifying parts.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
