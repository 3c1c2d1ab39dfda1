//! Operational surface: file formats, algorithm registry, benchmark and
//! overhead runners, DOT export and bundled flows.

pub mod algorithms;
pub mod bench;
pub mod datasets;
pub mod dot;
pub mod io;

use thiserror::Error;

use crate::error::FlowError;

pub use algorithms::{Algorithm, Input, RunContext};
pub use bench::{run_bench, run_overhead, BenchConfig, BenchReport, OverheadConfig, Shape};
pub use io::{load_document, load_flow, Document, FlowFile, LoadedFlow, PlanFile, PlanOutput};

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

impl WorkbenchError {
    /// Process exit status: 2 for unreadable input, 3 for cyclic constraints,
    /// 4 for size guards, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            WorkbenchError::Parse { .. } | WorkbenchError::Format(_) => 2,
            WorkbenchError::Flow(FlowError::Cycle(_)) => 3,
            WorkbenchError::Flow(
                FlowError::SizeLimitExceeded { .. } | FlowError::ClusterTooLarge { .. },
            ) => 4,
            _ => 1,
        }
    }
}
