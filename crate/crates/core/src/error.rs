use thiserror::Error;

use crate::flowcore::Violation;

/// Errors raised by flow construction and the optimizers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("precedence constraints contain a cycle through task index {0}")]
    Cycle(usize),
    #[error("unknown task {0}")]
    UnknownTask(u64),
    #[error("duplicate task id {0}")]
    DuplicateTask(u64),
    #[error("task {id}: {reason}")]
    InvalidTask { id: u64, reason: String },
    #[error("invalid plan: {}", describe(.0))]
    InvalidPlan(Vec<Violation>),
    #[error("{algorithm}: {n} tasks exceeds the size guard of {limit} (use force to override)")]
    SizeLimitExceeded {
        algorithm: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("partition cluster of {size} tasks exceeds the limit of {limit}")]
    ClusterTooLarge { size: usize, limit: usize },
    #[error("task index {0} has more than one parent; not a tree")]
    NotATree(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0} exceeded its time budget")]
    Timeout(&'static str),
}

fn describe(violations: &[Violation]) -> String {
    let shown: Vec<String> = violations.iter().take(5).map(|v| v.to_string()).collect();
    let mut s = shown.join("; ");
    if violations.len() > 5 {
        s.push_str(&format!("; ... ({} total)", violations.len()));
    }
    s
}

pub type Result<T, E = FlowError> = std::result::Result<T, E>;
