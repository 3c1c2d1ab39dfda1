//! Cost-based re-ordering of precedence-constrained data-flow tasks.
//!
//! A flow is a set of tasks, each with a cost per input tuple and a
//! selectivity, plus precedence constraints. The optimizers in this crate pick
//! an execution order (or a parallel DAG) minimizing the sum cost metric: the
//! total per-source-tuple work of the plan.

pub mod error;
pub mod exact;
pub mod flowcore;
pub mod generator;
pub mod heuristics;
pub mod mimo;
pub mod parallel;
pub mod rankorder;
pub mod workbench;

pub use error::{FlowError, Result};
pub use flowcore::{CostModel, FlowSpec, LinearPlan, Plan, PlanDag, Task};
