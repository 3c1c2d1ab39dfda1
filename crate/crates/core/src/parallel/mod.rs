//! Parallel plans: a post-pass that fans out runs of expanding tasks, and
//! greedy builders that grow a plan DAG one task at a time.

mod cut;
mod parallelize;
mod pgreedy;

use serde::{Deserialize, Serialize};

use crate::flowcore::{CostModel, Task};

pub use cut::min_input_cut;
pub use parallelize::parallelize;
pub use pgreedy::{pgreedy_i, pgreedy_ii, pgreedy_observed, CutStep, PGreedyVariant};

/// Which of the four two-task situations a pair `a` then `b` falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    /// Both filter or keep: running them in sequence is cheaper.
    CaseI,
    /// `a` filters, `b` expands: sequence is cheaper.
    CaseII,
    /// Both expand: parallel is cheaper when merging is free.
    CaseIII,
    /// `a` expands, `b` filters: no fixed winner, though reordering gives
    /// Case I.
    CaseIV,
}

/// Classifies by whether each selectivity is at most 1. The merge cost does
/// not change the case, only how much Case III gains.
pub fn case_classifier(a: &Task, b: &Task, _model: &CostModel) -> Case {
    match (a.selectivity <= 1.0, b.selectivity <= 1.0) {
        (true, true) => Case::CaseI,
        (true, false) => Case::CaseII,
        (false, false) => Case::CaseIII,
        (false, true) => Case::CaseIV,
    }
}
