//! Optimal linear plans: exhaustive backtracking, subset dynamic programming
//! and enumeration of every linear extension of the precedence order.

mod backtracking;
mod dp;
mod topsort;

use std::time::Instant;

use crate::error::{FlowError, Result};
use crate::flowcore::FlowSpec;

pub use backtracking::{backtracking, backtracking_with, BACKTRACKING_LIMIT};
pub use dp::{dp_tables, dynamic_programming, dynamic_programming_with, DpTables, DP_LIMIT};
pub use topsort::{
    count_linear_extensions, for_each_linear_extension, topsort_enumerate, topsort_search,
    Enumeration,
};

/// Run-time controls shared by the exact algorithms.
#[derive(Debug, Clone, Copy, Default)]
pub struct SearchLimits {
    /// Ignore the size guard.
    pub force: bool,
    /// Give up with [`FlowError::Timeout`] once this instant has passed.
    pub deadline: Option<Instant>,
}

impl SearchLimits {
    pub fn forced() -> Self {
        Self {
            force: true,
            deadline: None,
        }
    }

    pub(crate) fn check_size(&self, algorithm: &'static str, n: usize, limit: usize) -> Result<()> {
        if n > 64 {
            // subset masks are u64
            return Err(FlowError::SizeLimitExceeded {
                algorithm,
                n,
                limit: 64,
            });
        }
        if !self.force && n > limit {
            return Err(FlowError::SizeLimitExceeded {
                algorithm,
                n,
                limit,
            });
        }
        Ok(())
    }

    pub(crate) fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

fn pred_masks(flow: &FlowSpec) -> Vec<u64> {
    (0..flow.len()).map(|t| flow.pc().pred_mask(t)).collect()
}

/// True if `a` should replace the incumbent `b`: strictly cheaper beyond the
/// relative tolerance, or tied and lexicographically smaller.
pub(crate) fn better(cost: f64, order: &[usize], best_cost: f64, best: &[usize]) -> bool {
    use crate::flowcore::REL_TOL;
    if cost < best_cost - REL_TOL * best_cost.abs() {
        return true;
    }
    cost <= best_cost + REL_TOL * best_cost.abs() && order < best
}
