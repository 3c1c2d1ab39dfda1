use crate::error::{FlowError, Result};
use crate::flowcore::{FlowSpec, LinearPlan, REL_TOL};

use super::{pred_masks, SearchLimits};

/// Default size guard for [`backtracking`].
pub const BACKTRACKING_LIMIT: usize = 12;

/// Exhaustive depth-first search over valid orderings; returns the cheapest,
/// lexicographically smallest among ties.
pub fn backtracking(flow: &FlowSpec) -> Result<LinearPlan> {
    backtracking_with(flow, &SearchLimits::default())
}

pub fn backtracking_with(flow: &FlowSpec, limits: &SearchLimits) -> Result<LinearPlan> {
    let n = flow.len();
    limits.check_size("backtracking", n, BACKTRACKING_LIMIT)?;
    let mut search = Search {
        flow,
        preds: pred_masks(flow),
        limits,
        order: Vec::with_capacity(n),
        best: Vec::new(),
        best_cost: f64::INFINITY,
        leaves: 0,
        timed_out: false,
    };
    search.descend(0, 0.0, 1.0);
    if search.timed_out {
        return Err(FlowError::Timeout("backtracking"));
    }
    Ok(LinearPlan::new(search.best))
}

struct Search<'a> {
    flow: &'a FlowSpec,
    preds: Vec<u64>,
    limits: &'a SearchLimits,
    order: Vec<usize>,
    best: Vec<usize>,
    best_cost: f64,
    leaves: u64,
    timed_out: bool,
}

impl Search<'_> {
    fn descend(&mut self, placed: u64, cost: f64, inp: f64) {
        if self.timed_out {
            return;
        }
        let n = self.flow.len();
        if self.order.len() == n {
            self.leaves += 1;
            if self.leaves.is_multiple_of(4096) && self.limits.expired() {
                self.timed_out = true;
            }
            // ascending DFS visits ties in lexicographic order, so keep the first
            if cost < self.best_cost - REL_TOL * self.best_cost.abs() || self.best.is_empty() {
                self.best_cost = cost;
                self.best.clone_from(&self.order);
            }
            return;
        }
        for t in 0..n {
            let bit = 1u64 << t;
            if placed & bit != 0 || self.preds[t] & !placed != 0 {
                continue;
            }
            self.order.push(t);
            self.descend(
                placed | bit,
                cost + inp * self.flow.cost(t),
                inp * self.flow.sel(t),
            );
            self.order.pop();
        }
    }
}
