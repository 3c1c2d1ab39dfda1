use fixedbitset::FixedBitSet;

use crate::error::{FlowError, Result};
use crate::exact::{backtracking_with, SearchLimits};
use crate::flowcore::{FlowSpec, LinearPlan};

use super::eligible;

/// Largest cluster [`partition`] will search exhaustively.
pub const CLUSTER_LIMIT: usize = 10;

/// Splits the flow into eligibility layers (each layer holds the tasks whose
/// predecessors all lie in earlier layers), orders every layer by exhaustive
/// search and concatenates the layers.
///
/// The incoming selectivity product scales every ordering of a layer alike,
/// so each layer is searched on unit input.
pub fn partition(flow: &FlowSpec) -> Result<LinearPlan> {
    let n = flow.len();
    let mut placed = FixedBitSet::with_capacity(n);
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let cluster = eligible(flow, &placed);
        if cluster.len() > CLUSTER_LIMIT {
            return Err(FlowError::ClusterTooLarge {
                size: cluster.len(),
                limit: CLUSTER_LIMIT,
            });
        }
        let sub = flow.subflow(&cluster);
        let inner = backtracking_with(&sub, &SearchLimits::forced())?;
        for &k in inner.order() {
            order.push(cluster[k]);
        }
        for &t in &cluster {
            placed.insert(t);
        }
    }
    Ok(LinearPlan::new(order))
}
