//! Approximate linear optimizers: adjacent-swap local search, the two rank
//! greedy builders, and layer-wise partition search.

mod greedy;
mod partition;
mod swap;

pub use greedy::{greedy_i, greedy_ii};
pub use partition::{partition, CLUSTER_LIMIT};
pub use swap::swap_opt;

/// Tasks whose precedence predecessors all sit in `placed`.
pub(crate) fn eligible(flow: &crate::FlowSpec, placed: &fixedbitset::FixedBitSet) -> Vec<usize> {
    (0..flow.len())
        .filter(|&t| !placed.contains(t) && flow.pc().predecessors(t).is_subset(placed))
        .collect()
}
