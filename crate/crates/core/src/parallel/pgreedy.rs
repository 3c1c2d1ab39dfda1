use fixedbitset::FixedBitSet;

use crate::flowcore::{CostModel, FlowSpec, PlanDag};

use super::cut::min_input_cut;

/// Selection rule for the greedy DAG builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PGreedyVariant {
    /// Cheapest next task: lowest `inp * cost`, plus the merge cost when it
    /// would join several streams.
    MinCost,
    /// Best filtering per unit of work: highest `(1 - sel) / (inp * cost)`.
    MaxRank,
}

/// One candidate evaluation during greedy construction.
#[derive(Debug, Clone, Copy)]
pub struct CutStep<'a> {
    /// The plan built so far.
    pub dag: &'a PlanDag,
    /// The candidate task.
    pub task: usize,
    /// Placed tasks that would feed it.
    pub cut: &'a [usize],
    /// Its input cardinality under that cut.
    pub inp: f64,
}

pub fn pgreedy_i(flow: &FlowSpec, model: &CostModel) -> PlanDag {
    pgreedy_observed(flow, model, PGreedyVariant::MinCost, |_| {})
}

pub fn pgreedy_ii(flow: &FlowSpec, model: &CostModel) -> PlanDag {
    pgreedy_observed(flow, model, PGreedyVariant::MaxRank, |_| {})
}

/// Grows a plan DAG one task at a time. Every task whose predecessors are
/// placed is scored under its cheapest cut, the best one (lowest index on
/// ties) is added with edges from its cut. `observe` sees every evaluation.
pub fn pgreedy_observed(
    flow: &FlowSpec,
    model: &CostModel,
    variant: PGreedyVariant,
    mut observe: impl FnMut(&CutStep),
) -> PlanDag {
    let n = flow.len();
    let mut dag = PlanDag::new(Vec::new(), []);
    let mut placed = FixedBitSet::with_capacity(n);
    while dag.nodes().len() < n {
        let mut best: Option<(usize, Vec<usize>, f64)> = None;
        for t in 0..n {
            if placed.contains(t) || !flow.pc().predecessors(t).is_subset(&placed) {
                continue;
            }
            let (cut, inp) = min_input_cut(flow, &dag, t);
            observe(&CutStep {
                dag: &dag,
                task: t,
                cut: &cut,
                inp,
            });
            let score = match variant {
                PGreedyVariant::MinCost => {
                    let merge = if cut.len() >= 2 {
                        model.merge_cost()
                    } else {
                        0.0
                    };
                    inp * (flow.cost(t) + merge)
                }
                PGreedyVariant::MaxRank => -(1.0 - flow.sel(t)) / (inp * flow.cost(t)),
            };
            if best.as_ref().is_none_or(|&(_, _, s)| score < s) {
                best = Some((t, cut, score));
            }
        }
        let (t, cut, _) = best.expect("acyclic flows always have an eligible task");
        dag.add_node(t);
        for c in cut {
            dag.add_edge(c, t);
        }
        placed.insert(t);
    }
    dag
}
