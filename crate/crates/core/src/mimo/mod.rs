//! Multiple-input multiple-output flows: the plan DAG is cut into linear
//! segments between branch and merge points and each segment is re-ordered
//! on its own.

mod shapes;

use std::fmt;
use std::str::FromStr;

use crate::error::{FlowError, Result};
use crate::exact::{backtracking_with, dynamic_programming_with, topsort_search, SearchLimits};
use crate::flowcore::{CostModel, FlowSpec, LinearPlan, Plan, PlanDag};
use crate::heuristics::{greedy_i, greedy_ii, partition, swap_opt};
use crate::parallel::parallelize;
use crate::rankorder::{kbz, ro_i, ro_ii, ro_iii, ConstraintTree};

pub use shapes::{butterfly, fork, linear_shape, MimoFlow, ShapeConfig};

/// A maximal chain of tasks with one input and one output each, hanging
/// between two boundary tasks (branch, merge, source or sink).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub members: Vec<usize>,
    pub boundary_in: usize,
    pub boundary_out: usize,
}

/// Optimizers that produce a linear plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearOptimizer {
    Backtracking,
    Dp,
    TopSort,
    Swap,
    GreedyI,
    GreedyII,
    Partition,
    Kbz,
    RoI,
    RoII,
    RoIII,
}

impl LinearOptimizer {
    pub const ALL: [LinearOptimizer; 11] = [
        Self::Backtracking,
        Self::Dp,
        Self::TopSort,
        Self::Swap,
        Self::GreedyI,
        Self::GreedyII,
        Self::Partition,
        Self::Kbz,
        Self::RoI,
        Self::RoII,
        Self::RoIII,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Backtracking => "backtracking",
            Self::Dp => "dp",
            Self::TopSort => "topsort",
            Self::Swap => "swap",
            Self::GreedyI => "greedy1",
            Self::GreedyII => "greedy2",
            Self::Partition => "partition",
            Self::Kbz => "kbz",
            Self::RoI => "ro1",
            Self::RoII => "ro2",
            Self::RoIII => "ro3",
        }
    }

    /// Runs the optimizer. `start` seeds swap (a random valid plan from
    /// `seed` otherwise); the others ignore it.
    pub fn optimize(
        self,
        flow: &FlowSpec,
        start: Option<&LinearPlan>,
        seed: u64,
        limits: &SearchLimits,
    ) -> Result<LinearPlan> {
        Ok(match self {
            Self::Backtracking => backtracking_with(flow, limits)?,
            Self::Dp => dynamic_programming_with(flow, limits)?,
            Self::TopSort => topsort_search(flow, limits)?.plan,
            Self::Swap => swap_opt(flow, start, seed)?,
            Self::GreedyI => greedy_i(flow),
            Self::GreedyII => greedy_ii(flow),
            Self::Partition => partition(flow)?,
            Self::Kbz => {
                let tree = ConstraintTree::new(flow.len(), &flow.pc().reduction())?;
                kbz(flow, &tree)?
            }
            Self::RoI => ro_i(flow),
            Self::RoII => ro_ii(flow),
            Self::RoIII => ro_iii(flow),
        })
    }
}

impl fmt::Display for LinearOptimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinearOptimizer {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| FlowError::Config(format!("unknown linear optimizer `{s}`")))
    }
}

fn is_inner(dag: &PlanDag, v: usize) -> bool {
    dag.in_degree(v) == 1 && dag.out_degree(v) == 1
}

/// Splits the DAG into its linear segments. Every task with exactly one
/// parent and one child belongs to exactly one segment; all other tasks are
/// boundaries. Segments come out ordered by their first member.
pub fn extract_segments(dag: &PlanDag, flow: &FlowSpec) -> Result<Vec<Segment>> {
    let v = dag.validate(flow);
    if !v.is_empty() {
        return Err(FlowError::InvalidPlan(v));
    }
    let parents = dag.parents();
    let children = dag.children();
    let mut segments = Vec::new();
    for &v in dag.nodes() {
        if !is_inner(dag, v) || is_inner(dag, parents[v][0]) {
            continue;
        }
        let mut members = vec![v];
        let mut last = v;
        while is_inner(dag, children[last][0]) {
            last = children[last][0];
            members.push(last);
        }
        segments.push(Segment {
            members,
            boundary_in: parents[v][0],
            boundary_out: children[last][0],
        });
    }
    segments.sort_by_key(|s| s.members[0]);
    Ok(segments)
}

/// Re-orders every segment with `inner`, keeping all boundaries in place.
/// With `parallel` set, each optimized segment is also parallelized.
///
/// Segment input cardinality scales every order of a segment alike, so each
/// segment is optimized as a standalone flow. Swap starts from the segment's
/// current order.
pub fn optimize_mimo(
    dag: &PlanDag,
    flow: &FlowSpec,
    inner: LinearOptimizer,
    model: &CostModel,
    parallel: bool,
    limits: &SearchLimits,
) -> Result<PlanDag> {
    let mut dag = dag.clone();
    loop {
        let segments = extract_segments(&dag, flow)?;
        for (k, seg) in segments.iter().enumerate() {
            let mut sorted = seg.members.clone();
            sorted.sort_unstable();
            let local = |t: usize| sorted.binary_search(&t).unwrap();
            let sub = flow.subflow(&sorted);
            let current = LinearPlan::new(seg.members.iter().map(|&t| local(t)).collect());
            let plan = inner.optimize(&sub, Some(&current), k as u64, limits)?;
            let piece = if parallel {
                parallelize(&plan, &sub, model)?
            } else {
                PlanDag::chain(&plan)
            };
            rewire(&mut dag, seg, &sorted, &piece);
        }
        if !factorize_distribute(&mut dag) {
            break;
        }
    }
    let v = dag.validate(flow);
    if !v.is_empty() {
        return Err(FlowError::InvalidPlan(v));
    }
    Ok(dag)
}

/// Replaces a segment's internal edges with `piece` (over local indices),
/// feeding its roots from the entry boundary and its leaves into the exit.
fn rewire(dag: &mut PlanDag, seg: &Segment, sorted: &[usize], piece: &PlanDag) {
    let mut chain = vec![seg.boundary_in];
    chain.extend(&seg.members);
    chain.push(seg.boundary_out);
    for w in chain.windows(2) {
        dag.remove_edge(w[0], w[1]);
    }
    for (a, b) in piece.edges() {
        dag.add_edge(sorted[a], sorted[b]);
    }
    for &l in piece.nodes() {
        if piece.in_degree(l) == 0 {
            dag.add_edge(seg.boundary_in, sorted[l]);
        }
        if piece.out_degree(l) == 0 {
            dag.add_edge(sorted[l], seg.boundary_out);
        }
    }
}

/// Moving tasks across merge and branch points is not supported, so the
/// segment loop always converges after one pass.
fn factorize_distribute(_dag: &mut PlanDag) -> bool {
    false
}
