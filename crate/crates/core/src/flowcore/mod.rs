//! Domain types for data flows: tasks, precedence constraints, plans, and the
//! sum cost metric (SCM).

mod cost;
mod graph;
mod plan;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

pub use cost::{dag_cost, input_cardinality_dag, input_cardinality_linear, linear_cost, Plan};
pub use graph::{transitive_closure, PrecedenceGraph};
pub use plan::{random_valid_plan, LinearPlan, PlanDag, Violation};

/// Two SCM values closer than this (relative) are considered equal.
pub const REL_TOL: f64 = 1e-9;

/// Minimum absolute SCM decrease for a local move to count as an improvement.
pub const IMPROVEMENT_EPS: f64 = 1e-12;

/// `a` and `b` agree within [`REL_TOL`].
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// One step of a data flow: cost per input tuple and selectivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub cost: f64,
    pub selectivity: f64,
}

impl Task {
    pub fn new(id: u64, cost: f64, selectivity: f64) -> Self {
        Self {
            id,
            label: None,
            cost,
            selectivity,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// `(1 - sel) / cost`: how much a task filters per unit of cost.
    pub fn rank(&self) -> f64 {
        (1.0 - self.selectivity) / self.cost
    }

    fn check(&self) -> Result<()> {
        let bad = |reason: &str| {
            Err(FlowError::InvalidTask {
                id: self.id,
                reason: reason.to_string(),
            })
        };
        if !(self.cost.is_finite() && self.cost > 0.0) {
            return bad("cost must be positive and finite");
        }
        if !(self.selectivity.is_finite() && self.selectivity > 0.0) {
            return bad("selectivity must be positive and finite");
        }
        Ok(())
    }
}

/// Per-tuple surcharge paid by a node that merges two or more input streams.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostModel {
    merge_cost: f64,
}

impl CostModel {
    pub fn new(merge_cost: f64) -> Result<Self> {
        if !(merge_cost.is_finite() && merge_cost >= 0.0) {
            return Err(FlowError::Config(format!(
                "merge cost must be a non-negative number, got {merge_cost}"
            )));
        }
        Ok(Self { merge_cost })
    }

    pub fn merge_cost(&self) -> f64 {
        self.merge_cost
    }
}

/// A task set together with its (closed) precedence graph.
///
/// Tasks are addressed internally by their index, which follows ascending
/// external id. When a source is designated it is made a prerequisite of every
/// other task; a designated sink is made to depend on every other task.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    tasks: Vec<Task>,
    pc: PrecedenceGraph,
    source: Option<usize>,
    sink: Option<usize>,
}

impl FlowSpec {
    /// Builds a flow from tasks and user-supplied constraints given as
    /// `(before_id, after_id)` pairs.
    pub fn new(
        mut tasks: Vec<Task>,
        constraints: &[(u64, u64)],
        source: Option<u64>,
        sink: Option<u64>,
    ) -> Result<Self> {
        tasks.sort_by_key(|t| t.id);
        for pair in tasks.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(FlowError::DuplicateTask(pair[0].id));
            }
        }
        for t in &tasks {
            t.check()?;
        }
        let index_of = |id: u64| {
            tasks
                .binary_search_by_key(&id, |t| t.id)
                .map_err(|_| FlowError::UnknownTask(id))
        };
        let mut edges = Vec::with_capacity(constraints.len());
        for &(a, b) in constraints {
            edges.push((index_of(a)?, index_of(b)?));
        }
        let source = source.map(index_of).transpose()?;
        let sink = sink.map(index_of).transpose()?;
        if source.is_some() && source == sink && tasks.len() > 1 {
            return Err(FlowError::Config("source and sink must differ".into()));
        }
        let n = tasks.len();
        if let Some(s) = source {
            edges.extend((0..n).filter(|&v| v != s).map(|v| (s, v)));
        }
        if let Some(t) = sink {
            edges.extend((0..n).filter(|&v| v != t).map(|v| (v, t)));
        }
        let pc = transitive_closure(&edges, n)?;
        Ok(Self {
            tasks,
            pc,
            source,
            sink,
        })
    }

    /// Builds a flow whose tasks are already in index order (ascending ids)
    /// from an existing precedence graph.
    pub fn from_parts(tasks: Vec<Task>, pc: PrecedenceGraph) -> Result<Self> {
        if tasks.len() != pc.len() {
            return Err(FlowError::Config(format!(
                "{} tasks but the precedence graph has {} nodes",
                tasks.len(),
                pc.len()
            )));
        }
        for pair in tasks.windows(2) {
            if pair[0].id >= pair[1].id {
                return Err(FlowError::Config(
                    "task ids must be strictly ascending".into(),
                ));
            }
        }
        for t in &tasks {
            t.check()?;
        }
        Ok(Self {
            tasks,
            pc,
            source: None,
            sink: None,
        })
    }

    /// Designates a source and/or sink by index, ordering it before (after)
    /// every other task.
    pub fn with_endpoints(mut self, source: Option<usize>, sink: Option<usize>) -> Result<Self> {
        if source.is_some() && source == sink && self.len() > 1 {
            return Err(FlowError::Config("source and sink must differ".into()));
        }
        for v in [source, sink].into_iter().flatten() {
            if v >= self.len() {
                return Err(FlowError::UnknownTask(v as u64));
            }
        }
        for v in 0..self.len() {
            if let Some(s) = source.filter(|&s| s != v) {
                self.pc.add_edge(s, v)?;
            }
            if let Some(t) = sink.filter(|&t| t != v) {
                self.pc.add_edge(v, t)?;
            }
        }
        self.source = source;
        self.sink = sink;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, index: usize) -> &Task {
        &self.tasks[index]
    }

    #[inline]
    pub fn cost(&self, index: usize) -> f64 {
        self.tasks[index].cost
    }

    #[inline]
    pub fn sel(&self, index: usize) -> f64 {
        self.tasks[index].selectivity
    }

    #[inline]
    pub fn rank(&self, index: usize) -> f64 {
        self.tasks[index].rank()
    }

    pub fn pc(&self) -> &PrecedenceGraph {
        &self.pc
    }

    pub fn source(&self) -> Option<usize> {
        self.source
    }

    pub fn sink(&self) -> Option<usize> {
        self.sink
    }

    pub fn index_of(&self, id: u64) -> Result<usize> {
        self.tasks
            .binary_search_by_key(&id, |t| t.id)
            .map_err(|_| FlowError::UnknownTask(id))
    }

    pub fn id_of(&self, index: usize) -> u64 {
        self.tasks[index].id
    }

    /// The flow restricted to `members`: task `i` of the result is the
    /// `i`-th smallest member. Source and sink designations are dropped.
    pub fn subflow(&self, members: &[usize]) -> FlowSpec {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        let tasks = sorted.iter().map(|&m| self.tasks[m].clone()).collect();
        FlowSpec {
            tasks,
            pc: self.pc.restrict(&sorted),
            source: None,
            sink: None,
        }
    }

    /// Every task with no prerequisite, in index order.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| self.pc.predecessors(v).is_clear())
            .collect()
    }
}
