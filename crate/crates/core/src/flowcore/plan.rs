use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FlowSpec;

/// A total order of task indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearPlan(Vec<usize>);

impl LinearPlan {
    pub fn new(order: Vec<usize>) -> Self {
        Self(order)
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub fn into_order(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// External task ids in plan order.
    pub fn ids(&self, flow: &FlowSpec) -> Vec<u64> {
        self.0.iter().map(|&i| flow.id_of(i)).collect()
    }
}

impl From<Vec<usize>> for LinearPlan {
    fn from(order: Vec<usize>) -> Self {
        Self(order)
    }
}

/// A general execution DAG: tasks may fan out to several consumers and merge
/// several producers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlanDag {
    nodes: Vec<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl PlanDag {
    pub fn new(nodes: Vec<usize>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            nodes,
            edges: edges.into_iter().collect(),
        }
    }

    /// The chain-shaped DAG of a linear plan.
    pub fn chain(plan: &LinearPlan) -> Self {
        let order = plan.order();
        Self::new(order.to_vec(), order.windows(2).map(|w| (w[0], w[1])))
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    pub fn add_node(&mut self, v: usize) {
        self.nodes.push(v);
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        self.edges.insert((a, b))
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        self.edges.remove(&(a, b))
    }

    fn bound(&self) -> usize {
        let node_max = self.nodes.iter().copied().max().map_or(0, |m| m + 1);
        let edge_max = self
            .edges
            .iter()
            .map(|&(a, b)| a.max(b) + 1)
            .max()
            .unwrap_or(0);
        node_max.max(edge_max)
    }

    /// Direct predecessors, indexed by task.
    pub fn parents(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.bound()];
        for &(a, b) in &self.edges {
            p[b].push(a);
        }
        p
    }

    /// Direct successors, indexed by task.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.bound()];
        for &(a, b) in &self.edges {
            c[a].push(b);
        }
        c
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(_, b)| b == v).count()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.range((v, 0)..(v + 1, 0)).count()
    }

    /// Nodes without an incoming edge, ascending.
    pub fn roots(&self) -> Vec<usize> {
        let has_parent: BTreeSet<usize> = self.edges.iter().map(|&(_, b)| b).collect();
        let mut r: Vec<usize> = self
            .nodes
            .iter()
            .copied()
            .filter(|v| !has_parent.contains(v))
            .collect();
        r.sort_unstable();
        r
    }

    /// Kahn order over the nodes (smallest ready index first), or `None` if
    /// the edges contain a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let bound = self.bound();
        let children = self.children();
        let mut indeg = vec![0usize; bound];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut present = vec![false; bound];
        for &v in &self.nodes {
            present[v] = true;
        }
        for &(a, b) in &self.edges {
            present[a] = true;
            present[b] = true;
        }
        let mut ready: BTreeSet<usize> = (0..bound)
            .filter(|&v| present[v] && indeg[v] == 0)
            .collect();
        let mut order = Vec::new();
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &children[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        let total = present.iter().filter(|&&p| p).count();
        (order.len() == total).then_some(order)
    }

    /// Strict ancestor sets for tasks `0..n`, or `None` on a cycle.
    pub fn ancestors(&self, n: usize) -> Option<Vec<FixedBitSet>> {
        let n = n.max(self.bound());
        let order = self.topological_order()?;
        let parents = self.parents();
        let mut anc = vec![FixedBitSet::with_capacity(n); n];
        for &v in &order {
            let mut set = FixedBitSet::with_capacity(n);
            for &p in &parents[v] {
                set.insert(p);
                set.union_with(&anc[p]);
            }
            anc[v] = set;
        }
        Some(anc)
    }
}

/// One reason a plan is not a valid execution of a flow.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Violation {
    /// `before` must precede `after` but does not.
    Precedence {
        before: usize,
        after: usize,
    },
    MissingTask(usize),
    DuplicateTask(usize),
    UnknownTask(usize),
    Cycle,
    /// The flow has a designated source yet this node is also a root.
    ExtraRoot(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Precedence { before, after } => {
                write!(f, "task #{before} must precede task #{after}")
            }
            Violation::MissingTask(t) => write!(f, "task #{t} is missing"),
            Violation::DuplicateTask(t) => write!(f, "task #{t} appears more than once"),
            Violation::UnknownTask(t) => write!(f, "task #{t} is not part of the flow"),
            Violation::Cycle => write!(f, "plan contains a cycle"),
            Violation::ExtraRoot(t) => write!(f, "task #{t} is a root besides the source"),
        }
    }
}

/// Membership check shared by both plan shapes.
pub(super) fn membership_violations(flow: &FlowSpec, nodes: &[usize]) -> Vec<Violation> {
    let n = flow.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for &v in nodes {
        if v >= n {
            out.push(Violation::UnknownTask(v));
        } else if seen[v] {
            out.push(Violation::DuplicateTask(v));
        } else {
            seen[v] = true;
        }
    }
    out.extend((0..n).filter(|&v| !seen[v]).map(Violation::MissingTask));
    out
}

pub(super) fn validate_linear(plan: &LinearPlan, flow: &FlowSpec) -> Vec<Violation> {
    let mut out = membership_violations(flow, plan.order());
    let n = flow.len();
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in plan.order().iter().enumerate() {
        if v < n && pos[v] == usize::MAX {
            pos[v] = i;
        }
    }
    for (a, b) in flow.pc().edges() {
        if pos[a] != usize::MAX && pos[b] != usize::MAX && pos[a] > pos[b] {
            out.push(Violation::Precedence {
                before: a,
                after: b,
            });
        }
    }
    out
}

pub(super) fn validate_dag(dag: &PlanDag, flow: &FlowSpec) -> Vec<Violation> {
    let n = flow.len();
    let mut out = membership_violations(flow, dag.nodes());
    let node_set: BTreeSet<usize> = dag.nodes().iter().copied().collect();
    for (a, b) in dag.edges() {
        for v in [a, b] {
            if !node_set.contains(&v) {
                let violation = Violation::UnknownTask(v);
                if !out.contains(&violation) {
                    out.push(violation);
                }
            }
        }
    }
    let Some(anc) = dag.ancestors(n) else {
        out.push(Violation::Cycle);
        return out;
    };
    for (a, b) in flow.pc().edges() {
        if node_set.contains(&a) && node_set.contains(&b) && !anc[b].contains(a) {
            out.push(Violation::Precedence {
                before: a,
                after: b,
            });
        }
    }
    if let Some(s) = flow.source() {
        out.extend(
            dag.roots()
                .into_iter()
                .filter(|&r| r != s)
                .map(Violation::ExtraRoot),
        );
    }
    out
}

/// A random topological order of the flow, fixed by `seed`. Every ready task
/// is equally likely to be picked next.
pub fn random_valid_plan(flow: &FlowSpec, seed: u64) -> LinearPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pc = flow.pc();
    let n = flow.len();
    let mut remaining: Vec<usize> = (0..n).map(|v| pc.predecessors(v).count_ones(..)).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&v| remaining[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    while !ready.is_empty() {
        let pick = ready.swap_remove(rng.random_range(0..ready.len()));
        order.push(pick);
        queue.extend(pc.successors(pick).ones());
        while let Some(w) = queue.pop_front() {
            remaining[w] -= 1;
            if remaining[w] == 0 {
                ready.push(w);
            }
        }
        // keep the candidate list in a canonical order so the draw depends on the seed only
        ready.sort_unstable();
    }
    LinearPlan(order)
}
