//! Rank ordering: KBZ on tree-shaped precedence constraints and three ways of
//! applying it to arbitrary DAG constraints.

mod kbz;
mod wrappers;

use std::cmp::Ordering;

use crate::error::{FlowError, Result};
use crate::flowcore::FlowSpec;

pub use kbz::kbz;
pub use wrappers::{ro_i, ro_ii, ro_iii, ro_iii_from, RO_III_WINDOW};

/// A task, or a chain of tasks that must run back to back, treated as one
/// unit with aggregated cost and selectivity.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedNode {
    pub members: Vec<usize>,
    pub agg_cost: f64,
    pub agg_sel: f64,
    pub rank: f64,
}

impl RankedNode {
    pub fn single(flow: &FlowSpec, t: usize) -> Self {
        Self::from_parts(vec![t], flow.cost(t), flow.sel(t))
    }

    fn from_parts(members: Vec<usize>, agg_cost: f64, agg_sel: f64) -> Self {
        Self {
            members,
            agg_cost,
            agg_sel,
            rank: (1.0 - agg_sel) / agg_cost,
        }
    }

    /// `self` followed by `next`.
    pub fn merge(mut self, next: RankedNode) -> Self {
        let cost = self.agg_cost + self.agg_sel * next.agg_cost;
        let sel = self.agg_sel * next.agg_sel;
        self.members.extend(next.members);
        Self::from_parts(self.members, cost, sel)
    }

    /// Descending rank, ties broken by the smaller first member.
    fn order(&self, other: &Self) -> Ordering {
        other
            .rank
            .total_cmp(&self.rank)
            .then_with(|| self.members[0].cmp(&other.members[0]))
    }
}

/// A rooted forest over task indices: every node has at most one parent.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintTree {
    parent: Vec<Option<usize>>,
}

impl ConstraintTree {
    /// Builds the forest from parent-to-child edges over `n` nodes.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut parent = vec![None; n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(FlowError::UnknownTask(a.max(b) as u64));
            }
            if parent[b].is_some_and(|p| p != a) {
                return Err(FlowError::NotATree(b));
            }
            parent[b] = Some(a);
        }
        let tree = Self { parent };
        // walking up from any node must end at a root
        for v in 0..n {
            let mut u = v;
            for _ in 0..=n {
                match tree.parent[u] {
                    Some(p) => u = p,
                    None => break,
                }
            }
            if tree.parent[u].is_some() {
                return Err(FlowError::Cycle(v));
            }
        }
        Ok(tree)
    }

    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self> {
        let edges: Vec<_> = parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (p, v)))
            .collect();
        Self::new(parent.len(), &edges)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(v);
            }
        }
        ch
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&v| self.parent[v].is_none())
            .collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (p, v)))
            .collect()
    }
}
