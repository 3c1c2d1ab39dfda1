//! Precedence-constraint graphs, stored transitively closed.
//!
//! Both directions of the closure are kept as bitsets so that "does `a` have
//! to run before `b`" is a single bit test, and the set of all prerequisites of
//! a task is available without a traversal.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use crate::error::{FlowError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceGraph {
    succ: Vec<FixedBitSet>,
    pred: Vec<FixedBitSet>,
}

/// Computes the minimal transitively closed superset of `edges` over `n`
/// nodes. Fails with [`FlowError::Cycle`] when the edges contain a cycle
/// (self-loops included).
pub fn transitive_closure(edges: &[(usize, usize)], n: usize) -> Result<PrecedenceGraph> {
    let mut direct = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(FlowError::UnknownTask(a.max(b) as u64));
        }
        if a == b {
            return Err(FlowError::Cycle(a));
        }
        direct[a].push(b);
        indeg[b] += 1;
    }

    // Kahn's algorithm; whatever is left over sits on a cycle.
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        topo.push(v);
        for &w in &direct[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if topo.len() < n {
        let stuck = (0..n).find(|&v| indeg[v] > 0).unwrap_or(0);
        return Err(FlowError::Cycle(stuck));
    }

    let mut succ = vec![FixedBitSet::with_capacity(n); n];
    for &v in topo.iter().rev() {
        let mut reach = FixedBitSet::with_capacity(n);
        for &w in &direct[v] {
            reach.insert(w);
            reach.union_with(&succ[w]);
        }
        succ[v] = reach;
    }
    Ok(PrecedenceGraph::from_successors(succ))
}

impl PrecedenceGraph {
    /// A graph over `n` tasks with no constraints.
    pub fn empty(n: usize) -> Self {
        Self {
            succ: vec![FixedBitSet::with_capacity(n); n],
            pred: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    fn from_successors(succ: Vec<FixedBitSet>) -> Self {
        let n = succ.len();
        let mut pred = vec![FixedBitSet::with_capacity(n); n];
        for (a, row) in succ.iter().enumerate() {
            for b in row.ones() {
                pred[b].insert(a);
            }
        }
        Self { succ, pred }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    /// True when `a` must run before `b`.
    #[inline]
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.succ[a].contains(b)
    }

    #[inline]
    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.precedes(a, b) || self.precedes(b, a)
    }

    /// All tasks that must precede `v`.
    pub fn predecessors(&self, v: usize) -> &FixedBitSet {
        &self.pred[v]
    }

    /// All tasks that must follow `v`.
    pub fn successors(&self, v: usize) -> &FixedBitSet {
        &self.succ[v]
    }

    /// Number of pairs in the closure.
    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(|s| s.count_ones(..)).sum()
    }

    /// Closure edges in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.ones().map(move |b| (a, b)))
            .collect()
    }

    /// Predecessor set of `v` as a bit mask. Only valid for graphs of at most
    /// 64 tasks.
    pub fn pred_mask(&self, v: usize) -> u64 {
        debug_assert!(self.len() <= 64);
        self.pred[v].ones().fold(0u64, |m, p| m | (1u64 << p))
    }

    /// Successor set of `v` as a bit mask (at most 64 tasks).
    pub fn succ_mask(&self, v: usize) -> u64 {
        debug_assert!(self.len() <= 64);
        self.succ[v].ones().fold(0u64, |m, s| m | (1u64 << s))
    }

    /// Adds the constraint `a -> b` and re-closes. Returns how many closure
    /// pairs were added.
    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<usize> {
        if a == b || self.precedes(b, a) {
            return Err(FlowError::Cycle(a));
        }
        if self.precedes(a, b) {
            return Ok(0);
        }
        let mut ups = self.pred[a].clone();
        ups.insert(a);
        let mut downs = self.succ[b].clone();
        downs.insert(b);
        let mut added = 0;
        for x in ups.ones() {
            added += downs.difference(&self.succ[x]).count();
            self.succ[x].union_with(&downs);
        }
        for y in downs.ones() {
            self.pred[y].union_with(&ups);
        }
        Ok(added)
    }

    /// Number of closure pairs that `add_edge(a, b)` would create.
    pub fn closure_increment(&self, a: usize, b: usize) -> usize {
        if self.precedes(a, b) {
            return 0;
        }
        let mut downs = self.succ[b].clone();
        downs.insert(b);
        let mut added = downs.difference(&self.succ[a]).count();
        for x in self.pred[a].ones() {
            added += downs.difference(&self.succ[x]).count();
        }
        added
    }

    /// Edges of the transitive reduction (the Hasse diagram).
    pub fn reduction(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, row) in self.succ.iter().enumerate() {
            for b in row.ones() {
                if self.succ[a].is_disjoint(&self.pred[b]) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Immediate predecessors of every task in the transitive reduction.
    pub fn reduced_parents(&self) -> Vec<Vec<usize>> {
        let mut parents = vec![Vec::new(); self.len()];
        for (a, b) in self.reduction() {
            parents[b].push(a);
        }
        parents
    }

    /// A topological order that always emits the smallest ready index first.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut remaining: Vec<usize> = self.pred.iter().map(|p| p.count_ones(..)).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&v| remaining[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for w in self.succ[v].ones() {
                remaining[w] -= 1;
                if remaining[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        order
    }

    /// The constraints among `members`, re-indexed by position in `members`.
    pub fn restrict(&self, members: &[usize]) -> PrecedenceGraph {
        let k = members.len();
        let mut succ = vec![FixedBitSet::with_capacity(k); k];
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate() {
                if self.precedes(a, b) {
                    succ[i].insert(j);
                }
            }
        }
        PrecedenceGraph::from_successors(succ)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closes_a_chain() {
        let g = transitive_closure(&[(0, 1), (1, 2)], 3).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn empty_input_gives_empty_closure() {
        let g = transitive_closure(&[], 5).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn two_cycle_is_rejected() {
        assert!(matches!(
            transitive_closure(&[(0, 1), (1, 0)], 2),
            Err(FlowError::Cycle(_))
        ));
        assert!(matches!(
            transitive_closure(&[(1, 1)], 2),
            Err(FlowError::Cycle(1))
        ));
    }

    #[test]
    fn out_of_range_endpoint() {
        assert!(matches!(
            transitive_closure(&[(0, 3)], 3),
            Err(FlowError::UnknownTask(3))
        ));
    }

    #[test]
    fn closure_is_idempotent() {
        let g = transitive_closure(&[(0, 1), (1, 3), (2, 3), (3, 4)], 5).unwrap();
        let again = transitive_closure(&g.edges(), 5).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn add_edge_counts_new_pairs() {
        let mut g = transitive_closure(&[(0, 1), (2, 3)], 4).unwrap();
        assert_eq!(g.closure_increment(1, 2), 4);
        assert_eq!(g.add_edge(1, 2).unwrap(), 4);
        assert_eq!(g.edge_count(), 6);
        assert!(g.precedes(0, 3));
        assert!(g.add_edge(3, 0).is_err());
        assert_eq!(g.add_edge(0, 2).unwrap(), 0);
    }

    #[test]
    fn reduction_drops_implied_edges() {
        let g = transitive_closure(&[(0, 1), (1, 2), (0, 2), (0, 3)], 4).unwrap();
        assert_eq!(g.reduction(), vec![(0, 1), (0, 3), (1, 2)]);
    }

    #[test]
    fn restrict_reindexes() {
        let g = transitive_closure(&[(0, 1), (1, 2)], 4).unwrap();
        let r = g.restrict(&[2, 0, 3]);
        assert!(r.precedes(1, 0));
        assert_eq!(r.edge_count(), 1);
    }
}
