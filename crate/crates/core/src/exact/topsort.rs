use fixedbitset::FixedBitSet;

use crate::error::{FlowError, Result};
use crate::flowcore::{linear_cost, FlowSpec, LinearPlan};

use super::{better, SearchLimits};

/// Outcome of a full enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub plan: LinearPlan,
    pub cost: f64,
    /// Number of linear extensions visited.
    pub visited: u64,
}

/// Walks every linear extension of the precedence order exactly once by
/// adjacent swaps and cyclic rotations (Varol and Rotem).
///
/// Objects are relabelled by an initial topological order so that label `i`
/// can only sit at positions `>= i`.
struct Walker {
    /// `task_of[l]` is the task carrying label `l`.
    task_of: Vec<usize>,
    /// `after[a]` holds the labels that must come after label `a`.
    after: Vec<FixedBitSet>,
    /// Labels by position.
    p: Vec<usize>,
    loc: Vec<usize>,
    i: usize,
    /// Positions permuted since the last emitted extension.
    dirty: Option<(usize, usize)>,
}

impl Walker {
    fn new(flow: &FlowSpec) -> Self {
        let n = flow.len();
        let task_of = flow.pc().topological_order();
        let mut label = vec![0; n];
        for (l, &t) in task_of.iter().enumerate() {
            label[t] = l;
        }
        let after = task_of
            .iter()
            .map(|&t| {
                let mut s = FixedBitSet::with_capacity(n);
                for u in flow.pc().successors(t).ones() {
                    s.insert(label[u]);
                }
                s
            })
            .collect();
        Self {
            task_of,
            after,
            p: (0..n).collect(),
            loc: (0..n).collect(),
            i: 0,
            dirty: None,
        }
    }

    fn touch(&mut self, lo: usize, hi: usize) {
        self.dirty = Some(match self.dirty {
            Some((a, b)) => (a.min(lo), b.max(hi)),
            None => (lo, hi),
        });
    }

    /// Moves to the next extension. Returns false once all have been seen.
    fn advance(&mut self) -> bool {
        let n = self.p.len();
        while self.i + 1 < n {
            let i = self.i;
            let k = self.loc[i];
            if k + 1 < n && !self.after[i].contains(self.p[k + 1]) {
                let other = self.p[k + 1];
                self.p.swap(k, k + 1);
                self.loc[i] = k + 1;
                self.loc[other] = k;
                self.i = 0;
                self.touch(k, k + 1);
                return true;
            }
            // move label i back to position i, shifting the block right
            for l in (i + 1..=k).rev() {
                self.p[l] = self.p[l - 1];
                self.loc[self.p[l]] = l;
            }
            self.p[i] = i;
            self.loc[i] = i;
            if k > i {
                self.touch(i, k);
            }
            self.i += 1;
        }
        false
    }

    fn take_dirty(&mut self) -> Option<(usize, usize)> {
        self.dirty.take()
    }

    fn tasks(&self, out: &mut [usize]) {
        for (slot, &l) in out.iter_mut().zip(&self.p) {
            *slot = self.task_of[l];
        }
    }
}

/// Calls `visit` with every valid ordering of the flow (as task indices).
pub fn for_each_linear_extension(flow: &FlowSpec, mut visit: impl FnMut(&[usize])) {
    let mut w = Walker::new(flow);
    let mut buf = vec![0; flow.len()];
    loop {
        w.tasks(&mut buf);
        visit(&buf);
        if !w.advance() {
            break;
        }
    }
}

/// Number of valid orderings of the flow.
pub fn count_linear_extensions(flow: &FlowSpec) -> u64 {
    let mut w = Walker::new(flow);
    let mut count = 1;
    while w.advance() {
        count += 1;
    }
    count
}

/// Minimum-SCM plan over every linear extension.
pub fn topsort_enumerate(flow: &FlowSpec) -> Result<LinearPlan> {
    Ok(topsort_search(flow, &SearchLimits::default())?.plan)
}

/// Enumerates all linear extensions, updating the SCM incrementally: between
/// consecutive extensions only a block of positions is permuted, so only the
/// cost terms inside that block change.
pub fn topsort_search(flow: &FlowSpec, limits: &SearchLimits) -> Result<Enumeration> {
    let n = flow.len();
    let mut w = Walker::new(flow);
    let mut order = vec![0; n];
    w.tasks(&mut order);
    // inp[k] is the input cardinality at position k; term[k] its cost share
    let mut inp = vec![1.0; n + 1];
    let mut term = vec![0.0; n];
    for k in 0..n {
        term[k] = inp[k] * flow.cost(order[k]);
        inp[k + 1] = inp[k] * flow.sel(order[k]);
    }
    let mut total: f64 = term.iter().sum();
    let mut best = order.clone();
    let mut best_cost = linear_cost(flow, &best);
    let mut visited = 1u64;
    while w.advance() {
        visited += 1;
        if visited.is_multiple_of(65536) && limits.expired() {
            return Err(FlowError::Timeout("topsort"));
        }
        let (lo, hi) = w.take_dirty().expect("an advance permutes something");
        for k in lo..=hi {
            order[k] = w.task_of[w.p[k]];
            total -= term[k];
            term[k] = inp[k] * flow.cost(order[k]);
            inp[k + 1] = inp[k] * flow.sel(order[k]);
            total += term[k];
        }
        if visited.is_multiple_of(1024) {
            total = term.iter().sum();
        }
        if total <= best_cost * (1.0 + 1e-8) {
            let exact = linear_cost(flow, &order);
            if better(exact, &order, best_cost, &best) {
                best_cost = exact;
                best.clone_from(&order);
            }
        }
    }
    Ok(Enumeration {
        plan: LinearPlan::new(best),
        cost: best_cost,
        visited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowcore::Task;

    fn flow(n: u64, pcs: &[(u64, u64)]) -> FlowSpec {
        FlowSpec::new(
            (1..=n)
                .map(|i| Task::new(i, i as f64, 0.3 + 0.2 * i as f64))
                .collect(),
            pcs,
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn empty_pc_counts_factorial() {
        assert_eq!(count_linear_extensions(&flow(4, &[])), 24);
        assert_eq!(count_linear_extensions(&flow(5, &[])), 120);
        assert_eq!(
            topsort_search(&flow(4, &[]), &SearchLimits::default())
                .unwrap()
                .visited,
            24
        );
    }

    #[test]
    fn chain_counts_one() {
        assert_eq!(
            count_linear_extensions(&flow(4, &[(1, 2), (2, 3), (3, 4)])),
            1
        );
        assert_eq!(count_linear_extensions(&flow(1, &[])), 1);
    }

    #[test]
    fn visits_each_extension_once() {
        let f = flow(5, &[(1, 3), (2, 3), (4, 5)]);
        let mut seen = std::collections::BTreeSet::new();
        for_each_linear_extension(&f, |o| {
            assert!(seen.insert(o.to_vec()), "repeated {o:?}");
            let pos = |t: usize| o.iter().position(|&x| x == t).unwrap();
            assert!(pos(0) < pos(2) && pos(1) < pos(2) && pos(3) < pos(4));
        });
        let mut brute = 0;
        let mut perm: Vec<usize> = (0..5).collect();
        permute(&mut perm, 0, &mut |o| {
            let pos = |t: usize| o.iter().position(|&x| x == t).unwrap();
            if pos(0) < pos(2) && pos(1) < pos(2) && pos(3) < pos(4) {
                brute += 1;
            }
        });
        assert_eq!(seen.len(), brute);
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn worked_example() {
        let f = FlowSpec::new(
            vec![
                Task::new(1, 1.0, 1.0),
                Task::new(2, 1.0, 1.1),
                Task::new(3, 1.0, 0.5),
            ],
            &[(2, 3)],
            None,
            None,
        )
        .unwrap();
        let e = topsort_search(&f, &SearchLimits::default()).unwrap();
        assert_eq!(e.plan.order(), &[1, 2, 0]);
        assert!((e.cost - 2.65).abs() < 1e-12);
        assert_eq!(e.visited, 3);
    }

    #[test]
    fn incremental_cost_matches_scratch() {
        let f = flow(6, &[(1, 4)]);
        let mut best = f64::INFINITY;
        for_each_linear_extension(&f, |o| best = best.min(linear_cost(&f, o)));
        let e = topsort_search(&f, &SearchLimits::default()).unwrap();
        assert!((e.cost - best).abs() <= 1e-12 * best);
        assert!((linear_cost(&f, e.plan.order()) - e.cost).abs() <= 1e-12 * best);
    }
}
