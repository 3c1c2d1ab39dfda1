use crate::error::{FlowError, Result};
use crate::flowcore::{FlowSpec, LinearPlan, REL_TOL};

use super::{pred_masks, SearchLimits};

/// Default size guard for [`dynamic_programming`].
pub const DP_LIMIT: usize = 20;

/// Per-subset optimum tables. Cell `i` describes the subset whose members are
/// the set bits of `i` (bit `k` is the task with index `k`); cell 0 is the
/// empty set.
#[derive(Debug, Clone)]
pub struct DpTables {
    n: usize,
    costs: Vec<f64>,
    sels: Vec<f64>,
    last: Vec<u8>,
}

impl DpTables {
    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn task_count(&self) -> usize {
        self.n
    }

    /// Minimum SCM over valid orderings of the subset, or infinity when the
    /// subset cannot be a plan prefix.
    pub fn cost(&self, index: usize) -> f64 {
        self.costs[index]
    }

    /// Product of the subset's selectivities.
    pub fn sel(&self, index: usize) -> f64 {
        self.sels[index]
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn sels(&self) -> &[f64] {
        &self.sels
    }

    /// Table position of a subset of task indices.
    pub fn index_of(subset: &[usize]) -> usize {
        subset.iter().fold(0, |acc, &t| acc | (1 << t))
    }

    /// Task indices of the subset at `index`, ascending.
    pub fn subset(index: usize) -> Vec<usize> {
        (0..usize::BITS as usize)
            .filter(|b| index & (1 << b) != 0)
            .collect()
    }

    /// An optimal ordering of a prefix-feasible subset, rebuilt from the
    /// stored last-task choices.
    pub fn partial_plan(&self, index: usize) -> Option<Vec<usize>> {
        if !self.costs[index].is_finite() {
            return None;
        }
        let mut order = Vec::new();
        let mut m = index;
        while m != 0 {
            let t = self.last[m] as usize;
            order.push(t);
            m &= !(1 << t);
        }
        order.reverse();
        Some(order)
    }
}

/// Fills the subset tables bottom-up: a subset's cost is the cheapest way to
/// extend one of its prefix-feasible subsets by a single eligible task.
pub fn dp_tables(flow: &FlowSpec, limits: &SearchLimits) -> Result<DpTables> {
    let n = flow.len();
    limits.check_size("dynamic programming", n, DP_LIMIT)?;
    let preds = pred_masks(flow);
    let size = 1usize << n;
    let mut costs = vec![f64::INFINITY; size];
    let mut sels = vec![1.0; size];
    let mut last = vec![0u8; size];
    costs[0] = 0.0;
    for m in 1..size {
        if m & 0xffff == 0 && limits.expired() {
            return Err(FlowError::Timeout("dynamic programming"));
        }
        let low = m.trailing_zeros() as usize;
        sels[m] = sels[m & (m - 1)] * flow.sel(low);
        let mut bits = m;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = m & !(1 << t);
            if preds[t] & !(rest as u64) != 0 || !costs[rest].is_finite() {
                continue;
            }
            let c = costs[rest] + sels[rest] * flow.cost(t);
            if c < costs[m] {
                costs[m] = c;
                last[m] = t as u8;
            }
        }
    }
    Ok(DpTables {
        n,
        costs,
        sels,
        last,
    })
}

/// Optimal plan by dynamic programming over task subsets.
pub fn dynamic_programming(flow: &FlowSpec) -> Result<LinearPlan> {
    dynamic_programming_with(flow, &SearchLimits::default())
}

pub fn dynamic_programming_with(flow: &FlowSpec, limits: &SearchLimits) -> Result<LinearPlan> {
    let tables = dp_tables(flow, limits)?;
    Ok(LinearPlan::new(smallest_optimal(flow, &tables, limits)?))
}

/// Rebuilds the lexicographically smallest optimal ordering. `rest[r]` is the
/// cheapest cost of running the remaining set `r` on unit input; walking
/// forward, the first task whose choice stays on an optimal path is taken.
fn smallest_optimal(
    flow: &FlowSpec,
    tables: &DpTables,
    limits: &SearchLimits,
) -> Result<Vec<usize>> {
    let n = flow.len();
    let full = (1usize << n) - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let preds = pred_masks(flow);
    // the complement of a prefix-feasible set is a feasible suffix
    let mut rest = vec![f64::INFINITY; 1 << n];
    rest[0] = 0.0;
    for r in 1..=full {
        if r & 0xffff == 0 && limits.expired() {
            return Err(FlowError::Timeout("dynamic programming"));
        }
        if !tables.costs[full & !r].is_finite() {
            continue;
        }
        let mut best = f64::INFINITY;
        let mut bits = r;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            if preds[t] & r as u64 != 0 {
                continue;
            }
            let c = flow.cost(t) + flow.sel(t) * rest[r & !(1 << t)];
            best = best.min(c);
        }
        rest[r] = best;
    }
    let mut order = Vec::with_capacity(n);
    let mut r = full;
    while r != 0 {
        let target = rest[r];
        let pick = (0..n)
            .filter(|&t| r & (1 << t) != 0 && preds[t] & r as u64 == 0)
            .find(|&t| {
                let c = flow.cost(t) + flow.sel(t) * rest[r & !(1 << t)];
                c <= target + REL_TOL * target.abs()
            })
            .expect("a feasible remainder has an eligible task");
        order.push(pick);
        r &= !(1 << pick);
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowcore::{linear_cost, Task};

    fn three_task() -> FlowSpec {
        FlowSpec::new(
            vec![
                Task::new(1, 1.0, 1.0),
                Task::new(2, 1.0, 1.1),
                Task::new(3, 1.0, 0.5),
            ],
            &[(2, 3)],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn worked_example() {
        let flow = three_task();
        let t = dp_tables(&flow, &SearchLimits::default()).unwrap();
        assert!((t.cost(7) - 2.65).abs() < 1e-12);
        let p = dynamic_programming(&flow).unwrap();
        assert_eq!(p.order(), &[1, 2, 0]);
        assert!((linear_cost(&flow, p.order()) - 2.65).abs() < 1e-12);
        // {t3} alone cannot be a prefix
        assert!(t.cost(4).is_infinite());
        assert_eq!(t.partial_plan(7).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn subset_indexing() {
        // tasks t1,t3,t4,t5 are indices 0,2,3,4
        assert_eq!(DpTables::index_of(&[0, 2, 3, 4]), 29);
        assert_eq!(DpTables::subset(29), vec![0, 2, 3, 4]);
    }

    #[test]
    fn single_task() {
        let flow = FlowSpec::new(vec![Task::new(1, 4.5, 0.3)], &[], None, None).unwrap();
        let t = dp_tables(&flow, &SearchLimits::default()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.cost(1), 4.5);
        assert_eq!(dynamic_programming(&flow).unwrap().order(), &[0]);
    }

    #[test]
    fn sels_match_subset_products() {
        let flow = FlowSpec::new(
            (1..=5).map(|i| Task::new(i, 1.0, 0.2 * i as f64)).collect(),
            &[(1, 2)],
            None,
            None,
        )
        .unwrap();
        let t = dp_tables(&flow, &SearchLimits::default()).unwrap();
        for i in 0..t.len() {
            let p: f64 = DpTables::subset(i).iter().map(|&k| flow.sel(k)).product();
            assert!((t.sel(i) - p).abs() <= 1e-12 * p);
        }
    }

    #[test]
    fn empty_flow() {
        let flow = FlowSpec::new(vec![], &[], None, None).unwrap();
        assert!(dynamic_programming(&flow).unwrap().is_empty());
    }
}
