use fixedbitset::FixedBitSet;

use crate::flowcore::{FlowSpec, LinearPlan};

use super::eligible;

/// Builds left to right, always appending the eligible task with the highest
/// rank. Ties go to the smallest index.
pub fn greedy_i(flow: &FlowSpec) -> LinearPlan {
    let n = flow.len();
    let mut placed = FixedBitSet::with_capacity(n);
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let mut best: Option<usize> = None;
        for t in eligible(flow, &placed) {
            if best.is_none_or(|b| flow.rank(t) > flow.rank(b)) {
                best = Some(t);
            }
        }
        let t = best.expect("acyclic flows always have an eligible task");
        placed.insert(t);
        order.push(t);
    }
    LinearPlan::new(order)
}

/// Builds right to left: among tasks whose successors are all placed,
/// prepends the one with the lowest rank. Ties prepend the largest index so
/// tied tasks end up in ascending order.
pub fn greedy_ii(flow: &FlowSpec) -> LinearPlan {
    let n = flow.len();
    let mut placed = FixedBitSet::with_capacity(n);
    let mut rev = Vec::with_capacity(n);
    while rev.len() < n {
        let mut best: Option<usize> = None;
        for t in (0..n).rev() {
            if placed.contains(t) || !flow.pc().successors(t).is_subset(&placed) {
                continue;
            }
            if best.is_none_or(|b| flow.rank(t) < flow.rank(b)) {
                best = Some(t);
            }
        }
        let t = best.expect("acyclic flows always have a free sink");
        placed.insert(t);
        rev.push(t);
    }
    rev.reverse();
    LinearPlan::new(rev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::fixtures::three_task;
    use crate::{CostModel, Plan, Task};

    #[test]
    fn greedy_i_worked_example() {
        let flow = three_task();
        let p = greedy_i(&flow);
        assert_eq!(p.order(), &[0, 1, 2]);
        assert!((p.scm(&flow, &CostModel::default()).unwrap() - 3.1).abs() < 1e-12);
    }

    #[test]
    fn identical_tasks_keep_id_order() {
        let flow = FlowSpec::new(
            (1..=4).map(|i| Task::new(i, 3.0, 0.7)).collect(),
            &[],
            None,
            None,
        )
        .unwrap();
        assert_eq!(greedy_i(&flow).order(), &[0, 1, 2, 3]);
        assert_eq!(greedy_ii(&flow).order(), &[0, 1, 2, 3]);
    }

    #[test]
    fn strong_filter_goes_first() {
        let flow = FlowSpec::new(
            vec![
                Task::new(1, 5.0, 0.5),
                Task::new(2, 2.0, 1.5),
                Task::new(3, 1.0, 0.1),
            ],
            &[],
            None,
            None,
        )
        .unwrap();
        assert_eq!(greedy_i(&flow).order()[0], 2);
    }

    #[test]
    fn greedy_ii_puts_higher_rank_first() {
        let flow = FlowSpec::new(
            vec![Task::new(1, 1.0, 0.2), Task::new(2, 1.0, 0.8)],
            &[],
            None,
            None,
        )
        .unwrap();
        assert_eq!(greedy_ii(&flow).order(), &[0, 1]);
        let rev = FlowSpec::new(
            vec![Task::new(1, 1.0, 0.8), Task::new(2, 1.0, 0.2)],
            &[],
            None,
            None,
        )
        .unwrap();
        assert_eq!(greedy_ii(&rev).order(), &[1, 0]);
    }

    #[test]
    fn chain_is_respected() {
        let flow = FlowSpec::new(
            (1..=4).map(|i| Task::new(i, 1.0, 0.1 * i as f64)).collect(),
            &[(4, 3), (3, 2), (2, 1)],
            None,
            None,
        )
        .unwrap();
        assert_eq!(greedy_i(&flow).order(), &[3, 2, 1, 0]);
        assert_eq!(greedy_ii(&flow).order(), &[3, 2, 1, 0]);
    }
}
