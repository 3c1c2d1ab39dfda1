use crate::error::{FlowError, Result};
use crate::flowcore::{random_valid_plan, FlowSpec, LinearPlan, Plan, IMPROVEMENT_EPS};

/// Local search over adjacent transpositions. Each pass scans left to right
/// and swaps a PC-free pair whenever that lowers the SCM; passes repeat until
/// one makes no change. Starts from `initial`, or a seeded random valid plan.
pub fn swap_opt(flow: &FlowSpec, initial: Option<&LinearPlan>, seed: u64) -> Result<LinearPlan> {
    let mut p = match initial {
        Some(plan) => {
            let v = plan.validate(flow);
            if !v.is_empty() {
                return Err(FlowError::InvalidPlan(v));
            }
            plan.order().to_vec()
        }
        None => random_valid_plan(flow, seed).into_order(),
    };
    let pc = flow.pc();
    let mut swapping = true;
    while swapping {
        swapping = false;
        let mut inp = 1.0;
        for k in 0..p.len().saturating_sub(1) {
            let (a, b) = (p[k], p[k + 1]);
            if !pc.precedes(a, b) {
                let keep = flow.cost(a) + flow.sel(a) * flow.cost(b);
                let swapped = flow.cost(b) + flow.sel(b) * flow.cost(a);
                if inp * swapped < inp * keep - IMPROVEMENT_EPS {
                    p.swap(k, k + 1);
                    swapping = true;
                }
            }
            inp *= flow.sel(p[k]);
        }
    }
    Ok(LinearPlan::new(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristics::fixtures::three_task;
    use crate::{CostModel, Task};

    #[test]
    fn stuck_on_worked_example() {
        let flow = three_task();
        let p = swap_opt(&flow, Some(&LinearPlan::new(vec![0, 1, 2])), 0).unwrap();
        assert_eq!(p.order(), &[0, 1, 2]);
        assert!((p.scm(&flow, &CostModel::default()).unwrap() - 3.1).abs() < 1e-12);
    }

    #[test]
    fn sorts_unconstrained_tasks_by_rank() {
        let flow = FlowSpec::new(
            vec![
                Task::new(1, 1.0, 0.9),
                Task::new(2, 2.0, 0.1),
                Task::new(3, 1.0, 0.5),
            ],
            &[],
            None,
            None,
        )
        .unwrap();
        let p = swap_opt(&flow, Some(&LinearPlan::new(vec![0, 1, 2])), 0).unwrap();
        assert_eq!(p.order(), &[2, 1, 0]);
        let again = swap_opt(&flow, Some(&p), 0).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn rejects_invalid_start() {
        let flow = three_task();
        let r = swap_opt(&flow, Some(&LinearPlan::new(vec![2, 1, 0])), 0);
        assert!(matches!(r, Err(FlowError::InvalidPlan(_))));
    }

    #[test]
    fn seeded_start_is_deterministic() {
        let flow = three_task();
        assert_eq!(
            swap_opt(&flow, None, 5).unwrap(),
            swap_opt(&flow, None, 5).unwrap()
        );
    }
}
