use crate::error::{FlowError, Result};

use super::plan::{validate_dag, validate_linear};
use super::{CostModel, FlowSpec, LinearPlan, PlanDag, Violation};

/// SCM of a task order, folding the running selectivity product left to
/// right. Does not check validity.
pub fn linear_cost(flow: &FlowSpec, order: &[usize]) -> f64 {
    let mut inp = 1.0;
    let mut total = 0.0;
    for &t in order {
        total += inp * flow.cost(t);
        inp *= flow.sel(t);
    }
    total
}

/// SCM of a DAG plan: every task pays its cost times the selectivity product
/// of its ancestors, plus the merge surcharge when it has two or more
/// parents. Returns `None` if the DAG has a cycle.
pub fn dag_cost(flow: &FlowSpec, dag: &PlanDag, model: &CostModel) -> Option<f64> {
    let anc = dag.ancestors(flow.len())?;
    let parents = dag.parents();
    let mut total = 0.0;
    for &v in dag.nodes() {
        let inp: f64 = anc[v].ones().map(|a| flow.sel(a)).product();
        let mut c = flow.cost(v);
        if parents.get(v).map_or(0, Vec::len) >= 2 {
            c += model.merge_cost();
        }
        total += inp * c;
    }
    Some(total)
}

/// Product of selectivities of every task placed before `task`.
pub fn input_cardinality_linear(plan: &LinearPlan, task: usize, flow: &FlowSpec) -> Result<f64> {
    let pos = plan
        .order()
        .iter()
        .position(|&t| t == task)
        .ok_or(FlowError::UnknownTask(task as u64))?;
    Ok(plan.order()[..pos].iter().map(|&t| flow.sel(t)).product())
}

/// Product of selectivities of every ancestor of `task` in the DAG.
pub fn input_cardinality_dag(dag: &PlanDag, task: usize, flow: &FlowSpec) -> Result<f64> {
    if !dag.nodes().contains(&task) {
        return Err(FlowError::UnknownTask(task as u64));
    }
    let anc = dag
        .ancestors(flow.len())
        .ok_or_else(|| FlowError::InvalidPlan(vec![Violation::Cycle]))?;
    Ok(anc[task].ones().map(|a| flow.sel(a)).product())
}

/// Operations shared by linear and DAG plans.
pub trait Plan {
    /// Every way this plan fails to execute `flow` correctly; empty when valid.
    fn validate(&self, flow: &FlowSpec) -> Vec<Violation>;

    fn input_cardinality(&self, task: usize, flow: &FlowSpec) -> Result<f64>;

    /// Sum cost metric of a valid plan.
    fn scm(&self, flow: &FlowSpec, model: &CostModel) -> Result<f64>;

    fn is_valid(&self, flow: &FlowSpec) -> bool {
        self.validate(flow).is_empty()
    }
}

impl Plan for LinearPlan {
    fn validate(&self, flow: &FlowSpec) -> Vec<Violation> {
        validate_linear(self, flow)
    }

    fn input_cardinality(&self, task: usize, flow: &FlowSpec) -> Result<f64> {
        input_cardinality_linear(self, task, flow)
    }

    /// The merge surcharge never applies to a chain.
    fn scm(&self, flow: &FlowSpec, _model: &CostModel) -> Result<f64> {
        let violations = self.validate(flow);
        if !violations.is_empty() {
            return Err(FlowError::InvalidPlan(violations));
        }
        Ok(linear_cost(flow, self.order()))
    }
}

impl Plan for PlanDag {
    fn validate(&self, flow: &FlowSpec) -> Vec<Violation> {
        validate_dag(self, flow)
    }

    fn input_cardinality(&self, task: usize, flow: &FlowSpec) -> Result<f64> {
        input_cardinality_dag(self, task, flow)
    }

    fn scm(&self, flow: &FlowSpec, model: &CostModel) -> Result<f64> {
        let violations = self.validate(flow);
        if !violations.is_empty() {
            return Err(FlowError::InvalidPlan(violations));
        }
        dag_cost(flow, self, model).ok_or(FlowError::InvalidPlan(vec![Violation::Cycle]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowcore::{random_valid_plan, Task};

    pub(crate) fn three_task() -> FlowSpec {
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

    fn diamond() -> (FlowSpec, PlanDag) {
        let flow = FlowSpec::new(
            vec![
                Task::new(1, 1.0, 1.0),
                Task::new(2, 1.0, 2.0),
                Task::new(3, 1.0, 2.0),
                Task::new(4, 1.0, 1.0),
            ],
            &[],
            Some(1),
            Some(4),
        )
        .unwrap();
        let dag = PlanDag::new(vec![0, 1, 2, 3], [(0, 1), (0, 2), (1, 3), (2, 3)]);
        (flow, dag)
    }

    #[test]
    fn worked_example_costs() {
        let flow = three_task();
        let m = CostModel::default();
        let a = LinearPlan::new(vec![0, 1, 2]).scm(&flow, &m).unwrap();
        let b = LinearPlan::new(vec![1, 2, 0]).scm(&flow, &m).unwrap();
        assert!((a - 3.1).abs() <= 1e-12);
        assert!((b - 2.65).abs() <= 1e-12);
    }

    #[test]
    fn input_cardinality_of_chain() {
        let flow = three_task();
        let p = LinearPlan::new(vec![0, 1, 2]);
        assert!((p.input_cardinality(2, &flow).unwrap() - 1.1).abs() < 1e-15);
        assert_eq!(p.input_cardinality(0, &flow).unwrap(), 1.0);
        assert!(p.input_cardinality(7, &flow).is_err());
    }

    #[test]
    fn single_task_costs_its_cost() {
        let flow = FlowSpec::new(vec![Task::new(1, 7.0, 0.3)], &[], None, None).unwrap();
        let s = LinearPlan::new(vec![0])
            .scm(&flow, &CostModel::default())
            .unwrap();
        assert_eq!(s, 7.0);
    }

    #[test]
    fn diamond_costs() {
        let (flow, dag) = diamond();
        let m = CostModel::default();
        assert_eq!(dag.input_cardinality(3, &flow).unwrap(), 4.0);
        // brute force: product over every node with a path to the sink
        let brute: f64 = [0usize, 1, 2]
            .iter()
            .filter(|&&a| dag.has_edge(a, 3) || dag.has_edge(0, a))
            .map(|&a| flow.sel(a))
            .product();
        assert_eq!(brute, 4.0);
        assert_eq!(dag.scm(&flow, &m).unwrap(), 7.0);
        let linear = LinearPlan::new(vec![0, 1, 2, 3]);
        assert_eq!(linear.scm(&flow, &m).unwrap(), 8.0);
        let with_merge = dag.scm(&flow, &CostModel::new(10.0).unwrap()).unwrap();
        assert_eq!(with_merge, 7.0 + 4.0 * 10.0);
    }

    #[test]
    fn validation_reports_violations() {
        let flow = FlowSpec::new(
            vec![Task::new(2, 1.0, 1.0), Task::new(3, 1.0, 1.0)],
            &[(2, 3)],
            None,
            None,
        )
        .unwrap();
        assert!(LinearPlan::new(vec![0, 1]).validate(&flow).is_empty());
        assert_eq!(
            LinearPlan::new(vec![1, 0]).validate(&flow),
            vec![Violation::Precedence {
                before: 0,
                after: 1
            }]
        );
        let dag = PlanDag::new(vec![0], []);
        assert_eq!(dag.validate(&flow), vec![Violation::MissingTask(1)]);
        let bad = LinearPlan::new(vec![1, 0]);
        assert!(matches!(
            bad.scm(&flow, &CostModel::default()),
            Err(FlowError::InvalidPlan(_))
        ));
    }

    #[test]
    fn dag_with_source_must_have_single_root() {
        let (flow, _) = diamond();
        let dag = PlanDag::new(vec![0, 1, 2, 3], [(0, 1), (1, 3), (2, 3)]);
        let v = dag.validate(&flow);
        assert!(v.contains(&Violation::ExtraRoot(2)));
    }

    #[test]
    fn random_plans_are_valid_and_seeded() {
        let flow = three_task();
        for seed in 0..20 {
            let p = random_valid_plan(&flow, seed);
            assert!(p.is_valid(&flow));
            assert_eq!(p, random_valid_plan(&flow, seed));
        }
        let chain = FlowSpec::new(
            (1..=5).map(|i| Task::new(i, 1.0, 1.0)).collect(),
            &[(1, 2), (2, 3), (3, 4), (4, 5)],
            None,
            None,
        )
        .unwrap();
        assert_eq!(random_valid_plan(&chain, 99).order(), &[0, 1, 2, 3, 4]);
    }
}
