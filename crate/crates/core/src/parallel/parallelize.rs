use crate::error::{FlowError, Result};
use crate::flowcore::{CostModel, FlowSpec, LinearPlan, Plan, PlanDag};

/// Turns a linear plan into a DAG in which every maximal run of consecutive
/// expanding tasks (selectivity above 1) executes in parallel.
///
/// A run member hangs off the last task before the run unless precedence
/// forces it after other run members, in which case it follows the latest of
/// those. The first task after the run merges every run member that has no
/// successor yet. Tasks outside runs stay chained.
///
/// The construction ignores the merge cost; it only affects the plan's SCM.
pub fn parallelize(plan: &LinearPlan, flow: &FlowSpec, _model: &CostModel) -> Result<PlanDag> {
    let v = plan.validate(flow);
    if !v.is_empty() {
        return Err(FlowError::InvalidPlan(v));
    }
    let pc = flow.pc();
    let mut dag = PlanDag::new(plan.order().to_vec(), []);
    let mut prev: Option<usize> = None;
    let mut run: Vec<usize> = Vec::new();
    for &t in plan.order() {
        if flow.sel(t) > 1.0 {
            let before: Vec<usize> = run.iter().copied().filter(|&r| pc.precedes(r, t)).collect();
            let latest: Vec<usize> = before
                .iter()
                .copied()
                .filter(|&r| !before.iter().any(|&q| pc.precedes(r, q)))
                .collect();
            if latest.is_empty() {
                if let Some(p) = prev {
                    dag.add_edge(p, t);
                }
            } else {
                for r in latest {
                    dag.add_edge(r, t);
                }
            }
            run.push(t);
        } else {
            if run.is_empty() {
                if let Some(p) = prev {
                    dag.add_edge(p, t);
                }
            } else {
                for &r in &run {
                    if dag.out_degree(r) == 0 {
                        dag.add_edge(r, t);
                    }
                }
                run.clear();
            }
            prev = Some(t);
        }
    }
    Ok(dag)
}
