//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;

use flowopt::flowcore::{linear_cost, FlowSpec, PlanDag};
use flowopt::Task;

/// Whether `order` respects every precedence pair of `flow`.
pub fn respects(flow: &FlowSpec, order: &[usize]) -> bool {
    let mut pos = vec![0; flow.len()];
    for (k, &t) in order.iter().enumerate() {
        pos[t] = k;
    }
    flow.pc().edges().iter().all(|&(a, b)| pos[a] < pos[b])
}

/// Minimum SCM over all valid permutations and the number of valid
/// permutations.
pub fn brute_force(flow: &FlowSpec) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut count = 0;
    for perm in (0..flow.len()).permutations(flow.len()) {
        if respects(flow, &perm) {
            count += 1;
            best = best.min(linear_cost(flow, &perm));
        }
    }
    (best, count)
}

/// Smallest input cardinality any choice of feeding tasks from `dag` can
/// give `task`, by trying every subset of placed tasks.
pub fn brute_force_cut(flow: &FlowSpec, dag: &PlanDag, task: usize) -> f64 {
    let nodes = dag.nodes();
    let anc = dag.ancestors(flow.len()).expect("acyclic");
    let mut best = f64::INFINITY;
    for mask in 0u64..(1 << nodes.len()) {
        let mut reach = vec![false; flow.len()];
        for (k, &v) in nodes.iter().enumerate() {
            if mask & (1 << k) != 0 {
                reach[v] = true;
                for a in anc[v].ones() {
                    reach[a] = true;
                }
            }
        }
        if flow.pc().predecessors(task).ones().any(|p| !reach[p]) {
            continue;
        }
        let inp: f64 = (0..flow.len())
            .filter(|&v| reach[v])
            .map(|v| flow.sel(v))
            .product();
        best = best.min(inp);
    }
    best
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// The three-task flow where `t2 (sel 1.1) -> t3 (sel 0.5)` and the
/// unconstrained `t1` should run last.
pub fn three_task() -> FlowSpec {
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
