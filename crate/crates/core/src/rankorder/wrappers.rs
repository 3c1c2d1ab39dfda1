use fixedbitset::FixedBitSet;

use crate::error::{FlowError, Result};
use crate::flowcore::{FlowSpec, LinearPlan, Plan, IMPROVEMENT_EPS};

use super::kbz::kbz_members;

/// Largest block RO-III tries to move.
pub const RO_III_WINDOW: usize = 5;

/// Prunes the precedence graph to a forest, runs KBZ, then repairs the order.
///
/// Every task with several direct predecessors keeps only the one with the
/// highest rank (lowest index on ties). The KBZ order is then emitted left to
/// right, pulling any not-yet-placed predecessors of a task (in KBZ order)
/// in front of it.
pub fn ro_i(flow: &FlowSpec) -> LinearPlan {
    let parents = flow.pc().reduced_parents();
    let parent: Vec<Option<usize>> = parents
        .iter()
        .map(|ps| {
            ps.iter().copied().max_by(|&a, &b| {
                flow.rank(a)
                    .total_cmp(&flow.rank(b))
                    .then_with(|| b.cmp(&a))
            })
        })
        .collect();
    let all: Vec<usize> = (0..flow.len()).collect();
    let order = kbz_members(flow, &all, |v| parent[v]);
    LinearPlan::new(repair(flow, &order))
}

fn repair(flow: &FlowSpec, order: &[usize]) -> Vec<usize> {
    let n = flow.len();
    let mut pos = vec![0; n];
    for (k, &t) in order.iter().enumerate() {
        pos[t] = k;
    }
    let mut placed = FixedBitSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for &t in order {
        if placed.contains(t) {
            continue;
        }
        // predecessors are closed, so this holds everything t still waits on
        let mut missing: Vec<usize> = flow
            .pc()
            .predecessors(t)
            .ones()
            .filter(|&p| !placed.contains(p))
            .collect();
        missing.sort_by_key(|&p| pos[p]);
        let mut pending = missing;
        while !pending.is_empty() {
            // earliest in KBZ order among those that are ready
            let k = pending
                .iter()
                .position(|&p| flow.pc().predecessors(p).ones().all(|q| placed.contains(q)))
                .expect("acyclic");
            let p = pending.remove(k);
            placed.insert(p);
            out.push(p);
        }
        placed.insert(t);
        out.push(t);
    }
    out
}

/// Turns the precedence graph into a forest by serializing parallel paths,
/// then runs KBZ. The serialization only adds constraints, so the result is
/// valid without repair.
///
/// Repeatedly takes the topologically first task `j` with several direct
/// predecessors. Its ancestors form a forest. The pair of direct
/// predecessors with the deepest common ancestor `f` is chosen, and every
/// task strictly between `f` and `j` on the paths through `f` is put on one
/// chain `f -> ... -> j`, ordered by KBZ on those tasks. With no common
/// ancestor all paths into `j` are serialized.
pub fn ro_ii(flow: &FlowSpec) -> LinearPlan {
    let mut pc = flow.pc().clone();
    loop {
        let parents = pc.reduced_parents();
        let Some(j) = pc
            .topological_order()
            .into_iter()
            .find(|&v| parents[v].len() >= 2)
        else {
            break;
        };
        let path = |mut v: usize| {
            let mut p = vec![v];
            while let Some(&u) = parents[v].first() {
                p.push(u);
                v = u;
            }
            p
        };
        let paths: Vec<Vec<usize>> = parents[j].iter().map(|&p| path(p)).collect();
        // depth of the common ancestor, counted from the root
        let mut fork: Option<(usize, usize)> = None;
        for a in 0..paths.len() {
            for b in a + 1..paths.len() {
                if let Some(f) = paths[a].iter().find(|v| paths[b].contains(v)) {
                    let depth = paths[a].len() - 1 - paths[a].iter().position(|x| x == f).unwrap();
                    if fork.is_none_or(|(_, d)| depth > d) {
                        fork = Some((*f, depth));
                    }
                }
            }
        }
        let fork = fork.map(|(f, _)| f);
        let mut region: Vec<usize> = Vec::new();
        for p in &paths {
            let below: &[usize] = match fork {
                Some(f) => match p.iter().position(|&x| x == f) {
                    Some(k) => &p[..k],
                    None => continue,
                },
                None => p,
            };
            for &v in below {
                if !region.contains(&v) {
                    region.push(v);
                }
            }
        }
        region.sort_unstable();
        let chain = kbz_members(flow, &region, |v| parents[v].first().copied());
        let mut prev = fork;
        for &v in chain.iter().chain(std::iter::once(&j)) {
            if let Some(u) = prev {
                pc.add_edge(u, v)
                    .expect("serializing a path keeps the order acyclic");
            }
            prev = Some(v);
        }
    }
    let parents = pc.reduced_parents();
    let all: Vec<usize> = (0..flow.len()).collect();
    LinearPlan::new(kbz_members(flow, &all, |v| parents[v].first().copied()))
}

/// RO-II followed by block moves of up to [`RO_III_WINDOW`] tasks.
pub fn ro_iii(flow: &FlowSpec) -> LinearPlan {
    ro_iii_from(flow, &ro_ii(flow), RO_III_WINDOW).expect("RO-II output is valid")
}

/// Improves `start` by moving contiguous blocks of `1..=window` tasks further
/// downstream. For each block size and start position the best valid target
/// is applied if it lowers the SCM; sweeps repeat until none changes the plan,
/// at most `n` times.
pub fn ro_iii_from(flow: &FlowSpec, start: &LinearPlan, window: usize) -> Result<LinearPlan> {
    if window == 0 {
        return Err(FlowError::Config("block window must be at least 1".into()));
    }
    let v = start.validate(flow);
    if !v.is_empty() {
        return Err(FlowError::InvalidPlan(v));
    }
    let n = flow.len();
    let pc = flow.pc();
    let mut p = start.order().to_vec();
    let mut inp = prefix_inputs(flow, &p);
    for _ in 0..n.max(1) {
        let mut changed = false;
        for size in 1..=window.min(n) {
            for s in 0..n.saturating_sub(size) {
                let block = s..s + size;
                let (mut bc, mut bs) = (0.0, 1.0);
                for &t in &p[block.clone()] {
                    bc += bs * flow.cost(t);
                    bs *= flow.sel(t);
                }
                let (mut mc, mut ms) = (0.0, 1.0);
                let mut best: Option<(usize, f64)> = None;
                for t in s + size..n {
                    let x = p[t];
                    if p[block.clone()].iter().any(|&b| pc.precedes(b, x)) {
                        break;
                    }
                    mc += ms * flow.cost(x);
                    ms *= flow.sel(x);
                    let delta = inp[s] * ((mc + ms * bc) - (bc + bs * mc));
                    if best.is_none_or(|(_, d)| delta < d) {
                        best = Some((t, delta));
                    }
                }
                if let Some((t, delta)) = best {
                    if delta < -IMPROVEMENT_EPS {
                        p[s..=t].rotate_left(size);
                        inp = prefix_inputs(flow, &p);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(LinearPlan::new(p))
}

fn prefix_inputs(flow: &FlowSpec, order: &[usize]) -> Vec<f64> {
    let mut inp = Vec::with_capacity(order.len() + 1);
    let mut acc = 1.0;
    inp.push(acc);
    for &t in order {
        acc *= flow.sel(t);
        inp.push(acc);
    }
    inp
}
