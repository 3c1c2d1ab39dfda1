use std::collections::VecDeque;

use crate::error::{FlowError, Result};
use crate::flowcore::{FlowSpec, LinearPlan};

use super::{ConstraintTree, RankedNode};

/// Rank ordering on a forest of precedence constraints.
///
/// Each subtree is turned into a chain of modules with non-increasing rank:
/// the children's chains are merged by rank, then the subtree root is put in
/// front and absorbs following modules while their rank exceeds its own.
/// The roots' chains are finally merged the same way and expanded.
pub fn kbz(flow: &FlowSpec, tree: &ConstraintTree) -> Result<LinearPlan> {
    if tree.len() != flow.len() {
        return Err(FlowError::Config(format!(
            "constraint tree has {} nodes but the flow has {} tasks",
            tree.len(),
            flow.len()
        )));
    }
    let children = tree.children();
    let roots = tree.roots();
    let chains: Vec<Vec<RankedNode>> = roots
        .iter()
        .map(|&r| subtree_chain(flow, &children, r))
        .collect();
    let order = merge_chains(chains)
        .into_iter()
        .flat_map(|m| m.members)
        .collect();
    Ok(LinearPlan::new(order))
}

/// KBZ over an explicit subset of tasks whose forest is given by `parent`
/// restricted to `members`.
pub(super) fn kbz_members(
    flow: &FlowSpec,
    members: &[usize],
    parent: impl Fn(usize) -> Option<usize>,
) -> Vec<usize> {
    let n = flow.len();
    let mut inside = vec![false; n];
    for &m in members {
        inside[m] = true;
    }
    let mut children = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for &m in members {
        match parent(m).filter(|&p| inside[p]) {
            Some(p) => children[p].push(m),
            None => roots.push(m),
        }
    }
    for c in &mut children {
        c.sort_unstable();
    }
    roots.sort_unstable();
    let chains = roots
        .iter()
        .map(|&r| subtree_chain(flow, &children, r))
        .collect();
    merge_chains(chains)
        .into_iter()
        .flat_map(|m| m.members)
        .collect()
}

fn subtree_chain(flow: &FlowSpec, children: &[Vec<usize>], root: usize) -> Vec<RankedNode> {
    // iterative post-order so deep chains do not overflow the stack
    let mut post = Vec::new();
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        post.push(v);
        stack.extend(children[v].iter().copied());
    }
    let mut built: Vec<Option<Vec<RankedNode>>> = vec![None; flow.len()];
    for &v in post.iter().rev() {
        let below = children[v]
            .iter()
            .map(|&c| built[c].take().expect("children are built first"))
            .collect();
        let merged = merge_chains(below);
        let mut head = RankedNode::single(flow, v);
        let mut rest = merged.into_iter().peekable();
        while rest.peek().is_some_and(|next| next.rank > head.rank) {
            head = head.merge(rest.next().unwrap());
        }
        let mut chain = vec![head];
        chain.extend(rest);
        built[v] = Some(chain);
    }
    built[root].take().unwrap()
}

/// Interleaves chains with non-increasing rank into one such chain, keeping
/// each chain's internal order.
fn merge_chains(chains: Vec<Vec<RankedNode>>) -> Vec<RankedNode> {
    let mut queues: Vec<VecDeque<RankedNode>> = chains.into_iter().map(VecDeque::from).collect();
    let mut out = Vec::new();
    loop {
        let mut pick: Option<usize> = None;
        for k in 0..queues.len() {
            let Some(head) = queues[k].front() else {
                continue;
            };
            if pick.is_none_or(|p| head.order(&queues[p][0]).is_lt()) {
                pick = Some(k);
            }
        }
        match pick {
            Some(k) => out.push(queues[k].pop_front().unwrap()),
            None => return out,
        }
    }
}
