use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

use crate::flowcore::{FlowSpec, PlanDag};

/// Chooses which placed tasks should feed `task` so that its input
/// cardinality is as small as possible.
///
/// The tasks feeding `task`, together with their ancestors, form an
/// ancestor-closed set that must contain every precedence predecessor of
/// `task`; the input cardinality is the product of that set's selectivities.
/// Minimizing it is a minimum-weight closure problem with weights
/// `ln(sel)`, solved as a minimum s-t cut. Among optimal sets the smallest is
/// returned. The result lists the set's maximal members, which are the tasks
/// to connect to `task`, together with the input cardinality.
pub fn min_input_cut(flow: &FlowSpec, dag: &PlanDag, task: usize) -> (Vec<usize>, f64) {
    let n = flow.len();
    let placed = dag.nodes();
    let mut slot = vec![usize::MAX; n];
    for (k, &v) in placed.iter().enumerate() {
        slot[v] = k;
    }
    let src = placed.len();
    let snk = src + 1;
    let mut g = FlowNetwork::new(placed.len() + 2);
    for (k, &v) in placed.iter().enumerate() {
        let gain = -flow.sel(v).ln();
        if flow.pc().precedes(v, task) {
            g.add(src, k, f64::INFINITY);
        } else if gain > 0.0 {
            g.add(src, k, gain);
        } else if gain < 0.0 {
            g.add(k, snk, -gain);
        }
    }
    for (a, b) in dag.edges() {
        // keeping b requires keeping its parent a
        g.add(slot[b], slot[a], f64::INFINITY);
    }
    g.max_flow(src, snk);
    let side = g.source_side(src);
    let chosen: Vec<usize> = placed
        .iter()
        .enumerate()
        .filter(|&(k, _)| side.contains(k))
        .map(|(_, &v)| v)
        .collect();
    let inp = chosen.iter().map(|&v| flow.sel(v)).product();
    let mut cut: Vec<usize> = chosen
        .iter()
        .copied()
        .filter(|&v| !dag.edges().any(|(a, b)| a == v && side.contains(slot[b])))
        .collect();
    cut.sort_unstable();
    (cut, inp)
}

const RESIDUAL_EPS: f64 = 1e-12;

struct Edge {
    to: usize,
    cap: f64,
}

/// Dinic's maximum flow on real capacities.
struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add(&mut self, a: usize, b: usize, cap: f64) {
        self.adj[a].push(self.edges.len());
        self.edges.push(Edge { to: b, cap });
        self.adj[b].push(self.edges.len());
        self.edges.push(Edge { to: a, cap: 0.0 });
    }

    fn levels(&self, s: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.adj.len()];
        level[s] = Some(0);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.adj[u] {
                let Edge { to, cap } = self.edges[e];
                if cap > RESIDUAL_EPS && level[to].is_none() {
                    level[to] = Some(level[u].unwrap() + 1);
                    q.push_back(to);
                }
            }
        }
        level
    }

    fn push(
        &mut self,
        u: usize,
        t: usize,
        f: f64,
        level: &[Option<usize>],
        next: &mut [usize],
    ) -> f64 {
        if u == t {
            return f;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let Edge { to, cap } = self.edges[e];
            if cap > RESIDUAL_EPS && level[to] == level[u].map(|l| l + 1) {
                let pushed = self.push(to, t, f.min(cap), level, next);
                if pushed > 0.0 {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let level = self.levels(s);
            if level[t].is_none() {
                return total;
            }
            let mut next = vec![0; self.adj.len()];
            loop {
                let f = self.push(s, t, f64::INFINITY, &level, &mut next);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
    }

    /// Nodes still reachable from `s` in the residual network.
    fn source_side(&self, s: usize) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.adj.len());
        for (v, l) in self.levels(s).iter().enumerate() {
            if l.is_some() {
                seen.insert(v);
            }
        }
        seen
    }
}
