use std::fmt::Write as _;

use crate::flowcore::FlowSpec;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz digraph over all tasks of `flow`, nodes ordered by id, edges
/// given as task index pairs.
pub fn to_dot(
    flow: &FlowSpec,
    name: &str,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> String {
    let mut s = format!(
        "digraph \"{}\" {{\n  rankdir=LR;\n  node [shape=box];\n",
        escape(name)
    );
    for t in flow.tasks() {
        let head = match &t.label {
            Some(l) => format!("{}:{}", t.id, escape(l)),
            None => t.id.to_string(),
        };
        let _ = writeln!(
            s,
            "  t{} [label=\"{}\\nc={},sel={}\"];",
            t.id, head, t.cost, t.selectivity
        );
    }
    let mut edges: Vec<(u64, u64)> = edges
        .into_iter()
        .map(|(a, b)| (flow.id_of(a), flow.id_of(b)))
        .collect();
    edges.sort_unstable();
    for (a, b) in edges {
        let _ = writeln!(s, "  t{a} -> t{b};");
    }
    s.push_str("}\n");
    s
}
