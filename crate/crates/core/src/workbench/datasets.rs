//! Flows shipped with the crate.

use super::io::{parse_flow, LoadedFlow};

/// Raw JSON of the sentiment-and-sales reporting flow: 13 tasks between a
/// tweet source and a report sink.
pub const PDI_CASE_STUDY: &str = include_str!("../../data/pdi_case_study.json");

/// Raw JSON of the three-task flow where a filter sits behind an expanding
/// task it depends on.
pub const THREE_TASK: &str = include_str!("../../data/three_task.json");

pub fn pdi_case_study() -> LoadedFlow {
    parse_flow(PDI_CASE_STUDY).expect("bundled flow is valid")
}

pub fn three_task() -> LoadedFlow {
    parse_flow(THREE_TASK).expect("bundled flow is valid")
}

/// Looks up a bundled flow by file stem.
pub fn bundled(name: &str) -> Option<LoadedFlow> {
    match name {
        "pdi_case_study" => Some(pdi_case_study()),
        "three_task" => Some(three_task()),
        _ => None,
    }
}
