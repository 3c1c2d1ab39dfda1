use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::flowcore::{CostModel, FlowSpec, LinearPlan, Plan, PlanDag, Task};

use super::WorkbenchError;

/// On-disk flow description. Constraints and edges are `[before, after]`
/// task id pairs. `initial` is a linear starting plan; `edges` an initial
/// plan DAG for multi-input multi-output flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub constraints: Vec<(u64, u64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sink: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(u64, u64)>>,
}

/// A flow file after validation, with task ids resolved to indices.
#[derive(Debug, Clone)]
pub struct LoadedFlow {
    pub name: Option<String>,
    pub flow: FlowSpec,
    pub initial: Option<LinearPlan>,
    pub dag: Option<PlanDag>,
}

impl FlowFile {
    /// Describes `flow` by its covering constraints; links implied by the
    /// source and sink are left out.
    pub fn from_flow(flow: &FlowSpec) -> Self {
        let implied = |a: usize, b: usize| flow.source() == Some(a) || flow.sink() == Some(b);
        let constraints = flow
            .pc()
            .reduction()
            .into_iter()
            .filter(|&(a, b)| !implied(a, b))
            .map(|(a, b)| (flow.id_of(a), flow.id_of(b)))
            .collect();
        Self {
            name: None,
            tasks: flow.tasks().to_vec(),
            constraints,
            source: flow.source().map(|s| flow.id_of(s)),
            sink: flow.sink().map(|s| flow.id_of(s)),
            initial: None,
            edges: None,
        }
    }

    pub fn into_loaded(self) -> Result<LoadedFlow, WorkbenchError> {
        let flow = FlowSpec::new(self.tasks, &self.constraints, self.source, self.sink)?;
        let initial = self
            .initial
            .map(|ids| ids_to_indices(&flow, &ids).map(LinearPlan::new))
            .transpose()?;
        let dag = match self.edges {
            Some(edges) => {
                let mut e = Vec::with_capacity(edges.len());
                for (a, b) in edges {
                    e.push((flow.index_of(a)?, flow.index_of(b)?));
                }
                Some(PlanDag::new((0..flow.len()).collect(), e))
            }
            None => None,
        };
        Ok(LoadedFlow {
            name: self.name,
            flow,
            initial,
            dag,
        })
    }
}

fn ids_to_indices(flow: &FlowSpec, ids: &[u64]) -> Result<Vec<usize>, WorkbenchError> {
    Ok(ids
        .iter()
        .map(|&id| flow.index_of(id))
        .collect::<Result<_, _>>()?)
}

/// An optimized plan together with the flow it belongs to, so it can be
/// checked or rendered on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub algorithm: String,
    pub scm: f64,
    #[serde(default)]
    pub merge_cost: f64,
    pub flow: FlowFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(u64, u64)>>,
}

/// A plan of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutput {
    Linear(LinearPlan),
    Dag(PlanDag),
}

impl PlanOutput {
    pub fn scm(&self, flow: &FlowSpec, model: &CostModel) -> crate::Result<f64> {
        match self {
            PlanOutput::Linear(p) => p.scm(flow, model),
            PlanOutput::Dag(d) => d.scm(flow, model),
        }
    }

    pub fn validate(&self, flow: &FlowSpec) -> Vec<crate::flowcore::Violation> {
        match self {
            PlanOutput::Linear(p) => p.validate(flow),
            PlanOutput::Dag(d) => d.validate(flow),
        }
    }

    /// The plan as a DAG; a linear plan becomes a chain.
    pub fn to_dag(&self) -> PlanDag {
        match self {
            PlanOutput::Linear(p) => PlanDag::chain(p),
            PlanOutput::Dag(d) => d.clone(),
        }
    }
}

impl PlanFile {
    pub fn new(
        algorithm: &str,
        flow: &FlowSpec,
        plan: &PlanOutput,
        model: &CostModel,
    ) -> crate::Result<Self> {
        let scm = plan.scm(flow, model)?;
        let (order, edges) = match plan {
            PlanOutput::Linear(p) => (Some(p.ids(flow)), None),
            PlanOutput::Dag(d) => (
                None,
                Some(
                    d.edges()
                        .map(|(a, b)| (flow.id_of(a), flow.id_of(b)))
                        .collect(),
                ),
            ),
        };
        Ok(Self {
            algorithm: algorithm.to_string(),
            scm,
            merge_cost: model.merge_cost(),
            flow: FlowFile::from_flow(flow),
            order,
            edges,
        })
    }

    /// Rebuilds the flow and the plan. The plan is not validated.
    pub fn load(self) -> Result<(FlowSpec, PlanOutput), WorkbenchError> {
        let loaded = self.flow.into_loaded()?;
        let flow = loaded.flow;
        let plan = match (self.order, self.edges) {
            (Some(order), None) => {
                PlanOutput::Linear(LinearPlan::new(ids_to_indices(&flow, &order)?))
            }
            (None, Some(edges)) => {
                let mut e = Vec::with_capacity(edges.len());
                for (a, b) in edges {
                    e.push((flow.index_of(a)?, flow.index_of(b)?));
                }
                PlanOutput::Dag(PlanDag::new((0..flow.len()).collect(), e))
            }
            _ => {
                return Err(WorkbenchError::Format(
                    "a plan needs exactly one of `order` and `edges`".into(),
                ))
            }
        };
        Ok((flow, plan))
    }
}

/// Either kind of JSON document the tools accept.
#[derive(Debug, Clone)]
pub enum Document {
    Flow(LoadedFlow),
    Plan(PlanFile),
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, WorkbenchError> {
    let text = fs::read_to_string(path).map_err(|source| WorkbenchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| WorkbenchError::Parse {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_flow(path: &Path) -> Result<LoadedFlow, WorkbenchError> {
    read_json::<FlowFile>(path)?.into_loaded()
}

pub fn parse_flow(text: &str) -> Result<LoadedFlow, WorkbenchError> {
    serde_json::from_str::<FlowFile>(text)
        .map_err(|source| WorkbenchError::Parse {
            path: "<inline>".into(),
            source,
        })?
        .into_loaded()
}

/// Reads a plan file if the document has an `algorithm` field, a flow file
/// otherwise.
pub fn load_document(path: &Path) -> Result<Document, WorkbenchError> {
    let value: serde_json::Value = read_json(path)?;
    let parse_err = |source| WorkbenchError::Parse {
        path: path.display().to_string(),
        source,
    };
    if value.get("algorithm").is_some() {
        Ok(Document::Plan(
            serde_json::from_value(value).map_err(parse_err)?,
        ))
    } else {
        let file: FlowFile = serde_json::from_value(value).map_err(parse_err)?;
        Ok(Document::Flow(file.into_loaded()?))
    }
}

pub fn write_output(path: Option<&Path>, text: &str) -> Result<(), WorkbenchError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| WorkbenchError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
