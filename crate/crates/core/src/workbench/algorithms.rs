use std::fmt;
use std::str::FromStr;

use crate::error::{FlowError, Result};
use crate::exact::SearchLimits;
use crate::flowcore::{random_valid_plan, CostModel, FlowSpec, LinearPlan, PlanDag};
use crate::mimo::{optimize_mimo, LinearOptimizer};
use crate::parallel::{parallelize, pgreedy_i, pgreedy_ii};

use super::io::PlanOutput;

/// Every optimizer the command line and benchmark runner can invoke.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Linear(LinearOptimizer),
    PGreedyI,
    PGreedyII,
    /// A linear optimizer followed by the parallelizing post-pass.
    ParallelizePost(LinearOptimizer),
    /// Segment-wise optimization of a plan DAG, optionally parallelized.
    Mimo {
        inner: LinearOptimizer,
        parallel: bool,
    },
}

/// What an algorithm runs on.
#[derive(Debug, Clone, Copy)]
pub struct Input<'a> {
    pub flow: &'a FlowSpec,
    /// Starting plan for local search.
    pub initial: Option<&'a LinearPlan>,
    /// Starting DAG for segment-wise optimization.
    pub dag: Option<&'a PlanDag>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunContext {
    pub model: CostModel,
    pub limits: SearchLimits,
    pub seed: u64,
}

impl Algorithm {
    /// Runs the algorithm. Without a starting plan, local search begins at a
    /// random valid plan drawn from `ctx.seed`; without a starting DAG,
    /// segment-wise optimization treats the starting plan as a chain.
    pub fn run(&self, input: &Input, ctx: &RunContext) -> Result<PlanOutput> {
        let flow = input.flow;
        let start = || {
            input
                .initial
                .cloned()
                .unwrap_or_else(|| random_valid_plan(flow, ctx.seed))
        };
        Ok(match *self {
            Algorithm::Linear(o) => {
                let s = start();
                PlanOutput::Linear(o.optimize(flow, Some(&s), ctx.seed, &ctx.limits)?)
            }
            Algorithm::PGreedyI => PlanOutput::Dag(pgreedy_i(flow, &ctx.model)),
            Algorithm::PGreedyII => PlanOutput::Dag(pgreedy_ii(flow, &ctx.model)),
            Algorithm::ParallelizePost(o) => {
                let s = start();
                let p = o.optimize(flow, Some(&s), ctx.seed, &ctx.limits)?;
                PlanOutput::Dag(parallelize(&p, flow, &ctx.model)?)
            }
            Algorithm::Mimo { inner, parallel } => {
                let dag = match input.dag {
                    Some(d) => d.clone(),
                    None => PlanDag::chain(&start()),
                };
                PlanOutput::Dag(optimize_mimo(
                    &dag,
                    flow,
                    inner,
                    &ctx.model,
                    parallel,
                    &ctx.limits,
                )?)
            }
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Linear(o) => write!(f, "{o}"),
            Algorithm::PGreedyI => f.write_str("pgreedy1"),
            Algorithm::PGreedyII => f.write_str("pgreedy2"),
            Algorithm::ParallelizePost(LinearOptimizer::RoIII) => f.write_str("parallelize-post"),
            Algorithm::ParallelizePost(o) => write!(f, "parallelize-post:{o}"),
            Algorithm::Mimo {
                inner,
                parallel: false,
            } => write!(f, "mimo:{inner}"),
            Algorithm::Mimo {
                inner: LinearOptimizer::RoIII,
                parallel: true,
            } => f.write_str("mimo:parallelize-post"),
            Algorithm::Mimo {
                inner,
                parallel: true,
            } => write!(f, "mimo:parallelize-post:{inner}"),
        }
    }
}

fn parallel_inner(rest: &str) -> Result<LinearOptimizer> {
    match rest {
        "" => Ok(LinearOptimizer::RoIII),
        r => r
            .strip_prefix(':')
            .ok_or_else(|| FlowError::Config(format!("unknown algorithm suffix `{r}`")))?
            .parse(),
    }
}

impl FromStr for Algorithm {
    type Err = FlowError;

    /// Accepts the linear optimizer names plus `pgreedy1`, `pgreedy2`,
    /// `parallelize-post[:<inner>]` (RO-III by default) and
    /// `mimo:<inner>` / `mimo:parallelize-post[:<inner>]`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgreedy1" => return Ok(Algorithm::PGreedyI),
            "pgreedy2" => return Ok(Algorithm::PGreedyII),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("mimo:") {
            return Ok(match rest.strip_prefix("parallelize-post") {
                Some(r) => Algorithm::Mimo {
                    inner: parallel_inner(r)?,
                    parallel: true,
                },
                None => Algorithm::Mimo {
                    inner: rest.parse()?,
                    parallel: false,
                },
            });
        }
        if let Some(rest) = s.strip_prefix("parallelize-post") {
            return Ok(Algorithm::ParallelizePost(parallel_inner(rest)?));
        }
        s.parse().map(Algorithm::Linear)
    }
}
