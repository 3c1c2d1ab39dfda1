use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{FlowError, Result};
use crate::exact::SearchLimits;
use crate::flowcore::{
    linear_cost, random_valid_plan, CostModel, FlowSpec, LinearPlan, Plan, PlanDag,
};
use crate::generator::{generate, GenConfig, ValueDist};
use crate::mimo::{butterfly, fork, ShapeConfig};

use super::algorithms::{Algorithm, Input, RunContext};
use super::WorkbenchError;

/// Layout of benchmark flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// A generated flow with a random valid plan as the starting point.
    Linear,
    Butterfly,
    Fork,
}

impl FromStr for Shape {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Shape::Linear),
            "butterfly" => Ok(Shape::Butterfly),
            "fork" => Ok(Shape::Fork),
            _ => Err(FlowError::Config(format!("unknown shape `{s}`"))),
        }
    }
}

pub fn parse_dist(s: &str) -> Result<ValueDist> {
    match s {
        "uniform" => Ok(ValueDist::Uniform),
        "beta" => Ok(ValueDist::beta()),
        _ => Err(FlowError::Config(format!("unknown distribution `{s}`"))),
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub shape: Shape,
    /// Tasks per flow, or per segment for multi-segment shapes.
    pub n: usize,
    pub segments: usize,
    pub pc_fraction: f64,
    pub dist: ValueDist,
    pub runs: u64,
    pub base_seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub model: CostModel,
    pub limits: SearchLimits,
}

impl BenchConfig {
    pub fn linear(n: usize, pc_fraction: f64, runs: u64, algorithms: Vec<Algorithm>) -> Self {
        Self {
            shape: Shape::Linear,
            n,
            segments: 1,
            pc_fraction,
            dist: ValueDist::Uniform,
            runs,
            base_seed: 0,
            algorithms,
            model: CostModel::default(),
            limits: SearchLimits::default(),
        }
    }
}

/// Benchmark settings as read from a JSON file; every field is optional.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfigFile {
    pub shape: Option<Shape>,
    pub n: Option<usize>,
    pub segments: Option<usize>,
    pub pc_fraction: Option<f64>,
    pub dist: Option<String>,
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub algorithms: Option<Vec<String>>,
    pub merge_cost: Option<f64>,
}

impl BenchConfigFile {
    /// Overrides fields of `base` that the file sets.
    pub fn apply(self, mut base: BenchConfig) -> Result<BenchConfig> {
        if let Some(v) = self.shape {
            base.shape = v;
        }
        if let Some(v) = self.n {
            base.n = v;
        }
        if let Some(v) = self.segments {
            base.segments = v;
        }
        if let Some(v) = self.pc_fraction {
            base.pc_fraction = v;
        }
        if let Some(v) = self.dist {
            base.dist = parse_dist(&v)?;
        }
        if let Some(v) = self.runs {
            base.runs = v;
        }
        if let Some(v) = self.seed {
            base.base_seed = v;
        }
        if let Some(v) = self.algorithms {
            base.algorithms = v.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = self.merge_cost {
            base.model = CostModel::new(v)?;
        }
        Ok(base)
    }
}

/// A generated benchmark flow and its starting plan.
#[derive(Debug, Clone)]
pub struct Instance {
    pub flow: FlowSpec,
    pub initial: Option<LinearPlan>,
    pub dag: Option<PlanDag>,
    pub initial_scm: f64,
}

pub fn instance(cfg: &BenchConfig, seed: u64) -> Result<Instance> {
    match cfg.shape {
        Shape::Linear => {
            let flow = generate(&GenConfig {
                n: cfg.n,
                pc_fraction: cfg.pc_fraction,
                cost_dist: cfg.dist,
                sel_dist: cfg.dist,
                seed,
            })?;
            let initial = random_valid_plan(&flow, seed);
            let initial_scm = linear_cost(&flow, initial.order());
            Ok(Instance {
                flow,
                initial: Some(initial),
                dag: None,
                initial_scm,
            })
        }
        Shape::Butterfly | Shape::Fork => {
            let sc = ShapeConfig {
                segments: cfg.segments,
                segment_len: cfg.n,
                pc_fraction: cfg.pc_fraction,
                dist: cfg.dist,
                seed,
            };
            let m = if cfg.shape == Shape::Butterfly {
                butterfly(&sc)?
            } else {
                fork(&sc)?
            };
            let initial_scm = m.dag.scm(&m.flow, &cfg.model)?;
            Ok(Instance {
                flow: m.flow,
                initial: None,
                dag: Some(m.dag),
                initial_scm,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    pub pc_pct: f64,
    pub algorithm: String,
    pub scm: f64,
    pub normalized_scm: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Mean normalized SCM per algorithm, starting with `initial`.
    pub means: Vec<(String, f64)>,
    /// The two algorithms AvgDiff and MaxDiff compare.
    pub compared: Option<(String, String)>,
    pub avg_diff: Option<f64>,
    pub max_diff: Option<f64>,
}

/// Runs every algorithm on `cfg.runs` flows with consecutive seeds. Seeds are
/// processed in parallel; rows come back in seed order.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let per_seed: Vec<Vec<BenchRow>> = (0..cfg.runs)
        .into_par_iter()
        .map(|k| bench_seed(cfg, cfg.base_seed + k))
        .collect::<Result<_>>()?;
    let rows: Vec<BenchRow> = per_seed.into_iter().flatten().collect();
    Ok(summarize(cfg, rows))
}

fn bench_seed(cfg: &BenchConfig, seed: u64) -> Result<Vec<BenchRow>> {
    let inst = instance(cfg, seed)?;
    let row = |algorithm: String, scm: f64, wall: Duration| BenchRow {
        seed,
        n: inst.flow.len(),
        pc_pct: cfg.pc_fraction * 100.0,
        algorithm,
        scm,
        normalized_scm: scm / inst.initial_scm,
        wall_time_ms: wall.as_secs_f64() * 1e3,
    };
    let mut rows = vec![row("initial".into(), inst.initial_scm, Duration::ZERO)];
    let ctx = RunContext {
        model: cfg.model,
        limits: cfg.limits,
        seed,
    };
    let input = Input {
        flow: &inst.flow,
        initial: inst.initial.as_ref(),
        dag: inst.dag.as_ref(),
    };
    for alg in &cfg.algorithms {
        let started = Instant::now();
        let plan = alg.run(&input, &ctx)?;
        let wall = started.elapsed();
        let v = plan.validate(&inst.flow);
        if !v.is_empty() {
            return Err(FlowError::InvalidPlan(v));
        }
        rows.push(row(
            alg.to_string(),
            plan.scm(&inst.flow, &cfg.model)?,
            wall,
        ));
    }
    Ok(rows)
}

/// The pair measured by AvgDiff and MaxDiff: swap against RO-III when both
/// ran (directly or segment-wise), otherwise the first two algorithms.
fn diff_pair(names: &[String]) -> Option<(String, String)> {
    for (a, b) in [("swap", "ro3"), ("mimo:swap", "mimo:ro3")] {
        if names.iter().any(|n| n == a) && names.iter().any(|n| n == b) {
            return Some((a.into(), b.into()));
        }
    }
    match names {
        [a, b, ..] => Some((a.clone(), b.clone())),
        _ => None,
    }
}

fn summarize(cfg: &BenchConfig, rows: Vec<BenchRow>) -> BenchReport {
    let mut names = vec!["initial".to_string()];
    names.extend(cfg.algorithms.iter().map(|a| a.to_string()));
    let mut means = Vec::new();
    for name in &names {
        if means.iter().any(|(n, _)| n == name) {
            continue;
        }
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| &r.algorithm == name)
            .map(|r| r.normalized_scm)
            .collect();
        if !vals.is_empty() {
            means.push((name.clone(), vals.iter().sum::<f64>() / vals.len() as f64));
        }
    }
    let compared = diff_pair(&names[1..]);
    let (mut avg_diff, mut max_diff) = (None, None);
    if let Some((a, b)) = &compared {
        let scm_of = |seed: u64, name: &str| {
            rows.iter()
                .find(|r| r.seed == seed && r.algorithm == name)
                .map(|r| r.scm)
        };
        let diffs: Vec<f64> = (0..cfg.runs)
            .filter_map(|k| {
                let seed = cfg.base_seed + k;
                let (x, y) = (scm_of(seed, a)?, scm_of(seed, b)?);
                Some((x - y) / x)
            })
            .collect();
        if !diffs.is_empty() {
            avg_diff = Some(diffs.iter().sum::<f64>() / diffs.len() as f64);
            max_diff = diffs.iter().copied().reduce(f64::max);
        }
    }
    BenchReport {
        rows,
        means,
        compared,
        avg_diff,
        max_diff,
    }
}

/// Formats with `digits` significant digits, dropping trailing zeros.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl BenchReport {
    /// CSV rows followed by a blank line and the aggregate block.
    pub fn to_csv(&self) -> std::result::Result<String, WorkbenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "seed",
            "n",
            "pc_pct",
            "algorithm",
            "scm",
            "normalized_scm",
            "wall_time_ms",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.seed.to_string(),
                r.n.to_string(),
                sig(r.pc_pct, 6),
                r.algorithm.clone(),
                sig(r.scm, 6),
                sig(r.normalized_scm, 6),
                sig(r.wall_time_ms, 6),
            ])?;
        }
        let mut out = String::from_utf8(
            w.into_inner()
                .map_err(|e| csv::Error::from(e.into_error()))?,
        )
        .expect("csv output is utf-8");
        out.push('\n');
        out.push_str(&self.aggregate_block());
        Ok(out)
    }

    /// Mean normalized SCM per algorithm and the swap/RO-III gap, to 4
    /// decimals.
    pub fn aggregate_block(&self) -> String {
        let mut s = String::from("algorithm,mean_normalized_scm\n");
        for (name, m) in &self.means {
            let _ = writeln!(s, "{name},{m:.4}");
        }
        if let (Some((a, b)), Some(avg), Some(max)) = (&self.compared, self.avg_diff, self.max_diff)
        {
            let _ = writeln!(s, "AvgDiff({a} vs {b}),{avg:.4}");
            let _ = writeln!(s, "MaxDiff({a} vs {b}),{max:.4}");
        }
        s
    }

    pub fn mean(&self, algorithm: &str) -> Option<f64> {
        self.means
            .iter()
            .find(|(n, _)| n == algorithm)
            .map(|&(_, m)| m)
    }
}

#[derive(Debug, Clone)]
pub struct OverheadConfig {
    pub algorithm: Algorithm,
    pub sizes: Vec<usize>,
    pub pc_fraction: f64,
    pub dist: ValueDist,
    pub runs: u64,
    pub base_seed: u64,
    pub limits: SearchLimits,
    /// Per-run time budget; replaces any deadline in `limits`.
    pub timeout: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadRow {
    pub seed: u64,
    pub n: usize,
    pub pc_pct: f64,
    pub algorithm: String,
    pub wall_time_ms: f64,
    /// `ok`, `timeout` or `guard`.
    pub status: &'static str,
}

/// Times one optimizer run; returns the wall time and the outcome.
pub fn time_run(alg: &Algorithm, flow: &FlowSpec, ctx: &RunContext) -> (Duration, Result<()>) {
    let input = Input {
        flow,
        initial: None,
        dag: None,
    };
    let started = Instant::now();
    let r = alg.run(&input, ctx).map(|_| ());
    (started.elapsed(), r)
}

/// Measures optimizer wall time across flow sizes, one run at a time.
pub fn run_overhead(cfg: &OverheadConfig) -> Result<Vec<OverheadRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        for k in 0..cfg.runs {
            let seed = cfg.base_seed + k;
            let flow = generate(&GenConfig {
                n,
                pc_fraction: cfg.pc_fraction,
                cost_dist: cfg.dist,
                sel_dist: cfg.dist,
                seed,
            })?;
            let mut limits = cfg.limits;
            if let Some(t) = cfg.timeout {
                limits.deadline = Some(Instant::now() + t);
            }
            let ctx = RunContext {
                model: CostModel::default(),
                limits,
                seed,
            };
            let (wall, outcome) = time_run(&cfg.algorithm, &flow, &ctx);
            let status = match outcome {
                Ok(()) => "ok",
                Err(FlowError::Timeout(_)) => "timeout",
                Err(FlowError::SizeLimitExceeded { .. } | FlowError::ClusterTooLarge { .. }) => {
                    "guard"
                }
                Err(e) => return Err(e),
            };
            rows.push(OverheadRow {
                seed,
                n,
                pc_pct: cfg.pc_fraction * 100.0,
                algorithm: cfg.algorithm.to_string(),
                wall_time_ms: wall.as_secs_f64() * 1e3,
                status,
            });
        }
    }
    Ok(rows)
}

pub fn overhead_csv(rows: &[OverheadRow]) -> std::result::Result<String, WorkbenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seed", "n", "pc_pct", "algorithm", "wall_time_ms", "status"])?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.n.to_string(),
            sig(r.pc_pct, 6),
            r.algorithm.clone(),
            sig(r.wall_time_ms, 6),
            r.status.to_string(),
        ])?;
    }
    Ok(String::from_utf8(
        w.into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?,
    )
    .expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mimo::LinearOptimizer;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(2.65, 6), "2.65");
        assert_eq!(sig(1234567.0, 6), "1234567");
        assert_eq!(sig(0.000123456789, 6), "0.000123457");
        assert_eq!(sig(40.0, 6), "40");
        assert_eq!(sig(1.0 / 3.0, 6), "0.333333");
    }

    #[test]
    fn identical_algorithms_have_no_gap() {
        let swap = Algorithm::Linear(LinearOptimizer::Swap);
        let cfg = BenchConfig::linear(8, 0.4, 4, vec![swap, swap]);
        let r = run_bench(&cfg).unwrap();
        assert_eq!(r.avg_diff, Some(0.0));
        assert_eq!(r.max_diff, Some(0.0));
        assert_eq!(r.mean("initial"), Some(1.0));
    }

    #[test]
    fn exact_algorithms_agree_in_bench() {
        let algs = ["backtracking", "dp", "topsort"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let r = run_bench(&BenchConfig::linear(8, 0.3, 1, algs)).unwrap();
        let scms: Vec<f64> = r.rows.iter().skip(1).map(|r| r.scm).collect();
        assert!(scms.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-9 * w[0]));
    }

    #[test]
    fn csv_is_deterministic_apart_from_timing() {
        let algs = vec!["swap".parse().unwrap(), "ro3".parse().unwrap()];
        let cfg = BenchConfig::linear(10, 0.4, 3, algs);
        let strip = |r: BenchReport| -> Vec<_> {
            r.rows
                .into_iter()
                .map(|x| (x.seed, x.algorithm, x.scm.to_bits()))
                .collect()
        };
        assert_eq!(
            strip(run_bench(&cfg).unwrap()),
            strip(run_bench(&cfg).unwrap())
        );
        let csv = run_bench(&cfg).unwrap().to_csv().unwrap();
        assert!(csv.starts_with("seed,n,pc_pct,algorithm,scm,normalized_scm,wall_time_ms\n"));
        assert!(csv.contains("AvgDiff(swap vs ro3)"));
    }
}
