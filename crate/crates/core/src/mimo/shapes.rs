use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FlowError, Result};
use crate::flowcore::{random_valid_plan, transitive_closure, FlowSpec, PlanDag, Task};
use crate::generator::{generate, GenConfig, ValueDist};

/// A flow together with the initial plan DAG that fixes its shape.
#[derive(Debug, Clone)]
pub struct MimoFlow {
    pub flow: FlowSpec,
    pub dag: PlanDag,
}

/// Parameters of a synthetic multi-segment flow. Segment members are drawn
/// like generated flows; boundary tasks cost 1 and keep cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeConfig {
    pub segments: usize,
    pub segment_len: usize,
    pub pc_fraction: f64,
    pub dist: ValueDist,
    pub seed: u64,
}

impl ShapeConfig {
    pub fn uniform(segments: usize, segment_len: usize, pc_fraction: f64, seed: u64) -> Self {
        Self {
            segments,
            segment_len,
            pc_fraction,
            dist: ValueDist::Uniform,
            seed,
        }
    }
}

/// Incrementally assembled shape: boundary tasks and segments between them.
struct Builder {
    cfg: ShapeConfig,
    rng: ChaCha8Rng,
    tasks: Vec<Task>,
    pcs: Vec<(usize, usize)>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn new(cfg: &ShapeConfig) -> Result<Self> {
        if cfg.segments == 0 || cfg.segment_len == 0 {
            return Err(FlowError::Config(
                "shapes need at least one segment and one task per segment".into(),
            ));
        }
        Ok(Self {
            cfg: cfg.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            tasks: Vec::new(),
            pcs: Vec::new(),
            edges: Vec::new(),
        })
    }

    fn boundary(&mut self, label: &str) -> usize {
        let i = self.tasks.len();
        self.tasks
            .push(Task::new(i as u64 + 1, 1.0, 1.0).with_label(label));
        i
    }

    /// Adds a segment from `from` to `to`, its members in a random valid order.
    fn segment(&mut self, from: usize, to: usize) -> Result<()> {
        let gen = GenConfig {
            n: self.cfg.segment_len,
            pc_fraction: self.cfg.pc_fraction,
            cost_dist: self.cfg.dist,
            sel_dist: self.cfg.dist,
            seed: self.rng.random(),
        };
        let sub = generate(&gen)?;
        let base = self.tasks.len();
        for t in sub.tasks() {
            self.tasks.push(Task::new(
                (self.tasks.len() + 1) as u64,
                t.cost,
                t.selectivity,
            ));
        }
        for (a, b) in sub.pc().edges() {
            self.pcs.push((base + a, base + b));
        }
        for k in 0..sub.len() {
            self.pcs.push((from, base + k));
            self.pcs.push((base + k, to));
        }
        let order = random_valid_plan(&sub, self.rng.random());
        let mut prev = from;
        for &k in order.order() {
            self.edges.push((prev, base + k));
            prev = base + k;
        }
        self.edges.push((prev, to));
        Ok(())
    }

    fn finish(self) -> Result<MimoFlow> {
        let n = self.tasks.len();
        let pc = transitive_closure(&self.pcs, n)?;
        let flow = FlowSpec::from_parts(self.tasks, pc)?;
        let dag = PlanDag::new((0..n).collect(), self.edges);
        Ok(MimoFlow { flow, dag })
    }
}

/// One source, one segment, one sink.
pub fn linear_shape(cfg: &ShapeConfig) -> Result<MimoFlow> {
    let mut b = Builder::new(cfg)?;
    let src = b.boundary("source");
    let snk = b.boundary("sink");
    b.segment(src, snk)?;
    let mut m = b.finish()?;
    m.flow = m.flow.with_endpoints(Some(src), Some(snk))?;
    Ok(m)
}

/// Input segments from separate sources meet at a merge, continue through
/// one middle segment to a branch, and fan out to output segments with
/// their own sinks. Of `segments` (at least 3), one is the middle and the
/// rest are split as evenly as possible, favouring outputs.
pub fn butterfly(cfg: &ShapeConfig) -> Result<MimoFlow> {
    if cfg.segments < 3 {
        return Err(FlowError::Config(
            "a butterfly needs at least 3 segments".into(),
        ));
    }
    let inputs = (cfg.segments - 1) / 2;
    let outputs = cfg.segments - 1 - inputs;
    let mut b = Builder::new(cfg)?;
    let sources: Vec<usize> = (0..inputs).map(|_| b.boundary("source")).collect();
    let join = b.boundary("merge");
    let split = b.boundary("branch");
    let sinks: Vec<usize> = (0..outputs).map(|_| b.boundary("sink")).collect();
    for &s in &sources {
        b.segment(s, join)?;
    }
    b.segment(join, split)?;
    for &s in &sinks {
        b.segment(split, s)?;
    }
    b.finish()
}

/// One source segment up to a branch, then `segments - 1` output segments.
pub fn fork(cfg: &ShapeConfig) -> Result<MimoFlow> {
    if cfg.segments < 2 {
        return Err(FlowError::Config("a fork needs at least 2 segments".into()));
    }
    let mut b = Builder::new(cfg)?;
    let src = b.boundary("source");
    let split = b.boundary("branch");
    let sinks: Vec<usize> = (1..cfg.segments).map(|_| b.boundary("sink")).collect();
    b.segment(src, split)?;
    for &s in &sinks {
        b.segment(split, s)?;
    }
    b.finish()
}
