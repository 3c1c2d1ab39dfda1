//! Seeded synthetic flows: random task metadata plus a random partial order
//! with a prescribed number of (transitively closed) precedence pairs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::flowcore::{FlowSpec, PrecedenceGraph, Task};

/// Smallest selectivity the generator emits.
pub const MIN_SEL: f64 = 1e-9;

/// How a task attribute is drawn. Beta samples are scaled onto the
/// attribute's range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ValueDist {
    Uniform,
    Beta { a: f64, b: f64 },
}

impl ValueDist {
    pub fn beta() -> Self {
        ValueDist::Beta { a: 0.5, b: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    /// Fraction of the `n(n-1)/2` task pairs that end up ordered.
    pub pc_fraction: f64,
    pub cost_dist: ValueDist,
    pub sel_dist: ValueDist,
    pub seed: u64,
}

impl GenConfig {
    pub fn uniform(n: usize, pc_fraction: f64, seed: u64) -> Self {
        Self {
            n,
            pc_fraction,
            cost_dist: ValueDist::Uniform,
            sel_dist: ValueDist::Uniform,
            seed,
        }
    }

    pub fn beta(n: usize, pc_fraction: f64, seed: u64) -> Self {
        Self {
            n,
            pc_fraction,
            cost_dist: ValueDist::beta(),
            sel_dist: ValueDist::beta(),
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Number of ordered pairs the generated closure will contain.
    pub fn target_pairs(&self) -> usize {
        let all = self.n * self.n.saturating_sub(1) / 2;
        // guard against 0.4 * 190 landing just above 76
        ((self.pc_fraction * all as f64) - 1e-9).ceil().max(0.0) as usize
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(FlowError::Config("task count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.pc_fraction) {
            return Err(FlowError::Config(format!(
                "constraint fraction {} is outside [0, 1]",
                self.pc_fraction
            )));
        }
        for d in [self.cost_dist, self.sel_dist] {
            if let ValueDist::Beta { a, b } = d {
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(FlowError::Config(format!(
                        "beta parameters must be positive, got a={a} b={b}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn sample_unit(rng: &mut ChaCha8Rng, dist: ValueDist) -> f64 {
    match dist {
        ValueDist::Uniform => rng.random::<f64>(),
        ValueDist::Beta { a, b } => Beta::new(a, b).expect("checked").sample(rng),
    }
}

/// Generates a flow. Costs lie in `[1, 100]` and selectivities in `(0, 2]`.
///
/// Precedence pairs follow a hidden random total order. Random forward pairs
/// that are not yet ordered are added one by one; when a pair would add more
/// closure pairs than are still missing it is first narrowed to a pair whose
/// addition orders exactly one new pair, so the closure hits the target
/// exactly.
pub fn generate(config: &GenConfig) -> Result<FlowSpec> {
    config.check()?;
    let n = config.n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let tasks = (0..n)
        .map(|i| {
            let cost = match config.cost_dist {
                ValueDist::Uniform => rng.random_range(1.0..=100.0),
                d => 1.0 + 99.0 * sample_unit(&mut rng, d),
            };
            let sel = match config.sel_dist {
                ValueDist::Uniform => 2.0 * (1.0 - rng.random::<f64>()),
                d => MIN_SEL + (2.0 - MIN_SEL) * sample_unit(&mut rng, d),
            };
            Task::new(i as u64 + 1, cost, sel.max(MIN_SEL))
        })
        .collect();
    let mut hidden: Vec<usize> = (0..n).collect();
    hidden.shuffle(&mut rng);
    let pc = random_order(&hidden, config.target_pairs(), &mut rng);
    FlowSpec::from_parts(tasks, pc)
}

fn random_order(hidden: &[usize], target: usize, rng: &mut ChaCha8Rng) -> PrecedenceGraph {
    let n = hidden.len();
    let mut pc = PrecedenceGraph::empty(n);
    let mut count = 0;
    while count < target {
        let (a, b) = random_free_pair(&pc, hidden, rng);
        let (a, b) = if pc.closure_increment(a, b) > target - count {
            critical_pair(&pc, a, b)
        } else {
            (a, b)
        };
        count += pc
            .add_edge(a, b)
            .expect("forward pairs never close a cycle");
    }
    pc
}

/// An unordered pair `(a, b)` with `a` before `b` in the hidden order.
fn random_free_pair(
    pc: &PrecedenceGraph,
    hidden: &[usize],
    rng: &mut ChaCha8Rng,
) -> (usize, usize) {
    let n = hidden.len();
    for _ in 0..64 {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let (i, j) = (i.min(j), i.max(j));
        if i != j && !pc.comparable(hidden[i], hidden[j]) {
            return (hidden[i], hidden[j]);
        }
    }
    let free: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !pc.comparable(hidden[i], hidden[j]))
        .map(|(i, j)| (hidden[i], hidden[j]))
        .collect();
    free[rng.random_range(0..free.len())]
}

/// Moves `a` down and `b` up while they stay unordered. At the end every
/// predecessor of `a` precedes `b` and every successor of `b` follows `a`, so
/// adding `a -> b` orders exactly one new pair.
fn critical_pair(pc: &PrecedenceGraph, mut a: usize, mut b: usize) -> (usize, usize) {
    while let Some(z) = pc.predecessors(a).ones().find(|&z| !pc.comparable(z, b)) {
        a = z;
    }
    while let Some(w) = pc.successors(b).ones().find(|&w| !pc.comparable(a, w)) {
        b = w;
    }
    (a, b)
}
