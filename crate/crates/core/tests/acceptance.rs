//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_force, brute_force_cut, rel_close, three_task};
use flowopt::exact::{
    backtracking, dynamic_programming, topsort_enumerate, topsort_search, SearchLimits,
};
use flowopt::flowcore::{
    linear_cost, random_valid_plan, transitive_closure, CostModel, FlowSpec, LinearPlan, Plan,
};
use flowopt::generator::{generate, GenConfig, ValueDist};
use flowopt::heuristics::{greedy_i, greedy_ii, partition, swap_opt};
use flowopt::mimo::LinearOptimizer;
use flowopt::parallel::{parallelize, pgreedy_i, pgreedy_ii, pgreedy_observed, PGreedyVariant};
use flowopt::rankorder::{kbz, ro_i, ro_ii, ro_iii, ro_iii_from, ConstraintTree, RO_III_WINDOW};
use flowopt::workbench::{
    datasets, run_bench, run_overhead, Algorithm, BenchConfig, BenchReport, OverheadConfig, Shape,
};

/// Outcome of one criterion: pass flag and a one-line summary.
type Verdict = (bool, String);

type Criterion = (&'static str, fn() -> Verdict);

fn scm(flow: &FlowSpec, p: &LinearPlan) -> f64 {
    linear_cost(flow, p.order())
}

fn algorithms(names: &[&str]) -> Vec<Algorithm> {
    names.iter().map(|s| s.parse().unwrap()).collect()
}

fn worked_example() -> Verdict {
    let f = three_task();
    let naive = linear_cost(&f, &[0, 1, 2]);
    let best = linear_cost(&f, &[1, 2, 0]);
    let mut ok = (naive - 3.1).abs() <= 1e-12 && (best - 2.65).abs() <= 1e-12;
    let start = LinearPlan::new(vec![0, 1, 2]);
    let witnesses = [
        ("swap", swap_opt(&f, Some(&start), 0).unwrap()),
        ("greedy1", greedy_i(&f)),
        ("partition", partition(&f).unwrap()),
    ];
    let tree = ConstraintTree::new(3, &f.pc().reduction()).unwrap();
    let optimal = [
        ("backtracking", backtracking(&f).unwrap()),
        ("dp", dynamic_programming(&f).unwrap()),
        ("topsort", topsort_enumerate(&f).unwrap()),
        ("kbz", kbz(&f, &tree).unwrap()),
        ("ro1", ro_i(&f)),
    ];
    let mut bad = Vec::new();
    for (name, p) in &witnesses {
        if (scm(&f, p) - 3.1).abs() > 1e-12 {
            bad.push(*name);
        }
    }
    for (name, p) in &optimal {
        if (scm(&f, p) - 2.65).abs() > 1e-12 {
            bad.push(*name);
        }
    }
    ok &= bad.is_empty();
    (ok, format!("scm {naive} and {best}; mismatches {bad:?}"))
}

fn oracle_flow(k: u64) -> FlowSpec {
    let n = 4 + (k % 6) as usize;
    let alpha = [0.2, 0.4, 0.6, 0.8][(k / 6 % 4) as usize];
    generate(&GenConfig::uniform(n, alpha, 1000 + k)).unwrap()
}

fn exact_oracle() -> Verdict {
    let mut failures = 0;
    for k in 0..200 {
        let f = oracle_flow(k);
        let (best, count) = brute_force(&f);
        let search = topsort_search(&f, &SearchLimits::default()).unwrap();
        let costs = [
            scm(&f, &backtracking(&f).unwrap()),
            scm(&f, &dynamic_programming(&f).unwrap()),
            search.cost,
        ];
        if !costs.iter().all(|&c| rel_close(c, best, 1e-9)) || search.visited != count as u64 {
            failures += 1;
        }
    }
    (
        failures == 0,
        format!("{failures}/200 flows disagree with brute force"),
    )
}

fn pdi_structure() -> Verdict {
    let pdi = datasets::pdi_case_study();
    let f = &pdi.flow;
    let best = dynamic_programming(f).unwrap();
    let pos = |id: u64| {
        let t = f.index_of(id).unwrap();
        best.order().iter().position(|&x| x == t).unwrap()
    };
    let label = |id: u64| {
        f.task(f.index_of(id).unwrap())
            .label
            .clone()
            .unwrap_or_default()
    };
    let region_first = pos(12) < pos(11);
    let dates_first = pos(6) < pos(8) && pos(7) < pos(8);
    let swapped = swap_opt(f, pdi.initial.as_ref(), 0).unwrap();
    let gap = scm(f, &swapped) > scm(f, &best);
    (
        region_first && dates_first && gap,
        format!(
            "{:?} before {:?}: {region_first}; {:?}/{:?} before {:?}: {dates_first}; swap {:.4} vs optimum {:.4}",
            label(12),
            label(11),
            label(6),
            label(7),
            label(8),
            scm(f, &swapped),
            scm(f, &best)
        ),
    )
}

fn table2(dist: ValueDist) -> BenchReport {
    let mut cfg = BenchConfig::linear(20, 0.4, 100, algorithms(&["ro1", "ro2", "ro3", "swap"]));
    cfg.dist = dist;
    run_bench(&cfg).unwrap()
}

fn table2_uniform() -> Verdict {
    let r = table2(ValueDist::Uniform);
    let m = |a| r.mean(a).unwrap();
    let (ro1, ro2, ro3, swap) = (m("ro1"), m("ro2"), m("ro3"), m("swap"));
    let ok = ro3 < swap
        && ro3 < ro1.min(ro2)
        && (ro3 - 0.2841).abs() <= 0.10
        && (swap - 0.4101).abs() <= 0.10;
    (
        ok,
        format!("ro1 {ro1:.4}, ro2 {ro2:.4}, ro3 {ro3:.4}, swap {swap:.4}"),
    )
}

fn table2_beta() -> Verdict {
    let r = table2(ValueDist::beta());
    let (ro3, swap) = (r.mean("ro3").unwrap(), r.mean("swap").unwrap());
    (ro3 < swap, format!("ro3 {ro3:.4}, swap {swap:.4}"))
}

fn parallel_monotone() -> Verdict {
    let zero = CostModel::default();
    let ten = CostModel::new(10.0).unwrap();
    let mut violations = 0;
    let mut change = 0.0;
    let runs = 500;
    for seed in 0..runs {
        let n = 5 + (seed % 26) as usize;
        let alpha = [0.2, 0.4, 0.6, 0.8][(seed / 26 % 4) as usize];
        let f = generate(&GenConfig::uniform(n, alpha, 5000 + seed)).unwrap();
        for p in [random_valid_plan(&f, seed), ro_iii(&f)] {
            let dag = parallelize(&p, &f, &zero).unwrap();
            if dag.scm(&f, &zero).unwrap() > scm(&f, &p) * (1.0 + 1e-9) {
                violations += 1;
            }
        }
        let p = ro_iii(&f);
        let base = parallelize(&p, &f, &zero).unwrap().scm(&f, &zero).unwrap();
        let merged = parallelize(&p, &f, &ten).unwrap().scm(&f, &ten).unwrap();
        change += (merged - base).abs() / base;
    }
    let mean = change / runs as f64;
    (
        violations == 0 && mean < 0.05,
        format!(
            "{violations} increases; mean change at mc=10 {:.2}%",
            mean * 100.0
        ),
    )
}

fn cut_optimality() -> Verdict {
    let model = CostModel::default();
    let (mut steps, mut wrong) = (0, 0);
    for seed in 0..100u64 {
        let n = 3 + (seed % 5) as usize;
        let f = generate(&GenConfig::uniform(
            n,
            0.2 + 0.2 * (seed % 4) as f64,
            7000 + seed,
        ))
        .unwrap();
        for variant in [PGreedyVariant::MinCost, PGreedyVariant::MaxRank] {
            pgreedy_observed(&f, &model, variant, |s| {
                steps += 1;
                if !rel_close(s.inp, brute_force_cut(&f, s.dag, s.task), 1e-9) {
                    wrong += 1;
                }
            });
        }
    }
    (
        wrong == 0,
        format!("{wrong}/{steps} placement steps above the brute-force minimum"),
    )
}

fn mimo_improvement() -> Verdict {
    let cfg = BenchConfig {
        shape: Shape::Butterfly,
        n: 20,
        segments: 10,
        runs: 30,
        ..BenchConfig::linear(20, 0.4, 30, algorithms(&["mimo:swap", "mimo:ro3"]))
    };
    let r = run_bench(&cfg).unwrap();
    let (swap, ro3) = (r.mean("mimo:swap").unwrap(), r.mean("mimo:ro3").unwrap());
    (
        ro3 < swap && ro3 <= 0.40,
        format!("mimo:ro3 {ro3:.4}, mimo:swap {swap:.4}"),
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn overhead_shape() -> Verdict {
    let cfg = OverheadConfig {
        algorithm: Algorithm::Linear(LinearOptimizer::Dp),
        sizes: vec![15, 16, 17, 18],
        pc_fraction: 0.4,
        dist: ValueDist::Uniform,
        runs: 3,
        base_seed: 0,
        limits: SearchLimits::forced(),
        timeout: None,
    };
    let rows = run_overhead(&cfg).unwrap();
    let times: Vec<f64> = cfg
        .sizes
        .iter()
        .map(|&n| {
            median(
                rows.iter()
                    .filter(|r| r.n == n)
                    .map(|r| r.wall_time_ms)
                    .collect(),
            )
        })
        .collect();
    let growing = times.windows(2).all(|w| w[1] > w[0]);

    let budget = Duration::from_secs(60);
    let f = generate(&GenConfig::uniform(30, 0.98, 0)).unwrap();
    let started = Instant::now();
    let limits = SearchLimits {
        force: true,
        deadline: Some(started + budget),
    };
    let done = topsort_search(&f, &limits);
    let took = started.elapsed();
    let feasible = done.is_ok() && took < budget;
    (
        growing && feasible,
        format!(
            "dp median ms {:?}; topsort n=30 at 98%: {} in {:.1} ms",
            times
                .iter()
                .map(|t| (t * 10.0).round() / 10.0)
                .collect::<Vec<_>>(),
            done.map(|e| format!("{} plans", e.visited))
                .unwrap_or_else(|e| e.to_string()),
            took.as_secs_f64() * 1e3
        ),
    )
}

fn tree_of(flow: &FlowSpec) -> Option<ConstraintTree> {
    ConstraintTree::new(flow.len(), &flow.pc().reduction()).ok()
}

/// Checks every module invariant on one generated flow; returns the first
/// failure.
fn invariants(case: u64) -> Result<(), String> {
    let n = 2 + (case % 9) as usize;
    let alpha = (case % 21) as f64 / 20.0;
    let cfg = if case.is_multiple_of(2) {
        GenConfig::uniform(n, alpha, case)
    } else {
        GenConfig::beta(n, alpha, case)
    };
    let f = generate(&cfg).map_err(|e| e.to_string())?;
    if f.pc().edge_count() != cfg.target_pairs() {
        return Err(format!(
            "{} pairs, wanted {}",
            f.pc().edge_count(),
            cfg.target_pairs()
        ));
    }
    let edges = f.pc().edges();
    if &transitive_closure(&edges, n).unwrap() != f.pc() {
        return Err("closure is not idempotent".into());
    }
    for t in f.tasks() {
        if (t.rank() * t.cost + t.selectivity - 1.0).abs() > 1e-9 {
            return Err(format!("rank identity fails for task {}", t.id));
        }
    }
    let start = random_valid_plan(&f, case);
    let mut linear = vec![
        ("swap", swap_opt(&f, Some(&start), case).unwrap()),
        ("greedy1", greedy_i(&f)),
        ("greedy2", greedy_ii(&f)),
        ("partition", partition(&f).unwrap()),
        ("ro1", ro_i(&f)),
        ("ro2", ro_ii(&f)),
        ("ro3", ro_iii(&f)),
    ];
    if n <= 8 {
        linear.push(("backtracking", backtracking(&f).unwrap()));
        linear.push(("dp", dynamic_programming(&f).unwrap()));
        linear.push(("topsort", topsort_enumerate(&f).unwrap()));
    }
    if let Some(tree) = tree_of(&f) {
        linear.push(("kbz", kbz(&f, &tree).unwrap()));
    }
    for (name, p) in &linear {
        if p.len() != n || !p.is_valid(&f) {
            return Err(format!("{name} returned an invalid plan"));
        }
    }
    let swapped = &linear[0].1;
    if swap_opt(&f, Some(swapped), case).unwrap() != *swapped {
        return Err("swap is not idempotent".into());
    }
    let ro3 = &linear[6].1;
    if ro_iii_from(&f, ro3, RO_III_WINDOW).unwrap() != *ro3 {
        return Err("ro3 is not idempotent".into());
    }
    let model = CostModel::default();
    for (name, dag) in [
        ("pgreedy1", pgreedy_i(&f, &model)),
        ("pgreedy2", pgreedy_ii(&f, &model)),
        ("parallelize", parallelize(ro3, &f, &model).unwrap()),
    ] {
        if dag.nodes().len() != n || !dag.is_valid(&f) {
            return Err(format!("{name} returned an invalid plan"));
        }
    }
    Ok(())
}

fn property_suite() -> Verdict {
    let failures: Vec<String> = (0..1000)
        .filter_map(|case| invariants(case).err().map(|e| format!("case {case}: {e}")))
        .collect();
    (
        failures.is_empty(),
        match failures.first() {
            None => "1000 cases, no violations".into(),
            Some(first) => format!("{} failing cases, first {first}", failures.len()),
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("worked example", worked_example),
        ("exact oracle agreement", exact_oracle),
        ("PDI case-study structure", pdi_structure),
        ("normalized SCM, uniform values", table2_uniform),
        ("normalized SCM, beta values", table2_beta),
        ("parallelize monotonicity", parallel_monotone),
        ("PGreedy cut optimality", cut_optimality),
        ("MIMO improvement", mimo_improvement),
        ("optimizer overhead shape", overhead_shape),
        ("property suite", property_suite),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let (ok, detail) = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|_| (false, "panicked".into()));
        failed += usize::from(!ok);
        println!(
            "{} criterion {}: {name} ({detail}) [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            started.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
