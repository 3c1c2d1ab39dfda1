use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};

use flowopt::exact::SearchLimits;
use flowopt::flowcore::{approx_eq, random_valid_plan, CostModel, Plan, PlanDag};
use flowopt::generator::{generate, GenConfig};
use flowopt::workbench::bench::{overhead_csv, parse_dist, BenchConfigFile};
use flowopt::workbench::io::{read_json, write_output};
use flowopt::workbench::{
    datasets, dot, load_document, load_flow, run_bench, run_overhead, Algorithm, BenchConfig,
    Document, FlowFile, Input, LoadedFlow, OverheadConfig, PlanFile, PlanOutput, RunContext, Shape,
    WorkbenchError,
};

#[derive(Debug, Parser)]
#[command(
    name = "flowopt",
    version,
    about = "Re-order data flow tasks to minimize their total per-tuple cost"
)]
struct Cli {
    /// Seed for random starting plans and generated flows
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Per-tuple cost of merging several input streams
    #[arg(long, global = true, default_value_t = 0.0)]
    mc: f64,

    /// Run exact algorithms beyond their size guard
    #[arg(long, global = true)]
    force: bool,

    /// Abort exact algorithms after this many milliseconds
    #[arg(long, global = true)]
    timeout_ms: Option<u64>,

    /// Write the main output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize a flow file (or `bundled:<name>`) and emit the plan as JSON
    Optimize {
        flow: String,
        #[arg(short, long, default_value = "ro3")]
        algorithm: String,
    },
    /// Run algorithms on generated flows and emit a CSV report
    Bench {
        #[arg(long, default_value = "linear")]
        shape: Shape,
        /// Tasks per flow, or per segment for butterfly and fork
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        segments: usize,
        /// Fraction of task pairs that are ordered
        #[arg(long, default_value_t = 0.4)]
        pc: f64,
        /// uniform or beta
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long, default_value_t = 100)]
        runs: u64,
        #[arg(long, value_delimiter = ',', default_value = "ro1,ro2,ro3,swap")]
        algorithms: Vec<String>,
        /// JSON file whose fields override the flags above
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Time one algorithm over a range of flow sizes
    Overhead {
        #[arg(short, long, default_value = "dp")]
        algorithm: String,
        #[arg(long, value_delimiter = ',', default_value = "15,16,17,18")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.4)]
        pc: f64,
        #[arg(long, default_value = "uniform")]
        dist: String,
        #[arg(long, default_value_t = 3)]
        runs: u64,
    },
    /// Generate a random flow file
    Generate {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        pc: f64,
        #[arg(long, default_value = "uniform")]
        dist: String,
    },
    /// Render a flow or plan file as a Graphviz digraph
    ExportDot { file: String },
    /// Check a flow or plan file
    Validate { file: String },
}

fn read_flow(arg: &str) -> Result<LoadedFlow, WorkbenchError> {
    match arg.strip_prefix("bundled:") {
        Some(name) => datasets::bundled(name)
            .ok_or_else(|| WorkbenchError::Format(format!("no bundled flow named `{name}`"))),
        None => load_flow(Path::new(arg)),
    }
}

fn read_document(arg: &str) -> Result<Document, WorkbenchError> {
    match arg.strip_prefix("bundled:") {
        Some(_) => read_flow(arg).map(Document::Flow),
        None => load_document(Path::new(arg)),
    }
}

fn limits(cli: &Cli) -> SearchLimits {
    SearchLimits {
        force: cli.force,
        deadline: cli
            .timeout_ms
            .map(|ms| Instant::now() + Duration::from_millis(ms)),
    }
}

fn optimize(cli: &Cli, flow_arg: &str, algorithm: &str) -> Result<(), WorkbenchError> {
    let algorithm: Algorithm = algorithm.parse()?;
    let loaded = read_flow(flow_arg)?;
    let flow = &loaded.flow;
    let model = CostModel::new(cli.mc)?;
    let before = match (&loaded.dag, &loaded.initial) {
        (Some(dag), _) => dag.scm(flow, &model)?,
        (None, Some(p)) => p.scm(flow, &model)?,
        (None, None) => random_valid_plan(flow, cli.seed).scm(flow, &model)?,
    };
    let ctx = RunContext {
        model,
        limits: limits(cli),
        seed: cli.seed,
    };
    let input = Input {
        flow,
        initial: loaded.initial.as_ref(),
        dag: loaded.dag.as_ref(),
    };
    let plan = algorithm.run(&input, &ctx)?;
    let file = PlanFile::new(&algorithm.to_string(), flow, &plan, &model)?;
    let json = serde_json::to_string_pretty(&file).expect("plans serialize") + "\n";
    let report = format!(
        "algorithm: {algorithm}\nscm before: {before}\nscm after: {}\n",
        file.scm
    );
    write_output(cli.out.as_deref(), &json)?;
    if cli.out.is_some() {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(())
}

fn validate(file: &str) -> Result<bool, WorkbenchError> {
    match read_document(file)? {
        Document::Flow(loaded) => {
            let flow = &loaded.flow;
            println!(
                "flow: {} tasks, {} ordered pairs",
                flow.len(),
                flow.pc().edge_count()
            );
            let mut ok = true;
            let plans = [
                ("initial", loaded.initial.clone().map(PlanOutput::Linear)),
                ("edges", loaded.dag.clone().map(PlanOutput::Dag)),
            ];
            for (what, plan) in plans {
                if let Some(p) = plan {
                    ok &= report_violations(what, &p.validate(flow));
                }
            }
            Ok(ok)
        }
        Document::Plan(file) => {
            let stored = file.scm;
            let model = CostModel::new(file.merge_cost)?;
            let (flow, plan) = file.load()?;
            let v = plan.validate(&flow);
            if !report_violations("plan", &v) {
                return Ok(false);
            }
            let scm = plan.scm(&flow, &model)?;
            println!("plan valid, scm {scm}");
            if !approx_eq(scm, stored) {
                println!("stored scm {stored} does not match");
                return Ok(false);
            }
            Ok(true)
        }
    }
}

fn report_violations(what: &str, v: &[flowopt::flowcore::Violation]) -> bool {
    for x in v {
        println!("{what}: {x}");
    }
    v.is_empty()
}

fn export_dot(file: &str) -> Result<String, WorkbenchError> {
    Ok(match read_document(file)? {
        Document::Flow(loaded) => {
            let name = loaded.name.clone().unwrap_or_else(|| "flow".into());
            match &loaded.dag {
                Some(dag) => dot::to_dot(&loaded.flow, &name, dag.edges()),
                None => dot::to_dot(&loaded.flow, &name, loaded.flow.pc().reduction()),
            }
        }
        Document::Plan(file) => {
            let name = file.algorithm.clone();
            let (flow, plan) = file.load()?;
            let dag: PlanDag = plan.to_dag();
            dot::to_dot(&flow, &name, dag.edges())
        }
    })
}

fn run(cli: &Cli) -> Result<bool, WorkbenchError> {
    let model = CostModel::new(cli.mc)?;
    match &cli.command {
        Command::Optimize { flow, algorithm } => optimize(cli, flow, algorithm)?,
        Command::Bench {
            shape,
            n,
            segments,
            pc,
            dist,
            runs,
            algorithms,
            config,
        } => {
            let mut cfg = BenchConfig {
                shape: *shape,
                n: *n,
                segments: *segments,
                pc_fraction: *pc,
                dist: parse_dist(dist)?,
                runs: *runs,
                base_seed: cli.seed,
                algorithms: algorithms
                    .iter()
                    .map(|a| a.parse())
                    .collect::<Result<_, _>>()?,
                model,
                limits: SearchLimits {
                    force: cli.force,
                    deadline: None,
                },
            };
            if let Some(path) = config {
                cfg = read_json::<BenchConfigFile>(path)?.apply(cfg)?;
            }
            let report = run_bench(&cfg)?;
            write_output(cli.out.as_deref(), &report.to_csv()?)?;
        }
        Command::Overhead {
            algorithm,
            sizes,
            pc,
            dist,
            runs,
        } => {
            let cfg = OverheadConfig {
                algorithm: algorithm.parse()?,
                sizes: sizes.clone(),
                pc_fraction: *pc,
                dist: parse_dist(dist)?,
                runs: *runs,
                base_seed: cli.seed,
                limits: SearchLimits {
                    force: cli.force,
                    deadline: None,
                },
                timeout: cli.timeout_ms.map(Duration::from_millis),
            };
            write_output(cli.out.as_deref(), &overhead_csv(&run_overhead(&cfg)?)?)?;
        }
        Command::Generate { n, pc, dist } => {
            let d = parse_dist(dist)?;
            let flow = generate(&GenConfig {
                n: *n,
                pc_fraction: *pc,
                cost_dist: d,
                sel_dist: d,
                seed: cli.seed,
            })?;
            let mut file = FlowFile::from_flow(&flow);
            file.name = Some(format!("generated n={n} pc={pc} {dist} seed={}", cli.seed));
            let json = serde_json::to_string_pretty(&file).expect("flows serialize") + "\n";
            write_output(cli.out.as_deref(), &json)?;
        }
        Command::ExportDot { file } => write_output(cli.out.as_deref(), &export_dot(file)?)?,
        Command::Validate { file } => return validate(file),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli);
    let _ = std::io::stdout().flush();
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
