use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use labhh::bench::{self, BenchmarkConfig, Method, Report, Solver, Variant};
use labhh::controller::FeatureMask;
use labhh::instance::distance_matrix;
use labhh::landscape::{static_features, StaticFeatures};
use labhh::search::{Acceptance, PreparedInstance, DEFAULT_BUDGET};
use labhh::{generate, Error, Family, Instance, Operator};

#[derive(Parser, Debug)]
#[command(name = "labhh", version, about = "Landscape-aware bandit hyper-heuristic for Euclidean TSP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one instance, or the whole benchmark suite with --suite.
    Gen(GenArgs),
    /// Run one method on one instance and print the result as JSON.
    Run(RunArgs),
    /// Run the benchmark matrix and write CSV/JSON reports.
    Bench(BenchArgs),
    /// Run LA-BHH and its ablation variants and print the AUC table.
    Ablate(BenchArgs),
    /// Print the static landscape features of an instance as JSON.
    Features(FeaturesArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// uniform, clustered, corridor, grid-jitter or mixed-density
    #[arg(long, required_unless_present = "suite")]
    family: Option<Family>,
    /// Number of cities
    #[arg(long, required_unless_present = "suite")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file, or output directory with --suite.
    #[arg(long)]
    out: PathBuf,
    /// Write every benchmark instance into the --out directory.
    #[arg(long, conflicts_with_all = ["family", "n"])]
    suite: bool,
    #[command(flatten)]
    matrix: MatrixArgs,
}

#[derive(Args, Debug, Clone)]
struct MatrixArgs {
    /// Instance families (default: all five)
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<Family>>,
    /// Instance sizes (default: 50,100,200)
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Instances per family and size (default: 3)
    #[arg(long)]
    instances_per_cell: Option<usize>,
}

/// Hyperparameters shared by `run`, `bench` and `ablate`.
#[derive(Args, Debug, Clone)]
struct HyperArgs {
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// LinUCB exploration weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// Sliding window for the dynamic state.
    #[arg(long)]
    window: Option<usize>,
    /// Iterations without improvement before the gate may fire.
    #[arg(long)]
    stagnation_window: Option<usize>,
    /// Probability that an open gate forces 2-opt.
    #[arg(long)]
    p_gate: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// labhh, ucb-hh, random-hh, nn, two-opt, sa, ils, ga, or labhh-<variant>.
    #[arg(long, default_value = "labhh")]
    method: Solver,
    /// Instance JSON file
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Enable the stagnation gate
    #[arg(long, overrides_with = "no_gate")]
    gate: bool,
    /// Disable the stagnation gate
    #[arg(long, overrides_with = "gate")]
    no_gate: bool,
    /// greedy or annealing
    #[arg(long)]
    acceptance: Option<Acceptance>,
    /// full, nostatic, nodynamic or nocontext.
    #[arg(long)]
    features: Option<FeatureMask>,
    /// Comma-separated operator set.
    #[arg(long, value_delimiter = ',')]
    ops: Option<Vec<Operator>>,
    /// Also write the best-so-far trace as CSV.
    #[arg(long)]
    trace_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Run seeds (default: 1,2,3)
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Methods to run (default: all eight)
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Ablation variants to run (default: all nine)
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<Variant>>,
    /// Leave the ablation variants out of the run pool.
    #[arg(long, conflicts_with = "variants")]
    no_variants: bool,
    #[command(flatten)]
    matrix: MatrixArgs,
    #[command(flatten)]
    hyper: HyperArgs,
    /// Suppress progress on stderr
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    /// Instance JSON file
    #[arg(long, conflicts_with_all = ["family", "n"])]
    instance: Option<PathBuf>,
    #[arg(long, requires = "n")]
    family: Option<Family>,
    #[arg(long, requires = "family")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } | Error::Csv { .. } | Error::Json { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cmd: Command) -> labhh::Result<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Bench(a) => bench_cmd(a, false),
        Command::Ablate(a) => bench_cmd(a, true),
        Command::Features(a) => features(a),
    }
}

fn print_json(value: &serde_json::Value) -> labhh::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Internal(e.to_string()))?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn apply_matrix(cfg: &mut BenchmarkConfig, m: &MatrixArgs) {
    if let Some(f) = &m.families {
        cfg.families = f.clone();
    }
    if let Some(s) = &m.sizes {
        cfg.sizes = s.clone();
    }
    if let Some(k) = m.instances_per_cell {
        cfg.instances_per_cell = k;
    }
}

fn apply_hyper(cfg: &mut BenchmarkConfig, h: &HyperArgs) {
    cfg.budget = h.budget;
    if let Some(a) = h.alpha {
        cfg.params.alpha = a;
    }
    if let Some(w) = h.window {
        cfg.params.window = w;
    }
    if let Some(s) = h.stagnation_window {
        cfg.params.stagnation_window = s;
    }
    if let Some(p) = h.p_gate {
        cfg.params.p_gate = p;
    }
}

fn create_dir(dir: &Path) -> labhh::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn gen(a: GenArgs) -> labhh::Result<()> {
    if a.suite {
        let mut cfg = BenchmarkConfig::default();
        apply_matrix(&mut cfg, &a.matrix);
        create_dir(&a.out)?;
        let instances = cfg.instances()?;
        for inst in &instances {
            inst.save(a.out.join(format!("{}.json", inst.id)))?;
        }
        eprintln!("wrote {} instances to {}", instances.len(), a.out.display());
        return Ok(());
    }
    let (family, n) = (a.family.expect("required by clap"), a.n.expect("required by clap"));
    generate(family, n, a.seed)?.save(&a.out)
}

fn run(a: RunArgs) -> labhh::Result<()> {
    let inst = Instance::load(&a.instance)?;
    let prepared = PreparedInstance::new(inst)?;
    let mut cfg = BenchmarkConfig::default();
    apply_hyper(&mut cfg, &a.hyper);
    cfg.params.validate()?;

    let (result, config) = match cfg.run_config(a.method, a.seed) {
        Some(mut rc) => {
            if a.gate {
                rc.gate_enabled = true;
            } else if a.no_gate {
                rc.gate_enabled = false;
            }
            if let Some(acc) = a.acceptance {
                rc.acceptance = acc;
            }
            if let Some(mask) = a.features {
                rc.feature_mask = mask;
            }
            if let Some(ops) = &a.ops {
                rc.operators = ops.clone();
            }
            let r = labhh::search::run_prepared(&prepared, &rc)?;
            (r, json!({ "run": rc }))
        }
        None => {
            if a.gate || a.no_gate || a.acceptance.is_some() || a.features.is_some() || a.ops.is_some() {
                return Err(Error::InvalidArgument(format!(
                    "--gate/--no-gate/--acceptance/--features/--ops apply only to hyper-heuristics, not {}",
                    a.method
                )));
            }
            let r = cfg.run_one(&prepared, a.method, a.seed)?;
            let mut c = json!({ "budget": cfg.budget, "seed": a.seed });
            match a.method {
                Solver::Method(Method::Sa) => c["annealing"] = json!(cfg.annealing),
                Solver::Method(Method::Ga) => c["ga"] = json!(cfg.ga),
                Solver::Method(Method::Ils) => c["ils_max_failures"] = json!(labhh::baselines::ILS_MAX_FAILURES),
                _ => {}
            }
            (r, c)
        }
    };

    if let Some(path) = &a.trace_csv {
        write_trace_csv(path, &prepared.instance.id, &a.method.label(), a.seed, &result)?;
    }
    print_json(&json!({
        "meta": {
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "method": a.method.label(),
            "instance_id": prepared.instance.id,
            "instance_file": a.instance,
            "n": prepared.instance.n,
            "config": config,
        },
        "result": result,
    }))
}

fn write_trace_csv(
    path: &Path,
    instance_id: &str,
    method: &str,
    seed: u64,
    result: &labhh::RunResult,
) -> labhh::Result<()> {
    let mut text = String::from("instance_id,method,seed,iteration,best_length\n");
    for p in &result.trace {
        text.push_str(&format!("{instance_id},{method},{seed},{},{}\n", p.iteration, p.best_length));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn bench_config(a: &BenchArgs, ablation: bool) -> BenchmarkConfig {
    let mut cfg = BenchmarkConfig { jobs: a.jobs, ..BenchmarkConfig::default() };
    apply_matrix(&mut cfg, &a.matrix);
    apply_hyper(&mut cfg, &a.hyper);
    if let Some(s) = &a.seeds {
        cfg.seeds = s.clone();
    }
    if let Some(m) = &a.methods {
        cfg.methods = m.clone();
    }
    if let Some(v) = &a.variants {
        cfg.variants = v.clone();
    }
    if a.no_variants {
        cfg.variants.clear();
    }
    if ablation {
        if !cfg.methods.contains(&Method::Labhh) {
            cfg.methods.insert(0, Method::Labhh);
        }
        if cfg.variants.is_empty() {
            cfg.variants = Variant::ALL.to_vec();
        }
    }
    cfg
}

fn bench_cmd(a: BenchArgs, ablation: bool) -> labhh::Result<()> {
    let cfg = bench_config(&a, ablation);
    cfg.validate()?;
    let step = std::sync::atomic::AtomicUsize::new(0);
    let progress = |done: usize, total: usize| {
        let pct = done * 20 / total;
        if step.fetch_max(pct, std::sync::atomic::Ordering::Relaxed) < pct {
            eprintln!("[{done}/{total}] runs finished");
        }
    };
    let run = bench::execute(&cfg, if a.quiet { None } else { Some(&progress) })?;
    let report = run.report()?;
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        bench::write_outputs(&run, &report, dir)?;
        if !a.quiet {
            eprintln!("wrote reports to {}", dir.display());
        }
    }
    if ablation {
        print_ablation(&report)
    } else {
        print_summary(&report)
    }
}

fn print_summary(report: &Report) -> labhh::Result<()> {
    let mut out = std::io::stdout().lock();
    let mut text = format!(
        "{:<22} {:>5} {:>10} {:>9} {:>10} {:>9} {:>10}\n",
        "method", "runs", "gap", "se", "auc", "se", "runtime_s"
    );
    for s in &report.by_method {
        text.push_str(&format!(
            "{:<22} {:>5} {:>10.5} {:>9.5} {:>10.5} {:>9.5} {:>10.4}\n",
            s.method, s.runs, s.mean_gap, s.se_gap, s.mean_auc, s.se_auc, s.mean_runtime
        ));
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn print_ablation(report: &Report) -> labhh::Result<()> {
    let mut out = std::io::stdout().lock();
    let mut text = format!("{:<14} {:>5} {:>10} {:>9} {:>10} {:>9}\n", "variant", "runs", "auc", "se", "gap", "se");
    for r in &report.ablation {
        text.push_str(&format!(
            "{:<14} {:>5} {:>10.5} {:>9.5} {:>10.5} {:>9.5}\n",
            r.variant, r.runs, r.mean_auc, r.se_auc, r.mean_gap, r.se_gap
        ));
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn features(a: FeaturesArgs) -> labhh::Result<()> {
    let inst = match (&a.instance, a.family, a.n) {
        (Some(path), _, _) => Instance::load(path)?,
        (None, Some(family), Some(n)) => generate(family, n, a.seed)?,
        _ => return Err(Error::InvalidArgument("give --instance or --family with --n".into())),
    };
    let f = static_features(&inst, &distance_matrix(&inst))?;
    let map: serde_json::Map<String, serde_json::Value> = StaticFeatures::NAMES
        .iter()
        .zip(f.to_array())
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    print_json(&serde_json::Value::Object(map))
}
