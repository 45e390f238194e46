//! Benchmark matrix, ablation suite and report writers.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{run_ga, run_ils, run_nn, run_sa, run_two_opt, GaParams};
use crate::controller::{ControllerParams, FeatureMask};
use crate::error::{Error, Result};
use crate::instance::{generate, suite_seed, Family, Instance};
use crate::metrics::{convergence_auc, final_gap, operator_shares, MeanSe};
use crate::search::{
    run_prepared, Acceptance, AnnealingSchedule, ControllerKind, PreparedInstance, RunConfig, RunResult,
    DEFAULT_BUDGET,
};
use crate::tour::Operator;

/// The compared methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Labhh,
    UcbHh,
    RandomHh,
    Nn,
    TwoOpt,
    Sa,
    Ils,
    Ga,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Labhh,
        Method::UcbHh,
        Method::RandomHh,
        Method::Nn,
        Method::TwoOpt,
        Method::Sa,
        Method::Ils,
        Method::Ga,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Labhh => "labhh",
            Method::UcbHh => "ucb-hh",
            Method::RandomHh => "random-hh",
            Method::Nn => "nn",
            Method::TwoOpt => "two-opt",
            Method::Sa => "sa",
            Method::Ils => "ils",
            Method::Ga => "ga",
        }
    }

    pub fn is_hyper_heuristic(self) -> bool {
        matches!(self, Method::Labhh | Method::UcbHh | Method::RandomHh)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}'")))
    }
}

/// LA-BHH ablation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    NoContext,
    NoDynamic,
    NoStatic,
    Annealing,
    NoLearning,
    NoTwoOpt,
    NoSwap,
    NoRelocate,
    NoOrOpt2,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::NoContext,
        Variant::NoDynamic,
        Variant::NoStatic,
        Variant::Annealing,
        Variant::NoLearning,
        Variant::NoTwoOpt,
        Variant::NoSwap,
        Variant::NoRelocate,
        Variant::NoOrOpt2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::NoContext => "no-context",
            Variant::NoDynamic => "no-dynamic",
            Variant::NoStatic => "no-static",
            Variant::Annealing => "annealing",
            Variant::NoLearning => "no-learning",
            Variant::NoTwoOpt => "no-two-opt",
            Variant::NoSwap => "no-swap",
            Variant::NoRelocate => "no-relocate",
            Variant::NoOrOpt2 => "no-or-opt2",
        }
    }

    /// Apply the variant to a full LA-BHH configuration.
    pub fn apply(self, cfg: &mut RunConfig) {
        let drop = |cfg: &mut RunConfig, op: Operator| cfg.operators.retain(|&o| o != op);
        match self {
            Variant::NoContext => cfg.feature_mask = FeatureMask::NoContext,
            Variant::NoDynamic => cfg.feature_mask = FeatureMask::NoDynamic,
            Variant::NoStatic => cfg.feature_mask = FeatureMask::NoStatic,
            Variant::Annealing => cfg.acceptance = Acceptance::Annealing,
            Variant::NoLearning => cfg.controller = ControllerKind::Random,
            Variant::NoTwoOpt => drop(cfg, Operator::TwoOpt),
            Variant::NoSwap => drop(cfg, Operator::Swap),
            Variant::NoRelocate => drop(cfg, Operator::Relocate),
            Variant::NoOrOpt2 => drop(cfg, Operator::OrOpt2),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown variant '{s}'")))
    }
}

/// A method or an ablation variant; the unit a run is keyed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    Method(Method),
    Variant(Variant),
}

impl Solver {
    /// Label used in the `method` column; variants are prefixed `labhh-`.
    pub fn label(self) -> String {
        match self {
            Solver::Method(m) => m.name().to_string(),
            Solver::Variant(v) => format!("labhh-{}", v.name()),
        }
    }

    pub fn uses_greedy_acceptance(self) -> bool {
        !matches!(self, Solver::Method(Method::Sa) | Solver::Variant(Variant::Annealing))
    }

    pub fn is_hyper_heuristic(self) -> bool {
        match self {
            Solver::Method(m) => m.is_hyper_heuristic(),
            Solver::Variant(_) => true,
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(m) = s.parse::<Method>() {
            return Ok(Solver::Method(m));
        }
        s.strip_prefix("labhh-")
            .and_then(|v| v.parse::<Variant>().ok())
            .map(Solver::Variant)
            .ok_or_else(|| Error::invalid(format!("unknown method or variant '{s}'")))
    }
}

/// Benchmark matrix and shared hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub families: Vec<Family>,
    pub sizes: Vec<usize>,
    pub instances_per_cell: usize,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    pub variants: Vec<Variant>,
    pub budget: usize,
    pub params: ControllerParams,
    pub annealing: AnnealingSchedule,
    pub ga: GaParams,
    /// Worker threads; 0 uses every available core. Not part of the echoed
    /// configuration since outputs do not depend on it.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            families: Family::ALL.to_vec(),
            sizes: vec![50, 100, 200],
            instances_per_cell: 3,
            seeds: vec![1, 2, 3],
            methods: Method::ALL.to_vec(),
            variants: Variant::ALL.to_vec(),
            budget: DEFAULT_BUDGET,
            params: ControllerParams::default(),
            annealing: AnnealingSchedule::default(),
            ga: GaParams::default(),
            jobs: 0,
        }
    }
}

fn has_duplicates<T: Ord + Clone>(items: &[T]) -> bool {
    let mut v = items.to_vec();
    v.sort();
    v.windows(2).any(|w| w[0] == w[1])
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.sizes.is_empty() || self.seeds.is_empty() {
            return Err(Error::invalid("families, sizes and seeds must be non-empty"));
        }
        if self.methods.is_empty() && self.variants.is_empty() {
            return Err(Error::invalid("nothing to run: no methods and no variants"));
        }
        if self.instances_per_cell == 0 {
            return Err(Error::invalid("instances_per_cell must be at least 1"));
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n < 5) {
            return Err(Error::invalid(format!("instance size {n} is below the minimum of 5")));
        }
        if has_duplicates(&self.families)
            || has_duplicates(&self.sizes)
            || has_duplicates(&self.seeds)
            || has_duplicates(&self.methods)
            || has_duplicates(&self.variants)
        {
            return Err(Error::invalid("benchmark lists must not contain duplicates"));
        }
        if self.budget == 0 {
            return Err(Error::invalid("budget must be at least 1 iteration"));
        }
        self.params.validate()
    }

    /// The generated suite, ordered family, size, index.
    pub fn instances(&self) -> Result<Vec<Instance>> {
        let mut out = Vec::new();
        for &family in &self.families {
            for &n in &self.sizes {
                for index in 0..self.instances_per_cell {
                    out.push(generate(family, n, suite_seed(family, n, index))?);
                }
            }
        }
        Ok(out)
    }

    pub fn solvers(&self) -> Vec<Solver> {
        let mut s: Vec<Solver> = self.methods.iter().map(|&m| Solver::Method(m)).collect();
        s.extend(self.variants.iter().map(|&v| Solver::Variant(v)));
        s
    }

    /// LA-BHH configuration with this benchmark's shared hyperparameters.
    pub fn labhh_config(&self, seed: u64) -> RunConfig {
        RunConfig {
            budget: self.budget,
            seed,
            params: self.params,
            annealing: self.annealing,
            ..RunConfig::default()
        }
    }

    /// Hyper-heuristic configuration for `solver`, `None` for baselines.
    pub fn run_config(&self, solver: Solver, seed: u64) -> Option<RunConfig> {
        let mut cfg = self.labhh_config(seed);
        match solver {
            Solver::Method(Method::Labhh) => {}
            Solver::Method(Method::UcbHh) => {
                cfg.controller = ControllerKind::Ucb1;
                cfg.gate_enabled = false;
            }
            Solver::Method(Method::RandomHh) => {
                cfg.controller = ControllerKind::Random;
                cfg.gate_enabled = false;
            }
            Solver::Method(_) => return None,
            Solver::Variant(v) => v.apply(&mut cfg),
        }
        Some(cfg)
    }

    pub fn run_one(&self, prepared: &PreparedInstance, solver: Solver, seed: u64) -> Result<RunResult> {
        if let Some(cfg) = self.run_config(solver, seed) {
            return run_prepared(prepared, &cfg);
        }
        match solver {
            Solver::Method(Method::Nn) => Ok(run_nn(prepared, self.budget)),
            Solver::Method(Method::TwoOpt) => run_two_opt(prepared, self.budget, seed),
            Solver::Method(Method::Sa) => run_sa(prepared, self.budget, seed, &self.annealing),
            Solver::Method(Method::Ils) => run_ils(prepared, self.budget, seed),
            Solver::Method(Method::Ga) => run_ga(prepared, self.budget, seed, &self.ga),
            _ => unreachable!("hyper-heuristics handled above"),
        }
    }
}

/// One finished run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    /// Index into [`BenchmarkRun::instances`].
    pub instance: usize,
    pub solver: Solver,
    pub seed: u64,
    pub result: RunResult,
}

/// Every run of a benchmark together with the per-instance references.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub config: BenchmarkConfig,
    pub instances: Vec<Instance>,
    /// Ordered instance, solver, seed.
    pub runs: Vec<RunRecord>,
    /// Best length over the whole run pool, per instance.
    pub refs: Vec<f64>,
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance_id: String,
    pub family: Family,
    pub n: usize,
    pub method: String,
    pub seed: u64,
    pub final_length: f64,
    pub ref_length: f64,
    pub final_gap: f64,
    pub auc: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub method: String,
    pub runs: usize,
    pub mean_gap: f64,
    pub se_gap: f64,
    pub mean_auc: f64,
    pub se_auc: f64,
    pub mean_runtime: f64,
}

impl Summary {
    fn of<'a>(method: &str, rows: impl Iterator<Item = &'a ReportRow>) -> Self {
        let (mut gaps, mut aucs, mut times) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            gaps.push(r.final_gap);
            aucs.push(r.auc);
            times.push(r.runtime_s);
        }
        let gap = MeanSe::of(&gaps);
        let auc = MeanSe::of(&aucs);
        Self {
            method: method.to_string(),
            runs: gap.count,
            mean_gap: gap.mean,
            se_gap: gap.se,
            mean_auc: auc.mean,
            se_auc: auc.se,
            mean_runtime: MeanSe::of(&times).mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub family: Family,
    pub method: String,
    pub runs: usize,
    pub mean_gap: f64,
    pub se_gap: f64,
    pub mean_auc: f64,
    pub se_auc: f64,
    pub mean_runtime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub method: String,
    pub runs: usize,
    pub mean_gap: f64,
    pub se_gap: f64,
    pub mean_auc: f64,
    pub se_auc: f64,
    pub mean_runtime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorUsage {
    pub method: String,
    pub operator: Operator,
    pub count: u64,
    pub share: f64,
}

/// One line of the ablation AUC table; `variant` is `full` for LA-BHH.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub variant: String,
    pub runs: usize,
    pub mean_auc: f64,
    pub se_auc: f64,
    pub mean_gap: f64,
    pub se_gap: f64,
}

/// Aggregates derived from a [`BenchmarkRun`].
#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub by_method: Vec<Summary>,
    pub by_family: Vec<FamilySummary>,
    pub by_size: Vec<SizeSummary>,
    pub operator_usage: Vec<OperatorUsage>,
    pub ablation: Vec<AblationRow>,
}

/// Runs every (instance, solver, seed) triple of `cfg` on a worker pool.
/// `progress` is called with the number of finished runs.
pub fn execute(cfg: &BenchmarkConfig, progress: Option<&(dyn Fn(usize, usize) + Sync)>) -> Result<BenchmarkRun> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?;
    let instances = cfg.instances()?;
    let solvers = cfg.solvers();
    let keys: Vec<(usize, Solver, u64)> = (0..instances.len())
        .flat_map(|i| solvers.iter().flat_map(move |&s| cfg.seeds.iter().map(move |&seed| (i, s, seed))))
        .collect();
    let total = keys.len();
    let done = AtomicUsize::new(0);

    let runs = pool.install(|| -> Result<Vec<RunRecord>> {
        let prepared: Vec<PreparedInstance> = instances
            .par_iter()
            .map(|inst| PreparedInstance::new(inst.clone()))
            .collect::<Result<_>>()?;
        keys.par_iter()
            .map(|&(i, solver, seed)| {
                let result = cfg.run_one(&prepared[i], solver, seed)?;
                let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(p) = progress {
                    p(finished, total);
                }
                Ok(RunRecord { instance: i, solver, seed, result })
            })
            .collect()
    })?;

    let mut refs = vec![f64::INFINITY; instances.len()];
    for r in &runs {
        refs[r.instance] = refs[r.instance].min(r.result.best_length);
    }
    Ok(BenchmarkRun { config: cfg.clone(), instances, runs, refs })
}

impl BenchmarkRun {
    pub fn rows(&self) -> Result<Vec<ReportRow>> {
        self.runs
            .iter()
            .map(|r| {
                let inst = &self.instances[r.instance];
                let reference = self.refs[r.instance];
                Ok(ReportRow {
                    instance_id: inst.id.clone(),
                    family: inst.family,
                    n: inst.n,
                    method: r.solver.label(),
                    seed: r.seed,
                    final_length: r.result.best_length,
                    ref_length: reference,
                    final_gap: final_gap(r.result.best_length, reference)?,
                    auc: convergence_auc(&r.result.trace, reference, r.result.budget)?,
                    runtime_s: r.result.wall_time,
                })
            })
            .collect()
    }

    /// Operator counts pooled per hyper-heuristic solver.
    pub fn operator_usage(&self) -> Vec<OperatorUsage> {
        let mut out = Vec::new();
        for solver in self.config.solvers().into_iter().filter(|s| s.is_hyper_heuristic()) {
            let mut counts = [0u64; 4];
            for r in self.runs.iter().filter(|r| r.solver == solver) {
                for (c, x) in counts.iter_mut().zip(r.result.operator_counts) {
                    *c += x;
                }
            }
            let shares = operator_shares(&counts);
            for op in Operator::ALL {
                out.push(OperatorUsage {
                    method: solver.label(),
                    operator: op,
                    count: counts[op.index()],
                    share: shares[op.index()],
                });
            }
        }
        out
    }

    pub fn report(&self) -> Result<Report> {
        let rows = self.rows()?;
        let solvers = self.config.solvers();
        let labels: Vec<String> = solvers.iter().map(|s| s.label()).collect();
        let by_method = summarize_by_method(&rows, &labels);
        let mut by_family = Vec::new();
        for &family in &self.config.families {
            for label in &labels {
                let sel = rows.iter().filter(|r| r.family == family && &r.method == label);
                let s = Summary::of(label, sel);
                by_family.push(FamilySummary {
                    family,
                    method: s.method,
                    runs: s.runs,
                    mean_gap: s.mean_gap,
                    se_gap: s.se_gap,
                    mean_auc: s.mean_auc,
                    se_auc: s.se_auc,
                    mean_runtime: s.mean_runtime,
                });
            }
        }
        let mut by_size = Vec::new();
        for &n in &self.config.sizes {
            for label in &labels {
                let sel = rows.iter().filter(|r| r.n == n && &r.method == label);
                let s = Summary::of(label, sel);
                by_size.push(SizeSummary {
                    n,
                    method: s.method,
                    runs: s.runs,
                    mean_gap: s.mean_gap,
                    se_gap: s.se_gap,
                    mean_auc: s.mean_auc,
                    se_auc: s.se_auc,
                    mean_runtime: s.mean_runtime,
                });
            }
        }
        let ablation = ablation_table(&rows, &self.config.variants);
        Ok(Report {
            operator_usage: self.operator_usage(),
            rows,
            by_method,
            by_family,
            by_size,
            ablation,
        })
    }
}

/// Per-method summaries in `labels` order.
pub fn summarize_by_method(rows: &[ReportRow], labels: &[String]) -> Vec<Summary> {
    labels
        .iter()
        .map(|label| Summary::of(label, rows.iter().filter(|r| &r.method == label)))
        .collect()
}

/// AUC table of full LA-BHH and each variant present in `rows`.
pub fn ablation_table(rows: &[ReportRow], variants: &[Variant]) -> Vec<AblationRow> {
    let full = Solver::Method(Method::Labhh).label();
    let mut entries = vec![("full".to_string(), full)];
    entries.extend(variants.iter().map(|&v| (v.name().to_string(), Solver::Variant(v).label())));
    entries
        .into_iter()
        .filter(|(_, label)| rows.iter().any(|r| &r.method == label))
        .map(|(name, label)| {
            let s = Summary::of(&label, rows.iter().filter(|r| r.method == label));
            AblationRow {
                variant: name,
                runs: s.runs,
                mean_auc: s.mean_auc,
                se_auc: s.se_auc,
                mean_gap: s.mean_gap,
                se_gap: s.se_gap,
            }
        })
        .collect()
}

/// Runs the full benchmark matrix and aggregates it.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<(BenchmarkRun, Report)> {
    let run = execute(cfg, None)?;
    let report = run.report()?;
    Ok((run, report))
}

/// Runs LA-BHH and the variants of `cfg` (all nine if none are listed) on
/// the suite and returns the AUC table. Refs come from whatever pool `cfg`
/// describes, so keep the method list when comparing with a benchmark.
pub fn run_ablation(cfg: &BenchmarkConfig) -> Result<Vec<AblationRow>> {
    let mut cfg = cfg.clone();
    if !cfg.methods.contains(&Method::Labhh) {
        cfg.methods.insert(0, Method::Labhh);
    }
    if cfg.variants.is_empty() {
        cfg.variants = Variant::ALL.to_vec();
    }
    let run = execute(&cfg, None)?;
    Ok(ablation_table(&run.rows()?, &cfg.variants))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|source| Error::Csv { path: path.to_path_buf(), source })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|source| Error::Csv { path: path.to_path_buf(), source })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct TraceRow<'a> {
    instance_id: &'a str,
    method: &'a str,
    seed: u64,
    iteration: usize,
    best_length: f64,
}

/// Files produced by [`write_outputs`].
pub const OUTPUT_FILES: [&str; 7] = [
    "results.csv",
    "traces.csv",
    "summary.json",
    "by_family.csv",
    "by_size.csv",
    "operator_usage.csv",
    "ablation.csv",
];

/// Writes instance files, CSV tables and `summary.json` into `dir`.
pub fn write_outputs(run: &BenchmarkRun, report: &Report, dir: &Path) -> Result<()> {
    let inst_dir = dir.join("instances");
    fs::create_dir_all(&inst_dir).map_err(|e| Error::io(&inst_dir, e))?;
    for inst in &run.instances {
        inst.save(inst_dir.join(format!("{}.json", inst.id)))?;
    }
    write_csv(&dir.join("results.csv"), &report.rows)?;

    let traces = dir.join("traces.csv");
    let mut w = csv_writer(&traces)?;
    for r in &run.runs {
        let id = &run.instances[r.instance].id;
        let label = r.solver.label();
        for p in &r.result.trace {
            w.serialize(TraceRow {
                instance_id: id,
                method: &label,
                seed: r.seed,
                iteration: p.iteration,
                best_length: p.best_length,
            })
            .map_err(|source| Error::Csv { path: traces.clone(), source })?;
        }
    }
    w.flush().map_err(|e| Error::io(&traces, e))?;

    write_csv(&dir.join("by_family.csv"), &report.by_family)?;
    write_csv(&dir.join("by_size.csv"), &report.by_size)?;
    write_csv(&dir.join("operator_usage.csv"), &report.operator_usage)?;
    write_csv(&dir.join("ablation.csv"), &report.ablation)?;
    write_json(&dir.join("summary.json"), &summary_json(run, report))
}

pub(crate) fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Per-method table plus the configuration that produced it.
pub fn summary_json(run: &BenchmarkRun, report: &Report) -> serde_json::Value {
    let methods: BTreeMap<&str, serde_json::Value> = report
        .by_method
        .iter()
        .map(|s| {
            (
                s.method.as_str(),
                serde_json::json!({
                    "runs": s.runs,
                    "mean_gap": s.mean_gap,
                    "se_gap": s.se_gap,
                    "mean_auc": s.mean_auc,
                    "se_auc": s.se_auc,
                    "mean_runtime": s.mean_runtime,
                }),
            )
        })
        .collect();
    serde_json::json!({
        "meta": {
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "instances": run.instances.len(),
            "runs": run.runs.len(),
            "config": run.config,
        },
        "methods": methods,
        "ablation": report.ablation,
    })
}
