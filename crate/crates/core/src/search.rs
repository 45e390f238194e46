//! The hyper-heuristic main loop and its acceptance rules.
//!
//! One iteration: build the context from static and dynamic features, pick an
//! operator with the controller, let the stagnation gate override it, sample
//! the best of three moves of that operator, compute the reward from the
//! candidate, decide acceptance, then update the executed arm.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::construction::multi_start_nn;
use crate::controller::{
    dynamic_features, reward, Context, ControllerParams, FeatureMask, LinUcb, SearchHistory,
    StagnationGate, Ucb1,
};
use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Instance};
use crate::landscape::{static_features, StaticFeatures};
use crate::rng::{self, StreamRng};
use crate::tour::{sample_candidate, Operator, Tour};

/// Default iteration budget.
pub const DEFAULT_BUDGET: usize = 20_000;

/// Target number of trace checkpoints (besides iteration 0).
pub const TRACE_POINTS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    LinUcb,
    Ucb1,
    Random,
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "linucb" => Ok(ControllerKind::LinUcb),
            "ucb1" | "ucb" => Ok(ControllerKind::Ucb1),
            "random" => Ok(ControllerKind::Random),
            _ => Err(Error::invalid(format!("unknown controller `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Acceptance {
    Greedy,
    Annealing,
}

impl fmt::Display for Acceptance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Acceptance::Greedy => "greedy",
            Acceptance::Annealing => "annealing",
        })
    }
}

impl FromStr for Acceptance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "greedy" => Ok(Acceptance::Greedy),
            "annealing" | "sa" => Ok(Acceptance::Annealing),
            _ => Err(Error::invalid(format!("unknown acceptance rule `{s}`"))),
        }
    }
}

/// Geometric cooling from `start_fraction * L0` to `end_fraction * L0` over
/// the budget, where `L0` is the initial tour length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealingSchedule {
    pub start_fraction: f64,
    pub end_fraction: f64,
}

impl Default for AnnealingSchedule {
    fn default() -> Self {
        Self {
            start_fraction: 0.02,
            end_fraction: 1e-4,
        }
    }
}

impl AnnealingSchedule {
    /// Temperature at iteration `t` (0-based) of `budget`.
    pub fn temperature(&self, initial_length: f64, t: usize, budget: usize) -> f64 {
        let t0 = self.start_fraction * initial_length;
        let t1 = self.end_fraction * initial_length;
        let frac = if budget <= 1 {
            1.0
        } else {
            (t as f64 / (budget - 1) as f64).min(1.0)
        };
        t0 * (t1 / t0).powf(frac)
    }
}

/// Accept/reject decision. Greedy requires strict improvement; annealing
/// accepts improvements and otherwise draws against `exp(-delta / temperature)`.
pub fn accept<R: Rng + ?Sized>(
    curr_len: f64,
    cand_len: f64,
    rule: Acceptance,
    temperature: f64,
    rng: &mut R,
) -> bool {
    match rule {
        Acceptance::Greedy => cand_len < curr_len,
        Acceptance::Annealing => {
            let delta = cand_len - curr_len;
            if delta < 0.0 {
                true
            } else {
                rng.random::<f64>() < (-delta / temperature).exp()
            }
        }
    }
}

/// Full configuration of one hyper-heuristic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub budget: usize,
    pub controller: ControllerKind,
    pub acceptance: Acceptance,
    pub gate_enabled: bool,
    pub feature_mask: FeatureMask,
    pub operators: Vec<Operator>,
    pub seed: u64,
    pub params: ControllerParams,
    pub annealing: AnnealingSchedule,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            controller: ControllerKind::LinUcb,
            acceptance: Acceptance::Greedy,
            gate_enabled: true,
            feature_mask: FeatureMask::Full,
            operators: Operator::ALL.to_vec(),
            seed: 1,
            params: ControllerParams::default(),
            annealing: AnnealingSchedule::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::invalid("budget must be at least 1 iteration"));
        }
        if self.operators.is_empty() {
            return Err(Error::invalid("operator set must not be empty"));
        }
        let mut ops = self.operators.clone();
        ops.sort_unstable();
        ops.dedup();
        if ops.len() != self.operators.len() {
            return Err(Error::invalid("operator set lists an operator twice"));
        }
        self.params.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub best_length: f64,
}

/// Output of any method (hyper-heuristic or baseline).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_order: Vec<usize>,
    pub best_length: f64,
    pub initial_length: f64,
    pub budget: usize,
    pub trace: Vec<TracePoint>,
    /// Executed operator per iteration, indexed like [`Operator::ALL`].
    pub operator_counts: [u64; 4],
    pub operator_accepts: [u64; 4],
    /// Tour-delta or full-length evaluations spent.
    pub evaluations: u64,
    /// Dimension of the LinUCB context, 0 when no contextual controller ran.
    pub context_dim: usize,
    pub wall_time: f64,
}

impl RunResult {
    /// Selection share per operator; all zeros when no operator ran.
    pub fn operator_shares(&self) -> [f64; 4] {
        let total: u64 = self.operator_counts.iter().sum();
        if total == 0 {
            return [0.0; 4];
        }
        self.operator_counts.map(|c| c as f64 / total as f64)
    }
}

/// Records the best-so-far length at fixed checkpoints: iteration 0, every
/// `max(1, budget / 500)` iterations, and the final iteration.
#[derive(Debug, Clone)]
pub struct TraceRecorder {
    step: usize,
    budget: usize,
    next: usize,
    points: Vec<TracePoint>,
}

impl TraceRecorder {
    pub fn new(budget: usize, initial_length: f64) -> Self {
        let step = (budget / TRACE_POINTS).max(1);
        Self {
            step,
            budget,
            next: if budget == 0 { 1 } else { step.min(budget) },
            points: vec![TracePoint {
                iteration: 0,
                best_length: initial_length,
            }],
        }
    }

    /// Marks `done` iterations as complete with `best` as best-so-far.
    #[inline]
    pub fn advance(&mut self, done: usize, best: f64) {
        while self.next <= done.min(self.budget) {
            self.points.push(TracePoint {
                iteration: self.next,
                best_length: best,
            });
            self.next = if self.next == self.budget {
                self.budget + 1
            } else {
                (self.next + self.step).min(self.budget)
            };
        }
    }

    /// Fills any remaining checkpoints with `best` and returns the trace.
    pub fn finish(mut self, best: f64) -> Vec<TracePoint> {
        self.advance(self.budget, best);
        self.points
    }
}

/// Instance data shared by every run on the same instance.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub instance: Instance,
    pub dm: DistanceMatrix,
    pub initial: Tour,
    pub features: StaticFeatures,
}

impl PreparedInstance {
    pub fn new(instance: Instance) -> Result<Self> {
        instance.validate()?;
        if instance.n < 5 {
            return Err(Error::invalid(format!(
                "search needs at least 5 sites, instance `{}` has {}",
                instance.id, instance.n
            )));
        }
        let dm = DistanceMatrix::new(&instance);
        let initial = multi_start_nn(&dm)?;
        let features = static_features(&instance, &dm)?;
        Ok(Self {
            instance,
            dm,
            initial,
            features,
        })
    }

    /// Key word identifying the instance in RNG stream derivation.
    pub fn stream_key(&self) -> u64 {
        rng::label(&self.instance.id)
    }

    pub fn stream(&self, seed: u64, tag: &str) -> StreamRng {
        rng::stream(seed, &[self.stream_key(), rng::label(tag)])
    }
}

enum Policy {
    LinUcb(LinUcb),
    Ucb1(Ucb1),
    Random(usize),
}

pub(crate) struct RunInternals {
    #[allow(dead_code)]
    policy: Option<LinUcb>,
    #[allow(dead_code)]
    reward_sums: [f64; 4],
}

/// Runs the configured hyper-heuristic on `inst`.
pub fn run(inst: &Instance, cfg: &RunConfig) -> Result<RunResult> {
    let prepared = PreparedInstance::new(inst.clone())?;
    run_prepared(&prepared, cfg)
}

pub fn run_prepared(prepared: &PreparedInstance, cfg: &RunConfig) -> Result<RunResult> {
    run_core(prepared, cfg).map(|(r, _)| r)
}

pub(crate) fn run_core(prepared: &PreparedInstance, cfg: &RunConfig) -> Result<(RunResult, RunInternals)> {
    cfg.validate()?;
    let started = Instant::now();
    let dm = &prepared.dm;
    let ops = &cfg.operators;
    let budget = cfg.budget;

    let mut select_rng = prepared.stream(cfg.seed, "select");
    let mut gate_rng = prepared.stream(cfg.seed, "gate");
    let mut move_rng = prepared.stream(cfg.seed, "moves");
    let mut accept_rng = prepared.stream(cfg.seed, "accept");

    let mut policy = match cfg.controller {
        ControllerKind::LinUcb => Policy::LinUcb(LinUcb::new(ops.len(), cfg.feature_mask.dim(), cfg.params.alpha)),
        ControllerKind::Ucb1 => Policy::Ucb1(Ucb1::new(ops.len())),
        ControllerKind::Random => Policy::Random(ops.len()),
    };
    let gate = cfg.gate_enabled.then(|| StagnationGate {
        p_gate: cfg.params.p_gate,
        two_opt_arm: ops.iter().position(|&o| o == Operator::TwoOpt),
    });

    let mut tour = prepared.initial.clone();
    let f0 = tour.length();
    let mut best_order = tour.order().to_vec();
    let mut best_len = f0;
    let mut history = SearchHistory::new(f0, &cfg.params);
    let mut trace = TraceRecorder::new(budget, f0);
    let mut counts = [0u64; 4];
    let mut accepts = [0u64; 4];
    let mut reward_sums = [0.0; 4];

    for t in 0..budget {
        let state = dynamic_features(&history, t, budget);
        let mut context = None;
        let mut arm = match &mut policy {
            Policy::LinUcb(bandit) => {
                let z = Context::build(cfg.feature_mask, &prepared.features, &state);
                let arm = bandit.select(&z, &mut select_rng)?;
                context = Some(z);
                arm
            }
            Policy::Ucb1(u) => u.select(),
            Policy::Random(k) => select_rng.random_range(0..*k),
        };
        if let Some(g) = &gate {
            arm = g.apply(arm, &state, &mut gate_rng);
        }
        let op = ops[arm];
        let (mv, delta) = sample_candidate(op, &tour, dm, &mut move_rng)?;
        let curr = tour.length();
        let cand = curr + delta;
        let r = reward(curr, cand, f0)?;
        let temperature = match cfg.acceptance {
            Acceptance::Greedy => 0.0,
            Acceptance::Annealing => cfg.annealing.temperature(f0, t, budget),
        };
        let accepted = accept(curr, cand, cfg.acceptance, temperature, &mut accept_rng);
        counts[op.index()] += 1;
        reward_sums[op.index()] += r;
        if accepted {
            tour.apply_in_place(mv, delta, dm);
            accepts[op.index()] += 1;
            if tour.length() < best_len {
                best_len = tour.length();
                best_order.copy_from_slice(tour.order());
            }
        }
        match &mut policy {
            Policy::LinUcb(bandit) => bandit.update(arm, context.as_ref().expect("built above"), r)?,
            Policy::Ucb1(u) => u.update(arm, r),
            Policy::Random(_) => {}
        }
        history.record(accepted, tour.length());
        trace.advance(t + 1, best_len);
    }

    let context_dim = match &policy {
        Policy::LinUcb(b) => b.dim(),
        _ => 0,
    };
    let result = RunResult {
        best_order,
        best_length: best_len,
        initial_length: f0,
        budget,
        trace: trace.finish(best_len),
        operator_counts: counts,
        operator_accepts: accepts,
        evaluations: (budget * crate::tour::CANDIDATE_POOL) as u64,
        context_dim,
        wall_time: started.elapsed().as_secs_f64(),
    };
    let internals = RunInternals {
        policy: match policy {
            Policy::LinUcb(b) => Some(b),
            _ => None,
        },
        reward_sums,
    };
    Ok((result, internals))
}
