//! Non-hyper-heuristic baselines sharing the [`RunResult`] and trace contract.
//!
//! Every iterative baseline starts from the multi-start nearest-neighbour tour
//! and spends at most `budget` tour-delta or full tour-length evaluations.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::{accept, Acceptance, AnnealingSchedule, PreparedInstance, RunResult, TraceRecorder};
use crate::tour::{cycle_length, delta_unchecked, random_move, Operator, Tour};

/// Consecutive failed 2-opt samples that end an ILS descent.
pub const ILS_MAX_FAILURES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population: usize,
    pub mutation_rate: f64,
    pub tournament: usize,
    pub elitism: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 50,
            mutation_rate: 0.2,
            tournament: 3,
            elitism: 2,
        }
    }
}

fn check_budget(budget: usize) -> Result<()> {
    if budget == 0 {
        Err(Error::invalid("budget must be at least 1 iteration"))
    } else {
        Ok(())
    }
}

fn finish(
    best: Tour,
    initial_length: f64,
    budget: usize,
    trace: TraceRecorder,
    counts: [u64; 4],
    accepts: [u64; 4],
    evaluations: u64,
    started: Instant,
) -> RunResult {
    let best_length = best.length();
    RunResult {
        best_order: best.into_order(),
        best_length,
        initial_length,
        budget,
        trace: trace.finish(best_length),
        operator_counts: counts,
        operator_accepts: accepts,
        evaluations,
        context_dim: 0,
        wall_time: started.elapsed().as_secs_f64(),
    }
}

/// Multi-start nearest neighbour with a constant trace over `budget`.
pub fn run_nn(prepared: &PreparedInstance, budget: usize) -> RunResult {
    let started = Instant::now();
    let tour = prepared.initial.clone();
    let len = tour.length();
    finish(
        tour,
        len,
        budget,
        TraceRecorder::new(budget, len),
        [0; 4],
        [0; 4],
        0,
        started,
    )
}

/// One random 2-opt move per iteration, greedy acceptance.
pub fn run_two_opt(prepared: &PreparedInstance, budget: usize, seed: u64) -> Result<RunResult> {
    check_budget(budget)?;
    let started = Instant::now();
    let dm = &prepared.dm;
    let mut rng = prepared.stream(seed, "two-opt");
    let mut tour = prepared.initial.clone();
    let f0 = tour.length();
    let mut trace = TraceRecorder::new(budget, f0);
    let mut accepts = 0;
    for t in 0..budget {
        let m = random_move(Operator::TwoOpt, tour.len(), &mut rng);
        let delta = delta_unchecked(tour.order(), m, dm);
        if delta < 0.0 {
            tour.apply_in_place(m, delta, dm);
            accepts += 1;
        }
        trace.advance(t + 1, tour.length());
    }
    Ok(finish(
        tour,
        f0,
        budget,
        trace,
        [budget as u64, 0, 0, 0],
        [accepts, 0, 0, 0],
        budget as u64,
        started,
    ))
}

/// Simulated annealing: uniformly random operator, one move per iteration,
/// geometric cooling per [`AnnealingSchedule`].
pub fn run_sa(
    prepared: &PreparedInstance,
    budget: usize,
    seed: u64,
    schedule: &AnnealingSchedule,
) -> Result<RunResult> {
    check_budget(budget)?;
    let started = Instant::now();
    let dm = &prepared.dm;
    let mut move_rng = prepared.stream(seed, "sa-moves");
    let mut accept_rng = prepared.stream(seed, "sa-accept");
    let mut tour = prepared.initial.clone();
    let f0 = tour.length();
    let mut best = tour.clone();
    let mut trace = TraceRecorder::new(budget, f0);
    let mut counts = [0u64; 4];
    let mut accepts = [0u64; 4];
    for t in 0..budget {
        let op = Operator::ALL[move_rng.random_range(0..4)];
        let m = random_move(op, tour.len(), &mut move_rng);
        let delta = delta_unchecked(tour.order(), m, dm);
        let curr = tour.length();
        let temp = schedule.temperature(f0, t, budget);
        counts[op.index()] += 1;
        if accept(curr, curr + delta, Acceptance::Annealing, temp, &mut accept_rng) {
            tour.apply_in_place(m, delta, dm);
            accepts[op.index()] += 1;
            if tour.length() < best.length() {
                best.clone_from(&tour);
            }
        }
        trace.advance(t + 1, best.length());
    }
    Ok(finish(best, f0, budget, trace, counts, accepts, budget as u64, started))
}

/// Double-bridge: with cuts `0 < p1 < p2 < p3 < n`, `A B C D` becomes `A C B D`.
pub fn double_bridge(order: &[usize], p1: usize, p2: usize, p3: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(order.len());
    out.extend_from_slice(&order[..p1]);
    out.extend_from_slice(&order[p2..p3]);
    out.extend_from_slice(&order[p1..p2]);
    out.extend_from_slice(&order[p3..]);
    out
}

fn random_cuts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize, usize) {
    let mut cuts = rand::seq::index::sample(rng, n - 1, 3).into_vec();
    cuts.sort_unstable();
    (cuts[0] + 1, cuts[1] + 1, cuts[2] + 1)
}

/// Iterated local search: random 2-opt descent until
/// [`ILS_MAX_FAILURES`] consecutive failures, then a double-bridge kick of
/// the incumbent; a finished descent replaces the incumbent only if better.
pub fn run_ils(prepared: &PreparedInstance, budget: usize, seed: u64) -> Result<RunResult> {
    check_budget(budget)?;
    let started = Instant::now();
    let dm = &prepared.dm;
    let mut rng = prepared.stream(seed, "ils");
    let mut incumbent = prepared.initial.clone();
    let f0 = incumbent.length();
    let mut work = incumbent.clone();
    let mut trace = TraceRecorder::new(budget, f0);
    let mut failures = 0;
    let mut counts = [0u64; 4];
    let mut accepts = [0u64; 4];
    let mut evals = 0usize;
    // Best-so-far over everything seen, including an unfinished descent.
    let mut best_seen = f0;
    while evals < budget {
        if failures >= ILS_MAX_FAILURES {
            if work.length() < incumbent.length() {
                incumbent.clone_from(&work);
            }
            let (p1, p2, p3) = random_cuts(incumbent.len(), &mut rng);
            work = Tour::from_trusted(double_bridge(incumbent.order(), p1, p2, p3), dm);
            failures = 0;
        } else {
            let m = random_move(Operator::TwoOpt, work.len(), &mut rng);
            let delta = delta_unchecked(work.order(), m, dm);
            counts[0] += 1;
            if delta < 0.0 {
                work.apply_in_place(m, delta, dm);
                accepts[0] += 1;
                failures = 0;
            } else {
                failures += 1;
            }
        }
        evals += 1;
        best_seen = best_seen.min(work.length());
        trace.advance(evals, best_seen);
    }
    if work.length() < incumbent.length() {
        incumbent = work;
    }
    Ok(finish(incumbent, f0, budget, trace, counts, accepts, evals as u64, started))
}

/// Order crossover (OX1): the child keeps `p1[a..=b]` in place and fills the
/// remaining positions, starting after `b` and wrapping, with the genes of
/// `p2` in the order they appear after `b`.
pub fn ox1(p1: &[usize], p2: &[usize], a: usize, b: usize) -> Vec<usize> {
    let n = p1.len();
    let mut child = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for k in a..=b {
        child[k] = p1[k];
        taken[p1[k]] = true;
    }
    let mut pos = (b + 1) % n;
    for k in 0..n {
        let gene = p2[(b + 1 + k) % n];
        if !taken[gene] {
            child[pos] = gene;
            taken[gene] = true;
            pos = (pos + 1) % n;
        }
    }
    child
}

fn tournament<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    (0..size)
        .map(|_| rng.random_range(0..fitness.len()))
        .min_by(|&a, &b| fitness[a].total_cmp(&fitness[b]))
        .expect("tournament size >= 1")
}

/// Generational GA over permutations seeded with the nearest-neighbour tour
/// and random orders.
pub fn run_ga(prepared: &PreparedInstance, budget: usize, seed: u64, params: &GaParams) -> Result<RunResult> {
    run_ga_observed(prepared, budget, seed, params, |_| {})
}

pub(crate) fn run_ga_observed(
    prepared: &PreparedInstance,
    budget: usize,
    seed: u64,
    params: &GaParams,
    mut observe: impl FnMut(&[Vec<usize>]),
) -> Result<RunResult> {
    check_budget(budget)?;
    if params.population < 2 || params.elitism >= params.population || params.tournament == 0 {
        return Err(Error::invalid("GA needs population >= 2, elitism < population, tournament >= 1"));
    }
    let started = Instant::now();
    let dm = &prepared.dm;
    let n = prepared.instance.n;
    let mut rng = prepared.stream(seed, "ga");
    let pop_size = params.population.min(budget.max(2));
    let elitism = params.elitism.min(pop_size - 1);

    let f0 = prepared.initial.length();
    let mut trace = TraceRecorder::new(budget, f0);
    let mut population: Vec<Vec<usize>> = Vec::with_capacity(pop_size);
    population.push(prepared.initial.order().to_vec());
    while population.len() < pop_size {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        population.push(order);
    }
    let mut fitness: Vec<f64> = population.iter().map(|o| cycle_length(o, dm)).collect();
    let mut evals = pop_size;
    let best_of = |fit: &[f64]| (0..fit.len()).min_by(|&a, &b| fit[a].total_cmp(&fit[b])).unwrap();
    let mut best_idx = best_of(&fitness);
    let mut best = (population[best_idx].clone(), fitness[best_idx]);
    trace.advance(evals.min(budget), best.1);
    observe(&population);

    let children_per_gen = pop_size - elitism;
    let mut swaps = 0u64;
    while evals + children_per_gen <= budget {
        let mut ranked: Vec<usize> = (0..pop_size).collect();
        ranked.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
        let mut next: Vec<Vec<usize>> = ranked[..elitism].iter().map(|&i| population[i].clone()).collect();
        let mut next_fit: Vec<f64> = ranked[..elitism].iter().map(|&i| fitness[i]).collect();
        while next.len() < pop_size {
            let a = tournament(&fitness, params.tournament, &mut rng);
            let b = tournament(&fitness, params.tournament, &mut rng);
            let c1 = rng.random_range(0..n);
            let c2 = rng.random_range(0..n);
            let mut child = ox1(&population[a], &population[b], c1.min(c2), c1.max(c2));
            if rng.random::<f64>() < params.mutation_rate {
                let i = rng.random_range(0..n);
                let j = rng.random_range(0..n);
                child.swap(i, j);
                swaps += 1;
            }
            let f = cycle_length(&child, dm);
            evals += 1;
            if f < best.1 {
                best = (child.clone(), f);
            }
            trace.advance(evals, best.1);
            next.push(child);
            next_fit.push(f);
        }
        population = next;
        fitness = next_fit;
        best_idx = best_of(&fitness);
        debug_assert!(fitness[best_idx] <= best.1 + 1e-12);
        observe(&population);
    }
    let tour = Tour::from_trusted(best.0, dm);
    Ok(finish(tour, f0, budget, trace, [0, swaps, 0, 0], [0; 4], evals as u64, started))
}
