//! Operator-selection layer: online search state, context vectors, LinUCB
//! arms with ridge statistics, reward shaping, the stagnation gate, and the
//! non-contextual UCB1 and uniform-random policies.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::StaticFeatures;

/// Tunables of the learning layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    /// Exploration weight of the LinUCB confidence bonus.
    pub alpha: f64,
    /// Window for recent improvement and recent acceptance.
    pub window: usize,
    /// Iterations without incumbent improvement at which stagnation saturates.
    pub stagnation_window: usize,
    /// Probability that a saturated stagnation signal forces 2-opt.
    pub p_gate: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            window: 20,
            stagnation_window: 30,
            p_gate: 0.5,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::invalid(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if self.window == 0 || self.stagnation_window == 0 {
            return Err(Error::invalid("windows must be at least 1 iteration"));
        }
        if !(0.0..=1.0).contains(&self.p_gate) {
            return Err(Error::invalid(format!("p_gate must lie in [0, 1], got {}", self.p_gate)));
        }
        Ok(())
    }
}

/// Search-state descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicState {
    pub progress: f64,
    pub curr_ratio: f64,
    pub best_ratio: f64,
    pub recent_improvement: f64,
    pub recent_acceptance: f64,
    pub stagnation: f64,
}

impl DynamicState {
    pub fn to_array(&self) -> [f64; 6] {
        [
            self.progress,
            self.curr_ratio,
            self.best_ratio,
            self.recent_improvement,
            self.recent_acceptance,
            self.stagnation,
        ]
    }
}

/// Rolling record of the incumbent trajectory needed by [`dynamic_features`].
#[derive(Debug, Clone)]
pub struct SearchHistory {
    window: usize,
    stagnation_window: usize,
    initial: f64,
    current: f64,
    best: f64,
    iterations: usize,
    since_improvement: usize,
    /// Incumbent lengths after each of the last `window` iterations, plus the
    /// one before them.
    lengths: VecDeque<f64>,
    accepted: VecDeque<bool>,
    accepted_in_window: usize,
}

impl SearchHistory {
    pub fn new(initial_length: f64, params: &ControllerParams) -> Self {
        let mut lengths = VecDeque::with_capacity(params.window + 1);
        lengths.push_back(initial_length);
        Self {
            window: params.window,
            stagnation_window: params.stagnation_window,
            initial: initial_length,
            current: initial_length,
            best: initial_length,
            iterations: 0,
            since_improvement: 0,
            lengths,
            accepted: VecDeque::with_capacity(params.window),
            accepted_in_window: 0,
        }
    }

    /// Records one iteration: whether the candidate was accepted and the
    /// incumbent length afterwards.
    pub fn record(&mut self, accepted: bool, incumbent_length: f64) {
        if incumbent_length < self.current {
            self.since_improvement = 0;
        } else {
            self.since_improvement += 1;
        }
        self.current = incumbent_length;
        self.best = self.best.min(incumbent_length);
        self.iterations += 1;

        self.lengths.push_back(incumbent_length);
        if self.lengths.len() > self.window + 1 {
            self.lengths.pop_front();
        }
        self.accepted.push_back(accepted);
        self.accepted_in_window += usize::from(accepted);
        if self.accepted.len() > self.window && self.accepted.pop_front() == Some(true) {
            self.accepted_in_window -= 1;
        }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn since_improvement(&self) -> usize {
        self.since_improvement
    }
}

/// Upper clamp on the length ratios (only reachable under annealing).
pub const MAX_LENGTH_RATIO: f64 = 1.5;

/// Search-state vector after `t` of `budget` iterations.
///
/// * recent improvement: `clip(100 (f[t-W] - f[t]) / f[0], 0, 1)` with the
///   window start clamped at iteration 0;
/// * recent acceptance: accepted fraction over the last `min(t, W)` iterations;
/// * stagnation: `min(1, iterations since incumbent improvement / S)`.
pub fn dynamic_features(history: &SearchHistory, t: usize, budget: usize) -> DynamicState {
    let f0 = history.initial;
    let progress = if budget == 0 {
        1.0
    } else {
        (t as f64 / budget as f64).clamp(0.0, 1.0)
    };
    let ratio = |f: f64| {
        if f0 > 0.0 {
            (f / f0).min(MAX_LENGTH_RATIO)
        } else {
            1.0
        }
    };
    let window_start = *history.lengths.front().expect("history is never empty");
    let recent_improvement = if f0 > 0.0 {
        (100.0 * (window_start - history.current) / f0).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let recent_acceptance = if history.accepted.is_empty() {
        0.0
    } else {
        history.accepted_in_window as f64 / history.accepted.len() as f64
    };
    let stagnation =
        (history.since_improvement as f64 / history.stagnation_window as f64).min(1.0);
    DynamicState {
        progress,
        curr_ratio: ratio(history.current),
        best_ratio: ratio(history.best),
        recent_improvement,
        recent_acceptance,
        stagnation,
    }
}

/// Which feature groups enter the context vector. The bias term is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMask {
    Full,
    NoStatic,
    NoDynamic,
    NoContext,
}

impl FeatureMask {
    pub fn dim(self) -> usize {
        match self {
            FeatureMask::Full => 13,
            FeatureMask::NoStatic | FeatureMask::NoDynamic => 7,
            FeatureMask::NoContext => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureMask::Full => "full",
            FeatureMask::NoStatic => "nostatic",
            FeatureMask::NoDynamic => "nodynamic",
            FeatureMask::NoContext => "nocontext",
        }
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "full" => Ok(FeatureMask::Full),
            "nostatic" => Ok(FeatureMask::NoStatic),
            "nodynamic" => Ok(FeatureMask::NoDynamic),
            "nocontext" => Ok(FeatureMask::NoContext),
            _ => Err(Error::invalid(format!("unknown feature mask `{s}`"))),
        }
    }
}

/// Context vector `[1, static..., dynamic...]`, shortened by the feature mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Context(DVector<f64>);

impl Context {
    pub fn build(mask: FeatureMask, fixed: &StaticFeatures, state: &DynamicState) -> Self {
        let mut z = Vec::with_capacity(mask.dim());
        z.push(1.0);
        if matches!(mask, FeatureMask::Full | FeatureMask::NoDynamic) {
            z.extend_from_slice(&fixed.to_array());
        }
        if matches!(mask, FeatureMask::Full | FeatureMask::NoStatic) {
            z.extend_from_slice(&state.to_array());
        }
        Context(DVector::from_vec(z))
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Context(DVector::from_column_slice(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Ridge-regression statistics of one LinUCB arm, with `A` kept factorized.
#[derive(Debug, Clone)]
pub struct LinUcbArm {
    a: DMatrix<f64>,
    b: DVector<f64>,
    pulls: u64,
    chol: Cholesky<f64, Dyn>,
    theta: DVector<f64>,
}

impl LinUcbArm {
    /// Fresh arm with `A = I` and `b = 0`.
    pub fn new(dim: usize) -> Self {
        let a = DMatrix::identity(dim, dim);
        let chol = Cholesky::new(a.clone()).expect("identity is positive definite");
        Self {
            a,
            b: DVector::zeros(dim),
            pulls: 0,
            chol,
            theta: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    /// Ridge estimate `A^-1 b`.
    pub fn theta(&self) -> &DVector<f64> {
        &self.theta
    }

    /// `theta^T z + alpha sqrt(z^T A^-1 z)`.
    pub fn score(&self, z: &Context, alpha: f64) -> f64 {
        let z = z.vector();
        let mean = self.theta.dot(z);
        if alpha == 0.0 {
            return mean;
        }
        let width = z.dot(&self.chol.solve(z)).max(0.0);
        mean + alpha * width.sqrt()
    }

    /// Rank-one update `A += z z^T`, `b += r z`.
    pub fn update(&mut self, z: &Context, reward: f64) -> Result<()> {
        let z = z.vector();
        if z.len() != self.dim() {
            return Err(Error::invalid(format!(
                "context has dimension {}, arm expects {}",
                z.len(),
                self.dim()
            )));
        }
        self.a.ger(1.0, z, z, 1.0);
        self.b.axpy(reward, z, 1.0);
        self.pulls += 1;
        self.chol = Cholesky::new(self.a.clone())
            .ok_or_else(|| Error::Internal("LinUCB design matrix lost positive definiteness".into()))?;
        self.theta = self.chol.solve(&self.b);
        Ok(())
    }
}

/// Relative tolerance for treating two UCB scores as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Indices of the maximal values in `scores` (within a tiny relative tolerance).
fn argmax_set(scores: &[f64]) -> Vec<usize> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = TIE_TOLERANCE * max.abs().max(1.0);
    scores
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s >= max - tol)
        .map(|(i, _)| i)
        .collect()
}

/// LinUCB selection: argmax of the upper confidence score, ties broken
/// uniformly at random.
pub fn linucb_select<R: Rng + ?Sized>(
    arms: &[LinUcbArm],
    z: &Context,
    alpha: f64,
    rng: &mut R,
) -> Result<usize> {
    if arms.is_empty() {
        return Err(Error::invalid("no arms to select from"));
    }
    let scores: Vec<f64> = arms.iter().map(|a| a.score(z, alpha)).collect();
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Internal("non-finite LinUCB score".into()));
    }
    let best = argmax_set(&scores);
    Ok(if best.len() == 1 {
        best[0]
    } else {
        best[rng.random_range(0..best.len())]
    })
}

pub fn linucb_update(arm: &mut LinUcbArm, z: &Context, reward: f64) -> Result<()> {
    arm.update(z, reward)
}

/// A set of LinUCB arms sharing one exploration weight.
#[derive(Debug, Clone)]
pub struct LinUcb {
    arms: Vec<LinUcbArm>,
    alpha: f64,
}

impl LinUcb {
    pub fn new(num_arms: usize, dim: usize, alpha: f64) -> Self {
        Self {
            arms: (0..num_arms).map(|_| LinUcbArm::new(dim)).collect(),
            alpha,
        }
    }

    pub fn arms(&self) -> &[LinUcbArm] {
        &self.arms
    }

    pub fn dim(&self) -> usize {
        self.arms.first().map_or(0, LinUcbArm::dim)
    }

    pub fn select<R: Rng + ?Sized>(&self, z: &Context, rng: &mut R) -> Result<usize> {
        linucb_select(&self.arms, z, self.alpha, rng)
    }

    pub fn update(&mut self, arm: usize, z: &Context, reward: f64) -> Result<()> {
        linucb_update(&mut self.arms[arm], z, reward)
    }
}

/// `clip(100 (f_curr - f_cand) / f_init, -1, 1)`.
pub fn reward(f_curr: f64, f_cand: f64, f_init: f64) -> Result<f64> {
    if !(f_init > 0.0) {
        return Err(Error::invalid(format!(
            "reward needs a positive initial length, got {f_init}"
        )));
    }
    Ok((100.0 * (f_curr - f_cand) / f_init).clamp(-1.0, 1.0))
}

/// Forces the 2-opt arm with probability `p_gate` once stagnation saturates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagnationGate {
    pub p_gate: f64,
    /// Arm index of 2-opt, or `None` when 2-opt is not in the portfolio.
    pub two_opt_arm: Option<usize>,
}

impl StagnationGate {
    /// Returns the arm to execute. Draws from `rng` only when stagnation is
    /// saturated.
    pub fn apply<R: Rng + ?Sized>(&self, selected: usize, state: &DynamicState, rng: &mut R) -> usize {
        stagnation_gate(selected, state, self.p_gate, self.two_opt_arm, rng)
    }
}

pub fn stagnation_gate<R: Rng + ?Sized>(
    selected: usize,
    state: &DynamicState,
    p_gate: f64,
    two_opt_arm: Option<usize>,
    rng: &mut R,
) -> usize {
    match two_opt_arm {
        Some(target) if state.stagnation >= 1.0 => {
            if rng.random::<f64>() < p_gate {
                target
            } else {
                selected
            }
        }
        _ => selected,
    }
}

/// UCB1: untried arms first (lowest index), then mean plus `sqrt(2 ln t / n_a)`.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    counts: Vec<u64>,
    sums: Vec<f64>,
    total: u64,
}

impl Ucb1 {
    pub fn new(num_arms: usize) -> Self {
        Self {
            counts: vec![0; num_arms],
            sums: vec![0.0; num_arms],
            total: 0,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn mean(&self, arm: usize) -> f64 {
        if self.counts[arm] == 0 {
            0.0
        } else {
            self.sums[arm] / self.counts[arm] as f64
        }
    }

    pub fn select(&self) -> usize {
        if let Some(untried) = self.counts.iter().position(|&c| c == 0) {
            return untried;
        }
        let ln_t = (self.total as f64).ln();
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for arm in 0..self.counts.len() {
            let score = self.mean(arm) + (2.0 * ln_t / self.counts[arm] as f64).sqrt();
            if score > best_score {
                best_score = score;
                best = arm;
            }
        }
        best
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += reward;
        self.total += 1;
    }
}

pub fn ucb1_select(state: &Ucb1) -> usize {
    state.select()
}

pub fn ucb1_update(state: &mut Ucb1, arm: usize, reward: f64) {
    state.update(arm, reward)
}

/// Uniform choice over `num_arms` arms.
pub fn random_select<R: Rng + ?Sized>(num_arms: usize, rng: &mut R) -> usize {
    rng.random_range(0..num_arms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::{prop_assert, proptest};
    use rand::Rng;

    fn e0(dim: usize) -> Context {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        Context::from_slice(&v)
    }

    fn history_with(params: &ControllerParams, f0: f64, steps: &[(bool, f64)]) -> SearchHistory {
        let mut h = SearchHistory::new(f0, params);
        for &(acc, len) in steps {
            h.record(acc, len);
        }
        h
    }

    #[test]
    fn initial_state() {
        let p = ControllerParams::default();
        let h = SearchHistory::new(10.0, &p);
        let s = dynamic_features(&h, 0, 100);
        assert_eq!(
            s,
            DynamicState {
                progress: 0.0,
                curr_ratio: 1.0,
                best_ratio: 1.0,
                recent_improvement: 0.0,
                recent_acceptance: 0.0,
                stagnation: 0.0,
            }
        );
    }

    #[test]
    fn stagnation_saturates_after_window() {
        let p = ControllerParams::default();
        let steps = vec![(false, 10.0); 30];
        let h = history_with(&p, 10.0, &steps);
        assert_eq!(dynamic_features(&h, 30, 100).stagnation, 1.0);
        let h = history_with(&p, 10.0, &steps[..15]);
        assert_eq!(dynamic_features(&h, 15, 100).stagnation, 0.5);
    }

    #[test]
    fn acceptance_rate_over_window() {
        let p = ControllerParams::default();
        let mut steps = Vec::new();
        let mut len = 10.0;
        for k in 0..40 {
            // The last 20 iterations contain exactly 5 acceptances.
            let acc = if k < 20 { true } else { k % 4 == 0 };
            if acc {
                len -= 0.001;
            }
            steps.push((acc, len));
        }
        let h = history_with(&p, 10.0, &steps);
        assert!((dynamic_features(&h, 40, 100).recent_acceptance - 0.25).abs() < 1e-15);
    }

    #[test]
    fn recent_improvement_uses_window_start() {
        let p = ControllerParams::default();
        // 25 iterations each improving by 0.01% of f0.
        let steps: Vec<(bool, f64)> = (1..=25).map(|k| (true, 100.0 - 0.01 * k as f64)).collect();
        let h = history_with(&p, 100.0, &steps);
        let s = dynamic_features(&h, 25, 100);
        // f[5] - f[25] = 0.2 on f0 = 100 -> 100 * 0.002 = 0.2
        assert!((s.recent_improvement - 0.2).abs() < 1e-9);
        assert!((s.curr_ratio - 0.9975).abs() < 1e-12);
        assert_eq!(s.best_ratio, s.curr_ratio);
        assert_eq!(s.progress, 0.25);
        assert_eq!(s.stagnation, 0.0);
    }

    #[test]
    fn fresh_arms_score_alpha_norm() {
        let z = Context::from_slice(&[1.0, 0.5, -0.25]);
        let arm = LinUcbArm::new(3);
        let norm = (1.0f64 + 0.25 + 0.0625).sqrt();
        assert!((arm.score(&z, 2.0) - 2.0 * norm).abs() < 1e-12);
    }

    #[test]
    fn fresh_arms_select_uniformly() {
        let arms: Vec<LinUcbArm> = (0..4).map(|_| LinUcbArm::new(13)).collect();
        let z = Context::from_slice(&[1.0; 13]);
        let mut r = rng::stream(1, &[]);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[linucb_select(&arms, &z, 1.0, &mut r).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    /// A0 = I + e0 e0^T, b0 = e0, so theta0 = e0 / 2 and z^T A0^-1 z = 1/2.
    #[test]
    fn single_update_hand_computed() {
        let z = e0(13);
        let mut arms: Vec<LinUcbArm> = (0..4).map(|_| LinUcbArm::new(13)).collect();
        linucb_update(&mut arms[0], &z, 1.0).unwrap();
        assert!((arms[0].theta()[0] - 0.5).abs() < 1e-15);
        let alpha = 0.7;
        assert!((arms[0].score(&z, alpha) - (0.5 + alpha * 0.5f64.sqrt())).abs() < 1e-12);
        assert!((arms[1].score(&z, alpha) - alpha).abs() < 1e-12);
        let mut r = rng::stream(0, &[]);
        for _ in 0..100 {
            assert_eq!(linucb_select(&arms, &z, 0.0, &mut r).unwrap(), 0);
        }
    }

    #[test]
    fn update_on_basis_vector() {
        let mut arm = LinUcbArm::new(13);
        arm.update(&e0(13), 1.0).unwrap();
        assert_eq!(arm.a()[(0, 0)], 2.0);
        assert_eq!(arm.b()[0], 1.0);
        assert_eq!(arm.pulls(), 1);
        for i in 0..13 {
            for j in 0..13 {
                if (i, j) != (0, 0) {
                    assert_eq!(arm.a()[(i, j)], if i == j { 1.0 } else { 0.0 });
                }
            }
            if i > 0 {
                assert_eq!(arm.b()[i], 0.0);
            }
        }
        assert!(arm.update(&e0(7), 1.0).is_err());
    }

    #[test]
    fn updates_are_additive() {
        let z = Context::from_slice(&[1.0, 0.3, 0.8]);
        let mut twice = LinUcbArm::new(3);
        twice.update(&z, 0.4).unwrap();
        twice.update(&z, 0.4).unwrap();
        let mut expect_a = DMatrix::identity(3, 3);
        expect_a += 2.0 * z.vector() * z.vector().transpose();
        let expect_b = 0.8 * z.vector();
        assert!((twice.a() - expect_a).abs().max() < 1e-15);
        assert!((twice.b() - expect_b).abs().max() < 1e-15);
    }

    /// With a fixed context z and rewards r_k, theta^T z = (z^T z) S / (1 + m z^T z)
    /// where S is the reward sum and m the pull count (Sherman-Morrison on I + m z z^T).
    #[test]
    fn ridge_estimate_converges_to_mean_reward() {
        let z = Context::from_slice(&[1.0, 0.4, 0.2, 0.9]);
        let zz = z.vector().dot(z.vector());
        let mut arm = LinUcbArm::new(4);
        let mut r = rng::stream(5, &[]);
        let mut sum = 0.0;
        for _ in 0..5000 {
            let reward = if r.random::<f64>() < 0.8 { 1.0 } else { 0.0 };
            sum += reward;
            arm.update(&z, reward).unwrap();
        }
        let pred = arm.theta().dot(z.vector());
        let closed_form = zz * sum / (1.0 + 5000.0 * zz);
        assert!((pred - closed_form).abs() < 1e-9);
        assert!((0.75..=0.85).contains(&pred), "{pred}");
    }

    #[test]
    fn greedy_limit_is_argmax_of_estimates() {
        let mut r = rng::stream(9, &[]);
        let mut arms: Vec<LinUcbArm> = (0..4).map(|_| LinUcbArm::new(3)).collect();
        for _ in 0..200 {
            let arm = r.random_range(0..4);
            let z = Context::from_slice(&[1.0, r.random(), r.random()]);
            let reward = r.random_range(-1.0..1.0);
            arms[arm].update(&z, reward).unwrap();
        }
        for _ in 0..100 {
            let z = Context::from_slice(&[1.0, r.random(), r.random()]);
            let est: Vec<f64> = arms.iter().map(|a| a.theta().dot(z.vector())).collect();
            let expected = (0..4).max_by(|&a, &b| est[a].total_cmp(&est[b])).unwrap();
            assert_eq!(linucb_select(&arms, &z, 0.0, &mut r).unwrap(), expected);
        }
    }

    #[test]
    fn linucb_converges_to_better_arm() {
        let mut bandit = LinUcb::new(2, 3, 0.0);
        let z = Context::from_slice(&[1.0, 0.5, 0.5]);
        let mut r = rng::stream(3, &[]);
        let mut late = 0;
        for t in 0..5000 {
            let arm = bandit.select(&z, &mut r).unwrap();
            let mean = if arm == 0 { 0.8 } else { 0.2 };
            let reward = mean + r.random_range(-0.2..0.2);
            bandit.update(arm, &z, reward).unwrap();
            if t >= 4000 && arm == 0 {
                late += 1;
            }
        }
        assert!(late > 900, "{late}");
    }

    #[test]
    fn reward_examples() {
        assert_eq!(reward(5.0, 5.0, 10.0).unwrap(), 0.0);
        assert!((reward(10.0, 9.95, 10.0).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(reward(10.0, 9.8, 10.0).unwrap(), 1.0);
        assert_eq!(reward(10.0, 10.2, 10.0).unwrap(), -1.0);
        assert!(reward(1.0, 1.0, 0.0).is_err());
        assert!(reward(1.0, 1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn reward_antisymmetric_and_scale_free(
            a in 0.5f64..2.0, b in 0.5f64..2.0, f0 in 50.0f64..200.0, k in 0.01f64..100.0,
        ) {
            let r = reward(a, b, f0).unwrap();
            prop_assert!((r + reward(b, a, f0).unwrap()).abs() < 1e-12);
            let scaled = reward(a * k, b * k, f0 * k).unwrap();
            prop_assert!((r - scaled).abs() < 1e-9);
        }

        #[test]
        fn design_matrix_stays_spd(seed in 0u64..500, steps in 1usize..60) {
            let mut r = rng::stream(seed, &[]);
            let mut arm = LinUcbArm::new(5);
            for _ in 0..steps {
                let z: Vec<f64> = (0..5).map(|_| r.random_range(-2.0..2.0)).collect();
                arm.update(&Context::from_slice(&z), r.random_range(-1.0..1.0)).unwrap();
            }
            let a = arm.a();
            prop_assert!((a - a.transpose()).abs().max() < 1e-12);
            let eig = a.clone().symmetric_eigen();
            prop_assert!(eig.eigenvalues.min() >= 1.0 - 1e-9);
            prop_assert!(arm.theta().iter().all(|v| v.is_finite()));
        }
    }

    fn stalled(stagnation: f64) -> DynamicState {
        DynamicState {
            progress: 0.5,
            curr_ratio: 0.9,
            best_ratio: 0.9,
            recent_improvement: 0.0,
            recent_acceptance: 0.0,
            stagnation,
        }
    }

    #[test]
    fn gate_behaviour() {
        let mut r = rng::stream(2, &[]);
        for sel in 0..4 {
            assert_eq!(stagnation_gate(sel, &stalled(0.0), 1.0, Some(0), &mut r), sel);
            assert_eq!(stagnation_gate(sel, &stalled(0.99), 1.0, Some(0), &mut r), sel);
            assert_eq!(stagnation_gate(sel, &stalled(1.0), 1.0, Some(0), &mut r), 0);
            assert_eq!(stagnation_gate(sel, &stalled(1.0), 1.0, None, &mut r), sel);
        }
        let gate = StagnationGate { p_gate: 0.5, two_opt_arm: Some(0) };
        let hits = (0..10_000).filter(|_| gate.apply(3, &stalled(1.0), &mut r) == 0).count();
        assert!((hits as f64 / 1e4 - 0.5).abs() < 0.02, "{hits}");
    }

    #[test]
    fn gate_closed_consumes_no_randomness() {
        let mut a = rng::stream(4, &[]);
        let b = a.clone();
        stagnation_gate(2, &stalled(0.5), 0.5, Some(0), &mut a);
        assert_eq!(a, b);
    }

    #[test]
    fn ucb1_rules() {
        let mut u = Ucb1::new(4);
        u.update(0, 1.0);
        u.update(1, 1.0);
        u.update(3, 1.0);
        assert_eq!(ucb1_select(&u), 2);

        let mut u = Ucb1::new(4);
        let mut r = rng::stream(8, &[]);
        let means = [0.9, 0.1, 0.1, 0.1];
        let draw = |arm: usize, r: &mut rng::StreamRng| if r.random::<f64>() < means[arm] { 1.0 } else { 0.0 };
        for _ in 0..1000 {
            let arm = ucb1_select(&u);
            let x = draw(arm, &mut r);
            ucb1_update(&mut u, arm, x);
        }
        let mut best = 0;
        for _ in 0..1000 {
            let arm = ucb1_select(&u);
            best += usize::from(arm == 0);
            let x = draw(arm, &mut r);
            ucb1_update(&mut u, arm, x);
        }
        assert!(best > 700, "{best}");
    }

    #[test]
    fn random_select_is_uniform() {
        let mut r = rng::stream(6, &[]);
        let mut counts = [0usize; 4];
        for _ in 0..100_000 {
            counts[random_select(4, &mut r)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 1e5 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn context_layout() {
        let fixed = StaticFeatures {
            size_norm: 0.1,
            nn_mean: 0.2,
            nn_dispersion: 0.3,
            anisotropy: 0.4,
            radial_dispersion: 0.5,
            mst_per_node: 0.6,
        };
        let state = stalled(1.0);
        let full = Context::build(FeatureMask::Full, &fixed, &state);
        assert_eq!(full.dim(), 13);
        assert_eq!(full.as_slice()[0], 1.0);
        assert_eq!(&full.as_slice()[1..7], &fixed.to_array());
        assert_eq!(&full.as_slice()[7..], &state.to_array());
        assert_eq!(Context::build(FeatureMask::NoStatic, &fixed, &state).as_slice()[1..], state.to_array());
        assert_eq!(Context::build(FeatureMask::NoDynamic, &fixed, &state).as_slice()[1..], fixed.to_array());
        assert_eq!(Context::build(FeatureMask::NoContext, &fixed, &state).as_slice(), &[1.0]);
    }

    #[test]
    fn params_validation() {
        assert!(ControllerParams::default().validate().is_ok());
        assert!(ControllerParams { alpha: -1.0, ..Default::default() }.validate().is_err());
        assert!(ControllerParams { p_gate: 1.5, ..Default::default() }.validate().is_err());
        assert!(ControllerParams { window: 0, ..Default::default() }.validate().is_err());
    }
}
