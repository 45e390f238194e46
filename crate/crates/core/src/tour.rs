//! Tours, the four low-level moves, and best-of-three candidate sampling.
//!
//! Move index semantics (positions in `Tour::order`):
//!
//! * `TwoOpt(i, j)`: reverse positions `i..=j`, with `0 < i <= j < n`.
//!   Position 0 never moves.
//! * `Swap(i, j)`: exchange positions `i` and `j`.
//! * `Relocate(i, j)`: take the site at position `i` out and reinsert it
//!   immediately before the site that was at position `j` (`j != i`).
//! * `OrOpt2(i, j)`: same as relocate for the block at positions `[i, i+1]`
//!   (`i + 1 < n`, `j` outside the block).
//!
//! Every move has an O(1) length delta computed from the edges it removes and
//! adds.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::DistanceMatrix;

/// Number of candidate moves sampled per operator application.
pub const CANDIDATE_POOL: usize = 3;

/// Accepted moves between full recomputations of the cached tour length.
pub const LENGTH_REFRESH_INTERVAL: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operator {
    TwoOpt,
    Swap,
    Relocate,
    OrOpt2,
}

impl Operator {
    pub const ALL: [Operator; 4] = [
        Operator::TwoOpt,
        Operator::Swap,
        Operator::Relocate,
        Operator::OrOpt2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Operator::TwoOpt => "two-opt",
            Operator::Swap => "swap",
            Operator::Relocate => "relocate",
            Operator::OrOpt2 => "or-opt2",
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "two-opt" | "2opt" | "2-opt" | "twoopt" => Ok(Operator::TwoOpt),
            "swap" => Ok(Operator::Swap),
            "relocate" => Ok(Operator::Relocate),
            "or-opt2" | "oropt2" | "or-opt" | "oropt" | "or-opt-2" => Ok(Operator::OrOpt2),
            other => Err(Error::invalid(format!("unknown operator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub op: Operator,
    pub i: usize,
    pub j: usize,
}

impl Move {
    pub const fn new(op: Operator, i: usize, j: usize) -> Self {
        Self { op, i, j }
    }

    /// Checks the move against a tour of `n` sites.
    pub fn validate(&self, n: usize) -> Result<()> {
        let Move { op, i, j } = *self;
        let ok = match op {
            Operator::TwoOpt => 0 < i && i <= j && j < n,
            Operator::Swap => i < n && j < n,
            Operator::Relocate => i < n && j < n && i != j,
            Operator::OrOpt2 => i + 1 < n && j < n && j != i && j != i + 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{op}({i}, {j}) is not a valid move on a tour of {n} sites"
            )))
        }
    }
}

/// Closed tour length of `order`; fails when `order` is not a permutation of
/// `0..dm.n()`.
pub fn tour_length(order: &[usize], dm: &DistanceMatrix) -> Result<f64> {
    check_permutation(order, dm.n())?;
    Ok(cycle_length(order, dm))
}

pub(crate) fn cycle_length(order: &[usize], dm: &DistanceMatrix) -> f64 {
    let n = order.len();
    if n == 0 {
        return 0.0;
    }
    let open: f64 = order.windows(2).map(|w| dm.get(w[0], w[1])).sum();
    open + dm.get(order[n - 1], order[0])
}

pub fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::invalid(format!(
            "order has {} entries, expected {n}",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::invalid(format!(
                "order is not a permutation of 0..{n} (offending entry {v})"
            )));
        }
        seen[v] = true;
    }
    Ok(())
}

/// A permutation of site indices with its cached cycle length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    order: Vec<usize>,
    length: f64,
    #[serde(skip)]
    since_refresh: u32,
}

impl Tour {
    pub fn new(order: Vec<usize>, dm: &DistanceMatrix) -> Result<Self> {
        let length = tour_length(&order, dm)?;
        Ok(Self {
            order,
            length,
            since_refresh: 0,
        })
    }

    /// Identity order `0, 1, ..., n-1`.
    pub fn identity(dm: &DistanceMatrix) -> Self {
        let order: Vec<usize> = (0..dm.n()).collect();
        let length = cycle_length(&order, dm);
        Self {
            order,
            length,
            since_refresh: 0,
        }
    }

    pub(crate) fn from_trusted(order: Vec<usize>, dm: &DistanceMatrix) -> Self {
        let length = cycle_length(&order, dm);
        Self {
            order,
            length,
            since_refresh: 0,
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn into_order(self) -> Vec<usize> {
        self.order
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Applies a validated move in place, updating the cached length by `delta`.
    /// The cache is recomputed from scratch every
    /// [`LENGTH_REFRESH_INTERVAL`] applications.
    pub fn apply_in_place(&mut self, m: Move, delta: f64, dm: &DistanceMatrix) {
        permute(&mut self.order, m);
        self.length += delta;
        self.since_refresh += 1;
        if self.since_refresh >= LENGTH_REFRESH_INTERVAL {
            self.refresh_length(dm);
        }
    }

    pub fn refresh_length(&mut self, dm: &DistanceMatrix) {
        self.length = cycle_length(&self.order, dm);
        self.since_refresh = 0;
    }
}

fn permute(order: &mut [usize], m: Move) {
    let Move { op, i, j } = m;
    match op {
        Operator::TwoOpt => order[i..=j].reverse(),
        Operator::Swap => order.swap(i, j),
        Operator::Relocate => {
            if j > i {
                order[i..j].rotate_left(1);
            } else {
                order[j..=i].rotate_right(1);
            }
        }
        Operator::OrOpt2 => {
            if j > i + 1 {
                order[i..j].rotate_left(2);
            } else {
                order[j..i + 2].rotate_right(2);
            }
        }
    }
}

/// Returns a new tour with `m` applied; `tour` is left untouched.
pub fn apply_move(tour: &Tour, m: Move, dm: &DistanceMatrix) -> Result<Tour> {
    let delta = move_delta(tour, m, dm)?;
    let mut out = tour.clone();
    out.apply_in_place(m, delta, dm);
    Ok(out)
}

/// Signed change in tour length that `m` would cause.
pub fn move_delta(tour: &Tour, m: Move, dm: &DistanceMatrix) -> Result<f64> {
    m.validate(tour.len())?;
    Ok(delta_unchecked(&tour.order, m, dm))
}

pub(crate) fn delta_unchecked(order: &[usize], m: Move, dm: &DistanceMatrix) -> f64 {
    let n = order.len();
    let at = |p: usize| order[p % n];
    let d = |a: usize, b: usize| dm.get(a, b);
    let Move { op, i, j } = m;
    match op {
        Operator::TwoOpt => {
            if i == j {
                return 0.0;
            }
            let (a, b, c, e) = (at(i - 1), at(i), at(j), at(j + 1));
            d(a, c) + d(b, e) - d(a, b) - d(c, e)
        }
        Operator::Swap => {
            if i == j {
                return 0.0;
            }
            let moved = |p: usize| {
                if p == i {
                    order[j]
                } else if p == j {
                    order[i]
                } else {
                    order[p]
                }
            };
            // Edges are indexed by their first position; collect the distinct
            // ones touching i or j.
            let mut edges = [(i + n - 1) % n, i, (j + n - 1) % n, j];
            edges.sort_unstable();
            let mut delta = 0.0;
            for (k, &e) in edges.iter().enumerate() {
                if k > 0 && edges[k - 1] == e {
                    continue;
                }
                let f = (e + 1) % n;
                delta += d(moved(e), moved(f)) - d(order[e], order[f]);
            }
            delta
        }
        Operator::Relocate => {
            if (j + n - 1) % n == i {
                return 0.0;
            }
            let s = order[i];
            let (prev, next) = (at(i + n - 1), at(i + 1));
            let (x, y) = (at(j + n - 1), order[j]);
            d(prev, next) - d(prev, s) - d(s, next) + d(x, s) + d(s, y) - d(x, y)
        }
        Operator::OrOpt2 => {
            if (j + n - 1) % n == i + 1 {
                return 0.0;
            }
            let (first, last) = (order[i], order[i + 1]);
            let (prev, next) = (at(i + n - 1), at(i + 2));
            let (x, y) = (at(j + n - 1), order[j]);
            d(prev, next) - d(prev, first) - d(last, next) + d(x, first) + d(last, y) - d(x, y)
        }
    }
}

/// Draws one index uniformly from `0..n` excluding the sorted, distinct
/// values in `skip` (one RNG draw).
fn draw_excluding<R: Rng + ?Sized>(rng: &mut R, n: usize, skip: &[usize]) -> usize {
    let mut r = rng.random_range(0..n - skip.len());
    for &s in skip {
        if r >= s {
            r += 1;
        }
    }
    r
}

/// Draws a uniformly random non-trivial move of type `op` on a tour of
/// `n >= 5` sites. Every operator consumes exactly two `random_range` draws.
pub fn random_move<R: Rng + ?Sized>(op: Operator, n: usize, rng: &mut R) -> Move {
    debug_assert!(n >= 5);
    match op {
        Operator::TwoOpt => {
            let a = rng.random_range(1..n);
            let b = draw_excluding(rng, n, &[0, a]);
            Move::new(op, a.min(b), a.max(b))
        }
        Operator::Swap => {
            let i = rng.random_range(0..n);
            let j = draw_excluding(rng, n, &[i]);
            Move::new(op, i, j)
        }
        Operator::Relocate => {
            let i = rng.random_range(0..n);
            let mut skip = [i, (i + 1) % n];
            skip.sort_unstable();
            Move::new(op, i, draw_excluding(rng, n, &skip))
        }
        Operator::OrOpt2 => {
            let i = rng.random_range(0..n - 1);
            let mut skip = [i, i + 1, (i + 2) % n];
            skip.sort_unstable();
            Move::new(op, i, draw_excluding(rng, n, &skip))
        }
    }
}

/// First candidate with the smallest delta.
pub fn best_candidate(pool: impl IntoIterator<Item = (Move, f64)>) -> Option<(Move, f64)> {
    pool.into_iter().fold(None, |best, cand| match best {
        Some((_, bd)) if cand.1 >= bd => best,
        _ => Some(cand),
    })
}

/// Samples `pool` independent random moves of type `op` (repeats allowed)
/// and returns the best one with its delta.
pub fn sample_pool<R: Rng + ?Sized>(
    op: Operator,
    tour: &Tour,
    dm: &DistanceMatrix,
    rng: &mut R,
    pool: usize,
) -> Result<(Move, f64)> {
    let n = tour.len();
    if n < 5 {
        return Err(Error::invalid(format!(
            "candidate sampling needs at least 5 sites, got {n}"
        )));
    }
    if pool == 0 {
        return Err(Error::invalid("candidate pool must be non-empty"));
    }
    let order = &tour.order;
    let best = best_candidate((0..pool).map(|_| {
        let m = random_move(op, n, rng);
        (m, delta_unchecked(order, m, dm))
    }));
    Ok(best.expect("pool is non-empty"))
}

/// Best of [`CANDIDATE_POOL`] random moves of type `op`.
pub fn sample_candidate<R: Rng + ?Sized>(
    op: Operator,
    tour: &Tour,
    dm: &DistanceMatrix,
    rng: &mut R,
) -> Result<(Move, f64)> {
    sample_pool(op, tour, dm, rng, CANDIDATE_POOL)
}
