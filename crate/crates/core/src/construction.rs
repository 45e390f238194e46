//! Nearest-neighbour construction.

use crate::error::{Error, Result};
use crate::instance::DistanceMatrix;
use crate::tour::Tour;

/// Greedy chain from `start`, always extending to the nearest unvisited site
/// (lowest index on ties).
pub fn nearest_neighbor_tour(dm: &DistanceMatrix, start: usize) -> Result<Tour> {
    let n = dm.n();
    if start >= n {
        return Err(Error::invalid(format!(
            "start site {start} out of range for {n} sites"
        )));
    }
    Ok(Tour::from_trusted(nn_order(dm, start), dm))
}

fn nn_order(dm: &DistanceMatrix, start: usize) -> Vec<usize> {
    let n = dm.n();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = start;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let row = dm.row(cur);
        let mut next = usize::MAX;
        let mut best = f64::INFINITY;
        for (j, &d) in row.iter().enumerate() {
            if !visited[j] && d < best {
                best = d;
                next = j;
            }
        }
        visited[next] = true;
        order.push(next);
        cur = next;
    }
    order
}

/// Shortest nearest-neighbour tour over every start (lowest start on ties).
pub fn multi_start_nn(dm: &DistanceMatrix) -> Result<Tour> {
    let n = dm.n();
    if n < 2 {
        return Err(Error::invalid(format!(
            "nearest-neighbour construction needs at least 2 sites, got {n}"
        )));
    }
    let mut best: Option<Tour> = None;
    for start in 0..n {
        let t = Tour::from_trusted(nn_order(dm, start), dm);
        if best.as_ref().is_none_or(|b| t.length() < b.length()) {
            best = Some(t);
        }
    }
    Ok(best.expect("n >= 2"))
}
