//! Seeded Euclidean instances in five layout families, plus distance primitives.
//!
//! Coordinates live in the unit square. Each family draws from its own keyed
//! stream (see [`crate::rng`]), so an instance is a pure function of
//! `(family, n, seed)`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

/// Standard deviation of the Gaussian around each cluster center.
pub const CLUSTER_SIGMA: f64 = 0.05;
/// Standard deviation of the corridor's vertical spread around y = 0.5.
pub const CORRIDOR_SIGMA: f64 = 0.03;
/// Grid jitter as a fraction of the cell size, per axis.
pub const GRID_JITTER: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn clipped(self) -> Self {
        Self::new(self.x.clamp(0.0, 1.0), self.y.clamp(0.0, 1.0))
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self::new(x, y)
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Euclidean distance between two points.
#[inline]
pub fn distance(p: Point, q: Point) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Uniform,
    Clustered,
    Corridor,
    GridJitter,
    MixedDensity,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Uniform,
        Family::Clustered,
        Family::Corridor,
        Family::GridJitter,
        Family::MixedDensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Clustered => "clustered",
            Family::Corridor => "corridor",
            Family::GridJitter => "grid-jitter",
            Family::MixedDensity => "mixed-density",
        }
    }

    /// Stable numeric code used as an RNG key word.
    pub fn code(self) -> u64 {
        match self {
            Family::Uniform => 0,
            Family::Clustered => 1,
            Family::Corridor => 2,
            Family::GridJitter => 3,
            Family::MixedDensity => 4,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "uniform" => Ok(Family::Uniform),
            "clustered" => Ok(Family::Clustered),
            "corridor" => Ok(Family::Corridor),
            "grid-jitter" | "gridjitter" => Ok(Family::GridJitter),
            "mixed-density" | "mixeddensity" => Ok(Family::MixedDensity),
            _ => Err(Error::invalid(format!("unknown instance family `{s}`"))),
        }
    }
}

/// An immutable set of sites in the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub points: Vec<Point>,
}

impl Instance {
    /// Builds an instance from explicit points, checking size and coordinate range.
    pub fn from_points(
        id: impl Into<String>,
        family: Family,
        seed: u64,
        points: Vec<Point>,
    ) -> Result<Self> {
        let inst = Instance {
            id: id.into(),
            family,
            n: points.len(),
            seed,
            points,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "instance `{}` has n = {}, need at least 2 sites",
                self.id, self.n
            )));
        }
        if self.n != self.points.len() {
            return Err(Error::invalid(format!(
                "instance `{}` declares n = {} but lists {} points",
                self.id,
                self.n,
                self.points.len()
            )));
        }
        for (i, p) in self.points.iter().enumerate() {
            let ok = p.x.is_finite()
                && p.y.is_finite()
                && (0.0..=1.0).contains(&p.x)
                && (0.0..=1.0).contains(&p.y);
            if !ok {
                return Err(Error::invalid(format!(
                    "instance `{}` point {i} = ({}, {}) lies outside the unit square",
                    self.id, p.x, p.y
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let inst: Instance = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Canonical instance id for a generated instance.
pub fn instance_id(family: Family, n: usize, seed: u64) -> String {
    format!("{}-n{}-s{}", family.name(), n, seed)
}

/// Seed of the `index`-th benchmark instance of a family/size cell.
pub fn suite_seed(family: Family, n: usize, index: usize) -> u64 {
    rng::mix(0x5EED_5017E, &[family.code(), n as u64, index as u64])
}

/// Generates a seeded instance of the given family.
///
/// Family parameters:
/// * uniform: i.i.d. U[0,1]^2;
/// * clustered: `max(2, round(n/25))` centers in U[0.1,0.9]^2, points drawn
///   around a uniformly chosen center with isotropic sigma 0.05;
/// * corridor: x ~ U[0,1], y ~ N(0.5, 0.03^2);
/// * grid-jitter: n distinct cells of a `ceil(sqrt n)` grid, cell center plus
///   U[-0.3,0.3] cell-size jitter per axis;
/// * mixed-density: `ceil(n/2)` uniform points, the rest clustered with
///   `max(2, round(n/50))` centers.
///
/// All coordinates are clipped to the unit square.
pub fn generate(family: Family, n: usize, seed: u64) -> Result<Instance> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "cannot generate an instance with n = {n}, need at least 2 sites"
        )));
    }
    let mut rng = rng::stream(seed, &[rng::label("instance"), family.code(), n as u64]);
    let points = match family {
        Family::Uniform => uniform_points(&mut rng, n),
        Family::Clustered => clustered_points(&mut rng, n, cluster_count(n, 25)).1,
        Family::Corridor => corridor_points(&mut rng, n),
        Family::GridJitter => grid_jitter_points(&mut rng, n),
        Family::MixedDensity => {
            let n_uniform = n.div_ceil(2);
            let mut pts = uniform_points(&mut rng, n_uniform);
            let rest = n - n_uniform;
            pts.extend(clustered_points(&mut rng, rest, cluster_count(n, 50)).1);
            pts
        }
    };
    debug_assert_eq!(points.len(), n);
    Ok(Instance {
        id: instance_id(family, n, seed),
        family,
        n,
        seed,
        points,
    })
}

fn cluster_count(n: usize, per_cluster: usize) -> usize {
    ((n as f64 / per_cluster as f64).round() as usize).max(2)
}

fn uniform_points(rng: &mut StreamRng, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let x = rng.random::<f64>();
            let y = rng.random::<f64>();
            Point::new(x, y)
        })
        .collect()
}

/// Returns `(centers, points)`; centers are drawn first, then for each point a
/// center index followed by the x and y offsets.
pub(crate) fn clustered_points(rng: &mut StreamRng, n: usize, k: usize) -> (Vec<Point>, Vec<Point>) {
    let centers: Vec<Point> = (0..k)
        .map(|_| {
            let x = rng.random_range(0.1..0.9);
            let y = rng.random_range(0.1..0.9);
            Point::new(x, y)
        })
        .collect();
    let noise = Normal::new(0.0, CLUSTER_SIGMA).expect("valid sigma");
    let points = (0..n)
        .map(|_| {
            let c = centers[rng.random_range(0..k)];
            let dx = noise.sample(rng);
            let dy = noise.sample(rng);
            Point::new(c.x + dx, c.y + dy).clipped()
        })
        .collect();
    (centers, points)
}

fn corridor_points(rng: &mut StreamRng, n: usize) -> Vec<Point> {
    let noise = Normal::new(0.5, CORRIDOR_SIGMA).expect("valid sigma");
    (0..n)
        .map(|_| {
            let x = rng.random::<f64>();
            let y = noise.sample(rng);
            Point::new(x, y).clipped()
        })
        .collect()
}

fn grid_jitter_points(rng: &mut StreamRng, n: usize) -> Vec<Point> {
    let g = (n as f64).sqrt().ceil() as usize;
    let cell = 1.0 / g as f64;
    index::sample(rng, g * g, n)
        .into_vec()
        .into_iter()
        .map(|c| {
            let cx = ((c % g) as f64 + 0.5) * cell;
            let cy = ((c / g) as f64 + 0.5) * cell;
            let jx = rng.random_range(-GRID_JITTER..=GRID_JITTER) * cell;
            let jy = rng.random_range(-GRID_JITTER..=GRID_JITTER) * cell;
            Point::new(cx + jx, cy + jy).clipped()
        })
        .collect()
}

/// Dense symmetric matrix of pairwise Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(inst: &Instance) -> Self {
        Self::from_points(&inst.points)
    }

    pub fn from_points(points: &[Point]) -> Self {
        let n = points.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = distance(points[i], points[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self { n, d }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }
}

/// Distance matrix of an instance.
pub fn distance_matrix(inst: &Instance) -> DistanceMatrix {
    DistanceMatrix::new(inst)
}
