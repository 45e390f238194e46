//! Static landscape descriptors of an instance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Instance};

/// Upper bound applied to every normalized descriptor.
pub const FEATURE_CAP: f64 = 2.0;

/// Six instance-level descriptors, each normalized into `[0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticFeatures {
    /// `log10(n) / 3`.
    pub size_norm: f64,
    /// Mean nearest-neighbour distance times `sqrt(n)`.
    pub nn_mean: f64,
    /// Coefficient of variation of nearest-neighbour distances.
    pub nn_dispersion: f64,
    /// `1 - lambda_min / lambda_max` of the coordinate covariance.
    pub anisotropy: f64,
    /// Coefficient of variation of distances to the centroid.
    pub radial_dispersion: f64,
    /// MST weight divided by n, times `sqrt(n)`.
    pub mst_per_node: f64,
}

impl StaticFeatures {
    pub const NAMES: [&'static str; 6] = [
        "size_norm",
        "nn_mean",
        "nn_dispersion",
        "anisotropy",
        "radial_dispersion",
        "mst_per_node",
    ];

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.size_norm,
            self.nn_mean,
            self.nn_dispersion,
            self.anisotropy,
            self.radial_dispersion,
            self.mst_per_node,
        ]
    }
}

/// Total weight of a minimum spanning tree (dense Prim, O(n^2)).
pub fn mst_total_weight(dm: &DistanceMatrix) -> Result<f64> {
    let n = dm.n();
    if n < 2 {
        return Err(Error::invalid(format!("MST needs at least 2 sites, got {n}")));
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut du = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && best[v] < du {
                du = best[v];
                u = v;
            }
        }
        in_tree[u] = true;
        total += du;
        let row = dm.row(u);
        for v in 0..n {
            if !in_tree[v] && row[v] < best[v] {
                best[v] = row[v];
            }
        }
    }
    Ok(total)
}

fn mean_and_cv(values: &[f64]) -> (f64, f64) {
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    if mean <= 0.0 {
        return (mean.max(0.0), 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / len;
    (mean, var.sqrt() / mean)
}

fn cap(v: f64) -> f64 {
    if v.is_finite() {
        v.clamp(0.0, FEATURE_CAP)
    } else {
        0.0
    }
}

/// Computes the six static descriptors. Coincident points produce zero
/// spread-based features rather than an error.
pub fn static_features(inst: &Instance, dm: &DistanceMatrix) -> Result<StaticFeatures> {
    let n = inst.points.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "static features need at least 3 sites, got {n}"
        )));
    }
    if dm.n() != n {
        return Err(Error::invalid("distance matrix does not match instance size"));
    }
    let nf = n as f64;
    let sqrt_n = nf.sqrt();

    let nn: Vec<f64> = (0..n)
        .map(|i| {
            dm.row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &d)| d)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (nn_mean, nn_cv) = mean_and_cv(&nn);

    let cx = inst.points.iter().map(|p| p.x).sum::<f64>() / nf;
    let cy = inst.points.iter().map(|p| p.y).sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in &inst.points {
        let (dx, dy) = (p.x - cx, p.y - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let (sxx, syy, sxy) = (sxx / nf, syy / nf, sxy / nf);
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let lambda_max = half_trace + disc;
    let lambda_min = (half_trace - disc).max(0.0);
    let anisotropy = if lambda_max > 0.0 {
        1.0 - lambda_min / lambda_max
    } else {
        0.0
    };

    let radial: Vec<f64> = inst
        .points
        .iter()
        .map(|p| (p.x - cx).hypot(p.y - cy))
        .collect();
    let (_, radial_cv) = mean_and_cv(&radial);

    let mst = mst_total_weight(dm)?;

    Ok(StaticFeatures {
        size_norm: cap(nf.log10() / 3.0),
        nn_mean: cap(nn_mean * sqrt_n),
        nn_dispersion: cap(nn_cv),
        anisotropy: cap(anisotropy).min(1.0),
        radial_dispersion: cap(radial_cv),
        mst_per_node: cap(mst / nf * sqrt_n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, Family, Point};
    use proptest::prelude::*;

    /// Independent Kruskal with union-find over the explicit edge list.
    fn kruskal(points: &[Point]) -> f64 {
        let n = points.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let d = ((points[i].x - points[j].x).powi(2) + (points[i].y - points[j].y).powi(2)).sqrt();
                edges.push((d, i, j));
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut total = 0.0;
        let mut used = 0;
        for (d, i, j) in edges {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
                total += d;
                used += 1;
                if used == n - 1 {
                    break;
                }
            }
        }
        total
    }

    fn inst_of(points: Vec<Point>) -> Instance {
        Instance::from_points("t", Family::Uniform, 0, points).unwrap()
    }

    #[test]
    fn mst_small_cases() {
        let chain = [Point::new(0.0, 0.0), Point::new(0.5, 0.0), Point::new(1.0, 0.0)];
        assert!((mst_total_weight(&DistanceMatrix::from_points(&chain)).unwrap() - 1.0).abs() < 1e-12);
        let square = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert!((mst_total_weight(&DistanceMatrix::from_points(&square)).unwrap() - 3.0).abs() < 1e-12);
        assert!(mst_total_weight(&DistanceMatrix::from_points(&chain[..1])).is_err());
    }

    #[test]
    fn prim_matches_kruskal_on_random_instances() {
        for seed in 0..100u64 {
            let n = 2 + (seed as usize % 31);
            let family = Family::ALL[seed as usize % 5];
            let inst = generate(family, n, seed).unwrap();
            let prim = mst_total_weight(&DistanceMatrix::new(&inst)).unwrap();
            let oracle = kruskal(&inst.points);
            assert!((prim - oracle).abs() < 1e-9, "seed {seed}: {prim} vs {oracle}");
        }
    }

    proptest! {
        #[test]
        fn mst_invariant_under_permutation_and_translation(
            seed in 0u64..1000,
            n in 3usize..24,
            shift in (-0.3f64..0.3, -0.3f64..0.3),
            rot in 0usize..24,
        ) {
            let inst = generate(Family::Uniform, n, seed).unwrap();
            let base = mst_total_weight(&DistanceMatrix::new(&inst)).unwrap();
            let mut moved: Vec<Point> = inst.points.iter()
                .map(|p| Point::new(p.x + shift.0, p.y + shift.1)).collect();
            moved.rotate_left(rot % n);
            moved.reverse();
            let other = mst_total_weight(&DistanceMatrix::from_points(&moved)).unwrap();
            prop_assert!((base - other).abs() < 1e-9);
        }
    }

    #[test]
    fn size_norm_grows_with_n() {
        let f = |n| {
            let inst = generate(Family::Uniform, n, 1).unwrap();
            static_features(&inst, &DistanceMatrix::new(&inst)).unwrap().size_norm
        };
        assert!(f(50) < f(200));
        assert!((f(1000) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anisotropy_extremes() {
        let line: Vec<Point> = (0..10).map(|i| Point::new(i as f64 / 9.0, 0.5)).collect();
        let inst = inst_of(line);
        let f = static_features(&inst, &DistanceMatrix::new(&inst)).unwrap();
        assert!(f.anisotropy >= 0.99);

        let square = vec![
            Point::new(0.25, 0.25),
            Point::new(0.75, 0.25),
            Point::new(0.75, 0.75),
            Point::new(0.25, 0.75),
        ];
        let inst = inst_of(square);
        let f = static_features(&inst, &DistanceMatrix::new(&inst)).unwrap();
        assert!(f.anisotropy.abs() < 1e-12);
        assert!(f.radial_dispersion.abs() < 1e-12);
        assert!(f.nn_dispersion.abs() < 1e-12);
    }

    #[test]
    fn degenerate_points_give_zero_spread() {
        let inst = inst_of(vec![Point::new(0.3, 0.3); 5]);
        let f = static_features(&inst, &DistanceMatrix::new(&inst)).unwrap();
        assert_eq!(f.nn_mean, 0.0);
        assert_eq!(f.anisotropy, 0.0);
        assert_eq!(f.nn_dispersion, 0.0);
        assert_eq!(f.radial_dispersion, 0.0);
        assert_eq!(f.mst_per_node, 0.0);
    }

    /// Poisson expectation for the mean NN distance is 0.5 / sqrt(n), so the
    /// normalized value should sit near 0.5 for uniform instances.
    #[test]
    fn uniform_nn_mean_near_poisson_value() {
        for seed in 0..20 {
            let inst = generate(Family::Uniform, 200, seed).unwrap();
            let f = static_features(&inst, &DistanceMatrix::new(&inst)).unwrap();
            assert!((0.35..=0.65).contains(&f.nn_mean), "seed {seed}: {}", f.nn_mean);
        }
    }

    #[test]
    fn features_bounded_for_all_families() {
        for family in Family::ALL {
            for n in [3, 5, 50, 100, 200] {
                for seed in 0..5 {
                    let inst = generate(family, n, seed).unwrap();
                    let dm = DistanceMatrix::new(&inst);
                    let f = static_features(&inst, &dm).unwrap();
                    for v in f.to_array() {
                        assert!(v.is_finite() && (0.0..=FEATURE_CAP).contains(&v));
                    }
                    assert!((0.0..=1.0).contains(&f.anisotropy));
                    assert_eq!(f, static_features(&inst, &dm).unwrap());
                }
            }
        }
    }

    #[test]
    fn needs_three_sites() {
        let inst = inst_of(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]);
        assert!(static_features(&inst, &DistanceMatrix::new(&inst)).is_err());
    }
}
