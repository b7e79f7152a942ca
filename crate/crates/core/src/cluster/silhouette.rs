use rayon::prelude::*;
use serde::Serialize;

use super::kmeans::{check_points, kmeans, KMeansOptions};
use crate::error::{Error, Result};
use crate::workers::run_with_workers;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Silhouette of one point given per-cluster distance sums.
fn point_score(own: usize, sums: &[f64], sizes: &[usize]) -> f64 {
    if sizes[own] <= 1 {
        return 0.0;
    }
    let a = sums[own] / (sizes[own] - 1) as f64;
    let b = (0..sizes.len())
        .filter(|&c| c != own && sizes[c] > 0)
        .map(|c| sums[c] / sizes[c] as f64)
        .fold(f64::INFINITY, f64::min);
    let m = a.max(b);
    if m == 0.0 {
        0.0
    } else {
        (b - a) / m
    }
}

/// Mean silhouette with Euclidean distance. Cluster ids may be any
/// integers; points alone in their cluster score 0.
pub fn silhouette(points: &[Vec<f64>], assignments: &[usize]) -> Result<f64> {
    check_points(points)?;
    if points.len() != assignments.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: assignments.len(),
        });
    }
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::invalid("silhouette needs at least two clusters"));
    }
    let scores: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut sums = vec![0.0; k];
            for (j, q) in points.iter().enumerate() {
                if j != i {
                    sums[assignments[j]] += dist(&points[i], q);
                }
            }
            point_score(assignments[i], &sums, &sizes)
        })
        .collect();
    Ok(scores.iter().sum::<f64>() / points.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub silhouette: f64,
    pub inertia: f64,
}

/// k-means and silhouette for every k in `k_min..=k_max`.
pub fn silhouette_sweep(
    points: &[Vec<f64>],
    k_min: usize,
    k_max: usize,
    options: &KMeansOptions,
) -> Result<Vec<SweepRow>> {
    if k_min < 2 || k_min > k_max {
        return Err(Error::invalid(format!("bad k range {k_min}..={k_max}")));
    }
    if k_max > points.len() {
        return Err(Error::invalid(format!(
            "k_max = {k_max} exceeds the {} points",
            points.len()
        )));
    }
    (k_min..=k_max)
        .map(|k| {
            let r = kmeans(points, k, options)?;
            let s = run_with_workers(options.workers, || silhouette(points, &r.assignments))?;
            Ok(SweepRow {
                k,
                silhouette: s,
                inertia: r.inertia,
            })
        })
        .collect()
}
