use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workers::run_with_workers;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansOptions {
    pub seed: u64,
    pub max_iters: usize,
    pub restarts: usize,
    pub workers: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iters: 300,
            restarts: 10,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KMeansResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each assignment step of the returned restart.
    pub inertia_trace: Vec<f64>,
    /// Index of the restart that produced this result.
    pub restart: usize,
}

impl KMeansResult {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let d = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("points differ in dimension"));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("points contain non-finite values"));
    }
    Ok(d)
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 && r < w {
                    pick = i;
                    break;
                }
                r -= w;
            }
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&w| w > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let c = points[next].clone();
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest centroid, lowest index on ties, and the squared distance.
fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn lloyd(
    points: &[Vec<f64>],
    mut centroids: Vec<Vec<f64>>,
    max_iters: usize,
) -> (Vec<usize>, Vec<Vec<f64>>, f64, Vec<f64>) {
    let k = centroids.len();
    let d = points[0].len();
    let mut assignments: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut inertia;
    loop {
        let step: Vec<(usize, f64)> = points.par_iter().map(|p| nearest(p, &centroids)).collect();
        inertia = step.iter().map(|s| s.1).sum();
        trace.push(inertia);
        let next: Vec<usize> = step.into_iter().map(|s| s.0).collect();
        if next == assignments || trace.len() > max_iters {
            assignments = next;
            break;
        }
        assignments = next;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            }
        }
    }
    (assignments, centroids, inertia, trace)
}

/// k-means++ seeding followed by Lloyd iterations; the restart with the
/// lowest inertia wins (earliest on ties). Restart `r` draws from stream
/// `r` of the seeded generator, so adding restarts never loses the
/// earlier ones.
pub fn kmeans(points: &[Vec<f64>], k: usize, options: &KMeansOptions) -> Result<KMeansResult> {
    check_points(points)?;
    if k < 2 || k > points.len() {
        return Err(Error::invalid(format!(
            "k = {k} must lie in [2, {}]",
            points.len()
        )));
    }
    if options.restarts == 0 || options.max_iters == 0 {
        return Err(Error::invalid("restarts and max_iters must be positive"));
    }
    run_with_workers(options.workers, || {
        let mut best: Option<KMeansResult> = None;
        for r in 0..options.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(r as u64);
            let init = plus_plus(points, k, &mut rng);
            let (assignments, centroids, inertia, trace) = lloyd(points, init, options.max_iters);
            if best.as_ref().is_none_or(|b| inertia < b.inertia) {
                best = Some(KMeansResult {
                    k,
                    assignments,
                    centroids,
                    inertia,
                    iterations: trace.len(),
                    inertia_trace: trace,
                    restart: r,
                });
            }
        }
        Ok(best.expect("at least one restart"))
    })
}
