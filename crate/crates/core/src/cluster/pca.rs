use serde::Serialize;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Principal axes of a point set, ordered by decreasing variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// One unit-length loading vector per component.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl Pca {
    pub fn transform(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        points
            .iter()
            .map(|p| {
                self.components
                    .iter()
                    .map(|c| p.iter().zip(&self.mean).zip(c).map(|((x, m), w)| (x - m) * w).sum())
                    .collect()
            })
            .collect()
    }

    /// Maps projected coordinates back to the original space.
    pub fn inverse_transform(&self, projected: &[Vec<f64>]) -> Vec<Vec<f64>> {
        projected
            .iter()
            .map(|z| {
                let mut x = self.mean.clone();
                for (zi, c) in z.iter().zip(&self.components) {
                    for (xj, cj) in x.iter_mut().zip(c) {
                        *xj += zi * cj;
                    }
                }
                x
            })
            .collect()
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and eigenvectors (as rows), unsorted.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    let vectors = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    (values, vectors)
}

/// Fits PCA and returns it with the projected points.
pub fn pca_project(points: &[Vec<f64>], components: usize) -> Result<(Pca, Vec<Vec<f64>>)> {
    let n = points.len();
    let d = points.first().map_or(0, Vec::len);
    if n < 2 || d == 0 {
        return Err(Error::invalid("PCA needs at least two points of nonzero dimension"));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("points differ in dimension"));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("points contain non-finite values"));
    }
    let bound = (n - 1).min(d);
    if components == 0 || components > bound {
        return Err(Error::RankBound {
            requested: components,
            bound,
        });
    }
    let mut mean = vec![0.0; d];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![vec![0.0; d]; d];
    for p in points {
        let c: Vec<f64> = p.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[i][j] += c[i] * c[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    let (values, vectors) = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();
    let mut comps = Vec::with_capacity(components);
    let mut variance = Vec::with_capacity(components);
    for &i in order.iter().take(components) {
        let mut w = vectors[i].clone();
        let lead = w
            .iter()
            .enumerate()
            .fold(0, |best, (j, x)| if x.abs() > w[best].abs() { j } else { best });
        if w[lead] < 0.0 {
            w.iter_mut().for_each(|x| *x = -*x);
        }
        comps.push(w);
        variance.push(values[i].max(0.0));
    }
    let ratio = variance
        .iter()
        .map(|v| if total > 0.0 { v / total } else { 0.0 })
        .collect();
    let pca = Pca {
        mean,
        components: comps,
        explained_variance: variance,
        explained_variance_ratio: ratio,
    };
    let projected = pca.transform(points);
    Ok((pca, projected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn line_is_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dir: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pts: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                let t: f64 = rng.random_range(-5.0..5.0);
                dir.iter().map(|x| 2.0 + t * x).collect()
            })
            .collect();
        let (pca, _) = pca_project(&pts, 3).unwrap();
        assert!((pca.explained_variance_ratio[0] - 1.0).abs() < 1e-8);
        assert!(pca.explained_variance_ratio[1].abs() < 1e-8);
        assert!(pca.explained_variance_ratio[2].abs() < 1e-8);
    }

    #[test]
    fn rank_three_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let basis = rng_points(&mut rng, 3, 12);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let w: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
                (0..12).map(|j| (0..3).map(|k| w[k] * basis[k][j]).sum()).collect()
            })
            .collect();
        let (pca, proj) = pca_project(&pts, 3).unwrap();
        let back = pca.inverse_transform(&proj);
        let err = pts
            .iter()
            .zip(&back)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "reconstruction error {err}");
        let sum: f64 = pca.explained_variance_ratio.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
    }

    /// A 4 x 2 rectangle rotated by 30 degrees. Its covariance has
    /// eigenvalues 16/3 and 4/3 along the rotated axes, so the projected
    /// coordinates are the unrotated corners (+-2, +-1) up to sign.
    #[test]
    fn rotated_rectangle_matches_closed_form() {
        let (c, s) = (30f64.to_radians().cos(), 30f64.to_radians().sin());
        let corners = [(2.0, 1.0), (-2.0, 1.0), (-2.0, -1.0), (2.0, -1.0)];
        let pts: Vec<Vec<f64>> = corners
            .iter()
            .map(|&(x, y)| vec![5.0 + c * x - s * y, -1.0 + s * x + c * y])
            .collect();
        let (pca, proj) = pca_project(&pts, 1).unwrap();
        assert!((pca.explained_variance[0] - 16.0 / 3.0).abs() < 1e-9);
        assert!((pca.explained_variance_ratio[0] - 0.8).abs() < 1e-9);
        // loading (cos 30, sin 30) has its largest entry positive already
        assert!((pca.components[0][0] - c).abs() < 1e-9 && (pca.components[0][1] - s).abs() < 1e-9);
        for (p, &(x, _)) in proj.iter().zip(&corners) {
            assert!((p[0] - x).abs() < 1e-6);
        }
    }

    #[test]
    fn rank_bound_enforced() {
        let pts = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 0.0], vec![2.0, 2.0, 1.0]];
        assert!(matches!(pca_project(&pts, 3), Err(Error::RankBound { bound: 2, .. })));
        assert!(pca_project(&pts, 2).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn ratios_sorted_and_reprojection_stable(seed in any::<u64>(), n in 5usize..30, d in 3usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = rng_points(&mut rng, n, d);
            let (pca, proj) = pca_project(&pts, 3).unwrap();
            let r = &pca.explained_variance_ratio;
            prop_assert!(r.windows(2).all(|w| w[0] >= w[1] - 1e-12));
            prop_assert!(r.iter().all(|x| (0.0..=1.0 + 1e-12).contains(x)));
            prop_assert!(r.iter().sum::<f64>() <= 1.0 + 1e-9);
            let (_, again) = pca_project(&proj, 3).unwrap();
            for axis in 0..3 {
                let same = proj.iter().zip(&again).all(|(a, b)| (a[axis] - b[axis]).abs() < 1e-7);
                let flipped = proj.iter().zip(&again).all(|(a, b)| (a[axis] + b[axis]).abs() < 1e-7);
                prop_assert!(same || flipped, "axis {} changed", axis);
            }
        }
    }
}
