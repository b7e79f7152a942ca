//! Lexicon validation: PCA projection, k-means, silhouette sweeps and
//! cluster composition.

mod kmeans;
mod pca;
mod silhouette;

pub use kmeans::{kmeans, KMeansOptions, KMeansResult};
pub use pca::{jacobi_eigen, pca_project, Pca};
pub use silhouette::{silhouette, silhouette_sweep, SweepRow};

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::lexicon::{vocab_key, Lexicon};

/// Labeled points, one row per term.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub labels: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub categories: Option<Vec<String>>,
}

impl PointSet {
    pub fn new(labels: Vec<String>, points: Vec<Vec<f64>>, categories: Option<Vec<String>>) -> Result<Self> {
        if labels.len() != points.len() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: points.len(),
            });
        }
        if let Some(c) = &categories {
            if c.len() != labels.len() {
                return Err(Error::LengthMismatch {
                    left: labels.len(),
                    right: c.len(),
                });
            }
        }
        if points.len() < 2 {
            return Err(Error::invalid("a point set needs at least two points"));
        }
        kmeans::check_points(&points)?;
        Ok(Self {
            labels,
            points,
            categories,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Vectors of the lexicon terms found in the vocabulary, with their
/// categories. Returns the point set and the terms that were not found
/// (or whose vector is zero).
pub fn lexicon_points(
    lexicon: &Lexicon,
    vocab: &Vocabulary,
    matrix: &EmbeddingMatrix,
) -> Result<(PointSet, Vec<String>)> {
    let mut labels = Vec::new();
    let mut points = Vec::new();
    let mut cats = Vec::new();
    let mut missing = Vec::new();
    for e in lexicon.entries() {
        match vocab.id(&vocab_key(&e.term)) {
            Some(id) if matrix.row_norm(id) > 0.0 => {
                labels.push(e.term.clone());
                points.push(matrix.row(id).iter().map(|&x| x as f64).collect());
                cats.push(e.category.clone());
            }
            _ => missing.push(e.term.clone()),
        }
    }
    Ok((PointSet::new(labels, points, Some(cats))?, missing))
}

/// Space the clustering runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClusterSpace {
    /// Raw embedding vectors.
    #[default]
    Raw,
    /// Vectors scaled to unit length.
    Normalized,
    /// The 3-component PCA projection.
    Projected,
}

pub fn prepare_points(points: &[Vec<f64>], space: ClusterSpace) -> Result<Vec<Vec<f64>>> {
    Ok(match space {
        ClusterSpace::Raw => points.to_vec(),
        ClusterSpace::Normalized => points
            .iter()
            .map(|p| {
                let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n == 0.0 {
                    p.clone()
                } else {
                    p.iter().map(|x| x / n).collect()
                }
            })
            .collect(),
        ClusterSpace::Projected => pca_project(points, 3)?.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub k: usize,
    pub assignments: BTreeMap<String, usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub silhouette: f64,
    pub sizes: Vec<usize>,
    pub composition: Composition,
}

/// Runs k-means on a point set and summarizes the result.
pub fn cluster_report(set: &PointSet, k: usize, options: &KMeansOptions) -> Result<ClusterReport> {
    let r = kmeans(set.points.as_slice(), k, options)?;
    let s = silhouette(&set.points, &r.assignments)?;
    let cats = set
        .categories
        .clone()
        .unwrap_or_else(|| vec![String::new(); set.len()]);
    let composition = composition_report(&r.assignments, k, &cats)?;
    Ok(ClusterReport {
        k,
        assignments: set.labels.iter().cloned().zip(r.assignments.iter().copied()).collect(),
        sizes: r.sizes(),
        centroids: r.centroids,
        inertia: r.inertia,
        silhouette: s,
        composition,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterComposition {
    pub cluster: usize,
    pub size: usize,
    pub share: f64,
    /// Most frequent category, alphabetically first on ties; empty for an
    /// empty cluster.
    pub top_category: String,
    pub top_category_share: f64,
    pub breakdown: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Composition {
    pub clusters: Vec<ClusterComposition>,
    pub max_cluster_share: f64,
}

pub fn composition_report(assignments: &[usize], k: usize, categories: &[String]) -> Result<Composition> {
    if assignments.len() != categories.len() {
        return Err(Error::LengthMismatch {
            left: assignments.len(),
            right: categories.len(),
        });
    }
    if let Some(&bad) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::invalid(format!("cluster id {bad} out of range for k = {k}")));
    }
    let n = assignments.len().max(1) as f64;
    let mut breakdowns = vec![BTreeMap::<String, usize>::new(); k];
    for (&a, c) in assignments.iter().zip(categories) {
        *breakdowns[a].entry(c.clone()).or_default() += 1;
    }
    let clusters: Vec<ClusterComposition> = breakdowns
        .into_iter()
        .enumerate()
        .map(|(cluster, breakdown)| {
            let size: usize = breakdown.values().sum();
            let (top, top_n) = breakdown
                .iter()
                .fold((String::new(), 0), |acc, (c, &m)| if m > acc.1 { (c.clone(), m) } else { acc });
            ClusterComposition {
                cluster,
                size,
                share: size as f64 / n,
                top_category: top,
                top_category_share: if size > 0 { top_n as f64 / size as f64 } else { 0.0 },
                breakdown,
            }
        })
        .collect();
    let max_cluster_share = clusters.iter().map(|c| c.share).fold(0.0, f64::max);
    Ok(Composition {
        clusters,
        max_cluster_share,
    })
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "k,silhouette,inertia")?;
    for r in rows {
        writeln!(out, "{},{:.6},{:.6}", r.k, r.silhouette, r.inertia)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_composition<W: Write>(c: &Composition, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["cluster", "size", "share", "top_category", "top_category_share"])?;
    for r in &c.clusters {
        w.write_record([
            r.cluster.to_string(),
            r.size.to_string(),
            format!("{:.4}", r.share),
            r.top_category.clone(),
            format!("{:.4}", r.top_category_share),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `term,x,y,z,category` rows from the first three projected columns.
pub fn export_3d<W: Write>(
    labels: &[String],
    projected: &[Vec<f64>],
    categories: &[String],
    out: W,
) -> Result<()> {
    if labels.len() != projected.len() || labels.len() != categories.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: projected.len().min(categories.len()),
        });
    }
    if projected.iter().any(|p| p.len() < 3) {
        return Err(Error::invalid("3-D export needs at least three components"));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["term", "x", "y", "z", "category"])?;
    for ((t, p), c) in labels.iter().zip(projected).zip(categories) {
        w.write_record([t.clone(), p[0].to_string(), p[1].to_string(), p[2].to_string(), c.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a 3-D export back as (term, [x, y, z], category) rows.
pub fn read_3d<R: Read>(input: R) -> Result<Vec<(String, [f64; 3], String)>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| {
            rec.get(k).unwrap_or("").parse::<f64>().map_err(|_| Error::Parse {
                line: i + 2,
                message: "bad coordinate".into(),
            })
        };
        out.push((
            rec.get(0).unwrap_or("").to_owned(),
            [num(1)?, num(2)?, num(3)?],
            rec.get(4).unwrap_or("").to_owned(),
        ));
    }
    Ok(out)
}
