//! Class-collapse diagnostics on labeled embedding matrices.
//!
//! Nothing here is fit or trained. The functions measure how far a set of
//! embeddings is from within-class collapse and from a simplex equiangular
//! tight frame, and whether collapsed classes still carry varying targets.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::{Error, Result};

/// Means with a norm below this are rejected by [`etf_residuals`].
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Default collapse tolerance, relative to the global embedding scale.
pub const DEFAULT_COLLAPSE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingRow {
    pub id: String,
    pub label: String,
    pub target: Option<Vec<f64>>,
    pub z: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledEmbeddings {
    q: usize,
    rows: Vec<EmbeddingRow>,
}

impl LabeledEmbeddings {
    pub fn new(q: usize, rows: Vec<EmbeddingRow>) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInputs("embedding dimension must be positive".into()));
        }
        let mut target_dim = None;
        for row in &rows {
            if row.z.len() != q {
                return Err(Error::DimensionMismatch { expected: q, found: row.z.len() });
            }
            if row.z.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInputs(format!("row {}: non-finite coordinate", row.id)));
            }
            if let Some(t) = &row.target {
                match target_dim {
                    None => target_dim = Some(t.len()),
                    Some(d) if d != t.len() => {
                        return Err(Error::DimensionMismatch { expected: d, found: t.len() })
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { q, rows })
    }

    /// Unlabeled-id convenience: ids are the row positions.
    pub fn from_parts(labels: &[&str], z: Vec<Vec<f64>>, targets: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if labels.len() != z.len() {
            return Err(Error::DimensionMismatch { expected: z.len(), found: labels.len() });
        }
        let q = z.first().map_or(0, Vec::len);
        let mut targets = targets.map(|t| t.into_iter());
        let rows = labels
            .iter()
            .zip(z)
            .enumerate()
            .map(|(i, (l, z))| EmbeddingRow {
                id: i.to_string(),
                label: l.to_string(),
                target: targets.as_mut().and_then(|t| t.next()),
                z,
            })
            .collect();
        Self::new(q, rows)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn rows(&self) -> &[EmbeddingRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_targets(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.target.is_some())
    }

    /// Row indices per class, labels in sorted order.
    pub fn classes(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, row) in self.rows.iter().enumerate() {
            out.entry(row.label.as_str()).or_default().push(i);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassStatistics {
    pub labels: Vec<String>,
    pub sizes: Vec<usize>,
    pub means: Vec<Vec<f64>>,
    /// Mean squared distance to the class mean.
    pub within_variance: Vec<f64>,
    pub global_mean: Vec<f64>,
    /// Mean squared distance to the global mean.
    pub total_variance: f64,
}

impl ClassStatistics {
    /// Pooled within-class sum of squares over the total sum of squares.
    /// Zero when the data has no spread at all.
    pub fn collapse_index(&self) -> f64 {
        let n: usize = self.sizes.iter().sum();
        let total = self.total_variance * n as f64;
        if total <= 0.0 {
            return 0.0;
        }
        let within: f64 = self.within_variance.iter().zip(&self.sizes).map(|(v, &s)| v * s as f64).sum();
        (within / total).clamp(0.0, 1.0)
    }

    /// Class means with the global mean subtracted.
    pub fn centered_means(&self) -> Vec<Vec<f64>> {
        self.means
            .iter()
            .map(|m| m.iter().zip(&self.global_mean).map(|(a, g)| a - g).collect())
            .collect()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn mean_of<'a>(q: usize, rows: impl ExactSizeIterator<Item = &'a [f64]>) -> Vec<f64> {
    let n = rows.len() as f64;
    let mut m = vec![0.0; q];
    for z in rows {
        for (a, b) in m.iter_mut().zip(z) {
            *a += b;
        }
    }
    m.iter_mut().for_each(|a| *a /= n);
    m
}

pub fn class_statistics(data: &LabeledEmbeddings) -> Result<ClassStatistics> {
    if data.is_empty() {
        return Err(Error::EmptyClass("<all>".into()));
    }
    let q = data.q;
    let rows = &data.rows;
    let global_mean = mean_of(q, rows.iter().map(|r| r.z.as_slice()));
    let total_variance = rows.iter().map(|r| sq_dist(&r.z, &global_mean)).sum::<f64>() / rows.len() as f64;

    let mut stats = ClassStatistics {
        labels: Vec::new(),
        sizes: Vec::new(),
        means: Vec::new(),
        within_variance: Vec::new(),
        global_mean,
        total_variance,
    };
    for (label, idx) in data.classes() {
        let mean = mean_of(q, idx.iter().map(|&i| rows[i].z.as_slice()));
        let var = idx.iter().map(|&i| sq_dist(&rows[i].z, &mean)).sum::<f64>() / idx.len() as f64;
        stats.labels.push(label.to_string());
        stats.sizes.push(idx.len());
        stats.means.push(mean);
        stats.within_variance.push(var);
    }
    Ok(stats)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtfResiduals {
    /// ‖Σ μ_c‖ divided by the mean of ‖μ_c‖.
    pub mean_sum_norm: f64,
    /// (max − min) of ‖μ_c‖ divided by their mean.
    pub norm_spread: f64,
    /// Largest |cos(μ_c, μ_c') + 1/(M−1)| over pairs.
    pub gram_deviation: f64,
}

impl EtfResiduals {
    pub fn max(&self) -> f64 {
        self.mean_sum_norm.max(self.norm_spread).max(self.gram_deviation)
    }
}

/// Residuals of the simplex-ETF conditions. Expects centered means.
pub fn etf_residuals(means: &[Vec<f64>]) -> Result<EtfResiduals> {
    let m = means.len();
    if m < 2 {
        return Err(Error::InvalidInputs("ETF residuals need at least two classes".into()));
    }
    let q = means[0].len();
    if let Some(bad) = means.iter().find(|v| v.len() != q) {
        return Err(Error::DimensionMismatch { expected: q, found: bad.len() });
    }
    let norms: Vec<f64> = means.iter().map(|v| norm(v)).collect();
    if let Some((class, &n)) = norms.iter().enumerate().find(|(_, &n)| !(n >= DEGENERATE_NORM)) {
        return Err(Error::DegenerateMeans { class, norm: n });
    }
    let mean_norm = norms.iter().sum::<f64>() / m as f64;

    let mut sum = vec![0.0; q];
    for v in means {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let max = norms.iter().cloned().fold(f64::MIN, f64::max);
    let min = norms.iter().cloned().fold(f64::MAX, f64::min);

    let target = -1.0 / (m as f64 - 1.0);
    let mut gram_deviation: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let dot: f64 = means[i].iter().zip(&means[j]).map(|(a, b)| a * b).sum();
            let cos = dot / (norms[i] * norms[j]);
            gram_deviation = gram_deviation.max((cos - target).abs());
        }
    }
    Ok(EtfResiduals {
        mean_sum_norm: norm(&sum) / mean_norm,
        norm_spread: (max - min) / mean_norm,
        gram_deviation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassDegeneracy {
    pub label: String,
    /// Largest pairwise embedding distance in the class.
    pub embedding_spread: f64,
    /// Largest pairwise target distance in the class.
    pub target_spread: f64,
    pub unrepresentable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegeneracyCheck {
    pub collapse_tol: f64,
    /// Embedding and target scales the tolerance is multiplied by.
    pub embedding_scale: f64,
    pub target_scale: f64,
    pub classes: Vec<ClassDegeneracy>,
    pub degeneracy_flag: bool,
}

fn max_pairwise(points: &[&[f64]]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(sq_dist(a, b));
        }
    }
    best.sqrt()
}

/// RMS distance to the mean; 1 when there is no spread.
fn scale_of(q: usize, points: &[&[f64]]) -> f64 {
    let mean = mean_of(q, points.iter().copied());
    let s = (points.iter().map(|p| sq_dist(p, &mean)).sum::<f64>() / points.len() as f64).sqrt();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Flags a class when its embeddings are collapsed (spread ≤ tol·scale)
/// while its targets are not. No decoder is fit: a collapsed class maps to a
/// single output under any deterministic decoder.
pub fn regression_degeneracy_check(data: &LabeledEmbeddings, collapse_tol: f64) -> Result<DegeneracyCheck> {
    if !data.has_targets() {
        return Err(Error::MissingTargets);
    }
    if !(collapse_tol >= 0.0) {
        return Err(Error::InvalidInputs("collapse tolerance must be non-negative".into()));
    }
    let rows = &data.rows;
    let zs: Vec<&[f64]> = rows.iter().map(|r| r.z.as_slice()).collect();
    let ts: Vec<&[f64]> = rows.iter().map(|r| r.target.as_deref().unwrap_or(&[])).collect();
    let embedding_scale = scale_of(data.q, &zs);
    let target_scale = scale_of(ts[0].len(), &ts);

    let classes: Vec<ClassDegeneracy> = data
        .classes()
        .into_iter()
        .map(|(label, idx)| {
            let z: Vec<&[f64]> = idx.iter().map(|&i| zs[i]).collect();
            let t: Vec<&[f64]> = idx.iter().map(|&i| ts[i]).collect();
            let embedding_spread = max_pairwise(&z);
            let target_spread = max_pairwise(&t);
            ClassDegeneracy {
                label: label.to_string(),
                embedding_spread,
                target_spread,
                unrepresentable: embedding_spread <= collapse_tol * embedding_scale
                    && target_spread > collapse_tol * target_scale,
            }
        })
        .collect();
    Ok(DegeneracyCheck {
        collapse_tol,
        embedding_scale,
        target_scale,
        degeneracy_flag: classes.iter().any(|c| c.unrepresentable),
        classes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseReport {
    pub statistics: ClassStatistics,
    pub collapse_index: f64,
    pub etf_residuals: Option<EtfResiduals>,
    pub degeneracy: Option<DegeneracyCheck>,
    pub degeneracy_flag: bool,
    pub warnings: Vec<String>,
}

/// Everything at once. Missing pieces (one class, degenerate means, no
/// targets) become warnings instead of errors.
pub fn collapse_report(data: &LabeledEmbeddings, collapse_tol: f64) -> Result<CollapseReport> {
    let statistics = class_statistics(data)?;
    let mut warnings = Vec::new();
    let etf = match etf_residuals(&statistics.centered_means()) {
        Ok(r) => Some(r),
        Err(e @ (Error::InvalidInputs(_) | Error::DegenerateMeans { .. })) => {
            warnings.push(format!("etf residuals skipped: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let degeneracy = if data.has_targets() {
        Some(regression_degeneracy_check(data, collapse_tol)?)
    } else {
        warnings.push("no regression targets; degeneracy check skipped".into());
        None
    };
    Ok(CollapseReport {
        collapse_index: statistics.collapse_index(),
        degeneracy_flag: degeneracy.as_ref().is_some_and(|d| d.degeneracy_flag),
        statistics,
        etf_residuals: etf,
        degeneracy,
        warnings,
    })
}
