//! Feature preprocessing: per-feature standardization, PCA projection, and
//! per-component min/max rescaling into [0, 2π].
//!
//! The transform is fit on the training split only and then applied
//! verbatim to validation/test vectors (test components clamp into the
//! training range). The eigendecomposition runs on whichever of the d×d
//! covariance or the m×m Gram matrix is smaller, so wide data (few samples,
//! many pixels) stays cheap.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Variance below which a feature counts as constant and passes through
/// unscaled.
const VAR_EPS: f64 = 1e-12;

/// Eigenvalue floor for a usable principal direction.
const EIG_EPS: f64 = 1e-10;

/// Fitted preprocessing transform.
#[derive(Clone, Debug)]
pub struct PcaTransform {
    mean: Vec<f64>,
    scale: Vec<f64>,
    /// k × d, rows orthonormal.
    components: Vec<Vec<f64>>,
    /// All covariance eigenvalues, descending.
    eigenvalues: Vec<f64>,
    /// Per-component training min/max for the [0, 2π] rescale.
    out_min: Vec<f64>,
    out_max: Vec<f64>,
}

impl PcaTransform {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Fraction of total variance captured by component `i`.
    pub fn explained_variance_ratio(&self, i: usize) -> f64 {
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 {
            0.0
        } else {
            self.eigenvalues[i] / total
        }
    }

    /// Largest deviation of the component rows from orthonormality.
    pub fn orthonormality_deviation(&self) -> f64 {
        let k = self.components.len();
        let mut dev = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let dot: f64 = self.components[i]
                    .iter()
                    .zip(&self.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((dot - want).abs());
            }
        }
        dev
    }

    /// Standardizes and projects one vector (no rescale).
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "vector has {} features, transform expects {}",
                v.len(),
                self.input_dim()
            )));
        }
        let standardized: Vec<f64> = v
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect();
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(&standardized).map(|(a, b)| a * b).sum())
            .collect())
    }
}

fn standardize_stats(train: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let m = train.len() as f64;
    let d = train[0].len();
    let mut mean = vec![0.0; d];
    for row in train {
        for (acc, x) in mean.iter_mut().zip(row) {
            *acc += x;
        }
    }
    for acc in &mut mean {
        *acc /= m;
    }
    let mut var = vec![0.0; d];
    for row in train {
        for ((acc, x), mu) in var.iter_mut().zip(row).zip(&mean) {
            *acc += (x - mu) * (x - mu);
        }
    }
    let scale = var
        .into_iter()
        .map(|v| {
            let v = v / m;
            if v < VAR_EPS {
                1.0
            } else {
                v.sqrt()
            }
        })
        .collect();
    (mean, scale)
}

/// Indices of eigenvalues in descending order, ties broken by index so the
/// fit is deterministic.
fn descending_order(eigenvalues: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Fits standardization + top-k PCA + [0, 2π] rescale on training vectors.
pub fn fit_preprocess(train: &[Vec<f64>], k: usize) -> Result<PcaTransform> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("no training vectors".into()));
    }
    let d = train[0].len();
    if d == 0 || train.iter().any(|row| row.len() != d) {
        return Err(Error::Shape(
            "training vectors must share one nonzero dimension".into(),
        ));
    }
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!(
            "component count {k} outside 1..={d}"
        )));
    }
    if train.len() < k + 1 {
        return Err(Error::InvalidArgument(format!(
            "need at least {} training vectors for k = {k}, got {}",
            k + 1,
            train.len()
        )));
    }

    let (mean, scale) = standardize_stats(train);
    let m = train.len();
    let standardized: Vec<Vec<f64>> = train
        .iter()
        .map(|row| {
            row.iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((x, mu), s)| (x - mu) / s)
                .collect()
        })
        .collect();

    // Covariance eigenvectors, via the Gram matrix when samples are fewer
    // than features: B·Bᵀ shares nonzero eigenvalues with Bᵀ·B, and each
    // Gram eigenvector u maps to the covariance eigenvector Bᵀu (normalized).
    let (eigenvalues, components) = if m <= d {
        let b = DMatrix::from_fn(m, m, |i, j| {
            standardized[i]
                .iter()
                .zip(&standardized[j])
                .map(|(a, c)| a * c)
                .sum::<f64>()
                / m as f64
        });
        let eig = SymmetricEigen::new(b);
        let order = descending_order(eig.eigenvalues.as_slice());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let mut components = Vec::with_capacity(k);
        for &col in order.iter().take(k) {
            if eig.eigenvalues[col] <= EIG_EPS {
                return Err(Error::Degenerate(format!(
                    "training data spans fewer than {k} directions"
                )));
            }
            let u = eig.eigenvectors.column(col);
            let mut v = vec![0.0; d];
            for (i, row) in standardized.iter().enumerate() {
                for (vj, xj) in v.iter_mut().zip(row) {
                    *vj += u[i] * xj;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for vj in &mut v {
                *vj /= norm;
            }
            components.push(v);
        }
        (eigenvalues, components)
    } else {
        let cov = DMatrix::from_fn(d, d, |i, j| {
            standardized.iter().map(|row| row[i] * row[j]).sum::<f64>() / m as f64
        });
        let eig = SymmetricEigen::new(cov);
        let order = descending_order(eig.eigenvalues.as_slice());
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let mut components = Vec::with_capacity(k);
        for &col in order.iter().take(k) {
            if eig.eigenvalues[col] <= EIG_EPS {
                return Err(Error::Degenerate(format!(
                    "training data spans fewer than {k} directions"
                )));
            }
            components.push(eig.eigenvectors.column(col).iter().cloned().collect());
        }
        (eigenvalues, components)
    };

    let mut transform = PcaTransform {
        mean,
        scale,
        components,
        eigenvalues,
        out_min: vec![0.0; k],
        out_max: vec![0.0; k],
    };
    // Training min/max per component, fixing the [0, 2π] rescale.
    let mut mins = vec![f64::INFINITY; k];
    let mut maxs = vec![f64::NEG_INFINITY; k];
    for row in train {
        let p = transform.project(row)?;
        for ((lo, hi), v) in mins.iter_mut().zip(&mut maxs).zip(&p) {
            *lo = lo.min(*v);
            *hi = hi.max(*v);
        }
    }
    transform.out_min = mins;
    transform.out_max = maxs;
    Ok(transform)
}

/// Applies the fitted transform: standardize, project, rescale each
/// component into [0, 2π] by the training min/max (clamped).
pub fn apply_preprocess(transform: &PcaTransform, vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    vectors
        .iter()
        .map(|v| {
            let p = transform.project(v)?;
            Ok(p.into_iter()
                .zip(&transform.out_min)
                .zip(&transform.out_max)
                .map(|((x, &lo), &hi)| {
                    if hi - lo <= 0.0 {
                        0.0
                    } else {
                        ((x - lo) / (hi - lo)).clamp(0.0, 1.0) * 2.0 * PI
                    }
                })
                .collect())
        })
        .collect()
}
