//! Kernel SVM training on precomputed Gram matrices.
//!
//! The binary trainer runs sequential minimal optimization (SMO) on the
//! dual problem: maximize Σα_i − ½ΣΣ α_i α_j y_i y_j K_ij subject to
//! 0 ≤ α_i ≤ C and Σα_i y_i = 0. Pair updates solve the two-variable
//! subproblem in closed form, so the equality constraint holds exactly at
//! every step. Multiclass problems train one binary machine per class
//! (one-vs-rest) and predict by the largest decision value.

use crate::error::{Error, Result};
use crate::qkernel::KernelMatrix;

/// KKT violation tolerance at which SMO stops.
pub const KKT_TOLERANCE: f64 = 1e-4;

/// Minimum dual step worth applying; smaller proposals are treated as
/// converged for the pair.
const MIN_STEP: f64 = 1e-12;

/// Safety cap on full SMO passes.
const MAX_PASSES: usize = 10_000;

/// Trained binary kernel SVM in dual form.
#[derive(Clone, Debug)]
pub struct BinarySvm {
    alphas: Vec<f64>,
    labels: Vec<f64>,
    bias: f64,
}

impl BinarySvm {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Training labels as ±1.
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Indices of training points with nonzero dual weight.
    pub fn support_indices(&self) -> Vec<usize> {
        self.alphas
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 1e-9)
            .map(|(i, _)| i)
            .collect()
    }

    /// Decision value Σ α_i y_i k(x, x_i) + b for a row of kernel values
    /// against the training set.
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.alphas.len() {
            return Err(Error::Shape(format!(
                "kernel row has {} entries, model was trained on {}",
                kernel_row.len(),
                self.alphas.len()
            )));
        }
        let mut d = self.bias;
        for ((alpha, label), k) in self.alphas.iter().zip(&self.labels).zip(kernel_row) {
            d += alpha * label * k;
        }
        Ok(d)
    }
}

/// Dual objective Σα_i − ½ΣΣ α_i α_j y_i y_j K_ij.
pub fn dual_objective(kernel: &KernelMatrix, labels: &[f64], alphas: &[f64]) -> f64 {
    let m = labels.len();
    let mut obj: f64 = alphas.iter().sum();
    for i in 0..m {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..m {
            obj -= 0.5 * alphas[i] * alphas[j] * labels[i] * labels[j] * kernel.get(i, j);
        }
    }
    obj
}

/// Trains a binary SVM by SMO on a precomputed kernel. Labels must be ±1
/// with both classes present.
pub fn svm_train_binary(kernel: &KernelMatrix, labels: &[i32], c: f64) -> Result<BinarySvm> {
    let m = kernel.dim();
    if labels.len() != m {
        return Err(Error::Shape(format!(
            "{} labels for a {m}-point kernel",
            labels.len()
        )));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "box constraint must be positive and finite, got {c}"
        )));
    }
    if labels.iter().any(|&l| l != 1 && l != -1) {
        return Err(Error::InvalidArgument(
            "binary SVM labels must be +1 or -1".into(),
        ));
    }
    if labels.iter().all(|&l| l == 1) || labels.iter().all(|&l| l == -1) {
        return Err(Error::Degenerate(
            "binary SVM needs both classes present".into(),
        ));
    }

    let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let mut alphas = vec![0.0f64; m];
    let mut bias = 0.0f64;
    // Cached errors E_k = f(x_k) - y_k, updated incrementally.
    let mut errors: Vec<f64> = y.iter().map(|&yk| -yk).collect();

    for _ in 0..MAX_PASSES {
        let mut changed = 0usize;
        for i in 0..m {
            let r = errors[i] * y[i];
            let violates =
                (r < -KKT_TOLERANCE && alphas[i] < c) || (r > KKT_TOLERANCE && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            // Second-choice heuristic: the partner with the largest error
            // gap gives the biggest step. Ties resolve to the lowest index
            // so training is deterministic. If that pair is blocked (bounds
            // collapse or flat curvature), fall back to scanning the rest.
            let mut j_best = usize::MAX;
            let mut gap_best = -1.0f64;
            for j in 0..m {
                if j == i {
                    continue;
                }
                let gap = (errors[i] - errors[j]).abs();
                if gap > gap_best {
                    gap_best = gap;
                    j_best = j;
                }
            }
            let mut moved = smo_step(
                kernel,
                &y,
                c,
                i,
                j_best,
                &mut alphas,
                &mut bias,
                &mut errors,
            );
            if !moved {
                for j in (0..m).filter(|&j| j != i && j != j_best) {
                    if smo_step(kernel, &y, c, i, j, &mut alphas, &mut bias, &mut errors) {
                        moved = true;
                        break;
                    }
                }
            }
            if moved {
                changed += 1;
            }
        }
        if changed == 0 {
            break;
        }
    }

    Ok(BinarySvm {
        alphas,
        labels: y,
        bias,
    })
}

/// Joint update of the pair (i, j). Returns true when the duals moved.
#[allow(clippy::too_many_arguments)]
fn smo_step(
    kernel: &KernelMatrix,
    y: &[f64],
    c: f64,
    i: usize,
    j: usize,
    alphas: &mut [f64],
    bias: &mut f64,
    errors: &mut [f64],
) -> bool {
    let (yi, yj) = (y[i], y[j]);
    let (ai_old, aj_old) = (alphas[i], alphas[j]);
    // Box bounds for alpha_j that keep alpha_i in [0, C] under the
    // equality constraint.
    let (lo, hi) = if yi != yj {
        ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
    } else {
        ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
    };
    if hi - lo < MIN_STEP {
        return false;
    }
    let eta = kernel.get(i, i) + kernel.get(j, j) - 2.0 * kernel.get(i, j);
    if eta <= 0.0 {
        // Flat or degenerate direction (e.g. duplicated points); skip.
        return false;
    }
    let aj_new = (aj_old + yj * (errors[i] - errors[j]) / eta).clamp(lo, hi);
    if (aj_new - aj_old).abs() < MIN_STEP {
        return false;
    }
    let ai_new = ai_old + yi * yj * (aj_old - aj_new);
    let (di, dj) = (ai_new - ai_old, aj_new - aj_old);

    let b1 = *bias - errors[i] - yi * di * kernel.get(i, i) - yj * dj * kernel.get(i, j);
    let b2 = *bias - errors[j] - yi * di * kernel.get(i, j) - yj * dj * kernel.get(j, j);
    let b_new = if ai_new > 0.0 && ai_new < c {
        b1
    } else if aj_new > 0.0 && aj_new < c {
        b2
    } else {
        0.5 * (b1 + b2)
    };
    let db = b_new - *bias;

    for (k, err) in errors.iter_mut().enumerate() {
        *err += yi * di * kernel.get(i, k) + yj * dj * kernel.get(j, k) + db;
    }
    alphas[i] = ai_new;
    alphas[j] = aj_new;
    *bias = b_new;
    true
}

/// One-vs-rest multiclass model: one binary SVM per class, trained on the
/// same kernel with that class relabeled +1.
#[derive(Clone, Debug)]
pub struct OvrModel {
    classes: Vec<usize>,
    models: Vec<BinarySvm>,
}

impl OvrModel {
    /// Distinct class labels in ascending order.
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn models(&self) -> &[BinarySvm] {
        &self.models
    }

    fn n_train(&self) -> usize {
        self.models[0].alphas.len()
    }
}

/// Trains one binary machine per distinct class label.
pub fn ovr_train(kernel: &KernelMatrix, labels: &[usize], c: f64) -> Result<OvrModel> {
    if labels.len() != kernel.dim() {
        return Err(Error::Shape(format!(
            "{} labels for a {}-point kernel",
            labels.len(),
            kernel.dim()
        )));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Degenerate(
            "one-vs-rest needs at least two classes".into(),
        ));
    }
    let mut models = Vec::with_capacity(classes.len());
    for &cls in &classes {
        let binary: Vec<i32> = labels
            .iter()
            .map(|&l| if l == cls { 1 } else { -1 })
            .collect();
        models.push(svm_train_binary(kernel, &binary, c)?);
    }
    Ok(OvrModel { classes, models })
}

/// Predicts class labels for rows of kernel values against the training
/// set. Returns the labels and the per-class logistic-squashed decision
/// scores; ties go to the lowest class label.
pub fn ovr_predict(model: &OvrModel, cross: &[Vec<f64>]) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let mut predictions = Vec::with_capacity(cross.len());
    let mut scores = Vec::with_capacity(cross.len());
    for row in cross {
        if row.len() != model.n_train() {
            return Err(Error::Shape(format!(
                "kernel row has {} entries, model was trained on {}",
                row.len(),
                model.n_train()
            )));
        }
        let decisions: Vec<f64> = model
            .models
            .iter()
            .map(|m| m.decision_value(row))
            .collect::<Result<_>>()?;
        let mut best = 0usize;
        for (k, &d) in decisions.iter().enumerate() {
            if d > decisions[best] {
                best = k;
            }
        }
        predictions.push(model.classes[best]);
        scores.push(decisions.iter().map(|&d| logistic(d)).collect());
    }
    Ok((predictions, scores))
}

fn logistic(d: f64) -> f64 {
    1.0 / (1.0 + (-d).exp())
}
