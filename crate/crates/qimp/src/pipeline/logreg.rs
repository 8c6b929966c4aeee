//! Multinomial logistic regression with an L1 (lasso) penalty, trained by
//! proximal gradient descent.
//!
//! Each epoch takes a full-batch gradient step on the smooth cross-entropy
//! part and then soft-thresholds the weights by lr·l1 (intercepts are
//! unpenalized). The step is accepted only if the penalized objective does
//! not increase beyond 1e-9 slack; otherwise the learning rate is halved
//! and the step retried, which makes the loss trace monotone.

use crate::error::{Error, Result};

/// Slack allowed on the per-epoch descent check.
const DESCENT_SLACK: f64 = 1e-9;

/// Smallest learning rate the backtracking loop will try.
const MIN_LR: f64 = 1e-12;

/// Trained multinomial model: one weight row and intercept per class.
#[derive(Clone, Debug)]
pub struct LogRegModel {
    classes: Vec<usize>,
    /// classes × features.
    weights: Vec<Vec<f64>>,
    intercepts: Vec<f64>,
    l1_strength: f64,
}

impl LogRegModel {
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn l1_strength(&self) -> f64 {
        self.l1_strength
    }

    /// Count of exactly-zero weights (the lasso's sparsity footprint).
    pub fn zero_weight_count(&self) -> usize {
        self.weights
            .iter()
            .flat_map(|row| row.iter())
            .filter(|&&w| w == 0.0)
            .count()
    }
}

/// Row-stochastic softmax probabilities for one feature vector.
fn class_probabilities(model_w: &[Vec<f64>], intercepts: &[f64], x: &[f64]) -> Vec<f64> {
    let logits: Vec<f64> = model_w
        .iter()
        .zip(intercepts)
        .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect();
    let peak = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Mean cross-entropy plus the L1 penalty on weights.
fn objective(
    weights: &[Vec<f64>],
    intercepts: &[f64],
    features: &[Vec<f64>],
    targets: &[usize],
    l1: f64,
) -> f64 {
    let mut loss = 0.0;
    for (x, &t) in features.iter().zip(targets) {
        let p = class_probabilities(weights, intercepts, x);
        loss -= p[t].max(1e-300).ln();
    }
    loss /= features.len() as f64;
    let penalty: f64 = weights
        .iter()
        .flat_map(|row| row.iter())
        .map(|w| w.abs())
        .sum();
    loss + l1 * penalty
}

fn soft_threshold(w: f64, t: f64) -> f64 {
    if w > t {
        w - t
    } else if w < -t {
        w + t
    } else {
        0.0
    }
}

/// Trains the model. `seed` is accepted for interface stability; the
/// optimizer is full-batch and deterministic, so it does not consume
/// randomness.
pub fn logreg_train(
    features: &[Vec<f64>],
    labels: &[usize],
    l1_strength: f64,
    epochs: usize,
    lr: f64,
    _seed: u64,
) -> Result<LogRegModel> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let d = features[0].len();
    if d == 0 || features.iter().any(|row| row.len() != d) {
        return Err(Error::Shape(
            "feature rows must share one nonzero dimension".into(),
        ));
    }
    if !(l1_strength.is_finite() && l1_strength >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "l1 strength must be finite and non-negative, got {l1_strength}"
        )));
    }
    if !(lr.is_finite() && lr > 0.0) || epochs == 0 {
        return Err(Error::InvalidArgument(
            "training needs a positive learning rate and at least one epoch".into(),
        ));
    }
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Degenerate(
            "logistic regression needs at least two classes".into(),
        ));
    }
    let targets: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label is in the class set"))
        .collect();

    let n_classes = classes.len();
    let m = features.len() as f64;
    let mut weights = vec![vec![0.0f64; d]; n_classes];
    let mut intercepts = vec![0.0f64; n_classes];
    let mut lr = lr;
    let mut current = objective(&weights, &intercepts, features, &targets, l1_strength);

    for _ in 0..epochs {
        // Full-batch gradient of the smooth part.
        let mut grad_w = vec![vec![0.0f64; d]; n_classes];
        let mut grad_b = vec![0.0f64; n_classes];
        for (x, &t) in features.iter().zip(&targets) {
            let p = class_probabilities(&weights, &intercepts, x);
            for c in 0..n_classes {
                let residual = p[c] - if c == t { 1.0 } else { 0.0 };
                grad_b[c] += residual;
                for (g, v) in grad_w[c].iter_mut().zip(x) {
                    *g += residual * v;
                }
            }
        }
        for c in 0..n_classes {
            grad_b[c] /= m;
            for g in &mut grad_w[c] {
                *g /= m;
            }
        }

        // Proximal step with backtracking on the penalized objective.
        loop {
            let mut next_w = weights.clone();
            let mut next_b = intercepts.clone();
            for c in 0..n_classes {
                next_b[c] -= lr * grad_b[c];
                for (w, g) in next_w[c].iter_mut().zip(&grad_w[c]) {
                    *w = soft_threshold(*w - lr * g, lr * l1_strength);
                }
            }
            let candidate = objective(&next_w, &next_b, features, &targets, l1_strength);
            if candidate <= current + DESCENT_SLACK || lr <= MIN_LR {
                weights = next_w;
                intercepts = next_b;
                current = candidate;
                break;
            }
            lr *= 0.5;
        }
    }

    Ok(LogRegModel {
        classes,
        weights,
        intercepts,
        l1_strength,
    })
}

/// Argmax-class predictions; ties go to the lowest class label.
pub fn logreg_predict(model: &LogRegModel, features: &[Vec<f64>]) -> Result<Vec<usize>> {
    let d = model.weights[0].len();
    let mut out = Vec::with_capacity(features.len());
    for x in features {
        if x.len() != d {
            return Err(Error::Shape(format!(
                "feature row has {} entries, model expects {d}",
                x.len()
            )));
        }
        let p = class_probabilities(&model.weights, &model.intercepts, x);
        let mut best = 0;
        for (c, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = c;
            }
        }
        out.push(model.classes[best]);
    }
    Ok(out)
}
