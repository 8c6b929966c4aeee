//! Quantum feature maps and fidelity kernels.
//!
//! A feature vector x is loaded into an n-qubit state by repeated layers of
//! Hadamards, data-dependent phase rotations, and (for the second-order
//! maps) pairwise ZZ phase rotations over a configurable entanglement
//! graph. The kernel between two vectors is the state fidelity
//! |⟨φ(y)|φ(x)⟩|², computed exactly from the statevectors.

mod svm;

pub use svm::{
    dual_objective, ovr_predict, ovr_train, svm_train_binary, BinarySvm, OvrModel, KKT_TOLERANCE,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::simcore::{Gate, StateVector};

/// Default box constraint for SVM training.
pub const DEFAULT_BOX_C: f64 = 1.0;

/// Default feature-map repetitions.
pub const DEFAULT_REPS: usize = 2;

/// Which data map the feature circuit applies per repetition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureMapKind {
    /// First-order only: H layer + single-qubit phases.
    Z,
    /// Second-order: adds pairwise ZZ phases over the entanglement set.
    Zz,
    /// ZZ map followed by a single-qubit Y-rotation layer.
    Pauli,
}

/// Pair set the ZZ phases act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entanglement {
    /// Chain (i, i+1).
    Linear,
    /// Chain plus the wraparound pair (n−1, 0).
    Circular,
    /// All pairs i < j.
    Full,
}

/// Validated description of a feature-map circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureMapSpec {
    kind: FeatureMapKind,
    reps: usize,
    entanglement: Entanglement,
    n_features: usize,
}

impl FeatureMapSpec {
    pub fn new(
        kind: FeatureMapKind,
        reps: usize,
        entanglement: Entanglement,
        n_features: usize,
    ) -> Result<Self> {
        if reps < 1 {
            return Err(Error::InvalidArgument("feature map needs reps >= 1".into()));
        }
        if n_features < 1 {
            return Err(Error::InvalidArgument(
                "feature map needs at least one feature".into(),
            ));
        }
        Ok(FeatureMapSpec {
            kind,
            reps,
            entanglement,
            n_features,
        })
    }

    pub fn kind(&self) -> FeatureMapKind {
        self.kind
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn entanglement(&self) -> Entanglement {
        self.entanglement
    }

    /// Feature dimension = qubit count.
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Unordered qubit pairs the ZZ phases act on. The wraparound pair of
    /// the circular set is dropped when it duplicates an existing pair
    /// (n = 2), so no phase is silently applied twice.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_features;
        match self.entanglement {
            Entanglement::Linear => (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            Entanglement::Circular => {
                let mut pairs: Vec<(usize, usize)> =
                    (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
                if n > 2 {
                    pairs.push((n - 1, 0));
                }
                pairs
            }
            Entanglement::Full => {
                let mut pairs = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        pairs.push((i, j));
                    }
                }
                pairs
            }
        }
    }
}

/// Two-qubit diagonal phase: e^{iφ} on the basis states where the two
/// qubits differ (the ZZ-interaction phase up to a global factor).
fn zz_phase_gate(a: usize, b: usize, phi: f64) -> Result<Gate> {
    let one = Complex64::ONE;
    let zero = Complex64::ZERO;
    let p = Complex64::from_polar(1.0, phi);
    Gate::new(
        vec![a, b],
        vec![
            one, zero, zero, zero, //
            zero, p, zero, zero, //
            zero, zero, p, zero, //
            zero, zero, zero, one,
        ],
    )
}

/// Prepares the feature state: per repetition, a Hadamard layer, phase
/// rotations by φ_i(x) = x_i, pairwise ZZ phases by
/// φ_{ij}(x) = (π − x_i)(π − x_j) for the second-order maps, and a
/// Y-rotation layer for the Pauli map.
pub fn feature_state(x: &[f64], spec: &FeatureMapSpec) -> Result<StateVector> {
    if x.len() != spec.n_features {
        return Err(Error::InvalidArgument(format!(
            "feature vector has {} entries, map expects {}",
            x.len(),
            spec.n_features
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "feature vector entries must be finite".into(),
        ));
    }
    let n = spec.n_features;
    let mut state = StateVector::new(n)?;
    let pairs = spec.pairs();
    for _ in 0..spec.reps {
        for q in 0..n {
            state.apply_gate(&Gate::h(q))?;
        }
        for (q, &v) in x.iter().enumerate() {
            state.apply_gate(&Gate::phase(q, v))?;
        }
        if spec.kind != FeatureMapKind::Z {
            use std::f64::consts::PI;
            for &(a, b) in &pairs {
                let phi = (PI - x[a]) * (PI - x[b]);
                state.apply_gate(&zz_phase_gate(a, b, phi)?)?;
            }
        }
        if spec.kind == FeatureMapKind::Pauli {
            for (q, &v) in x.iter().enumerate() {
                state.apply_gate(&Gate::ry(q, v))?;
            }
        }
    }
    Ok(state)
}

/// Fidelity kernel |⟨φ(y)|φ(x)⟩|².
pub fn kernel_entry(x: &[f64], y: &[f64], spec: &FeatureMapSpec) -> Result<f64> {
    let sx = feature_state(x, spec)?;
    let sy = feature_state(y, spec)?;
    Ok(sy.inner_product(&sx)?.norm_sqr())
}

/// Symmetric Gram matrix of fidelity-kernel entries.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "kernel matrix of dim {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(KernelMatrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                dev = dev.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        dev
    }

    /// Smallest eigenvalue; Gram matrices must be ≥ −1e-8.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.entries);
        let eigen = nalgebra::SymmetricEigen::new(m);
        eigen
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_dataset(data: &[Vec<f64>], spec: &FeatureMapSpec) -> Result<()> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty dataset".into()));
    }
    for row in data {
        if row.len() != spec.n_features() {
            return Err(Error::InvalidArgument(format!(
                "dataset row has {} entries, map expects {}",
                row.len(),
                spec.n_features()
            )));
        }
    }
    Ok(())
}

/// Gram matrix K[i][j] = kernel(X[i], X[j]); each state is prepared once.
pub fn kernel_matrix(data: &[Vec<f64>], spec: &FeatureMapSpec) -> Result<KernelMatrix> {
    check_dataset(data, spec)?;
    let states: Vec<StateVector> = data
        .iter()
        .map(|x| feature_state(x, spec))
        .collect::<Result<_>>()?;
    let m = states.len();
    let mut entries = vec![0.0; m * m];
    for i in 0..m {
        entries[i * m + i] = states[i].inner_product(&states[i])?.norm_sqr();
        for j in 0..i {
            let k = states[j].inner_product(&states[i])?.norm_sqr();
            entries[i * m + j] = k;
            entries[j * m + i] = k;
        }
    }
    KernelMatrix::from_entries(m, entries)
}

/// Rectangular kernel block K[i][j] = kernel(X_test[i], X_train[j]).
pub fn kernel_cross(
    test: &[Vec<f64>],
    train: &[Vec<f64>],
    spec: &FeatureMapSpec,
) -> Result<Vec<Vec<f64>>> {
    check_dataset(test, spec)?;
    check_dataset(train, spec)?;
    let train_states: Vec<StateVector> = train
        .iter()
        .map(|x| feature_state(x, spec))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(test.len());
    for x in test {
        let sx = feature_state(x, spec)?;
        let mut row = Vec::with_capacity(train.len());
        for st in &train_states {
            row.push(st.inner_product(&sx)?.norm_sqr());
        }
        rows.push(row);
    }
    Ok(rows)
}
