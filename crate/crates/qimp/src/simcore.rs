//! Minimal statevector simulator.
//!
//! Holds the full 2^n complex amplitude vector and applies small unitaries
//! by stride iteration. Qubit 0 is the least-significant bit of the basis
//! index, so amplitude pairs `(2k, 2k+1)` differ only in qubit 0 — the
//! layout the edge-detection kernels rely on.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hard cap on simulator width: 2^24 amplitudes is about 256 MB.
pub const MAX_QUBITS: usize = 24;

const UNITARITY_TOL: f64 = 1e-12;
const STATE_NORM_TOL: f64 = 1e-8;

/// Probability below which a post-selected branch is considered empty.
pub const POSTSELECT_EPS: f64 = 1e-12;

/// Pure n-qubit state as a dense vector of 2^n complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Creates |0...0⟩ on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::Capacity(n_qubits));
        }
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps an explicit amplitude vector. The length must be a power of two
    /// within the qubit cap and the vector must be normalized within 1e-8.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector length {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity(n_qubits));
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector norm² = {norm_sqr}, expected 1"
            )));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of basis states, 2^n.
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born-rule probability of basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// ⟨self|other⟩.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Shape(format!(
                "inner product between {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies `gate` to its target qubits, identity elsewhere.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        for &t in &gate.targets {
            if t >= self.n_qubits {
                return Err(Error::InvalidTarget {
                    target: t,
                    n_qubits: self.n_qubits,
                });
            }
        }
        apply_gate_kernel(&mut self.amps, gate);
        Ok(())
    }

    /// Hadamard on qubit 0: every amplitude pair `(c_{2k}, c_{2k+1})`
    /// becomes `((c_{2k}+c_{2k+1})/√2, (c_{2k}-c_{2k+1})/√2)`, exposing
    /// neighbor sums and differences.
    pub fn hadamard_lsb(&mut self) {
        for pair in self.amps.chunks_exact_mut(2) {
            let (a, b) = (pair[0], pair[1]);
            pair[0] = (a + b) * FRAC_1_SQRT_2;
            pair[1] = (a - b) * FRAC_1_SQRT_2;
        }
    }

    /// Cyclic downshift: amplitude `i` becomes the old amplitude `(i+1) mod 2^n`.
    /// Used to expose odd-indexed pixel pairs to [`Self::hadamard_lsb`].
    pub fn amplitude_permutation(&mut self) {
        self.amps.rotate_left(1);
    }

    /// Samples `shots` basis states from the Born distribution |c_i|².
    /// Reproducible for a fixed seed.
    pub fn measure_all(&self, shots: u64, seed: u64) -> Result<MeasurementHistogram> {
        if shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        let mut cdf = Vec::with_capacity(self.amps.len());
        let mut total = 0.0;
        for a in &self.amps {
            total += a.norm_sqr();
            cdf.push(total);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(self.amps.len() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(MeasurementHistogram { counts, shots })
    }

    /// Fixes qubit 0 to `bit`, returning the renormalized (n-1)-qubit state
    /// and the probability of that branch.
    pub fn postselect_lsb(&self, bit: bool) -> Result<(StateVector, f64)> {
        if self.n_qubits < 2 {
            return Err(Error::InvalidArgument(
                "postselection requires at least 2 qubits".into(),
            ));
        }
        let offset = bit as usize;
        let kept: Vec<Complex64> = self.amps.iter().skip(offset).step_by(2).copied().collect();
        let prob: f64 = kept.iter().map(|a| a.norm_sqr()).sum();
        if prob <= POSTSELECT_EPS {
            return Err(Error::DegeneratePostselection(prob));
        }
        let scale = prob.sqrt().recip();
        let amps = kept.into_iter().map(|a| a * scale).collect();
        Ok((
            StateVector {
                n_qubits: self.n_qubits - 1,
                amps,
            },
            prob,
        ))
    }
}

/// Unitary acting on an explicit list of target qubits.
///
/// Bit `j` of the gate's local basis index corresponds to global qubit
/// `targets[j]`; the matrix is row-major with dimension `2^targets.len()`.
#[derive(Clone, Debug)]
pub struct Gate {
    targets: Vec<usize>,
    matrix: Vec<Complex64>,
}

impl Gate {
    /// Builds a gate from an explicit matrix, checking that the targets are
    /// distinct and the matrix is unitary within 1e-12.
    pub fn new(targets: Vec<usize>, matrix: Vec<Complex64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument(
                "gate needs at least one target".into(),
            ));
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate target qubit {t}"
                )));
            }
        }
        let dim = 1usize << targets.len();
        if matrix.len() != dim * dim {
            return Err(Error::Shape(format!(
                "gate on {} qubit(s) needs a {dim}x{dim} matrix, got {} entries",
                targets.len(),
                matrix.len()
            )));
        }
        let dev = unitarity_deviation(&matrix, dim);
        if dev >= UNITARITY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        Ok(Gate { targets, matrix })
    }

    /// Trusted constructor for matrices known unitary by construction.
    fn from_parts(targets: Vec<usize>, matrix: Vec<Complex64>) -> Self {
        Gate { targets, matrix }
    }

    pub fn x(qubit: usize) -> Self {
        let (o, l) = (Complex64::ONE, Complex64::ZERO);
        Gate::from_parts(vec![qubit], vec![l, o, o, l])
    }

    pub fn y(qubit: usize) -> Self {
        let i = Complex64::I;
        let l = Complex64::ZERO;
        Gate::from_parts(vec![qubit], vec![l, -i, i, l])
    }

    pub fn z(qubit: usize) -> Self {
        let (o, l) = (Complex64::ONE, Complex64::ZERO);
        Gate::from_parts(vec![qubit], vec![o, l, l, -o])
    }

    pub fn h(qubit: usize) -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Gate::from_parts(vec![qubit], vec![s, s, s, -s])
    }

    /// diag(1, e^{iθ}).
    pub fn phase(qubit: usize, theta: f64) -> Self {
        let l = Complex64::ZERO;
        Gate::from_parts(
            vec![qubit],
            vec![Complex64::ONE, l, l, Complex64::from_polar(1.0, theta)],
        )
    }

    /// Real rotation about Y: [[cos(θ/2), -sin(θ/2)], [sin(θ/2), cos(θ/2)]].
    pub fn ry(qubit: usize, theta: f64) -> Self {
        let c = Complex64::new((theta / 2.0).cos(), 0.0);
        let s = Complex64::new((theta / 2.0).sin(), 0.0);
        Gate::from_parts(vec![qubit], vec![c, -s, s, c])
    }

    pub fn cx(control: usize, target: usize) -> Result<Self> {
        Gate::mcx(&[control], target)
    }

    /// Multi-controlled X: flips `target` when every control is |1⟩.
    pub fn mcx(controls: &[usize], target: usize) -> Result<Self> {
        let mut targets = controls.to_vec();
        targets.push(target);
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate target qubit {t}"
                )));
            }
        }
        let k = targets.len();
        let dim = 1usize << k;
        let mut matrix = vec![Complex64::ZERO; dim * dim];
        // local bits 0..k-2 are the controls, bit k-1 the target
        let flip_a = (1 << (k - 1)) - 1;
        let flip_b = dim - 1;
        for col in 0..dim {
            let row = if col == flip_a {
                flip_b
            } else if col == flip_b {
                flip_a
            } else {
                col
            };
            matrix[row * dim + col] = Complex64::ONE;
        }
        Ok(Gate::from_parts(targets, matrix))
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Number of qubits the gate acts on.
    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }
}

/// Stride-iteration gate application on a raw amplitude slice whose length
/// is a power of two. Targets must already be validated against the slice's
/// implied qubit count.
pub(crate) fn apply_gate_kernel(amps: &mut [Complex64], gate: &Gate) {
    let n_qubits = amps.len().trailing_zeros() as usize;
    let k = gate.targets.len();
    let dim = 1 << k;
    let free_bits: Vec<usize> = (0..n_qubits)
        .filter(|b| !gate.targets.contains(b))
        .collect();
    let mut gathered = vec![Complex64::ZERO; dim];
    let mut indices = vec![0usize; dim];
    for f in 0..(1usize << free_bits.len()) {
        let mut base = 0usize;
        for (j, &b) in free_bits.iter().enumerate() {
            if (f >> j) & 1 == 1 {
                base |= 1 << b;
            }
        }
        for (l, idx) in indices.iter_mut().enumerate() {
            let mut i = base;
            for (j, &t) in gate.targets.iter().enumerate() {
                if (l >> j) & 1 == 1 {
                    i |= 1 << t;
                }
            }
            *idx = i;
        }
        for (row, out) in gathered.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for col in 0..dim {
                acc += gate.matrix[row * dim + col] * amps[indices[col]];
            }
            *out = acc;
        }
        for (l, &idx) in indices.iter().enumerate() {
            amps[idx] = gathered[l];
        }
    }
}

/// max |U†U - I| over all entries.
fn unitarity_deviation(matrix: &[Complex64], dim: usize) -> f64 {
    let mut max_dev = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex64::ZERO;
            for k in 0..dim {
                acc += matrix[k * dim + i].conj() * matrix[k * dim + j];
            }
            let expect = if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            max_dev = max_dev.max((acc - expect).norm());
        }
    }
    max_dev
}

/// Histogram of sampled basis-state indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementHistogram {
    counts: BTreeMap<usize, u64>,
    shots: u64,
}

impl MeasurementHistogram {
    pub fn counts(&self) -> &BTreeMap<usize, u64> {
        &self.counts
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    /// count(index) / shots.
    pub fn frequency(&self, index: usize) -> f64 {
        self.count(index) as f64 / self.shots as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_state(values: &[f64]) -> StateVector {
        StateVector::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .unwrap()
    }

    fn random_state(n_qubits: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let len = 1usize << n_qubits;
        let mut amps: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        StateVector::from_amplitudes(amps).unwrap()
    }

    /// Gram-Schmidt over random rows: unitary to machine precision.
    fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let mut rows: Vec<Vec<Complex64>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect()
            })
            .collect();
        for i in 0..dim {
            for j in 0..i {
                let proj: Complex64 = rows[j]
                    .iter()
                    .zip(&rows[i])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let scaled: Vec<Complex64> = rows[j].iter().map(|a| proj * a).collect();
                for (target, sub) in rows[i].iter_mut().zip(scaled) {
                    *target -= sub;
                }
            }
            let norm: f64 = rows[i].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            for a in &mut rows[i] {
                *a /= norm;
            }
        }
        rows.into_iter().flatten().collect()
    }

    #[test]
    fn new_state_is_all_zeros_ket() {
        let s = StateVector::new(1).unwrap();
        assert_eq!(s.amplitudes(), &[Complex64::ONE, Complex64::ZERO]);
        let s = StateVector::new(2).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::ONE);
        assert!(s.amplitudes()[1..].iter().all(|a| *a == Complex64::ZERO));
    }

    #[test]
    fn new_state_rejects_out_of_range_width() {
        assert!(matches!(StateVector::new(25), Err(Error::Capacity(25))));
        assert!(matches!(StateVector::new(0), Err(Error::Capacity(0))));
        assert!(StateVector::new(24).is_ok());
    }

    #[test]
    fn x_flips_single_qubit() {
        let mut s = StateVector::new(1).unwrap();
        s.apply_gate(&Gate::x(0)).unwrap();
        assert_eq!(s.amplitudes(), &[Complex64::ZERO, Complex64::ONE]);
    }

    #[test]
    fn hadamard_on_qubit0_of_two_qubit_zero_state() {
        let mut s = StateVector::new(2).unwrap();
        s.apply_gate(&Gate::h(0)).unwrap();
        let amps = s.amplitudes();
        assert!((amps[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((amps[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(amps[2], Complex64::ZERO);
        assert_eq!(amps[3], Complex64::ZERO);
    }

    #[test]
    fn hadamard_applied_twice_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let original = random_state(3, &mut rng);
        let mut s = original.clone();
        s.apply_gate(&Gate::h(1)).unwrap();
        s.apply_gate(&Gate::h(1)).unwrap();
        for (a, b) in s.amplitudes().iter().zip(original.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn non_unitary_matrix_is_rejected() {
        let m = vec![
            Complex64::ONE,
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ONE,
        ];
        assert!(matches!(Gate::new(vec![0], m), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn bad_target_is_rejected() {
        let mut s = StateVector::new(2).unwrap();
        let err = s.apply_gate(&Gate::x(2)).unwrap_err();
        assert!(matches!(
            err,
            Error::InvalidTarget {
                target: 2,
                n_qubits: 2
            }
        ));
    }

    #[test]
    fn cx_maps_basis_states_correctly() {
        // |01⟩ (qubit 0 = 1): control set, so target flips -> |11⟩ = index 3
        let mut s = StateVector::new(2).unwrap();
        s.apply_gate(&Gate::x(0)).unwrap();
        s.apply_gate(&Gate::cx(0, 1).unwrap()).unwrap();
        assert!((s.probability(3) - 1.0).abs() < 1e-15);
        // control clear: nothing happens
        let mut s = StateVector::new(2).unwrap();
        s.apply_gate(&Gate::cx(0, 1).unwrap()).unwrap();
        assert!((s.probability(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mcx_flips_only_when_all_controls_set() {
        let mut s = StateVector::new(3).unwrap();
        s.apply_gate(&Gate::x(0)).unwrap();
        s.apply_gate(&Gate::x(1)).unwrap();
        s.apply_gate(&Gate::mcx(&[0, 1], 2).unwrap()).unwrap();
        assert!((s.probability(0b111) - 1.0).abs() < 1e-15);
        let mut s = StateVector::new(3).unwrap();
        s.apply_gate(&Gate::x(0)).unwrap();
        s.apply_gate(&Gate::mcx(&[0, 1], 2).unwrap()).unwrap();
        assert!((s.probability(0b001) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hadamard_lsb_matches_pair_formula() {
        let c = [0.1, 0.7, -0.5, 0.5];
        let mut s = real_state(&c);
        s.hadamard_lsb();
        let expect = [
            (c[0] + c[1]) * FRAC_1_SQRT_2,
            (c[0] - c[1]) * FRAC_1_SQRT_2,
            (c[2] + c[3]) * FRAC_1_SQRT_2,
            (c[2] - c[3]) * FRAC_1_SQRT_2,
        ];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn hadamard_lsb_constant_image_has_zero_differences() {
        let mut s = real_state(&[0.5, 0.5, 0.5, 0.5]);
        s.hadamard_lsb();
        let amps = s.amplitudes();
        assert!((amps[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(amps[1].norm() < 1e-15);
        assert!((amps[2].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(amps[3].norm() < 1e-15);
    }

    #[test]
    fn hadamard_lsb_sum_and_difference_values() {
        let mut s = real_state(&[0.6, 0.8]);
        s.hadamard_lsb();
        assert!((s.amplitudes()[0].re - 0.98995).abs() < 1e-5);
        assert!((s.amplitudes()[1].re - (-0.14142)).abs() < 1e-5);
    }

    #[test]
    fn hadamard_lsb_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let original = random_state(4, &mut rng);
        let mut s = original.clone();
        s.hadamard_lsb();
        s.hadamard_lsb();
        for (a, b) in s.amplitudes().iter().zip(original.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn hadamard_lsb_equals_explicit_block_matrix_up_to_six_qubits() {
        // Oracle: literal I_{2^{n-1}} ⊗ H built as a full matrix.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=6usize {
            let dim = 1usize << n;
            let s = FRAC_1_SQRT_2;
            let mut full = vec![0.0f64; dim * dim];
            for blk in 0..dim / 2 {
                let r = 2 * blk;
                full[r * dim + r] = s;
                full[r * dim + r + 1] = s;
                full[(r + 1) * dim + r] = s;
                full[(r + 1) * dim + r + 1] = -s;
            }
            let state = random_state(n, &mut rng);
            let expect: Vec<Complex64> = (0..dim)
                .map(|row| {
                    (0..dim)
                        .map(|col| state.amplitudes()[col] * full[row * dim + col])
                        .sum()
                })
                .collect();
            let mut actual = state;
            actual.hadamard_lsb();
            for (a, e) in actual.amplitudes().iter().zip(&expect) {
                assert!((a - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn amplitude_permutation_is_cyclic_downshift() {
        let mut s = real_state(&[0.1, 0.7, -0.5, 0.5]);
        s.amplitude_permutation();
        let got: Vec<f64> = s.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(got, vec![0.7, -0.5, 0.5, 0.1]);

        let mut s = real_state(&[1.0, 0.0]);
        s.amplitude_permutation();
        let got: Vec<f64> = s.amplitudes().iter().map(|a| a.re).collect();
        assert_eq!(got, vec![0.0, 1.0]);
    }

    #[test]
    fn amplitude_permutation_has_order_dividing_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let original = random_state(3, &mut rng);
        let mut s = original.clone();
        for _ in 0..8 {
            s.amplitude_permutation();
        }
        assert_eq!(s, original);
    }

    #[test]
    fn amplitude_permutation_preserves_amplitude_multiset() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let original = random_state(4, &mut rng);
        let mut s = original.clone();
        s.amplitude_permutation();
        let mut before: Vec<(u64, u64)> = original
            .amplitudes()
            .iter()
            .map(|a| (a.re.to_bits(), a.im.to_bits()))
            .collect();
        let mut after: Vec<(u64, u64)> = s
            .amplitudes()
            .iter()
            .map(|a| (a.re.to_bits(), a.im.to_bits()))
            .collect();
        before.sort_unstable();
        after.sort_unstable();
        assert_eq!(before, after);
    }

    #[test]
    fn measure_all_on_basis_state_is_deterministic() {
        let s = StateVector::new(3).unwrap();
        let hist = s.measure_all(100, 1).unwrap();
        assert_eq!(hist.count(0), 100);
        assert_eq!(hist.shots(), 100);
    }

    #[test]
    fn measure_all_balanced_superposition_within_three_sigma() {
        let s = real_state(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        for seed in [0, 1, 42] {
            let hist = s.measure_all(100_000, seed).unwrap();
            let f = hist.frequency(0);
            assert!((0.49..=0.51).contains(&f), "frequency {f} out of bounds");
        }
    }

    #[test]
    fn measure_all_biased_state_matches_born_rule() {
        // p(1) = 0.8² = 0.64; binomial 3σ at 1e5 shots is ±0.0046
        let s = real_state(&[0.6, 0.8]);
        let hist = s.measure_all(100_000, 7).unwrap();
        let f = hist.frequency(1);
        assert!((0.63..=0.65).contains(&f), "frequency {f} out of bounds");
    }

    #[test]
    fn measure_all_is_reproducible_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let s = random_state(4, &mut rng);
        let a = s.measure_all(10_000, 99).unwrap();
        let b = s.measure_all(10_000, 99).unwrap();
        assert_eq!(a, b);
        let c = s.measure_all(10_000, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn measure_all_rejects_zero_shots() {
        let s = StateVector::new(1).unwrap();
        assert!(matches!(
            s.measure_all(0, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn postselect_on_empty_branch_is_degenerate() {
        let s = real_state(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0]);
        assert!(matches!(
            s.postselect_lsb(true),
            Err(Error::DegeneratePostselection(_))
        ));
    }

    #[test]
    fn postselect_keeps_odd_amplitudes() {
        let s = real_state(&[0.0, 1.0, 0.0, 0.0]);
        let (reduced, prob) = s.postselect_lsb(true).unwrap();
        assert_eq!(reduced.n_qubits(), 1);
        assert!((prob - 1.0).abs() < 1e-15);
        assert!((reduced.amplitudes()[0].re - 1.0).abs() < 1e-15);
        assert!(reduced.amplitudes()[1].norm() < 1e-15);
    }

    #[test]
    fn postselect_after_hadamard_extracts_difference_branch() {
        // (1/√2)(a+b, a-b) with a = 0.6, b = 0.8: odd branch carries (a-b)²/2 = 0.02
        let mut s = real_state(&[0.6, 0.8, 0.0, 0.0]);
        s.hadamard_lsb();
        let (reduced, prob) = s.postselect_lsb(true).unwrap();
        assert!((prob - 0.02).abs() < 1e-12);
        assert!((reduced.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_gates_preserve_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..1000 {
            let n = 2 + (trial % 4); // 2..=5 qubits
            let mut s = random_state(n, &mut rng);
            let arity = 1 + (trial % 2);
            let mut targets: Vec<usize> = (0..n).collect();
            // pick `arity` distinct targets
            for i in 0..arity {
                let j = i + (rng.gen::<usize>() % (n - i));
                targets.swap(i, j);
            }
            targets.truncate(arity);
            let gate = Gate::new(targets, random_unitary(1 << arity, &mut rng)).unwrap();
            s.apply_gate(&gate).unwrap();
            assert!(
                (s.norm_sqr() - 1.0).abs() < 1e-10,
                "norm drifted to {}",
                s.norm_sqr()
            );
        }
    }

    #[test]
    fn gate_application_matches_full_matrix_oracle() {
        // Dense kron-expansion oracle for a 2-qubit gate on a 4-qubit state.
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 4;
        let targets = vec![1, 3];
        let u = random_unitary(4, &mut rng);
        let state = random_state(n, &mut rng);
        let dim = 1 << n;
        let mut expect = vec![Complex64::ZERO; dim];
        for (row, out) in expect.iter_mut().enumerate() {
            for col in 0..dim {
                let free_mask = !((1usize << targets[0]) | (1 << targets[1]));
                if row & free_mask != col & free_mask {
                    continue;
                }
                let lr = ((row >> targets[0]) & 1) | (((row >> targets[1]) & 1) << 1);
                let lc = ((col >> targets[0]) & 1) | (((col >> targets[1]) & 1) << 1);
                *out += u[lr * 4 + lc] * state.amplitudes()[col];
            }
        }
        let mut actual = state;
        actual.apply_gate(&Gate::new(targets, u).unwrap()).unwrap();
        for (a, e) in actual.amplitudes().iter().zip(&expect) {
            assert!((a - e).norm() < 1e-12);
        }
    }
}
