//! Gate-level noise injection and its density-matrix oracle.
//!
//! The main path unravels noise channels into stochastic trajectories: after
//! every ideal gate, each target qubit independently suffers a depolarizing
//! event (one of X/Y/Z, total probability 3λ/4) followed by Bernoulli bit-
//! and phase-flips. Averaging trajectories reproduces the corresponding
//! quantum channels; a small density-matrix implementation (n ≤ 6) evolves
//! those channels exactly so the two can be cross-checked.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encode::{qpie_encode, GrayImage};
use crate::error::{Error, Result};
use crate::qhed::{
    bilinear_resize, merge_patches, place_gradients, scan_pair_slots, split_patches, threshold,
    EdgeMap, GradientMap, Parity, LARGE_IMAGE_SIDE,
};
use crate::simcore::{apply_gate_kernel, Gate, StateVector};

/// Largest width the density-matrix oracle accepts (4^6 matrix entries).
pub const MAX_DENSITY_QUBITS: usize = 6;

/// Per-gate noise strengths: depolarizing error rates chosen by gate arity,
/// plus independent bit- and phase-flip probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    depol_1q: f64,
    depol_2q: f64,
    bitflip_p: f64,
    phaseflip_p: f64,
}

impl NoiseModel {
    pub fn new(depol_1q: f64, depol_2q: f64, bitflip_p: f64, phaseflip_p: f64) -> Result<Self> {
        for (name, v) in [
            ("depol_1q", depol_1q),
            ("depol_2q", depol_2q),
            ("bitflip_p", bitflip_p),
            ("phaseflip_p", phaseflip_p),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "noise parameter {name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(NoiseModel {
            depol_1q,
            depol_2q,
            bitflip_p,
            phaseflip_p,
        })
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            depol_1q: 0.0,
            depol_2q: 0.0,
            bitflip_p: 0.0,
            phaseflip_p: 0.0,
        }
    }

    /// Depolarizing noise only, with separate single- and two-qubit rates.
    pub fn depolarizing(depol_1q: f64, depol_2q: f64) -> Result<Self> {
        NoiseModel::new(depol_1q, depol_2q, 0.0, 0.0)
    }

    /// Bit- and phase-flip noise only.
    pub fn pauli(bitflip_p: f64, phaseflip_p: f64) -> Result<Self> {
        NoiseModel::new(0.0, 0.0, bitflip_p, phaseflip_p)
    }

    pub fn depol_1q(&self) -> f64 {
        self.depol_1q
    }

    pub fn depol_2q(&self) -> f64 {
        self.depol_2q
    }

    pub fn bitflip_p(&self) -> f64 {
        self.bitflip_p
    }

    pub fn phaseflip_p(&self) -> f64 {
        self.phaseflip_p
    }

    pub fn is_noiseless(&self) -> bool {
        self.depol_1q == 0.0
            && self.depol_2q == 0.0
            && self.bitflip_p == 0.0
            && self.phaseflip_p == 0.0
    }

    /// Depolarizing rate used for a gate with the given target count.
    pub fn lambda_for_arity(&self, arity: usize) -> f64 {
        if arity == 1 {
            self.depol_1q
        } else {
            self.depol_2q
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PauliKind {
    X,
    Y,
    Z,
}

fn pauli_gate(kind: PauliKind, qubit: usize) -> Gate {
    match kind {
        PauliKind::X => Gate::x(qubit),
        PauliKind::Y => Gate::y(qubit),
        PauliKind::Z => Gate::z(qubit),
    }
}

/// Noise events sampled for one (gate, target-qubit) slot.
#[derive(Clone, Copy, Debug, Default)]
struct SlotEvents {
    depol: Option<PauliKind>,
    bitflip: bool,
    phaseflip: bool,
}

impl SlotEvents {
    fn is_trivial(&self) -> bool {
        self.depol.is_none() && !self.bitflip && !self.phaseflip
    }
}

/// One depolarizing draw (3λ/4 total, X/Y/Z uniform) plus independent bit-
/// and phase-flip draws. Zero-probability channels consume no randomness.
fn sample_slot_events(
    lambda: f64,
    bitflip_p: f64,
    phaseflip_p: f64,
    rng: &mut ChaCha8Rng,
) -> SlotEvents {
    let depol = if lambda > 0.0 && rng.gen::<f64>() < 0.75 * lambda {
        Some(match rng.gen_range(0..3u8) {
            0 => PauliKind::X,
            1 => PauliKind::Y,
            _ => PauliKind::Z,
        })
    } else {
        None
    };
    SlotEvents {
        depol,
        bitflip: bitflip_p > 0.0 && rng.gen::<f64>() < bitflip_p,
        phaseflip: phaseflip_p > 0.0 && rng.gen::<f64>() < phaseflip_p,
    }
}

fn apply_slot_events(state: &mut StateVector, qubit: usize, events: &SlotEvents) -> Result<()> {
    if let Some(kind) = events.depol {
        state.apply_gate(&pauli_gate(kind, qubit))?;
    }
    if events.bitflip {
        state.apply_gate(&Gate::x(qubit))?;
    }
    if events.phaseflip {
        state.apply_gate(&Gate::z(qubit))?;
    }
    Ok(())
}

/// Trajectory step with a caller-supplied RNG, so circuits can share one
/// deterministic stream across gates.
pub(crate) fn apply_noisy_gate_with(
    state: &mut StateVector,
    gate: &Gate,
    model: &NoiseModel,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    state.apply_gate(gate)?;
    let lambda = model.lambda_for_arity(gate.arity());
    for &target in gate.targets() {
        let events = sample_slot_events(lambda, model.bitflip_p, model.phaseflip_p, rng);
        apply_slot_events(state, target, &events)?;
    }
    Ok(())
}

/// Applies the ideal gate, then samples noise on each target qubit: a
/// depolarizing Pauli with total probability 3λ/4 (λ picked by gate arity),
/// then a bit flip and a phase flip as independent Bernoulli events.
/// Deterministic for a fixed seed.
pub fn apply_noisy_gate(
    state: &mut StateVector,
    gate: &Gate,
    model: &NoiseModel,
    rng_seed: u64,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    apply_noisy_gate_with(state, gate, model, &mut rng)
}

/// Gate sequence realizing one edge-detection scan: the odd scan prepends a
/// decrement ladder (X, CX, CCX, …) that shifts every basis index down by
/// one before the qubit-0 Hadamard.
pub fn scan_circuit(parity: Parity, n_qubits: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    if parity == Parity::Odd {
        gates.push(Gate::x(0));
        for target in 1..n_qubits {
            let controls: Vec<usize> = (0..target).collect();
            gates.push(Gate::mcx(&controls, target).expect("distinct ladder qubits"));
        }
    }
    gates.push(Gate::h(0));
    gates
}

/// Cumulative Born distribution used for fast ancestral sampling.
fn cumulative(state: &StateVector) -> Vec<f64> {
    let mut acc = 0.0;
    state
        .amplitudes()
        .iter()
        .map(|a| {
            acc += a.norm_sqr();
            acc
        })
        .collect()
}

fn sample_index(cdf: &[f64], u: f64) -> usize {
    let target = u * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= target).min(cdf.len() - 1)
}

/// One noisy scan, estimating pair-difference magnitudes from measurement
/// counts: each shot samples its own noise trajectory, and √(count/shots)
/// estimates |amplitude| on the difference branch. `shots = 0` requests
/// exact amplitude readout of a single sampled trajectory.
fn noisy_scan(
    img: &GrayImage,
    parity: Parity,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<GradientMap> {
    let q = qpie_encode(img)?;
    let prepared = q.state();
    let circuit = scan_circuit(parity, prepared.n_qubits());
    let slots = scan_pair_slots(parity, prepared.len(), img.rows());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if shots == 0 {
        let mut state = prepared.clone();
        for gate in &circuit {
            apply_noisy_gate_with(&mut state, gate, model, &mut rng)?;
        }
        let amps = state.amplitudes();
        let entries = slots
            .into_iter()
            .map(|(branch, flat)| (flat, amps[branch].norm()));
        return Ok(place_gradients(img.rows(), img.cols(), entries));
    }

    // Sampled readout. The event-free trajectory is by far the most common,
    // so its final state and cumulative distribution are computed once; only
    // shots that actually draw a noise event re-simulate the circuit.
    let mut ideal = prepared.clone();
    for gate in &circuit {
        ideal.apply_gate(gate)?;
    }
    let ideal_cdf = cumulative(&ideal);
    let mut events_buf: Vec<(usize, SlotEvents)> = Vec::new();
    let mut counts = vec![0u64; prepared.len()];
    for _ in 0..shots {
        events_buf.clear();
        let mut any_event = false;
        for gate in &circuit {
            let lambda = model.lambda_for_arity(gate.arity());
            for &target in gate.targets() {
                let events =
                    sample_slot_events(lambda, model.bitflip_p, model.phaseflip_p, &mut rng);
                any_event |= !events.is_trivial();
                events_buf.push((target, events));
            }
        }
        let u: f64 = rng.gen();
        let index = if any_event {
            let mut state = prepared.clone();
            let mut slot_iter = events_buf.iter();
            for gate in &circuit {
                state.apply_gate(gate)?;
                for _ in gate.targets() {
                    let (target, events) = slot_iter.next().expect("one event set per slot");
                    apply_slot_events(&mut state, *target, events)?;
                }
            }
            sample_index(&cumulative(&state), u)
        } else {
            sample_index(&ideal_cdf, u)
        };
        counts[index] += 1;
    }
    let entries = slots
        .into_iter()
        .map(|(branch, flat)| (flat, (counts[branch] as f64 / shots as f64).sqrt()));
    Ok(place_gradients(img.rows(), img.cols(), entries))
}

/// Noisy counterpart of the bidirectional edge detector: all four scans run
/// as noisy circuits with measurement-based gradient estimation, combined by
/// elementwise maximum. With an all-zero model and exact readout this
/// reproduces the noiseless detector.
pub fn noisy_qhed(
    img: &GrayImage,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<GradientMap> {
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let even = noisy_scan(img, Parity::Even, model, shots, seeder.gen())?;
    let odd = noisy_scan(img, Parity::Odd, model, shots, seeder.gen())?;
    let transposed = img.transposed();
    let even_t = noisy_scan(&transposed, Parity::Even, model, shots, seeder.gen())?;
    let odd_t = noisy_scan(&transposed, Parity::Odd, model, shots, seeder.gen())?;
    let mut values = vec![0.0; img.rows() * img.cols()];
    for y in 0..img.rows() {
        for x in 0..img.cols() {
            values[y * img.cols() + x] = even
                .get(y, x)
                .max(odd.get(y, x))
                .max(even_t.get(x, y))
                .max(odd_t.get(x, y));
        }
    }
    GradientMap::new(img.rows(), img.cols(), values)
}

/// Noisy counterpart of the patch workflow: resize to 32×32, split, run
/// [`noisy_qhed`] on every non-constant tile, merge, threshold. Constant
/// tiles are skipped: their ideal gradient is identically zero and they
/// carry no edge information worth spending shots on.
pub fn noisy_qhed_large(
    img: &GrayImage,
    patch_side: usize,
    t_rel: f64,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<EdgeMap> {
    let working;
    let img = if img.rows() == LARGE_IMAGE_SIDE && img.cols() == LARGE_IMAGE_SIDE {
        img
    } else {
        working = bilinear_resize(img, LARGE_IMAGE_SIDE, LARGE_IMAGE_SIDE)?;
        &working
    };
    let grid = split_patches(img, patch_side)?;
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let mut maps = Vec::with_capacity(grid.patches().len());
    for patch in grid.patches() {
        let tile = patch.image();
        let first = tile.pixels()[0];
        if tile.pixels().iter().all(|&p| p == first) {
            maps.push(GradientMap::zeros(patch_side, patch_side));
        } else {
            maps.push(noisy_qhed(tile, model, shots, seeder.gen())?);
        }
    }
    let merged = merge_patches(&grid, &maps)?;
    threshold(&merged, t_rel)
}

/// Dense 2^n × 2^n density matrix, row-major. Oracle-only: capped at
/// [`MAX_DENSITY_QUBITS`] qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: Vec<Complex64>,
}

impl DensityMatrix {
    /// |ψ⟩⟨ψ| of a pure state.
    pub fn from_statevector(state: &StateVector) -> Result<Self> {
        if state.n_qubits() > MAX_DENSITY_QUBITS {
            return Err(Error::Capacity(state.n_qubits()));
        }
        let dim = state.len();
        let amps = state.amplitudes();
        let mut mat = vec![Complex64::ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                mat[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        Ok(DensityMatrix {
            n_qubits: state.n_qubits(),
            mat,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }

    /// Born probabilities: the (real) diagonal.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entry(i, i).re).collect()
    }

    /// max |ρ − ρ†| over entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut dev = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                dev = dev.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        dev
    }

    /// ρ → UρU† for the embedded gate unitary.
    pub fn apply_unitary(&mut self, gate: &Gate) -> Result<()> {
        for &t in gate.targets() {
            if t >= self.n_qubits {
                return Err(Error::InvalidTarget {
                    target: t,
                    n_qubits: self.n_qubits,
                });
            }
        }
        let dim = self.dim();
        // U ρ: the gate acts on each column; columns are stride-dim slices,
        // so work on the transpose twice: (U (U ρ†)†)† = U ρ U†.
        for _ in 0..2 {
            self.conjugate_transpose_in_place();
            let mut column = vec![Complex64::ZERO; dim];
            for c in 0..dim {
                for (r, slot) in column.iter_mut().enumerate() {
                    *slot = self.mat[r * dim + c];
                }
                apply_gate_kernel(&mut column, gate);
                for (r, value) in column.iter().enumerate() {
                    self.mat[r * dim + c] = *value;
                }
            }
        }
        Ok(())
    }

    fn conjugate_transpose_in_place(&mut self) {
        let dim = self.dim();
        for r in 0..dim {
            for c in r..dim {
                let a = self.mat[r * dim + c].conj();
                let b = self.mat[c * dim + r].conj();
                self.mat[r * dim + c] = b;
                self.mat[c * dim + r] = a;
            }
        }
    }
}

/// Global depolarizing channel E(ρ) = (1−λ)ρ + λ·Tr[ρ]·I/2^n. The admissible
/// range extends to 4^n/(4^n − 1), slightly past 1.
pub fn depolarize_density(rho: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
    let four_n = 4.0f64.powi(rho.n_qubits() as i32);
    let max_lambda = four_n / (four_n - 1.0);
    if !(0.0..=max_lambda).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing parameter {lambda} outside [0, {max_lambda}]"
        )));
    }
    let dim = rho.dim();
    let mixed = rho.trace().re / dim as f64;
    let mut mat = vec![Complex64::ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let mut v = (1.0 - lambda) * rho.entry(r, c);
            if r == c {
                v += lambda * mixed;
            }
            mat[r * dim + c] = v;
        }
    }
    Ok(DensityMatrix {
        n_qubits: rho.n_qubits,
        mat,
    })
}

fn pauli_conjugate(rho: &DensityMatrix, kind: PauliKind, qubit: usize) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    out.apply_unitary(&pauli_gate(kind, qubit))?;
    Ok(out)
}

fn mix_into(acc: &mut DensityMatrix, weight: f64, rho: &DensityMatrix) {
    for (a, b) in acc.mat.iter_mut().zip(&rho.mat) {
        *a += weight * b;
    }
}

/// Single-qubit depolarizing channel in Kraus form:
/// (1 − 3λ/4)ρ + (λ/4)(XρX + YρY + ZρZ). This is exactly the channel the
/// trajectory sampler unravels per slot.
pub fn depolarize_qubit_density(
    rho: &DensityMatrix,
    qubit: usize,
    lambda: f64,
) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing parameter {lambda} outside [0, 1]"
        )));
    }
    let mut out = rho.clone();
    for v in &mut out.mat {
        *v *= 1.0 - 0.75 * lambda;
    }
    for kind in [PauliKind::X, PauliKind::Y, PauliKind::Z] {
        let conj = pauli_conjugate(rho, kind, qubit)?;
        mix_into(&mut out, 0.25 * lambda, &conj);
    }
    Ok(out)
}

/// Sequential bit-flip then phase-flip channel on one qubit.
pub fn pauli_channel_density(
    rho: &DensityMatrix,
    qubit: usize,
    bitflip_p: f64,
    phaseflip_p: f64,
) -> Result<DensityMatrix> {
    for p in [bitflip_p, phaseflip_p] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "flip probability {p} outside [0, 1]"
            )));
        }
    }
    let mut after_bit = rho.clone();
    for v in &mut after_bit.mat {
        *v *= 1.0 - bitflip_p;
    }
    mix_into(
        &mut after_bit,
        bitflip_p,
        &pauli_conjugate(rho, PauliKind::X, qubit)?,
    );
    let mut out = after_bit.clone();
    for v in &mut out.mat {
        *v *= 1.0 - phaseflip_p;
    }
    mix_into(
        &mut out,
        phaseflip_p,
        &pauli_conjugate(&after_bit, PauliKind::Z, qubit)?,
    );
    Ok(out)
}

/// Exact channel the noisy trajectory step averages to: the gate unitary
/// followed, per target qubit, by the single-qubit depolarizing channel and
/// the bit/phase-flip channel.
pub fn apply_noisy_gate_density(
    rho: &DensityMatrix,
    gate: &Gate,
    model: &NoiseModel,
) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    out.apply_unitary(gate)?;
    let lambda = model.lambda_for_arity(gate.arity());
    for &target in gate.targets() {
        out = depolarize_qubit_density(&out, target, lambda)?;
        out = pauli_channel_density(&out, target, model.bitflip_p, model.phaseflip_p)?;
    }
    Ok(out)
}

/// Total-variation distance ½·Σ|p_i − q_i| between two distributions.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qhed::qhed_bidirectional;

    fn basis_state(n: usize, index: usize) -> StateVector {
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[index] = Complex64::ONE;
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let mut amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn noise_model_rejects_out_of_range_parameters() {
        assert!(NoiseModel::new(0.0, 0.0, 1.5, 0.0).is_err());
        assert!(NoiseModel::new(-0.1, 0.0, 0.0, 0.0).is_err());
        assert!(NoiseModel::new(1.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn depolarize_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::from_statevector(&random_state(2, &mut rng)).unwrap();
        let out = depolarize_density(&rho, 0.0).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn depolarize_fully_mixes_a_single_qubit() {
        let rho = DensityMatrix::from_statevector(&basis_state(1, 0)).unwrap();
        let out = depolarize_density(&rho, 1.0).unwrap();
        assert!((out.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!((out.entry(1, 1).re - 0.5).abs() < 1e-15);
        assert!(out.entry(0, 1).norm() < 1e-15);
    }

    #[test]
    fn depolarize_half_mixes_to_three_quarters() {
        let rho = DensityMatrix::from_statevector(&basis_state(1, 0)).unwrap();
        let out = depolarize_density(&rho, 0.5).unwrap();
        assert!((out.entry(0, 0).re - 0.75).abs() < 1e-15);
        assert!((out.entry(1, 1).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn depolarize_rejects_lambda_beyond_stated_range() {
        let rho = DensityMatrix::from_statevector(&basis_state(1, 0)).unwrap();
        // for n = 1 the range tops out at 4/3
        assert!(depolarize_density(&rho, 4.0 / 3.0).is_ok());
        assert!(matches!(
            depolarize_density(&rho, 1.34),
            Err(Error::InvalidArgument(_))
        ));
        assert!(depolarize_density(&rho, -0.1).is_err());
    }

    #[test]
    fn depolarize_preserves_trace_and_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            let rho = DensityMatrix::from_statevector(&random_state(n, &mut rng)).unwrap();
            let out = depolarize_density(&rho, 0.7).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-12);
            assert!(out.trace().im.abs() < 1e-12);
            assert!(out.hermiticity_deviation() < 1e-12);
        }
    }

    #[test]
    fn density_unitary_matches_statevector_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let state = random_state(3, &mut rng);
        let gate = Gate::cx(0, 2).unwrap();
        let mut rho = DensityMatrix::from_statevector(&state).unwrap();
        rho.apply_unitary(&gate).unwrap();
        let mut evolved = state;
        evolved.apply_gate(&gate).unwrap();
        let expect = DensityMatrix::from_statevector(&evolved).unwrap();
        for (a, b) in rho.matrix().iter().zip(expect.matrix()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn all_zero_model_reduces_to_ideal_gate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = random_state(3, &mut rng);
        let gate = Gate::h(1);
        let mut noisy = state.clone();
        apply_noisy_gate(&mut noisy, &gate, &NoiseModel::noiseless(), 42).unwrap();
        let mut ideal = state;
        ideal.apply_gate(&gate).unwrap();
        assert_eq!(noisy.amplitudes(), ideal.amplitudes());
    }

    #[test]
    fn certain_bitflip_flips_the_target() {
        let model = NoiseModel::pauli(1.0, 0.0).unwrap();
        let mut state = basis_state(1, 0);
        // identity gate: phase rotation by zero
        apply_noisy_gate(&mut state, &Gate::phase(0, 0.0), &model, 0).unwrap();
        assert!((state.probability(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn certain_phaseflip_negates_excited_amplitude() {
        let model = NoiseModel::pauli(0.0, 1.0).unwrap();
        let mut state = basis_state(1, 1);
        apply_noisy_gate(&mut state, &Gate::phase(0, 0.0), &model, 0).unwrap();
        assert!((state.amplitudes()[1].re - (-1.0)).abs() < 1e-15);
    }

    #[test]
    fn full_depolarizing_trajectories_match_density_oracle() {
        // identity gate on |0⟩ with λ = 1: the exact channel leaves a
        // uniform mixture; 10^5 trajectories should agree within TV 0.02
        let model = NoiseModel::depolarizing(1.0, 1.0).unwrap();
        let gate = Gate::phase(0, 0.0);
        let rho = DensityMatrix::from_statevector(&basis_state(1, 0)).unwrap();
        let exact = apply_noisy_gate_density(&rho, &gate, &model)
            .unwrap()
            .probabilities();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let shots = 100_000;
        let mut counts = [0u64; 2];
        for _ in 0..shots {
            let mut state = basis_state(1, 0);
            apply_noisy_gate_with(&mut state, &gate, &model, &mut rng).unwrap();
            let u: f64 = rng.gen();
            let idx = usize::from(u >= state.probability(0));
            counts[idx] += 1;
        }
        let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
        assert!((exact[0] - 0.5).abs() < 1e-12);
        assert!(total_variation(&empirical, &exact) < 0.02);
    }

    #[test]
    fn pauli_channel_density_moves_population() {
        let rho = DensityMatrix::from_statevector(&basis_state(1, 0)).unwrap();
        let out = pauli_channel_density(&rho, 0, 1.0, 0.0).unwrap();
        assert!((out.entry(1, 1).re - 1.0).abs() < 1e-15);
        let out = pauli_channel_density(&rho, 0, 0.25, 0.5).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-12);
        assert!((out.entry(1, 1).re - 0.25).abs() < 1e-12);
    }

    #[test]
    fn odd_scan_circuit_equals_shift_then_hadamard() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 1..=5 {
            let state = random_state(n, &mut rng);
            let mut via_gates = state.clone();
            for gate in scan_circuit(Parity::Odd, n) {
                via_gates.apply_gate(&gate).unwrap();
            }
            let mut via_permutation = state;
            via_permutation.amplitude_permutation();
            via_permutation.hadamard_lsb();
            for (a, b) in via_gates
                .amplitudes()
                .iter()
                .zip(via_permutation.amplitudes())
            {
                assert!((a - b).norm() < 1e-12, "mismatch at n={n}");
            }
        }
    }

    #[test]
    fn noiseless_exact_readout_matches_ideal_detector() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let pixels: Vec<u8> = (0..16).map(|_| rng.gen()).collect();
        let img = GrayImage::new(4, 4, pixels).unwrap();
        let noisy = noisy_qhed(&img, &NoiseModel::noiseless(), 0, 7).unwrap();
        let ideal = qhed_bidirectional(&img).unwrap();
        for (a, b) in noisy.values().iter().zip(ideal.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_sampled_readout_converges_to_ideal_detector() {
        let img = GrayImage::new(4, 4, {
            let mut p = vec![0u8; 16];
            for y in 0..4 {
                for x in 2..4 {
                    p[y * 4 + x] = 255;
                }
            }
            p
        })
        .unwrap();
        let noisy = noisy_qhed(&img, &NoiseModel::noiseless(), 50_000, 3).unwrap();
        let ideal = qhed_bidirectional(&img).unwrap();
        for (a, b) in noisy.values().iter().zip(ideal.values()) {
            assert!((a - b).abs() < 0.02, "sampled {a} vs ideal {b}");
        }
    }

    #[test]
    fn disruption_grows_with_depolarizing_strength() {
        // TV between noisy and noiseless scan distributions, averaged over
        // 20 seeds, is monotone in λ
        let img = GrayImage::new(4, 4, (0..16).map(|i| (i * 16) as u8).collect()).unwrap();
        let q = qpie_encode(&img).unwrap();
        let circuit = scan_circuit(Parity::Even, q.state().n_qubits());
        let mut ideal = q.state().clone();
        for gate in &circuit {
            ideal.apply_gate(gate).unwrap();
        }
        let ideal_probs: Vec<f64> = ideal.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let shots = 2000u64;
        let mut mean_tv = Vec::new();
        for lambda in [0.0, 0.1, 0.5] {
            let model = NoiseModel::depolarizing(lambda, lambda).unwrap();
            let mut total = 0.0;
            for seed in 0..20u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
                let mut counts = vec![0u64; ideal_probs.len()];
                for _ in 0..shots {
                    let mut state = q.state().clone();
                    for gate in &circuit {
                        apply_noisy_gate_with(&mut state, gate, &model, &mut rng).unwrap();
                    }
                    let u: f64 = rng.gen();
                    counts[sample_index(&cumulative(&state), u)] += 1;
                }
                let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
                total += total_variation(&empirical, &ideal_probs);
            }
            mean_tv.push(total / 20.0);
        }
        assert!(
            mean_tv[0] <= mean_tv[1] && mean_tv[1] <= mean_tv[2],
            "TV not monotone: {mean_tv:?}"
        );
    }

    #[test]
    fn noisy_runs_are_reproducible_per_seed() {
        let img = GrayImage::new(4, 4, (0..16).map(|i| (i * 13) as u8).collect()).unwrap();
        let model = NoiseModel::new(0.1, 0.1, 0.01, 0.01).unwrap();
        let a = noisy_qhed(&img, &model, 500, 11).unwrap();
        let b = noisy_qhed(&img, &model, 500, 11).unwrap();
        assert_eq!(a, b);
        let c = noisy_qhed(&img, &model, 500, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noisy_patch_workflow_matches_ideal_when_noiseless() {
        let mut pixels = vec![0u8; 1024];
        for y in 0..32 {
            for x in 14..32 {
                pixels[y * 32 + x] = 255;
            }
        }
        let img = GrayImage::new(32, 32, pixels).unwrap();
        let noisy = noisy_qhed_large(&img, 4, 0.25, &NoiseModel::noiseless(), 0, 5).unwrap();
        let ideal = crate::qhed::qhed_large(&img, 4, 0.25).unwrap();
        assert_eq!(noisy, ideal);
    }

    #[test]
    fn density_oracle_rejects_wide_states() {
        let state = StateVector::new(7).unwrap();
        assert!(matches!(
            DensityMatrix::from_statevector(&state),
            Err(Error::Capacity(7))
        ));
    }
}
