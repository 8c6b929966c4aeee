//! Classical-to-quantum image encodings.
//!
//! Four representations of an 8-bit grayscale image:
//!
//! * QPIE — pixel intensities become normalized amplitudes, column-major,
//!   zero-padded to the next power of two. Works for rectangular images.
//! * FRQI — one angle per pixel stored in a color qubit entangled with the
//!   position register; needs a square 2^n × 2^n image on 2n+1 qubits.
//! * NEQR — the 8-bit gray value goes into the basis index itself, giving a
//!   uniform superposition over 2n+8 qubits.
//! * Qubit lattice — one rotation angle per pixel, no joint state at all.
//!
//! Every encoding has an exact decoder so roundtrips are pixel-identical.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::simcore::{StateVector, MAX_QUBITS};

/// 8-bit grayscale image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "image dimensions {rows}x{cols} must be positive"
            )));
        }
        if pixels.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        Ok(GrayImage { rows, cols, pixels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.pixels[y * self.cols + x]
    }

    /// Image with rows and columns swapped.
    pub fn transposed(&self) -> GrayImage {
        let mut pixels = vec![0u8; self.rows * self.cols];
        for y in 0..self.rows {
            for x in 0..self.cols {
                pixels[x * self.rows + y] = self.get(y, x);
            }
        }
        GrayImage {
            rows: self.cols,
            cols: self.rows,
            pixels,
        }
    }

    /// Flattens column by column: (I_11, I_21, …, I_r1, I_12, …), i.e. pixel
    /// (y, x) lands at index x·rows + y.
    pub fn column_major_flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.rows * self.cols);
        for x in 0..self.cols {
            for y in 0..self.rows {
                flat.push(self.get(y, x) as f64);
            }
        }
        flat
    }
}

/// Amplitude-encoded image: intensities normalized into a statevector.
#[derive(Clone, Debug)]
pub struct QpieImage {
    state: StateVector,
    rows: usize,
    cols: usize,
    norm: f64,
}

impl QpieImage {
    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The Euclidean norm of the raw intensity vector (intensity units);
    /// multiplying amplitudes by this recovers pixel values.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Angle-encoded square image on 2n+1 qubits (color qubit is the MSB).
#[derive(Clone, Debug)]
pub struct FrqiImage {
    state: StateVector,
    n: usize,
}

impl FrqiImage {
    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// log2 of the image side.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Basis-state-encoded square image on 2n+8 qubits (gray register on top).
#[derive(Clone, Debug)]
pub struct NeqrImage {
    state: StateVector,
    n: usize,
}

impl NeqrImage {
    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// One-qubit-per-pixel lattice: just the rotation angles, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeImage {
    rows: usize,
    cols: usize,
    qubit_angles: Vec<f64>,
}

impl LatticeImage {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn qubit_angles(&self) -> &[f64] {
        &self.qubit_angles
    }

    pub fn angle(&self, y: usize, x: usize) -> f64 {
        self.qubit_angles[y * self.cols + x]
    }
}

/// Qubits needed to index `pixel_count` amplitudes (at least one).
pub fn qubits_for_pixels(pixel_count: usize) -> usize {
    (pixel_count.next_power_of_two().trailing_zeros() as usize).max(1)
}

/// Side exponent n for a square 2^n × 2^n image.
fn square_side_exponent(img: &GrayImage) -> Result<usize> {
    if img.rows() != img.cols() || !img.rows().is_power_of_two() {
        return Err(Error::Shape(format!(
            "encoding needs a square power-of-two image, got {}x{}",
            img.rows(),
            img.cols()
        )));
    }
    Ok(img.rows().trailing_zeros() as usize)
}

/// Encodes pixel intensities as amplitudes: amplitude i = I'(i)/‖I'‖ over the
/// column-major flattening I', zero-padded to the next power of two.
pub fn qpie_encode(img: &GrayImage) -> Result<QpieImage> {
    let flat = img.column_major_flatten();
    let norm = flat.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let n_qubits = qubits_for_pixels(flat.len());
    let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
    for (a, v) in amps.iter_mut().zip(&flat) {
        *a = Complex64::new(v / norm, 0.0);
    }
    Ok(QpieImage {
        state: StateVector::from_amplitudes(amps)?,
        rows: img.rows(),
        cols: img.cols(),
        norm,
    })
}

/// Inverse of [`qpie_encode`]: pixel = round(amplitude × norm), clamped.
pub fn qpie_decode(q: &QpieImage) -> GrayImage {
    let amps = q.state.amplitudes();
    let mut pixels = vec![0u8; q.rows * q.cols];
    for x in 0..q.cols {
        for y in 0..q.rows {
            let v = (amps[x * q.rows + y].re * q.norm).round();
            pixels[y * q.cols + x] = v.clamp(0.0, 255.0) as u8;
        }
    }
    GrayImage {
        rows: q.rows,
        cols: q.cols,
        pixels,
    }
}

/// Encodes each pixel as an angle θ = (pixel/255)·(π/2) carried by a color
/// qubit: position i holds the pair (sin θ, cos θ)/2^n on the color 0/1
/// branches. Position index is (y << n) | x.
pub fn frqi_encode(img: &GrayImage) -> Result<FrqiImage> {
    let n = square_side_exponent(img)?;
    let n_qubits = 2 * n + 1;
    let scale = 0.5f64.powi(n as i32);
    let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
    for y in 0..img.rows() {
        for x in 0..img.cols() {
            let theta = img.get(y, x) as f64 / 255.0 * FRAC_PI_2;
            let pos = (y << n) | x;
            amps[pos] = Complex64::new(theta.sin() * scale, 0.0);
            amps[(1 << (2 * n)) | pos] = Complex64::new(theta.cos() * scale, 0.0);
        }
    }
    Ok(FrqiImage {
        state: StateVector::from_amplitudes(amps)?,
        n,
    })
}

/// Inverse of [`frqi_encode`]: recovers each angle via atan2 of the
/// amplitude pair, then maps back to an 8-bit pixel.
pub fn frqi_decode(f: &FrqiImage) -> GrayImage {
    let n = f.n;
    let side = 1usize << n;
    let amps = f.state.amplitudes();
    let mut pixels = vec![0u8; side * side];
    for y in 0..side {
        for x in 0..side {
            let pos = (y << n) | x;
            let sin_part = amps[pos].re;
            let cos_part = amps[(1 << (2 * n)) | pos].re;
            let theta = sin_part.atan2(cos_part);
            pixels[y * side + x] = (theta / FRAC_PI_2 * 255.0).round().clamp(0.0, 255.0) as u8;
        }
    }
    GrayImage {
        rows: side,
        cols: side,
        pixels,
    }
}

/// Encodes the 8-bit gray value into the basis index: state
/// (gray << 2n) | (y << n) | x gets amplitude 2^{-n}.
pub fn neqr_encode(img: &GrayImage) -> Result<NeqrImage> {
    let n = square_side_exponent(img)?;
    let n_qubits = 2 * n + 8;
    if n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(n_qubits));
    }
    let scale = 0.5f64.powi(n as i32);
    let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
    for y in 0..img.rows() {
        for x in 0..img.cols() {
            let gray = img.get(y, x) as usize;
            amps[(gray << (2 * n)) | (y << n) | x] = Complex64::new(scale, 0.0);
        }
    }
    Ok(NeqrImage {
        state: StateVector::from_amplitudes(amps)?,
        n,
    })
}

/// Inverse of [`neqr_encode`]: reads the gray register carrying the largest
/// amplitude at each position (the unique nonzero one for encoded states).
pub fn neqr_decode(m: &NeqrImage) -> GrayImage {
    let n = m.n;
    let side = 1usize << n;
    let amps = m.state.amplitudes();
    let mut pixels = vec![0u8; side * side];
    for y in 0..side {
        for x in 0..side {
            let pos = (y << n) | x;
            let mut best = (0usize, 0.0f64);
            for gray in 0..256usize {
                let mag = amps[(gray << (2 * n)) | pos].norm_sqr();
                if mag > best.1 {
                    best = (gray, mag);
                }
            }
            pixels[y * side + x] = best.0 as u8;
        }
    }
    GrayImage {
        rows: side,
        cols: side,
        pixels,
    }
}

/// One rotation angle per pixel: θ = (pixel/255)·π.
pub fn lattice_encode(img: &GrayImage) -> LatticeImage {
    LatticeImage {
        rows: img.rows(),
        cols: img.cols(),
        qubit_angles: img
            .pixels()
            .iter()
            .map(|&p| p as f64 / 255.0 * PI)
            .collect(),
    }
}
