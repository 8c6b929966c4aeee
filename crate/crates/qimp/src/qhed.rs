//! Hadamard-based quantum edge detection.
//!
//! A QPIE-encoded image holds normalized intensities as amplitudes in
//! column-major order, so a Hadamard on qubit 0 turns each adjacent
//! amplitude pair into a (sum, difference) pair: the odd-indexed branch
//! carries (c_i - c_{i+1})/√2, a vertical-neighbor gradient. An amplitude
//! permutation (cyclic downshift) before the Hadamard exposes the pairs the
//! even scan misses; transposing the image turns the same machinery into a
//! horizontal-neighbor scan.
//!
//! Large images follow the patch workflow: resize to 32×32, split into
//! small tiles, scan each tile, merge, threshold.

use crate::encode::{qpie_encode, GrayImage};
use crate::error::{Error, Result};

/// Side length the patch workflow normalizes input images to.
pub const LARGE_IMAGE_SIDE: usize = 32;

/// Default relative threshold used to binarize gradient maps.
pub const DEFAULT_THRESHOLD: f64 = 0.25;

/// Which adjacent-pair family a scan covers: even pairs (0,1),(2,3),… or
/// odd pairs (1,2),(3,4),… of the column-major amplitude vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Non-negative gradient magnitudes, row-major, same shape as the source.
/// Values are in normalized-intensity units: |c_i − c_{i+1}|/√2 over the
/// unit-norm amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl GradientMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "gradient map {rows}x{cols} needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "gradient values must be finite and non-negative".into(),
            ));
        }
        Ok(GradientMap { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        GradientMap {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.cols + x]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Binary edge mask, row-major, same shape as the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl EdgeMap {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 || bits.len() != rows * cols {
            return Err(Error::Shape(format!(
                "edge map {rows}x{cols} needs {} bits, got {}",
                rows * cols,
                bits.len()
            )));
        }
        Ok(EdgeMap { rows, cols, bits })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.cols + x]
    }

    /// Number of set pixels.
    pub fn set_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// One tile of a split image, with its top-left corner in source coordinates.
#[derive(Clone, Debug)]
pub struct Patch {
    origin_row: usize,
    origin_col: usize,
    image: GrayImage,
}

impl Patch {
    pub fn origin(&self) -> (usize, usize) {
        (self.origin_row, self.origin_col)
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }
}

/// Regular non-overlapping tiling of an (edge-padded) image.
#[derive(Clone, Debug)]
pub struct PatchGrid {
    patch_side: usize,
    source_rows: usize,
    source_cols: usize,
    padded_rows: usize,
    padded_cols: usize,
    patches: Vec<Patch>,
}

impl PatchGrid {
    pub fn patch_side(&self) -> usize {
        self.patch_side
    }

    /// Original (pre-padding) image dimensions.
    pub fn source_dims(&self) -> (usize, usize) {
        (self.source_rows, self.source_cols)
    }

    pub fn padded_dims(&self) -> (usize, usize) {
        (self.padded_rows, self.padded_cols)
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }
}

/// For a scan over `len` amplitudes of an image with `rows` rows, lists
/// `(odd_branch_index, flat_index)`: the basis state whose amplitude
/// carries a pair difference, and the column-major flat position of the
/// pair's first pixel. Pairs whose elements are not vertical spatial
/// neighbors are dropped: the odd scan's wraparound pair (last, first) and
/// any pair straddling a column boundary (the flat vector is column-major,
/// so index `k·rows − 1` is not adjacent to `k·rows` in the image).
pub(crate) fn scan_pair_slots(parity: Parity, len: usize, rows: usize) -> Vec<(usize, usize)> {
    let within_column = |first: usize| first % rows != rows - 1;
    match parity {
        Parity::Even => (0..len / 2)
            .map(|k| (2 * k + 1, 2 * k))
            .filter(|&(_, first)| within_column(first))
            .collect(),
        Parity::Odd => (0..len / 2 - 1)
            .map(|k| (2 * k + 1, 2 * k + 1))
            .filter(|&(_, first)| within_column(first))
            .collect(),
    }
}

/// Builds a row-major gradient map from (column-major flat index, magnitude)
/// entries, ignoring entries that fall in the zero padding.
pub(crate) fn place_gradients(
    rows: usize,
    cols: usize,
    entries: impl IntoIterator<Item = (usize, f64)>,
) -> GradientMap {
    let mut values = vec![0.0; rows * cols];
    for (flat, magnitude) in entries {
        if flat < rows * cols {
            let (y, x) = (flat % rows, flat / rows);
            values[y * cols + x] = magnitude;
        }
    }
    GradientMap { rows, cols, values }
}

/// Single-parity scan: encodes the image, optionally shifts, applies the
/// qubit-0 Hadamard, and reads the odd-indexed branch as neighbor
/// differences. Covers vertical neighbor pairs of the given parity; the
/// other parity's positions stay zero.
pub fn qhed_scan(img: &GrayImage, parity: Parity) -> Result<GradientMap> {
    let q = qpie_encode(img)?;
    let mut state = q.state().clone();
    if parity == Parity::Odd {
        state.amplitude_permutation();
    }
    state.hadamard_lsb();
    let amps = state.amplitudes();
    let entries = scan_pair_slots(parity, amps.len(), img.rows())
        .into_iter()
        .map(|(branch, flat)| (flat, amps[branch].norm()));
    Ok(place_gradients(img.rows(), img.cols(), entries))
}

/// Full four-scan edge detector: even and odd scans of the image (vertical
/// pairs) and of its transpose (horizontal pairs), combined by elementwise
/// maximum.
pub fn qhed_bidirectional(img: &GrayImage) -> Result<GradientMap> {
    let even = qhed_scan(img, Parity::Even)?;
    let odd = qhed_scan(img, Parity::Odd)?;
    let transposed = img.transposed();
    let even_t = qhed_scan(&transposed, Parity::Even)?;
    let odd_t = qhed_scan(&transposed, Parity::Odd)?;
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
    Ok(GradientMap {
        rows: img.rows(),
        cols: img.cols(),
        values,
    })
}

/// Binarizes a gradient map at `t_rel` times its maximum value. An all-zero
/// map stays all zero.
pub fn threshold(g: &GradientMap, t_rel: f64) -> Result<EdgeMap> {
    if !(t_rel > 0.0 && t_rel <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "relative threshold {t_rel} outside (0, 1]"
        )));
    }
    let max = g.max_value();
    let bits = if max == 0.0 {
        vec![false; g.values.len()]
    } else {
        let cut = t_rel * max;
        g.values.iter().map(|&v| v >= cut).collect()
    };
    Ok(EdgeMap {
        rows: g.rows,
        cols: g.cols,
        bits,
    })
}

/// Splits an image into non-overlapping `patch_side`×`patch_side` tiles,
/// edge-replicating pixels up to a multiple of the patch side first.
pub fn split_patches(img: &GrayImage, patch_side: usize) -> Result<PatchGrid> {
    if patch_side < 2 {
        return Err(Error::InvalidArgument(format!(
            "patch side {patch_side} must be at least 2"
        )));
    }
    let padded_rows = img.rows().div_ceil(patch_side) * patch_side;
    let padded_cols = img.cols().div_ceil(patch_side) * patch_side;
    let mut patches = Vec::new();
    for origin_row in (0..padded_rows).step_by(patch_side) {
        for origin_col in (0..padded_cols).step_by(patch_side) {
            let mut pixels = Vec::with_capacity(patch_side * patch_side);
            for dy in 0..patch_side {
                for dx in 0..patch_side {
                    let y = (origin_row + dy).min(img.rows() - 1);
                    let x = (origin_col + dx).min(img.cols() - 1);
                    pixels.push(img.get(y, x));
                }
            }
            patches.push(Patch {
                origin_row,
                origin_col,
                image: GrayImage::new(patch_side, patch_side, pixels)?,
            });
        }
    }
    Ok(PatchGrid {
        patch_side,
        source_rows: img.rows(),
        source_cols: img.cols(),
        padded_rows,
        padded_cols,
        patches,
    })
}

/// Reassembles per-patch gradient maps into a full map, cropping the
/// padding introduced by [`split_patches`].
pub fn merge_patches(grid: &PatchGrid, maps: &[GradientMap]) -> Result<GradientMap> {
    if maps.len() != grid.patches.len() {
        return Err(Error::Consistency(format!(
            "grid has {} patches but {} maps were provided",
            grid.patches.len(),
            maps.len()
        )));
    }
    let mut padded = vec![0.0; grid.padded_rows * grid.padded_cols];
    for (patch, map) in grid.patches.iter().zip(maps) {
        if map.rows() != grid.patch_side || map.cols() != grid.patch_side {
            return Err(Error::Consistency(format!(
                "patch map is {}x{}, expected {}x{}",
                map.rows(),
                map.cols(),
                grid.patch_side,
                grid.patch_side
            )));
        }
        for dy in 0..grid.patch_side {
            for dx in 0..grid.patch_side {
                let y = patch.origin_row + dy;
                let x = patch.origin_col + dx;
                padded[y * grid.padded_cols + x] = map.get(dy, dx);
            }
        }
    }
    let mut values = vec![0.0; grid.source_rows * grid.source_cols];
    for y in 0..grid.source_rows {
        for x in 0..grid.source_cols {
            values[y * grid.source_cols + x] = padded[y * grid.padded_cols + x];
        }
    }
    Ok(GradientMap {
        rows: grid.source_rows,
        cols: grid.source_cols,
        values,
    })
}

/// Bilinear resampling to a new size, pixel-center aligned.
pub fn bilinear_resize(img: &GrayImage, new_rows: usize, new_cols: usize) -> Result<GrayImage> {
    if new_rows == 0 || new_cols == 0 {
        return Err(Error::Shape("resize target must be positive".into()));
    }
    let sy = img.rows() as f64 / new_rows as f64;
    let sx = img.cols() as f64 / new_cols as f64;
    let mut pixels = Vec::with_capacity(new_rows * new_cols);
    for y in 0..new_rows {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.rows() - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(img.rows() - 1);
        let wy = fy - y0 as f64;
        for x in 0..new_cols {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.cols() - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(img.cols() - 1);
            let wx = fx - x0 as f64;
            let top = img.get(y0, x0) as f64 * (1.0 - wx) + img.get(y0, x1) as f64 * wx;
            let bottom = img.get(y1, x0) as f64 * (1.0 - wx) + img.get(y1, x1) as f64 * wx;
            let v = top * (1.0 - wy) + bottom * wy;
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(new_rows, new_cols, pixels)
}

/// Whole-image edge detection via the patch workflow: normalize to 32×32
/// (bilinear), split into tiles, scan each non-constant tile in both
/// orientations, merge, and threshold. Constant tiles have identically zero
/// gradients and are skipped.
pub fn qhed_large(img: &GrayImage, patch_side: usize, t_rel: f64) -> Result<EdgeMap> {
    let working;
    let img = if img.rows() == LARGE_IMAGE_SIDE && img.cols() == LARGE_IMAGE_SIDE {
        img
    } else {
        working = bilinear_resize(img, LARGE_IMAGE_SIDE, LARGE_IMAGE_SIDE)?;
        &working
    };
    let grid = split_patches(img, patch_side)?;
    let mut maps = Vec::with_capacity(grid.patches().len());
    for patch in grid.patches() {
        let tile = patch.image();
        let first = tile.pixels()[0];
        if tile.pixels().iter().all(|&p| p == first) {
            maps.push(GradientMap::zeros(patch_side, patch_side));
        } else {
            maps.push(qhed_bidirectional(tile)?);
        }
    }
    let merged = merge_patches(&grid, &maps)?;
    threshold(&merged, t_rel)
}
