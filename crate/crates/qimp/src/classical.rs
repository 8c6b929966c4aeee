//! Classical image-processing baselines.
//!
//! These serve two roles: reference implementations the quantum edge
//! detector is compared against, and conventional feature extractors
//! (smoothing, gradient filters, Canny, Harris corners). All filters share
//! one correlation engine with replicate-border handling, so constant
//! images never produce spurious border responses.

use crate::encode::GrayImage;
use crate::error::{Error, Result};
use crate::qhed::{EdgeMap, GradientMap};

/// Real-valued image plane, row-major (signed values allowed).
#[derive(Clone, Debug, PartialEq)]
pub struct RealMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl RealMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "map {rows}x{cols} needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("map values must be finite".into()));
        }
        Ok(RealMap { rows, cols, values })
    }

    pub fn from_gray(img: &GrayImage) -> RealMap {
        RealMap {
            rows: img.rows(),
            cols: img.cols(),
            values: img.pixels().iter().map(|&p| p as f64).collect(),
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
}

/// Small correlation mask with odd dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel2D {
    height: usize,
    width: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    pub fn new(height: usize, width: usize, weights: Vec<f64>) -> Result<Self> {
        if height.is_multiple_of(2) || width.is_multiple_of(2) || height == 0 || width == 0 {
            return Err(Error::Shape(format!(
                "kernel dimensions {height}x{width} must be odd"
            )));
        }
        if weights.len() != height * width {
            return Err(Error::Shape(format!(
                "{height}x{width} kernel needs {} weights, got {}",
                height * width,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "kernel weights must be finite".into(),
            ));
        }
        Ok(Kernel2D {
            height,
            width,
            weights,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Horizontal-derivative Sobel mask.
    pub fn sobel_x() -> Kernel2D {
        Kernel2D {
            height: 3,
            width: 3,
            weights: vec![-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0],
        }
    }

    /// Vertical-derivative Sobel mask.
    pub fn sobel_y() -> Kernel2D {
        Kernel2D {
            height: 3,
            width: 3,
            weights: vec![-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0],
        }
    }

    pub fn prewitt_x() -> Kernel2D {
        Kernel2D {
            height: 3,
            width: 3,
            weights: vec![-1.0, 0.0, 1.0, -1.0, 0.0, 1.0, -1.0, 0.0, 1.0],
        }
    }

    pub fn prewitt_y() -> Kernel2D {
        Kernel2D {
            height: 3,
            width: 3,
            weights: vec![-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        }
    }

    /// 4-neighbor Laplacian mask.
    pub fn laplacian_4() -> Kernel2D {
        Kernel2D {
            height: 3,
            width: 3,
            weights: vec![0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0],
        }
    }
}

/// Correlation of `map` with `kernel`, replicate-border, same output shape.
pub fn convolve2d(map: &RealMap, kernel: &Kernel2D) -> Result<RealMap> {
    if kernel.height > map.rows || kernel.width > map.cols {
        return Err(Error::Shape(format!(
            "{}x{} kernel larger than {}x{} image",
            kernel.height, kernel.width, map.rows, map.cols
        )));
    }
    let (hh, hw) = (kernel.height as isize / 2, kernel.width as isize / 2);
    let mut values = vec![0.0; map.rows * map.cols];
    for y in 0..map.rows as isize {
        for x in 0..map.cols as isize {
            let mut acc = 0.0;
            for ky in 0..kernel.height as isize {
                let sy = (y + ky - hh).clamp(0, map.rows as isize - 1) as usize;
                for kx in 0..kernel.width as isize {
                    let sx = (x + kx - hw).clamp(0, map.cols as isize - 1) as usize;
                    acc += kernel.weights[(ky * kernel.width as isize + kx) as usize]
                        * map.values[sy * map.cols + sx];
                }
            }
            values[(y * map.cols as isize + x) as usize] = acc;
        }
    }
    Ok(RealMap {
        rows: map.rows,
        cols: map.cols,
        values,
    })
}

fn gradient_magnitude(img: &GrayImage, kx: Kernel2D, ky: Kernel2D) -> Result<GradientMap> {
    if img.rows() < 3 || img.cols() < 3 {
        return Err(Error::Shape(format!(
            "gradient filters need at least a 3x3 image, got {}x{}",
            img.rows(),
            img.cols()
        )));
    }
    let map = RealMap::from_gray(img);
    let gx = convolve2d(&map, &kx)?;
    let gy = convolve2d(&map, &ky)?;
    let values = gx
        .values
        .iter()
        .zip(&gy.values)
        .map(|(a, b)| a.hypot(*b))
        .collect();
    GradientMap::new(img.rows(), img.cols(), values)
}

/// √(Gx² + Gy²) of the Sobel derivative pair.
pub fn sobel_edges(img: &GrayImage) -> Result<GradientMap> {
    gradient_magnitude(img, Kernel2D::sobel_x(), Kernel2D::sobel_y())
}

/// √(Gx² + Gy²) of the Prewitt derivative pair.
pub fn prewitt_edges(img: &GrayImage) -> Result<GradientMap> {
    gradient_magnitude(img, Kernel2D::prewitt_x(), Kernel2D::prewitt_y())
}

/// Signed 4-neighbor Laplacian response.
pub fn laplacian_edges(img: &GrayImage) -> Result<RealMap> {
    if img.rows() < 3 || img.cols() < 3 {
        return Err(Error::Shape(format!(
            "gradient filters need at least a 3x3 image, got {}x{}",
            img.rows(),
            img.cols()
        )));
    }
    convolve2d(&RealMap::from_gray(img), &Kernel2D::laplacian_4())
}

fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable Gaussian blur of radius ⌈3σ⌉, kernel normalized to sum 1.
pub fn gaussian_smooth(map: &RealMap, sigma: f64) -> Result<RealMap> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gaussian sigma {sigma} must be positive and finite"
        )));
    }
    let taps = gaussian_taps(sigma);
    let radius = taps.len() as isize / 2;
    let mut horizontal = vec![0.0; map.rows * map.cols];
    for y in 0..map.rows {
        for x in 0..map.cols as isize {
            let mut acc = 0.0;
            for (i, t) in taps.iter().enumerate() {
                let sx = (x + i as isize - radius).clamp(0, map.cols as isize - 1) as usize;
                acc += t * map.values[y * map.cols + sx];
            }
            horizontal[y * map.cols + x as usize] = acc;
        }
    }
    let mut values = vec![0.0; map.rows * map.cols];
    for y in 0..map.rows as isize {
        for x in 0..map.cols {
            let mut acc = 0.0;
            for (i, t) in taps.iter().enumerate() {
                let sy = (y + i as isize - radius).clamp(0, map.rows as isize - 1) as usize;
                acc += t * horizontal[sy * map.cols + x];
            }
            values[(y as usize) * map.cols + x] = acc;
        }
    }
    Ok(RealMap {
        rows: map.rows,
        cols: map.cols,
        values,
    })
}

/// Canny detector: Gaussian smooth, Sobel magnitude and direction,
/// non-maximum suppression along the quantized gradient direction, then
/// double threshold with 8-connected hysteresis. Thresholds are absolute
/// gradient magnitudes.
pub fn canny_edges(img: &GrayImage, sigma: f64, t_low: f64, t_high: f64) -> Result<EdgeMap> {
    if !(t_low > 0.0 && t_low < t_high) {
        return Err(Error::InvalidArgument(format!(
            "canny thresholds need 0 < low < high, got low {t_low}, high {t_high}"
        )));
    }
    if img.rows() < 3 || img.cols() < 3 {
        return Err(Error::Shape(format!(
            "canny needs at least a 3x3 image, got {}x{}",
            img.rows(),
            img.cols()
        )));
    }
    let (rows, cols) = (img.rows(), img.cols());
    let smoothed = gaussian_smooth(&RealMap::from_gray(img), sigma)?;
    let gx = convolve2d(&smoothed, &Kernel2D::sobel_x())?;
    let gy = convolve2d(&smoothed, &Kernel2D::sobel_y())?;
    let mag: Vec<f64> = gx
        .values
        .iter()
        .zip(&gy.values)
        .map(|(a, b)| a.hypot(*b))
        .collect();

    // non-maximum suppression: keep a pixel only if it is not smaller than
    // both neighbors along its gradient direction (4 bins)
    let at = |y: isize, x: isize| -> f64 {
        if y < 0 || x < 0 || y >= rows as isize || x >= cols as isize {
            0.0
        } else {
            mag[y as usize * cols + x as usize]
        }
    };
    let mut thin = vec![0.0; rows * cols];
    for y in 0..rows as isize {
        for x in 0..cols as isize {
            let i = (y as usize) * cols + x as usize;
            if mag[i] == 0.0 {
                continue;
            }
            let mut angle = gy.values[i].atan2(gx.values[i]).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (da, db) = if !(22.5..157.5).contains(&angle) {
                ((0, 1), (0, -1)) // horizontal gradient
            } else if angle < 67.5 {
                ((-1, 1), (1, -1))
            } else if angle < 112.5 {
                ((-1, 0), (1, 0)) // vertical gradient
            } else {
                ((-1, -1), (1, 1))
            };
            // strict on one side so a symmetric 2-pixel ridge thins to one
            if mag[i] > at(y + da.0, x + da.1) && mag[i] >= at(y + db.0, x + db.1) {
                thin[i] = mag[i];
            }
        }
    }

    // double threshold + hysteresis: strong pixels seed a flood fill that
    // promotes 8-connected weak pixels
    let mut state = vec![0u8; rows * cols]; // 0 none, 1 weak, 2 edge
    let mut stack = Vec::new();
    for (i, &v) in thin.iter().enumerate() {
        if v >= t_high {
            state[i] = 2;
            stack.push(i);
        } else if v >= t_low {
            state[i] = 1;
        }
    }
    while let Some(i) = stack.pop() {
        let (y, x) = ((i / cols) as isize, (i % cols) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (ny, nx) = (y + dy, x + dx);
                if ny < 0 || nx < 0 || ny >= rows as isize || nx >= cols as isize {
                    continue;
                }
                let j = ny as usize * cols + nx as usize;
                if state[j] == 1 {
                    state[j] = 2;
                    stack.push(j);
                }
            }
        }
    }
    EdgeMap::new(rows, cols, state.iter().map(|&s| s == 2).collect())
}

/// Harris corner detector: R = det(M) − k·trace(M)² over the
/// Gaussian-windowed structure tensor M, followed by a 3×3 local-maximum
/// pass and a threshold relative to the strongest response. Returns
/// (row, col) positions sorted lexicographically.
pub fn harris_corners(
    img: &GrayImage,
    k: f64,
    window: usize,
    t_rel: f64,
) -> Result<Vec<(usize, usize)>> {
    if window.is_multiple_of(2) || window < 3 {
        return Err(Error::InvalidArgument(format!(
            "harris window {window} must be odd and at least 3"
        )));
    }
    if !(t_rel > 0.0 && t_rel <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "relative threshold {t_rel} outside (0, 1]"
        )));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "harris k {k} must be positive"
        )));
    }
    if img.rows() < 3 || img.cols() < 3 {
        return Err(Error::Shape(format!(
            "harris needs at least a 3x3 image, got {}x{}",
            img.rows(),
            img.cols()
        )));
    }
    let (rows, cols) = (img.rows(), img.cols());
    let map = RealMap::from_gray(img);
    let ix = convolve2d(&map, &Kernel2D::sobel_x())?;
    let iy = convolve2d(&map, &Kernel2D::sobel_y())?;
    // window the tensor products with a Gaussian whose 3σ support matches
    // the requested window
    let sigma = window as f64 / 6.0;
    let product = |a: &RealMap, b: &RealMap| -> Result<RealMap> {
        let values = a.values.iter().zip(&b.values).map(|(p, q)| p * q).collect();
        gaussian_smooth(&RealMap::new(rows, cols, values)?, sigma)
    };
    let sxx = product(&ix, &ix)?;
    let syy = product(&iy, &iy)?;
    let sxy = product(&ix, &iy)?;
    let mut response = vec![0.0; rows * cols];
    for (i, r) in response.iter_mut().enumerate() {
        let (a, b, c) = (sxx.values[i], sxy.values[i], syy.values[i]);
        let det = a * c - b * b;
        let trace = a + c;
        *r = det - k * trace * trace;
    }
    let r_max = response.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if r_max <= 0.0 {
        return Ok(Vec::new());
    }
    let cut = t_rel * r_max;
    let mut corners = Vec::new();
    for y in 0..rows {
        for x in 0..cols {
            let r = response[y * cols + x];
            if r < cut {
                continue;
            }
            let mut is_peak = true;
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    if dy == 0 && dx == 0 {
                        continue;
                    }
                    let (ny, nx) = (y as isize + dy, x as isize + dx);
                    if ny < 0 || nx < 0 || ny >= rows as isize || nx >= cols as isize {
                        continue;
                    }
                    if response[ny as usize * cols + nx as usize] > r {
                        is_peak = false;
                    }
                }
            }
            if is_peak {
                corners.push((y, x));
            }
        }
    }
    Ok(corners)
}
