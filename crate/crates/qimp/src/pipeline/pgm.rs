//! PGM image files: ASCII (P2) and binary (P5) grayscale with maxval ≤ 255.
//!
//! Save→load roundtrips are pixel-exact. Gradient maps are rescaled to
//! [0, 255] for saving; edge maps save as 0/255.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::encode::GrayImage;
use crate::error::{Error, Result};
use crate::qhed::{EdgeMap, GradientMap};

/// Header tokens separated by whitespace, with `#` comments running to end
/// of line. Returns the token and the byte position just past it.
fn next_token(bytes: &[u8], mut pos: usize) -> Result<(String, usize)> {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        break;
    }
    let start = pos;
    while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
        pos += 1;
    }
    if start == pos {
        return Err(Error::Format("truncated PGM header".into()));
    }
    Ok((
        String::from_utf8_lossy(&bytes[start..pos]).into_owned(),
        pos,
    ))
}

fn parse_header_value(token: &str, what: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::Format(format!("bad PGM {what}: {token:?}")))
}

/// Loads a P2 or P5 grayscale image.
pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let (magic, mut pos) = next_token(&bytes, 0)?;
    if magic != "P2" && magic != "P5" {
        return Err(Error::Format(format!("unsupported PGM magic {magic:?}")));
    }
    let (tok, p) = next_token(&bytes, pos)?;
    let cols = parse_header_value(&tok, "width")?;
    let (tok, p) = next_token(&bytes, p)?;
    let rows = parse_header_value(&tok, "height")?;
    let (tok, p) = next_token(&bytes, p)?;
    let maxval = parse_header_value(&tok, "maxval")?;
    pos = p;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "PGM maxval {maxval} outside the supported 1..=255"
        )));
    }

    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format("PGM dimensions overflow".into()))?;
    let pixels = if magic == "P5" {
        // Exactly one whitespace byte separates the header from the raster.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::Format("missing raster separator".into()));
        }
        pos += 1;
        if bytes.len() < pos + n {
            return Err(Error::Format("truncated PGM raster".into()));
        }
        bytes[pos..pos + n].to_vec()
    } else {
        let mut pixels = Vec::with_capacity(n);
        let mut p = pos;
        for _ in 0..n {
            let (tok, q) = next_token(&bytes, p)?;
            let v = parse_header_value(&tok, "pixel")?;
            if v > maxval {
                return Err(Error::Format(format!(
                    "pixel {v} exceeds declared maxval {maxval}"
                )));
            }
            pixels.push(v as u8);
            p = q;
        }
        pixels
    };
    GrayImage::new(rows, cols, pixels)
}

/// Saves a grayscale image as binary P5 with maxval 255.
pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", img.cols(), img.rows())?;
    out.write_all(img.pixels())?;
    out.flush()?;
    Ok(())
}

/// Saves a gradient map as P5, linearly rescaled so the maximum gradient
/// maps to 255. An all-zero map saves as all black.
pub fn save_gradient_pgm(map: &GradientMap, path: &Path) -> Result<()> {
    let peak = map.max_value();
    let pixels: Vec<u8> = map
        .values()
        .iter()
        .map(|&v| {
            if peak <= 0.0 {
                0
            } else {
                (v / peak * 255.0).round().clamp(0.0, 255.0) as u8
            }
        })
        .collect();
    save_pgm(&GrayImage::new(map.rows(), map.cols(), pixels)?, path)
}

/// Saves an edge map as P5 with edges at 255 on a black background.
pub fn save_edge_pgm(map: &EdgeMap, path: &Path) -> Result<()> {
    let pixels: Vec<u8> = map
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    save_pgm(&GrayImage::new(map.rows(), map.cols(), pixels)?, path)
}
