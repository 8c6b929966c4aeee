//! IDX dataset files (the MNIST distribution format) and train/test
//! splitting.
//!
//! Images live in a magic-2051 file (count × rows × cols unsigned bytes),
//! labels in a magic-2049 file; both are big-endian and paired in order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encode::GrayImage;
use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 2051;
const LABELS_MAGIC: u32 = 2049;

/// Labeled image collection.
#[derive(Clone, Debug)]
pub struct Dataset {
    images: Vec<GrayImage>,
    labels: Vec<usize>,
}

impl Dataset {
    pub fn new(images: Vec<GrayImage>, labels: Vec<usize>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(Error::Consistency(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        Ok(Dataset { images, labels })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[GrayImage] {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Keeps only samples whose label is in `classes`; an empty class list
    /// keeps everything.
    pub fn filter_classes(&self, classes: &[usize]) -> Dataset {
        if classes.is_empty() {
            return self.clone();
        }
        let mut images = Vec::new();
        let mut labels = Vec::new();
        for (img, &label) in self.images.iter().zip(&self.labels) {
            if classes.contains(&label) {
                images.push(img.clone());
                labels.push(label);
            }
        }
        Dataset { images, labels }
    }

    /// Seeded shuffle followed by a disjoint train/test split.
    pub fn split_train_test(
        &self,
        n_train: usize,
        n_test: usize,
        seed: u64,
    ) -> Result<(Dataset, Dataset)> {
        if n_train == 0 || n_test == 0 {
            return Err(Error::InvalidArgument(
                "train and test counts must be positive".into(),
            ));
        }
        if n_train + n_test > self.len() {
            return Err(Error::InvalidArgument(format!(
                "split needs {} samples but the dataset has {}",
                n_train + n_test,
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let pick = |idxs: &[usize]| Dataset {
            images: idxs.iter().map(|&i| self.images[i].clone()).collect(),
            labels: idxs.iter().map(|&i| self.labels[i]).collect(),
        };
        Ok((
            pick(&order[..n_train]),
            pick(&order[n_train..n_train + n_test]),
        ))
    }
}

fn read_u32_be(reader: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader.read_exact(&mut buf)?;
    Ok(u32::from_be_bytes(buf))
}

/// Loads paired image and label IDX files into a dataset.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let mut images_file = BufReader::new(File::open(images_path)?);
    let magic = read_u32_be(&mut images_file)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "image file magic {magic}, expected {IMAGES_MAGIC}"
        )));
    }
    let count = read_u32_be(&mut images_file)? as usize;
    let rows = read_u32_be(&mut images_file)? as usize;
    let cols = read_u32_be(&mut images_file)? as usize;
    let mut images = Vec::with_capacity(count);
    let mut pixels = vec![0u8; rows * cols];
    for _ in 0..count {
        images_file.read_exact(&mut pixels)?;
        images.push(GrayImage::new(rows, cols, pixels.clone())?);
    }

    let mut labels_file = BufReader::new(File::open(labels_path)?);
    let magic = read_u32_be(&mut labels_file)?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format(format!(
            "label file magic {magic}, expected {LABELS_MAGIC}"
        )));
    }
    let label_count = read_u32_be(&mut labels_file)? as usize;
    if label_count != count {
        return Err(Error::Consistency(format!(
            "{count} images but {label_count} labels"
        )));
    }
    let mut raw = vec![0u8; label_count];
    labels_file.read_exact(&mut raw)?;
    let labels = raw.into_iter().map(usize::from).collect();

    Dataset::new(images, labels)
}

/// Writes images as a magic-2051 IDX file. All images must share one shape.
pub fn write_idx_images(path: &Path, images: &[GrayImage]) -> Result<()> {
    if images.is_empty() {
        return Err(Error::InvalidArgument("no images to write".into()));
    }
    let (rows, cols) = (images[0].rows(), images[0].cols());
    if images.iter().any(|i| i.rows() != rows || i.cols() != cols) {
        return Err(Error::Shape(
            "images in an IDX file must share one shape".into(),
        ));
    }
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&IMAGES_MAGIC.to_be_bytes())?;
    out.write_all(&(images.len() as u32).to_be_bytes())?;
    out.write_all(&(rows as u32).to_be_bytes())?;
    out.write_all(&(cols as u32).to_be_bytes())?;
    for img in images {
        out.write_all(img.pixels())?;
    }
    out.flush()?;
    Ok(())
}

/// Writes labels as a magic-2049 IDX file. Labels must fit a byte.
pub fn write_idx_labels(path: &Path, labels: &[usize]) -> Result<()> {
    if labels.iter().any(|&l| l > u8::MAX as usize) {
        return Err(Error::InvalidArgument(
            "IDX labels must fit in a byte".into(),
        ));
    }
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&LABELS_MAGIC.to_be_bytes())?;
    out.write_all(&(labels.len() as u32).to_be_bytes())?;
    let bytes: Vec<u8> = labels.iter().map(|&l| l as u8).collect();
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}
