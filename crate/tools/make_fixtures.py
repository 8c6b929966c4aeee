#!/usr/bin/env python3
"""Build the IDX dataset fixtures under data/.

The handwritten-digit images from scikit-learn's bundled `load_digits`
(8x8, 17 gray levels) are upscaled to the MNIST frame: 3x nearest-neighbor
to 24x24, a 2-pixel black border to 28x28, and intensities stretched to
0..255. The output files use the standard IDX layout (big-endian,
magic 2051 for images and 2049 for labels), so genuine MNIST or
fashion-MNIST files can be dropped in as replacements without any code
changes.

Usage: python3 tools/make_fixtures.py [out_dir]
"""

import struct
import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits


def upscale(img8: np.ndarray) -> np.ndarray:
    scaled = np.rint(img8 * (255.0 / 16.0)).clip(0, 255).astype(np.uint8)
    big = np.kron(scaled, np.ones((3, 3), dtype=np.uint8))
    return np.pad(big, 2, mode="constant")


def write_idx_images(path: Path, images: np.ndarray) -> None:
    count, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 2051, count, rows, cols))
        f.write(images.tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data")
    out_dir.mkdir(parents=True, exist_ok=True)

    digits = load_digits()
    images = np.stack([upscale(img) for img in digits.images])
    labels = digits.target

    write_idx_images(out_dir / "digits-images.idx", images)
    write_idx_labels(out_dir / "digits-labels.idx", labels)
    print(f"wrote {len(labels)} images to {out_dir}/digits-images.idx "
          f"({images.shape[1]}x{images.shape[2]})")
    counts = np.bincount(labels)
    print("class counts:", dict(enumerate(counts.tolist())))


if __name__ == "__main__":
    main()
