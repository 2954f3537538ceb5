"""IDX-format ingestion for MNIST-family datasets, normalization, one-hot
encoding, batching, and fixed-size subset sampling.

The IDX container is big-endian: a 4-byte magic (0x00000803 for images,
0x00000801 for labels), big-endian int32 dimension sizes, then row-major
unsigned bytes. Gzip-compressed files are accepted transparently by
sniffing the two-byte gzip magic.

After normalization a dataset holds images as a ``(pixels, num_samples)``
float64 matrix with values in [0, 1] -- columns are samples, matching the
layout used everywhere else.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matrix import Matrix

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
NUM_CLASSES = 10


class DataError(Exception):
    """A dataset file is missing, malformed, or inconsistent."""


class IdxFormatError(DataError):
    """An IDX file violates the format: bad magic, truncated payload, etc."""


def _read_bytes(path: str | Path) -> bytes:
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        return gzip.decompress(raw)
    return raw


def read_idx_header(path: str | Path) -> tuple[int, tuple[int, ...]]:
    """Return (magic, dimension sizes) without loading the payload."""
    blob = _read_bytes(path)
    if len(blob) < 4:
        raise IdxFormatError(f"{path}: too short for an IDX header")
    (magic,) = struct.unpack(">i", blob[:4])
    ndim = magic & 0xFF
    if len(blob) < 4 + 4 * ndim:
        raise IdxFormatError(f"{path}: truncated dimension header")
    dims = struct.unpack(f">{ndim}i", blob[4 : 4 + 4 * ndim])
    return magic, dims


def load_idx_images(path: str | Path) -> np.ndarray:
    """Load an IDX image file as a ``(count, rows*cols)`` uint8 array."""
    blob = _read_bytes(path)
    if len(blob) < 16:
        raise IdxFormatError(f"{path}: too short for an image header")
    magic, count, rows, cols = struct.unpack(">iiii", blob[:16])
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(f"{path}: bad image magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}")
    expected = count * rows * cols
    payload = blob[16:]
    if len(payload) != expected:
        raise IdxFormatError(
            f"{path}: payload is {len(payload)} bytes, header promises {expected}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows * cols)


def load_idx_labels(path: str | Path) -> np.ndarray:
    """Load an IDX label file as a ``(count,)`` int array of class indices."""
    blob = _read_bytes(path)
    if len(blob) < 8:
        raise IdxFormatError(f"{path}: too short for a label header")
    magic, count = struct.unpack(">ii", blob[:8])
    if magic != LABEL_MAGIC:
        raise IdxFormatError(f"{path}: bad label magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}")
    payload = blob[8:]
    if len(payload) != count:
        raise IdxFormatError(f"{path}: payload is {len(payload)} bytes, header promises {count}")
    labels = np.frombuffer(payload, dtype=np.uint8).astype(np.int64)
    if labels.size and labels.max() >= NUM_CLASSES:
        raise DataError(f"{path}: label {labels.max()} out of range for these datasets")
    return labels


@dataclass
class Dataset:
    """Normalized samples: images ``(pixels, n)`` in [0, 1], integer labels."""

    images: Matrix
    labels: np.ndarray
    name: str

    def __post_init__(self) -> None:
        if self.images.shape[1] != self.labels.shape[0]:
            raise DataError(
                f"{self.name}: {self.images.shape[1]} images but {self.labels.shape[0]} labels"
            )

    @property
    def num_samples(self) -> int:
        return self.images.shape[1]

    @property
    def num_pixels(self) -> int:
        return self.images.shape[0]


def normalize(raw_images: np.ndarray, labels: np.ndarray, name: str) -> Dataset:
    """Turn raw uint8 pixels into a Dataset with columns-as-samples in [0, 1]."""
    images = raw_images.astype(np.float64).T / 255.0
    return Dataset(images=images, labels=np.asarray(labels, dtype=np.int64), name=name)


_SPLIT_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def _find_file(data_dir: Path, stem: str) -> Path:
    for candidate in (data_dir / stem, data_dir / (stem + ".gz")):
        if candidate.exists():
            return candidate
    raise DataError(f"no {stem}[.gz] under {data_dir}")


def load_split(data_dir: str | Path, name: str, split: str) -> Dataset:
    """Load and normalize one standard-named split from a data directory."""
    if split not in _SPLIT_FILES:
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    data_dir = Path(data_dir)
    image_stem, label_stem = _SPLIT_FILES[split]
    images = load_idx_images(_find_file(data_dir, image_stem))
    labels = load_idx_labels(_find_file(data_dir, label_stem))
    return normalize(images, labels, f"{name}-{split}")


def subset(d: Dataset, n: int, rng: np.random.Generator) -> Dataset:
    """Draw n samples without replacement; fixed for the whole trial."""
    if n > d.num_samples:
        raise ValueError(f"cannot draw {n} samples from {d.num_samples}")
    idx = rng.choice(d.num_samples, size=n, replace=False)
    return Dataset(images=d.images[:, idx], labels=d.labels[idx], name=d.name)


def one_hot(labels, num_classes: int = NUM_CLASSES) -> Matrix:
    """Unit-column encoding: column i has a single 1 at row labels[i]."""
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f"label out of range for {num_classes} classes")
    out = np.zeros((num_classes, labels.shape[0]))
    out[labels, np.arange(labels.shape[0])] = 1.0
    return out


@dataclass
class BatchPlan:
    """Batch size plus the generator that reshuffles the order every epoch."""

    batch_size: int
    rng: np.random.Generator

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def epoch_batches(d: Dataset, plan: BatchPlan, num_classes: int = NUM_CLASSES):
    """Yield one epoch of (X, one-hot Y, labels) batches in a fresh random order.

    Every sample appears exactly once per epoch; if batch_size does not
    divide the dataset, the final short batch is still emitted.
    """
    order = plan.rng.permutation(d.num_samples)
    for start in range(0, d.num_samples, plan.batch_size):
        idx = order[start : start + plan.batch_size]
        labels = d.labels[idx]
        yield d.images[:, idx], one_hot(labels, num_classes), labels
