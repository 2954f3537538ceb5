import struct

import numpy as np
import pytest

from sparsestart.data import Dataset


def write_idx_images(path, pixels: np.ndarray, rows=28, cols=28, magic=0x803):
    payload = struct.pack(">iiii", magic, pixels.shape[0], rows, cols) + pixels.tobytes()
    path.write_bytes(payload)
    return path


def write_idx_labels(path, labels, magic=0x801):
    labels = np.asarray(labels, dtype=np.uint8)
    path.write_bytes(struct.pack(">ii", magic, labels.shape[0]) + labels.tobytes())
    return path


@pytest.fixture
def idx_dir(tmp_path):
    """A data directory with tiny standard-named train/test IDX files."""
    rng = np.random.default_rng(123)
    for split, stem_img, stem_lbl, n in (
        ("train", "train-images-idx3-ubyte", "train-labels-idx1-ubyte", 64),
        ("test", "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", 32),
    ):
        pixels = rng.integers(0, 256, size=(n, 784), dtype=np.uint8)
        labels = rng.integers(0, 10, size=n, dtype=np.uint8)
        write_idx_images(tmp_path / stem_img, pixels)
        write_idx_labels(tmp_path / stem_lbl, labels)
    return tmp_path


def synthetic_dataset(n=48, pixels=12, num_classes=4, seed=0, name="synthetic"):
    """In-memory dataset for harness tests that skip the IDX loaders."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, num_classes, size=n)
    images = rng.uniform(size=(pixels, n)) * 0.5
    # make classes somewhat separable so accuracy can move off chance
    for j, label in enumerate(labels):
        span = max(1, pixels // num_classes)
        images[label * span : (label + 1) * span, j] += 0.5
    return Dataset(images=images, labels=labels, name=name)
