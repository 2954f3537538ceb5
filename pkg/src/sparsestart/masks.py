"""Binary sparsity masks and the connectivity factor p.

A mask stores 0/1 bits (as float64 so ``W * bits`` is a plain Hadamard
product) together with its target zero-fraction p: p = 0 keeps the layer
fully connected, p = 1 disconnects it. Masks are immutable values after
generation and freely shareable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matrix import Matrix, ShapeMismatchError


@dataclass(frozen=True)
class SparseMask:
    """0/1 matrix plus the target fraction of zeros it was drawn for."""

    bits: Matrix
    p: float

    def __post_init__(self) -> None:
        bad = (self.bits != 0.0) & (self.bits != 1.0)
        if bad.any():
            raise ValueError("mask entries must be exactly 0 or 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")


def generate_mask(
    rows: int,
    cols: int,
    p: float,
    rng: np.random.Generator,
    exact: bool = False,
) -> SparseMask:
    """Draw a mask whose entries are independently 1 with probability 1-p.

    With ``exact=True`` the mask instead has exactly round(p * N) zeros at
    uniformly random positions (useful for sensitivity checks against the
    default Bernoulli draw).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if rows < 1 or cols < 1:
        raise ValueError(f"mask dims must be positive, got {rows}x{cols}")
    if exact:
        n = rows * cols
        n_zero = round(p * n)
        flat = np.ones(n)
        flat[rng.permutation(n)[:n_zero]] = 0.0
        bits = flat.reshape(rows, cols)
    else:
        bits = (rng.random((rows, cols)) >= p).astype(np.float64)
    return SparseMask(bits, p)


def all_ones_mask(rows: int, cols: int) -> SparseMask:
    return SparseMask(np.ones((rows, cols)), 0.0)


def intersect(a: SparseMask, b: SparseMask) -> SparseMask:
    """Element-wise AND; a connection survives only if it survives both masks."""
    if a.bits.shape != b.bits.shape:
        raise ShapeMismatchError(f"intersect: {a.bits.shape} vs {b.bits.shape}")
    # expected zero-fraction of independent masks: 1 - (1-p_a)(1-p_b)
    return SparseMask(a.bits * b.bits, 1.0 - (1.0 - a.p) * (1.0 - b.p))


def sparsity(mask: SparseMask) -> float:
    """Realized fraction of zero entries."""
    return float((mask.bits == 0.0).mean())


def save_mask(mask: SparseMask, path: str | Path) -> None:
    """Write the flat text artifact: 'rows cols' header then the 0/1 grid."""
    rows, cols = mask.bits.shape
    lines = [f"{rows} {cols}"]
    for row in mask.bits.astype(int):
        lines.append(" ".join(str(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_mask(path: str | Path) -> SparseMask:
    text = Path(path).read_text().strip().splitlines()
    rows, cols = (int(t) for t in text[0].split())
    bits = np.array([[float(v) for v in line.split()] for line in text[1 : rows + 1]])
    if bits.shape != (rows, cols):
        raise ValueError(f"mask file {path}: header says {rows}x{cols}, grid is {bits.shape}")
    mask = SparseMask(bits, 0.0)
    # target p is not stored in the artifact; report the realized fraction
    return SparseMask(bits, sparsity(mask))
