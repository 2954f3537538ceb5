"""Dense row-major matrix kernels every other module builds on.

A matrix is a 2-D float64 numpy array. Batch data lives in columns:
rows are features/units, columns are samples, so ``W @ X + b`` broadcasts
the bias over the batch. All kernels are pure -- operands are never
mutated and results are freshly allocated.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

Matrix = np.ndarray


class ShapeMismatchError(ValueError):
    """Operand shapes violate an operation's contract."""


def _shape_error(op: str, *shapes: tuple[int, ...]) -> ShapeMismatchError:
    pretty = " and ".join(f"{s[0]}x{s[1]}" if len(s) == 2 else str(s) for s in shapes)
    return ShapeMismatchError(f"{op}: incompatible shapes {pretty}")


def matrix(values: Sequence) -> Matrix:
    """Build a validated float64 matrix from nested sequences or an array."""
    a = np.array(values, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"matrix must be 2-D and non-empty, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


def zeros(rows: int, cols: int) -> Matrix:
    return np.zeros((rows, cols))


def ones(rows: int, cols: int) -> Matrix:
    return np.ones((rows, cols))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product; entry (i,j) is sum_k a(i,k)*b(k,j)."""
    if a.shape[1] != b.shape[0]:
        raise _shape_error("matmul", a.shape, b.shape)
    return a @ b


def add_bias(m: Matrix, b: Matrix) -> Matrix:
    """Add a column vector ``b`` to every column of ``m``."""
    if b.ndim != 2 or b.shape != (m.shape[0], 1):
        raise _shape_error("add_bias", m.shape, b.shape)
    return m + b


def hadamard(a: Matrix, b: Matrix) -> Matrix:
    """Element-wise product of same-shape matrices."""
    if a.shape != b.shape:
        raise _shape_error("hadamard", a.shape, b.shape)
    return a * b


def transpose(a: Matrix) -> Matrix:
    return a.T.copy()


def scale(a: Matrix, c: float) -> Matrix:
    return a * float(c)


def sub(a: Matrix, b: Matrix) -> Matrix:
    if a.shape != b.shape:
        raise _shape_error("sub", a.shape, b.shape)
    return a - b


def emap(a: Matrix, f: Callable[[float], float]) -> Matrix:
    """Apply a scalar function to every entry."""
    return np.vectorize(f, otypes=[np.float64])(a)


def total_abs_sum(a: Matrix) -> float:
    return float(np.abs(a).sum())


def total_sum(a: Matrix) -> float:
    return float(a.sum())
