"""Minimal dense linear algebra on 64-bit floats.

Conventions, fixed for every downstream module:
  * a matrix is a C-ordered 2-D float64 ndarray, one sample per row;
  * a vector is a 1-D float64 ndarray;
  * no silent broadcasting beyond add_row_broadcast; any other shape
    mismatch raises ShapeError naming both shapes.

All operations are pure and never mutate their inputs, so values can be
shared freely across concurrent fold-training workers.
"""

from collections.abc import Callable

import numpy as np

from .errors import ShapeError


def as_matrix(data) -> np.ndarray:
    """Coerce to a 2-D float64 matrix with at least one row and column."""
    m = np.ascontiguousarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"matrix must be at least 1x1, got shape {m.shape}")
    return m


def as_vector(data) -> np.ndarray:
    v = np.ascontiguousarray(data, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {v.shape}")
    if v.shape[0] < 1:
        raise ShapeError("vector must have at least one entry")
    return v


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b with explicit inner-dimension checking."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}: inner dimensions differ")
    return a @ b


def add_row_broadcast(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Add vector v to every row of m (bias addition)."""
    m = as_matrix(m)
    v = as_vector(v)
    if v.shape[0] != m.shape[1]:
        raise ShapeError(f"cannot add length-{v.shape[0]} vector to rows of {m.shape} matrix")
    return m + v


def elementwise(m: np.ndarray, f: Callable[[float], float]) -> np.ndarray:
    """Apply a scalar function to every entry, preserving shape."""
    m = as_matrix(m)
    return np.vectorize(f, otypes=[np.float64])(m)


def transpose(m: np.ndarray) -> np.ndarray:
    m = as_matrix(m)
    return np.ascontiguousarray(m.T)
