"""Tests for the small dense-algebra layer.

The matmul oracle below is a deliberately naive triple loop so that the
vectorised implementation is checked against arithmetic written a second,
independent way.
"""

import numpy as np
import pytest

from socdfn.errors import ShapeError
from socdfn.tensor import (
    add_row_broadcast,
    as_matrix,
    as_vector,
    elementwise,
    matmul,
    transpose,
)


def matmul_loops(a, b):
    rows, inner = a.shape
    cols = b.shape[1]
    out = np.zeros((rows, cols))
    for i in range(rows):
        for j in range(cols):
            acc = 0.0
            for k in range(inner):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc
    return out


class TestAsMatrix:
    def test_accepts_2d(self):
        m = as_matrix([[1.0, 2.0], [3.0, 4.0]])
        assert m.shape == (2, 2)
        assert m.dtype == np.float64

    def test_casts_ints(self):
        m = as_matrix([[1, 2]])
        assert m.dtype == np.float64

    def test_rejects_1d(self):
        with pytest.raises(ShapeError):
            as_matrix([1.0, 2.0])

    def test_rejects_3d(self):
        with pytest.raises(ShapeError):
            as_matrix(np.zeros((2, 2, 2)))

    def test_rejects_empty(self):
        with pytest.raises(ShapeError):
            as_matrix(np.zeros((0, 3)))


class TestAsVector:
    def test_accepts_1d(self):
        v = as_vector([1.0, 2.0, 3.0])
        assert v.shape == (3,)

    def test_rejects_2d(self):
        with pytest.raises(ShapeError):
            as_vector([[1.0], [2.0]])

    def test_rejects_empty(self):
        with pytest.raises(ShapeError):
            as_vector([])


class TestMatmul:
    def test_identity(self):
        a = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(matmul(a, np.eye(3)), a)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(42)
        for rows, inner, cols in [(1, 1, 1), (2, 3, 4), (7, 5, 2), (16, 16, 16)]:
            a = rng.normal(size=(rows, inner))
            b = rng.normal(size=(inner, cols))
            np.testing.assert_allclose(matmul(a, b), matmul_loops(a, b), rtol=1e-12)

    def test_inner_dim_mismatch_names_shapes(self):
        a = np.zeros((2, 3))
        b = np.zeros((4, 5))
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(4, 5\)"):
            matmul(a, b)


class TestAddRowBroadcast:
    def test_adds_to_every_row(self):
        m = np.zeros((3, 2))
        out = add_row_broadcast(m, np.array([1.0, -1.0]))
        np.testing.assert_array_equal(out, np.tile([1.0, -1.0], (3, 1)))

    def test_does_not_mutate_input(self):
        m = np.zeros((2, 2))
        add_row_broadcast(m, np.array([5.0, 5.0]))
        np.testing.assert_array_equal(m, np.zeros((2, 2)))

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            add_row_broadcast(np.zeros((2, 3)), np.zeros(2))


class TestElementwise:
    def test_matches_python_loop(self):
        m = np.array([[-1.0, 0.0], [2.0, -3.0]])
        out = elementwise(m, lambda v: max(v, 0.0))
        expect = np.array([[max(v, 0.0) for v in row] for row in m])
        np.testing.assert_array_equal(out, expect)

    def test_output_is_float64(self):
        out = elementwise(np.array([[2.0]]), lambda v: 1 if v > 0 else 0)
        assert out.dtype == np.float64


class TestTranspose:
    def test_swaps_axes(self):
        m = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(transpose(m), m.T)

    def test_result_is_contiguous(self):
        assert transpose(np.arange(6.0).reshape(2, 3)).flags["C_CONTIGUOUS"]
