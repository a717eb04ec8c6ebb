import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hiercoded.errors import ShapeError
from hiercoded.matrix import (
    Interval,
    as_matrix,
    basic_op_count,
    format_matrix,
    multiply,
    read_matrix,
    submatrix,
    write_matrix,
)

from conftest import naive_matmul


def test_multiply_examples():
    np.testing.assert_array_equal(multiply(np.eye(2), as_matrix([[3, 4], [5, 6]])), [[3, 4], [5, 6]])
    np.testing.assert_array_equal(multiply(as_matrix([[1, 2]]), as_matrix([[3], [4]])), [[11]])
    np.testing.assert_array_equal(multiply(np.zeros((2, 3)), np.arange(6.0).reshape(3, 2)),
                                  np.zeros((2, 2)))


def test_multiply_shape_error_names_both_shapes():
    with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 2\)"):
        multiply(np.ones((2, 3)), np.ones((2, 2)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_multiply_matches_triple_loop(nx, nz, ny, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((nx, nz))
    b = rng.standard_normal((nz, ny))
    np.testing.assert_allclose(multiply(a, b), naive_matmul(a, b), rtol=1e-12, atol=1e-12)


def test_multiply_is_bilinear(rng):
    a1, a2 = rng.standard_normal((2, 3, 4))
    b = rng.standard_normal((4, 5))
    np.testing.assert_allclose(multiply(2.5 * a1 + a2, b), 2.5 * multiply(a1, b) + multiply(a2, b))


def test_submatrix_examples():
    m = np.arange(16.0).reshape(4, 4)
    np.testing.assert_array_equal(submatrix(m, (1, 4), (1, 4)), m)
    two = as_matrix([[1, 2], [3, 4]])
    np.testing.assert_array_equal(submatrix(two, (2, 2), (1, 2)), [[3, 4]])
    np.testing.assert_array_equal(submatrix(two, (1, 2), (2, 2)), [[2], [4]])


def test_submatrix_out_of_bounds():
    with pytest.raises(IndexError):
        submatrix(np.ones((2, 2)), (1, 3), (1, 1))


def test_basic_op_count():
    assert basic_op_count(10, 8, 6) == 480
    assert basic_op_count(1, 1, 1) == 1
    assert basic_op_count(2, 3, 4) == 24


def test_interval_indexing():
    iv = Interval(3, 7)
    assert len(iv) == 5
    assert iv[1] == 3 and iv[5] == 7
    assert list(iv) == [3, 4, 5, 6, 7]
    assert Interval(1, 12).sub(2, 3) == Interval(5, 8)
    with pytest.raises(ValueError):
        Interval(0, 2)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ShapeError):
        as_matrix([1.0, 2.0])
    m = as_matrix([[1, 2]])
    assert not m.flags.writeable


def test_text_roundtrip(tmp_path, rng):
    m = rng.standard_normal((3, 4))
    path = tmp_path / "m.txt"
    write_matrix(m, path)
    np.testing.assert_array_equal(read_matrix(path), m)
    np.testing.assert_array_equal(read_matrix(io.StringIO(format_matrix(m))), m)


def test_read_matrix_row_count_mismatch():
    with pytest.raises(ShapeError):
        read_matrix(io.StringIO("3 1\n1\n2\n"))
