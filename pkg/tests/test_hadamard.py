import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import hadamard as scipy_hadamard

from onorm.hadamard import (
    HadamardMatrix, InconsistentDetection, detect_rescaled, is_hadamard, kronecker,
    row_defect, sylvester,
)
from onorm.matrix import one_norm


@pytest.mark.parametrize("k", range(0, 7))
def test_sylvester_matches_scipy(k):
    h = sylvester(k)
    assert h.n == 2**k
    assert np.array_equal(h.entries, scipy_hadamard(2**k))
    assert is_hadamard(h)
    assert one_norm(h.rescaled()) == pytest.approx(h.n * math.sqrt(h.n), rel=1e-14)


def test_sylvester_range():
    with pytest.raises(ValueError):
        sylvester(-1)
    with pytest.raises(ValueError):
        sylvester(21)


def test_hadamard_validation():
    with pytest.raises(ValueError):
        HadamardMatrix(np.array([[1, 1], [1, 1]]))
    with pytest.raises(ValueError):
        HadamardMatrix(np.ones((3, 3), dtype=int))
    with pytest.raises(ValueError):
        HadamardMatrix(np.array([[1, 2], [1, -1]]))


def test_kronecker():
    h = kronecker(sylvester(1), sylvester(2))
    assert h.n == 8 and is_hadamard(h)
    assert np.array_equal(h.entries, sylvester(3).entries)


def test_is_hadamard_examples(A):
    assert not is_hadamard(np.eye(2))
    assert not is_hadamard(np.ones((2, 3)))
    assert is_hadamard(np.array([[1, 1], [1, -1]]))
    # no 3x3 sign matrix has orthogonal rows
    for bits in range(2**9):
        m = np.array([1 if bits >> i & 1 else -1 for i in range(9)]).reshape(3, 3)
        assert not is_hadamard(m)
    assert not is_hadamard(A.entries * 3)


def test_detect_rescaled(A, H2n, H4n):
    assert detect_rescaled(H2n) and detect_rescaled(H4n)
    assert not detect_rescaled(A)
    assert not detect_rescaled(np.eye(4))
    assert detect_rescaled(sylvester(5).rescaled())


def test_detect_rescaled_inconsistent():
    bad = np.ones((4, 4)) / 2
    with pytest.raises(InconsistentDetection):
        detect_rescaled(bad)


def test_row_defect_examples():
    d, h = row_defect(np.array([1, 1, 1, 1]) / 2)
    assert d == pytest.approx(0, abs=1e-15)
    assert np.allclose(h, 0.5)
    d, _ = row_defect(np.array([1.0, 0.0]))
    assert d == pytest.approx(2 - math.sqrt(2), abs=1e-15)
    with pytest.raises(ValueError):
        row_defect(np.array([1.0, 1.0]))


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_row_defect_identity(v):
    x = np.array(v) / np.linalg.norm(v)
    n = len(x)
    d, h = row_defect(x)
    assert np.abs(x).sum() == pytest.approx(math.sqrt(n) * (1 - d / 2), abs=1e-12)
    assert np.all(np.abs(h) == pytest.approx(1 / math.sqrt(n)))
