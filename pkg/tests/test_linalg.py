import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misscov import NumericError, frobenius_norm, min_eigenvalue, op_l1_norm, spectral_norm, submatrix
from misscov.linalg import max_eigenvalue

METHODS = ["eigh", "power"]


@pytest.mark.parametrize("method", METHODS)
class TestSpectral:
    def test_identity(self, method):
        assert spectral_norm(np.eye(5), method=method) == pytest.approx(1.0, rel=1e-8)

    def test_diag_negative(self, method):
        assert spectral_norm(np.diag([3.0, -4.0]), method=method) == pytest.approx(4.0, rel=1e-8)

    def test_two_by_two(self, method):
        assert spectral_norm([[2.0, 1.0], [1.0, 2.0]], method=method) == pytest.approx(3.0, rel=1e-8)

    def test_zero(self, method):
        assert spectral_norm(np.zeros((3, 3)), method=method) == 0.0

    def test_nonsymmetric_against_svd(self, method, rng):
        A = rng.standard_normal((7, 4))
        ref = np.linalg.svd(A, compute_uv=False)[0]
        assert spectral_norm(A, method=method) == pytest.approx(ref, rel=1e-8)

    def test_min_eigenvalue(self, method):
        assert min_eigenvalue(np.eye(4), method=method) == pytest.approx(1.0, abs=1e-7)
        assert min_eigenvalue(np.diag([1.0, -0.5]), method=method) == pytest.approx(-0.5, abs=1e-7)
        assert min_eigenvalue([[2.0, 1.0], [1.0, 2.0]], method=method) == pytest.approx(1.0, abs=1e-7)
        assert max_eigenvalue([[2.0, 1.0], [1.0, 2.0]], method=method) == pytest.approx(3.0, abs=1e-7)


def test_power_route_agrees_with_svd_on_random_symmetric(rng):
    for _ in range(50):
        p = int(rng.integers(2, 30))
        B = rng.standard_normal((p, p))
        A = (B + B.T) / 2
        ref = np.abs(np.linalg.eigvalsh(A)).max()
        assert spectral_norm(A, method="power") == pytest.approx(ref, rel=1e-7)


def test_tolerance_validated():
    with pytest.raises(ValueError):
        spectral_norm(np.eye(2), tol=0.5)
    with pytest.raises(ValueError):
        spectral_norm(np.eye(2), method="svd")


def test_nonfinite_rejected():
    with pytest.raises(NumericError):
        spectral_norm([[np.nan, 0.0], [0.0, 1.0]])


def test_min_eigenvalue_requires_symmetry():
    with pytest.raises(ValueError):
        min_eigenvalue([[1.0, 2.0], [0.0, 1.0]])


class TestOtherNorms:
    def test_hand_example(self):
        A = [[1.0, -2.0], [0.0, 3.0]]
        assert op_l1_norm(A) == 5.0
        assert frobenius_norm(A) == pytest.approx(math.sqrt(14.0), rel=1e-15)

    def test_zero(self):
        assert op_l1_norm(np.zeros((2, 2))) == 0.0 and frobenius_norm(np.zeros((2, 2))) == 0.0

    @pytest.mark.parametrize("p", [1, 3, 9])
    def test_identity(self, p):
        assert op_l1_norm(np.eye(p)) == 1.0
        assert frobenius_norm(np.eye(p)) == pytest.approx(math.sqrt(p))


class TestSubmatrix:
    A = np.arange(1.0, 10.0).reshape(3, 3)

    def test_column_slice(self):
        np.testing.assert_array_equal(submatrix(self.A, [0, 1], [2]), [[3.0], [6.0]])

    def test_full(self):
        np.testing.assert_array_equal(submatrix(self.A, range(3), range(3)), self.A)

    def test_scalar(self):
        assert submatrix(self.A, [1], [1]).item() == 5.0

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            submatrix(self.A, [3], [0])


symmetric = st.integers(0, 2**32 - 1).map(
    lambda s: (lambda B: (B + B.T) / 2)(np.random.default_rng(s).standard_normal((6, 6)))
)


@settings(max_examples=100, deadline=None)
@given(A=symmetric)
def test_spectral_bounded_by_l1_for_symmetric(A):
    assert spectral_norm(A) <= op_l1_norm(A) * (1 + 1e-12)
    assert spectral_norm(A) <= frobenius_norm(A) * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_psd_block_bound(seed):
    r = np.random.default_rng(seed)
    p = int(r.integers(2, 12))
    G = r.standard_normal((p, int(r.integers(1, p + 1))))
    S = G @ G.T
    A = r.choice(p, size=int(r.integers(1, p + 1)), replace=False)
    B = r.choice(p, size=int(r.integers(1, p + 1)), replace=False)
    lhs = spectral_norm(submatrix(S, A, B))
    rhs = math.sqrt(spectral_norm(submatrix(S, A, A)) * spectral_norm(submatrix(S, B, B)))
    assert lhs <= rhs + 1e-9
