import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonclassicality.linalg import JACOBI_MAX_DIM, jacobi_eigh, min_eigenvalue, smallest_eigenpair
from nonclassicality.specfun import binomial, log_factorial, log_gamma


class TestLogGamma:
    @pytest.mark.parametrize("x", [0.5, 1.0, 1.5, 2.0, 7.25, 30.0, 171.5, 1e4])
    def test_matches_mpmath(self, x):
        assert log_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13, abs=1e-13)

    @pytest.mark.parametrize("x", [-0.5, -1.5, -2.25, 0.1, 0.3])
    def test_reflection_region(self, x):
        assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
    def test_poles(self, x):
        assert log_gamma(x) == math.inf

    def test_vectorized(self):
        xs = np.array([0.5, 2.0, 10.0])
        np.testing.assert_allclose(log_gamma(xs), [math.lgamma(v) for v in xs], rtol=1e-13)

    @given(st.integers(min_value=0, max_value=500))
    def test_log_factorial_integer(self, n):
        assert log_factorial(n) == pytest.approx(math.lgamma(n + 1), rel=1e-12, abs=1e-12)


class TestBinomial:
    @given(st.integers(0, 60), st.integers(0, 60))
    def test_integer_exact(self, n, k):
        expected = math.comb(n, k) if k <= n else 0
        if expected < 2**52:
            assert binomial(n, k) == expected

    @pytest.mark.parametrize("n,k", [(59, 15), (60, 30), (58, 17)])
    def test_large_integer_exact(self, n, k):
        # rounding the gamma route is off by one here
        assert binomial(n, k) == math.comb(n, k)

    @pytest.mark.parametrize("n,k", [(1, 0.5), (3, 1.5), (5, 2.5), (4, 0.5), (9, 3.5)])
    def test_half_integer_against_mpmath(self, n, k):
        assert binomial(n, k) == pytest.approx(float(mpmath.binomial(n, k)), rel=1e-12)

    def test_out_of_range_is_zero(self):
        assert binomial(3, 4) == 0.0
        assert binomial(3, -1) == 0.0

    @given(st.integers(1, 40), st.integers(0, 39))
    def test_pascal_rule(self, n, k):
        k = min(k, n - 1)
        assert binomial(n, k + 1) == binomial(n - 1, k) + binomial(n - 1, k + 1)


def _random_symmetric(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) * scale
    return (a + a.T) / 2


class TestJacobi:
    @pytest.mark.parametrize("n", [1, 2, 5, 17, 40])
    def test_eigenvalues_match_lapack(self, n, rng):
        a = _random_symmetric(rng, n)
        w, v = jacobi_eigh(a)
        np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-11)
        np.testing.assert_allclose(v.T @ v, np.eye(n), atol=1e-11)
        np.testing.assert_allclose(a @ v, v * w, atol=1e-10)

    def test_tiny_offdiagonal_against_huge_gap(self):
        a = np.array([[0.0, 1e-200, 0.0], [1e-200, 1e200, 1.0], [0.0, 1.0, 2.0]])
        with np.errstate(over="raise"):
            w, v = jacobi_eigh(a)
        np.testing.assert_allclose(np.sort(w), [0.0, 2.0, 1e200], atol=1e-12, rtol=1e-14)
        np.testing.assert_allclose(v.T @ v, np.eye(3), atol=1e-12)

    def test_diagonal_input_unchanged(self):
        w, _ = jacobi_eigh(np.diag([3.0, -1.0, 2.0]))
        np.testing.assert_allclose(np.sort(w), [-1.0, 2.0, 3.0])

    @given(st.integers(0, 10_000))
    def test_smallest_eigenpair_property(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 12))
        a = _random_symmetric(rng, n)
        lam, vec = smallest_eigenpair(a)
        assert lam == pytest.approx(np.linalg.eigvalsh(a)[0], abs=1e-10)
        np.testing.assert_allclose(a @ vec, lam * vec, atol=1e-8)

    def test_large_matrix_path(self, rng):
        n = JACOBI_MAX_DIM + 30
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        spectrum = np.linspace(-0.3, 5.0, n)
        a = (q * spectrum) @ q.T
        a = (a + a.T) / 2
        assert min_eigenvalue(a) == pytest.approx(-0.3, abs=1e-9)

    def test_psd_rank_one(self):
        v = np.array([1.0, 2.0, 3.0])
        assert min_eigenvalue(np.outer(v, v)) == pytest.approx(0.0, abs=1e-12)
