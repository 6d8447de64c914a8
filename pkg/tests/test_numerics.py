"""Tests for numeric kernels."""

import math
import warnings
from unittest.mock import Mock

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from survtest.core import numerics
from survtest.core.exceptions import NumericalError, SingularMatrixError
from survtest.core.numerics import (
    SymMatrix,
    chisq_sf,
    imhof_tail,
    jacobi_eigenvalues,
    spd_solve,
    sym_eigenvalues,
    weighted_chisq_sf_mc,
)

CHISQ_95 = 3.841458820694124


class TestSymMatrix:
    """Tests for SymMatrix construction."""

    def test_upper_triangle_authoritative(self):
        """Test that the lower triangle is rebuilt from the upper."""
        m = SymMatrix.from_array([[1.0, 2.0], [5.0, 3.0]])
        np.testing.assert_array_equal(m.values, [[1.0, 2.0], [2.0, 3.0]])

    def test_non_finite_rejected(self):
        """Test that NaN entries are rejected."""
        with pytest.raises(NumericalError):
            SymMatrix.from_array([[1.0, math.nan], [0.0, 1.0]])

    def test_non_square_rejected(self):
        """Test that non-square input is rejected."""
        with pytest.raises(NumericalError):
            SymMatrix.from_array(np.zeros((2, 3)))


class TestEigenvalues:
    """Tests for sym_eigenvalues."""

    def test_identity(self):
        """Test the 2×2 identity."""
        np.testing.assert_allclose(sym_eigenvalues(np.eye(2)), [1.0, 1.0])

    def test_two_by_two(self):
        """Test [[2,1],[1,2]] → [3, 1]."""
        np.testing.assert_allclose(sym_eigenvalues([[2.0, 1.0], [1.0, 2.0]]), [3.0, 1.0])

    def test_descending(self):
        """Test that eigenvalues come back sorted descending."""
        values = jacobi_eigenvalues(np.diag([1.0, 5.0, -2.0, 3.0]))
        np.testing.assert_array_equal(values, [5.0, 3.0, 1.0, -2.0])

    def test_one_by_one(self):
        """Test a 1×1 matrix."""
        np.testing.assert_array_equal(sym_eigenvalues([[4.0]]), [4.0])

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 12))
    def test_trace_and_frobenius(self, seed, dim):
        """Test Σλ = trace and Σλ² = ‖m‖²_F."""
        a = np.random.default_rng(seed).standard_normal((dim, dim))
        m = a + a.T
        values = jacobi_eigenvalues(m)
        scale = max(1.0, float(np.linalg.norm(m)))
        assert values.sum() == pytest.approx(np.trace(m), abs=1e-8 * scale)
        assert np.sum(values**2) == pytest.approx(np.sum(m**2), rel=1e-8)

    def test_jacobi_matches_lapack(self):
        """Test that both solvers agree on a random matrix."""
        a = np.random.default_rng(0).standard_normal((20, 20))
        m = a @ a.T
        np.testing.assert_allclose(
            sym_eigenvalues(m, method="jacobi"),
            sym_eigenvalues(m, method="lapack"),
            rtol=1e-10,
            atol=1e-10,
        )

    def test_auto_switches_on_dimension(self):
        """Test that auto mode handles dimensions above the Jacobi limit."""
        m = np.diag(np.arange(40, dtype=float))
        values = sym_eigenvalues(m, method="auto", jacobi_max_dim=8)
        np.testing.assert_array_equal(values, np.arange(40, dtype=float)[::-1])

    def test_unknown_method(self):
        """Test an unknown solver name."""
        with pytest.raises(NumericalError):
            sym_eigenvalues(np.eye(2), method="qr")


class TestSpdSolve:
    """Tests for spd_solve."""

    def test_identity(self):
        """Test that the identity returns b."""
        x, rcond = spd_solve(np.eye(3), [1.0, 2.0, 3.0])
        np.testing.assert_allclose(x, [1.0, 2.0, 3.0])
        assert rcond == 1.0

    def test_diagonal(self):
        """Test diag(2, 4) x = (2, 4)."""
        x, rcond = spd_solve(np.diag([2.0, 4.0]), [2.0, 4.0])
        np.testing.assert_allclose(x, [1.0, 1.0])
        assert rcond == pytest.approx(0.5)

    def test_residual(self):
        """Test the residual bound on random SPD systems."""
        rng = np.random.default_rng(11)
        for _ in range(10):
            a = rng.standard_normal((3, 3))
            m = a.T @ a + np.eye(3)
            b = rng.standard_normal(3)
            x, _ = spd_solve(m, b)
            assert np.linalg.norm(m @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_singular(self):
        """Test that a singular matrix is reported."""
        with pytest.raises(SingularMatrixError, match="singular"):
            spd_solve([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0])

    def test_indefinite(self):
        """Test that an indefinite matrix is reported."""
        with pytest.raises(SingularMatrixError):
            spd_solve([[1.0, 0.0], [0.0, -1.0]], [1.0, 1.0])

    def test_shape_mismatch(self):
        """Test a right-hand side of the wrong length."""
        with pytest.raises(NumericalError):
            spd_solve(np.eye(2), [1.0, 2.0, 3.0])


class TestChiSquare:
    """Tests for chisq_sf."""

    @pytest.mark.parametrize("k", [1, 2, 5, 10])
    def test_zero(self, k):
        """Test P[χ² > 0] = 1."""
        assert chisq_sf(0.0, k) == 1.0

    def test_two_degrees(self):
        """Test the closed form e^{−x/2} for two degrees of freedom."""
        assert chisq_sf(2.0, 2) == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_critical_value(self):
        """Test the 95% critical value for one degree of freedom."""
        assert chisq_sf(CHISQ_95, 1) == pytest.approx(0.05, abs=1e-6)

    def test_normal_identity(self):
        """Test P[χ²₁ > x] = erfc(√(x/2))."""
        for x in (0.1, 1.0, 4.0, 9.0, 25.0):
            assert chisq_sf(x, 1) == pytest.approx(math.erfc(math.sqrt(x / 2)), abs=1e-10)

    @pytest.mark.parametrize("x,k", [(-1.0, 1), (1.0, 0), (1.0, 1.5), (math.inf, 1)])
    def test_invalid(self, x, k):
        """Test rejected arguments."""
        with pytest.raises(NumericalError):
            chisq_sf(x, k)


class TestImhofTail:
    """Tests for the weighted chi-square tail."""

    def test_zero_threshold(self):
        """Test P[Q > 0] = 1."""
        assert imhof_tail([2.0], 0.0) == 1.0

    def test_exponential(self):
        """Test 0.5·χ²₂ = Exp(1)."""
        assert imhof_tail([0.5, 0.5], 1.0) == pytest.approx(math.exp(-1.0), abs=1e-7)

    def test_chisq_quantile(self):
        """Test λ = [1] at the 95% critical value."""
        assert imhof_tail([1.0], CHISQ_95) == pytest.approx(0.05, abs=1e-6)

    @pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0])
    def test_matches_chisq(self, x):
        """Test agreement with chisq_sf for a single unit weight."""
        assert imhof_tail([1.0], x) == pytest.approx(chisq_sf(x, 1), abs=1e-6)

    def test_matches_chisq_many_terms(self):
        """Test k equal weights against χ²_k."""
        assert imhof_tail([1.0] * 6, 9.0) == pytest.approx(chisq_sf(9.0, 6), abs=1e-6)

    def test_scale_invariance(self):
        """Test P[cQ > cx] = P[Q > x]."""
        lambdas = np.array([3.0, 1.0, 0.2])
        assert imhof_tail(lambdas * 1e-6, 4.0 * 1e-6) == pytest.approx(
            imhof_tail(lambdas, 4.0), abs=1e-9
        )

    def test_monotone(self):
        """Test that the tail is nonincreasing in x."""
        lambdas = [2.0, 0.7, 0.3, 0.05]
        values = [imhof_tail(lambdas, x) for x in np.linspace(0.1, 25.0, 40)]
        assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))

    def test_matches_monte_carlo(self):
        """Test agreement with Monte Carlo on random fixtures."""
        rng = np.random.default_rng(17)
        draws = 200_000
        for i in range(20):
            lambdas = rng.uniform(0.05, 2.0, size=rng.integers(1, 6))
            x = float(rng.uniform(0.2, 2.0) * lambdas.sum())
            mc = weighted_chisq_sf_mc(lambdas, x, draws=draws, seed=i)
            se = math.sqrt(max(mc * (1 - mc), 1e-4) / draws)
            assert abs(imhof_tail(lambdas, x) - mc) <= 4 * se

    def test_quadrature_warning_logged(self, monkeypatch):
        """Test that a non-converged integral is logged as a warning."""
        quad = integrate.quad

        def noisy_quad(*args, **kwargs):
            warnings.warn("maximum number of cycles allowed has been achieved",
                          integrate.IntegrationWarning)
            return quad(*args, **kwargs)

        log = Mock()
        monkeypatch.setattr(numerics.integrate, "quad", noisy_quad)
        monkeypatch.setattr(numerics, "logger", log)
        assert imhof_tail([1.0], CHISQ_95) == pytest.approx(0.05, abs=1e-6)
        log.warning.assert_called_once()
        assert log.warning.call_args.args == ("imhof_quadrature_warning",)

    @pytest.mark.parametrize("lambdas", [[], [1.0, -0.5], [0.0], [math.nan]])
    def test_invalid_weights(self, lambdas):
        """Test rejected weight lists."""
        with pytest.raises(NumericalError):
            imhof_tail(lambdas, 1.0)


class TestMonteCarloTail:
    """Tests for weighted_chisq_sf_mc."""

    def test_seeded(self):
        """Test that a fixed seed reproduces the estimate."""
        assert weighted_chisq_sf_mc([1.0, 0.5], 2.0, draws=10_000, seed=3) == (
            weighted_chisq_sf_mc([1.0, 0.5], 2.0, draws=10_000, seed=3)
        )

    def test_exponential(self):
        """Test the Exp(1) case within four standard errors."""
        p = weighted_chisq_sf_mc([0.5, 0.5], 1.0, draws=200_000, seed=1)
        assert abs(p - math.exp(-1.0)) <= 4 * math.sqrt(0.2325 / 200_000)
