"""
Numeric kernels: symmetric eigenvalues, SPD solves, chi-square tails.

`imhof_tail` evaluates P[Σ λ_s χ²_{1,s} > x] by inverting the characteristic
function (Imhof's integral) with QUADPACK.
"""

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.special
from scipy import integrate

from ..logging_config import get_logger
from .exceptions import NumericalError, SingularMatrixError

logger = get_logger(__name__)

EigenMethod = Literal["auto", "jacobi", "lapack"]


@dataclass(frozen=True)
class SymMatrix:
    """Dense symmetric matrix; the upper triangle is authoritative."""

    values: np.ndarray

    @classmethod
    def from_array(cls, a: np.ndarray | Sequence[Sequence[float]]) -> "SymMatrix":
        """
        Build from a square array, mirroring the upper triangle.

        Raises:
            NumericalError: If the array is not square or has non-finite entries
        """
        a = np.array(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise NumericalError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NumericalError("matrix has non-finite entries")
        upper = np.triu(a)
        values = upper + np.triu(a, 1).T
        values.setflags(write=False)
        return cls(values=values)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.values))


def _as_sym(m: "SymMatrix | np.ndarray") -> SymMatrix:
    return m if isinstance(m, SymMatrix) else SymMatrix.from_array(m)


def jacobi_eigenvalues(
    m: SymMatrix | np.ndarray,
    tolerance: float = 1e-12,
    max_sweeps: int = 100,
) -> np.ndarray:
    """
    Eigenvalues by cyclic Jacobi rotations, sorted descending.

    Sweeps visit (p, q) in row order p < q and stop once the off-diagonal
    Frobenius norm is below `tolerance` times the Frobenius norm of `m`.

    Raises:
        NumericalError: If the sweeps do not converge
    """
    a = np.array(_as_sym(m).values, dtype=float)
    d = a.shape[0]
    threshold = tolerance * np.linalg.norm(a)

    for sweep in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= threshold:
            logger.debug("jacobi_converged", dim=d, sweeps=sweep)
            return np.sort(np.diag(a))[::-1].copy()

        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

    raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def sym_eigenvalues(
    m: SymMatrix | np.ndarray,
    method: EigenMethod = "jacobi",
    jacobi_max_dim: int = 32,
) -> np.ndarray:
    """
    All eigenvalues of a symmetric matrix, sorted descending.

    Args:
        m: Symmetric matrix
        method: "jacobi" (cyclic rotations), "lapack" (numpy.linalg.eigvalsh) or
            "auto" (Jacobi up to `jacobi_max_dim`, LAPACK above)
        jacobi_max_dim: Dimension threshold used by "auto"
    """
    sym = _as_sym(m)
    if method == "auto":
        method = "jacobi" if sym.dim <= jacobi_max_dim else "lapack"
    if method == "jacobi":
        return jacobi_eigenvalues(sym)
    if method == "lapack":
        return np.linalg.eigvalsh(sym.values)[::-1].copy()
    raise NumericalError(f"unknown eigensolver '{method}'")


def spd_solve(
    m: SymMatrix | np.ndarray,
    b: np.ndarray | Sequence[float],
    rcond_min: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """
    Solve m·x = b by Cholesky factorization.

    Returns:
        Tuple of (x, reciprocal condition estimate λ_min / λ_max)

    Raises:
        SingularMatrixError: If the factorization breaks down or rcond < rcond_min
    """
    sym = _as_sym(m)
    b = np.asarray(b, dtype=float)
    if b.shape != (sym.dim,):
        raise NumericalError(f"right-hand side has shape {b.shape}, expected ({sym.dim},)")

    eigenvalues = np.linalg.eigvalsh(sym.values)
    rcond = float(eigenvalues[0] / eigenvalues[-1]) if eigenvalues[-1] > 0 else 0.0
    if rcond < rcond_min:
        raise SingularMatrixError(f"singular: reciprocal condition {rcond:.3g} < {rcond_min:g}")

    try:
        factor = scipy.linalg.cho_factor(sym.values, lower=False)
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"singular: {e}") from e
    return scipy.linalg.cho_solve(factor, b), rcond


def chisq_sf(x: float, k: int) -> float:
    """
    Upper tail P[χ²_k > x] via the regularized upper incomplete gamma function.

    Raises:
        NumericalError: If x < 0 or k < 1
    """
    if not math.isfinite(x) or x < 0:
        raise NumericalError(f"x must be finite and ≥ 0, got {x}")
    if int(k) != k or k < 1:
        raise NumericalError(f"degrees of freedom must be a positive integer, got {k}")
    return float(scipy.special.gammaincc(k / 2.0, x / 2.0))


def _validate_lambdas(lambdas: Sequence[float] | np.ndarray) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0:
        raise NumericalError("eigenvalue list is empty")
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise NumericalError("eigenvalues must be finite and > 0")
    return lam


def imhof_tail(
    lambdas: Sequence[float] | np.ndarray,
    x: float,
    tolerance: float = 1e-9,
) -> float:
    """
    P[Σ_s λ_s χ²_{1,s} > x] by numerical inversion of the characteristic function.

    P = 1/2 + (1/π) ∫₀^∞ sin θ(u) / (u ρ(u)) du with
    θ(u) = ½ Σ arctan(λ_s u) − ½ x u and ρ(u) = Π (1 + λ_s² u²)^{1/4}.

    The weights are normalized by their maximum first. The integral is split at
    u = 1: an adaptive Gauss-Kronrod pass on [0, 1] and Fourier-weighted passes
    (QAWF) on [1, ∞) for the cos(xu/2) and sin(xu/2) components.

    Raises:
        NumericalError: If the weights are empty or not all positive, or x is not finite
    """
    lam = _validate_lambdas(lambdas)
    if not math.isfinite(x):
        raise NumericalError(f"x must be finite, got {x}")
    if x <= 0:
        return 1.0

    top = float(lam.max())
    lam = lam / top
    x = x / top
    omega = 0.5 * x

    def phase(u: float) -> float:
        return 0.5 * float(np.sum(np.arctan(lam * u)))

    def amplitude(u: float) -> float:
        # u · ρ(u)
        return u * math.exp(0.25 * float(np.sum(np.log1p((lam * u) ** 2))))

    def integrand(u: float) -> float:
        if u == 0.0:
            return 0.5 * (float(lam.sum()) - x)
        return math.sin(phase(u) - omega * u) / amplitude(u)

    split = 1.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        head, _ = integrate.quad(integrand, 0.0, split, epsabs=tolerance, epsrel=0.0, limit=500)
        cos_part, _ = integrate.quad(
            lambda u: math.sin(phase(u)) / amplitude(u),
            split, np.inf, weight="cos", wvar=omega, epsabs=tolerance, limlst=200,
        )
        sin_part, _ = integrate.quad(
            lambda u: math.cos(phase(u)) / amplitude(u),
            split, np.inf, weight="sin", wvar=omega, epsabs=tolerance, limlst=200,
        )
    if caught:
        logger.warning("imhof_quadrature_warning", message=str(caught[0].message), terms=lam.size)

    p = 0.5 + (head + cos_part - sin_part) / math.pi
    return min(1.0, max(0.0, p))


def weighted_chisq_sf_mc(
    lambdas: Sequence[float] | np.ndarray,
    x: float,
    draws: int = 1_000_000,
    seed: int = 0,
    batch: int = 100_000,
) -> float:
    """Monte Carlo estimate of P[Σ λ_s χ²_{1,s} > x] with a seeded numpy Generator."""
    lam = _validate_lambdas(lambdas)
    rng = np.random.default_rng(seed)
    exceed = 0
    remaining = draws
    while remaining > 0:
        size = min(batch, remaining)
        totals = rng.chisquare(1.0, size=(size, lam.size)) @ lam
        exceed += int(np.count_nonzero(totals > x))
        remaining -= size
    return exceed / draws
