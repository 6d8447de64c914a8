"""Discrete Cramér-von Mises statistic and its covariance operator estimate."""

from dataclasses import dataclass

import numpy as np

from ..config import get_settings
from ..logging_config import get_logger
from .base import CategoryRange, HomogeneityResult, RiskTable, WeightSpec
from .exceptions import GateError
from .logrank import LogRankState
from .numerics import EigenMethod, SymMatrix, imhof_tail, sym_eigenvalues
from .survival_data import category_range

logger = get_logger(__name__)


def _observable_columns(window: CategoryRange) -> np.ndarray:
    return np.asarray(window.observable, dtype=np.int64) - 1


def glr_field(state: LogRankState, window: CategoryRange) -> np.ndarray:
    """
    Weighted field g_q(r) = φ̂_q(r) LR_q(r) for q < J-1 and r ∈ L.

    Returns:
        Array of shape (|L|, J-1); row i belongs to the i-th observable category
    """
    columns = _observable_columns(window)
    return (state.phi[:-1, columns] * state.lr[:-1, columns]).T


def cvm_statistic(field: np.ndarray) -> float:
    """Sum of squares of the weighted field."""
    return float(np.sum(np.square(field)))


def y0_matrix(state: LogRankState, window: CategoryRange) -> SymMatrix:
    """
    Blocked covariance operator estimate Ŷ₀ over the observable categories.

    Block (i, j) is M̂₀(r_i) Γ̂₀(r_min(i,j)) M̂₀(r_j) with
    M̂₀(r) = diag(φ̂_1(r), …, φ̂_{J-1}(r)); size ((J-1)|L|)².
    """
    columns = _observable_columns(window)
    k = state.table.n_groups - 1
    size = columns.size

    phi = state.phi[:-1, columns].T  # (|L|, K)
    gamma0 = state.gamma[columns][:, :-1, :-1]  # (|L|, K, K)
    nearest = np.minimum.outer(np.arange(size), np.arange(size))
    blocks = phi[:, None, :, None] * gamma0[nearest] * phi[None, :, None, :]
    y0 = blocks.transpose(0, 2, 1, 3).reshape(size * k, size * k)
    return SymMatrix.from_array(y0)


@dataclass(frozen=True)
class CvmComputation:
    """Everything the CVM test derives from one sample."""

    window: CategoryRange
    field: np.ndarray
    statistic: float
    y0: SymMatrix
    eigenvalues: np.ndarray  # descending, unclipped
    gate: bool

    @property
    def components(self) -> int:
        return self.field.shape[1]


def cvm_compute(
    state: LogRankState,
    window: CategoryRange,
    gate_tolerance: float,
    eigensolver: EigenMethod = "auto",
    jacobi_max_dim: int = 32,
) -> CvmComputation:
    """Field, statistic, Ŷ₀, its eigenvalues and the non-negativity gate."""
    field = glr_field(state, window)
    y0 = y0_matrix(state, window)
    eigenvalues = sym_eigenvalues(y0, method=eigensolver, jacobi_max_dim=jacobi_max_dim)
    gate = bool(eigenvalues[-1] >= -gate_tolerance * max(1.0, float(eigenvalues[0])))
    return CvmComputation(
        window=window,
        field=field,
        statistic=cvm_statistic(field),
        y0=y0,
        eigenvalues=eigenvalues,
        gate=gate,
    )


def cvm_test(
    table: RiskTable,
    weight: WeightSpec,
    gate_tolerance: float | None = None,
    eigen_cut: float | None = None,
    eigensolver: EigenMethod | None = None,
) -> HomogeneityResult:
    """
    Discrete Cramér-von Mises homogeneity test.

    The p-value is P[Σ λ̂ χ²₁ > CVM] over the clipped eigenvalues of Ŷ₀ that
    exceed eigen_cut · max λ̂.

    Raises:
        NoObservableCategoriesError: If the category window is empty
        GateError: If Ŷ₀ has a materially negative eigenvalue
    """
    settings = get_settings()
    gate_tolerance = settings.gate_tolerance if gate_tolerance is None else gate_tolerance
    eigen_cut = settings.eigen_cut if eigen_cut is None else eigen_cut
    eigensolver = eigensolver or settings.eigensolver

    window = category_range(table)
    state = LogRankState.build(table, weight)
    result = cvm_compute(
        state, window, gate_tolerance,
        eigensolver=eigensolver, jacobi_max_dim=settings.jacobi_max_dim,
    )
    if not result.gate:
        raise GateError(
            "covariance operator estimate not non-negative "
            f"(smallest eigenvalue {result.eigenvalues[-1]:.3g})"
        )

    clipped = np.maximum(result.eigenvalues, 0.0)
    top = float(clipped[0]) if clipped.size else 0.0
    kept = clipped[clipped > eigen_cut * top] if top > 0 else clipped[:0]
    if kept.size == 0:
        p_value = 1.0
    else:
        p_value = imhof_tail(kept, result.statistic, tolerance=settings.imhof_tolerance)

    logger.info(
        "cvm_test_done",
        statistic=result.statistic,
        p_value=p_value,
        dim=result.y0.dim,
        kept=int(kept.size),
        min_eigenvalue=float(result.eigenvalues[-1]),
    )
    return HomogeneityResult(
        test="CVM",
        statistic=result.statistic,
        p_value=p_value,
        weight=weight,
        d_lo=window.d_lo,
        d_hi=window.d_hi,
        observable_count=window.size,
        eigenvalues=tuple(float(v) for v in clipped),
        dropped_group=table.group_labels[-1],
        gate=result.gate,
    )
