"""
Weighted log-rank processes and their covariance estimators.

For class-K weights the per-category covariance Q̂(ℓ) has the closed form

    Q̂ = U·diag(a)·Uᵀ − (w 1ᵀ + 1 wᵀ) ∘ U + diag(a ∘ S²)

with a_q = ĥ_q(1 − ĥ_q)/V_q, S_q = Σ_{q1} U_{q,q1} and w = a ∘ S; its diagonal is
φ̂²_q(ℓ) and its off-diagonal ψ̂(k, r, ℓ).
"""

import math
from dataclasses import dataclass

import numpy as np

from ..config import get_settings
from ..logging_config import get_logger
from .base import HomogeneityResult, RiskTable, WeightSpec
from .exceptions import (
    DegenerateCovarianceError,
    InvalidInputError,
    SingularMatrixError,
)
from .km import hazards, safe_ratio
from .numerics import chisq_sf, spd_solve
from .survival_data import category_range, type2_stop
from .weights import pair_weights, u_curve

logger = get_logger(__name__)


def _hazard_array(table: RiskTable, hazard: np.ndarray | None) -> np.ndarray:
    if hazard is None:
        return hazards(table)
    hazard = np.asarray(hazard, dtype=float)
    if hazard.shape != table.at_risk.shape:
        raise InvalidInputError(
            f"hazard shape {hazard.shape} does not match the table {table.at_risk.shape}"
        )
    return hazard


def _variance_factors(table: RiskTable, hazard: np.ndarray) -> np.ndarray:
    """a_q(ℓ) = ĥ_q(1 − ĥ_q)/V_q, shape (max_cat, J)."""
    return safe_ratio(hazard * (1.0 - hazard), table.at_risk).T


def covariance_increments(
    table: RiskTable,
    hazard: np.ndarray | None,
    weight: WeightSpec,
) -> np.ndarray:
    """Q̂(ℓ) for every category, shape (max_cat, J, J), exactly symmetric."""
    hazard = _hazard_array(table, hazard)
    U = pair_weights(weight, table)
    a = _variance_factors(table, hazard)
    S = U.sum(axis=2)
    w = a * S

    Q = np.einsum("lkq,lq,lrq->lkr", U, a, U)
    Q -= (w[:, :, None] + w[:, None, :]) * U
    index = np.arange(table.n_groups)
    Q[:, index, index] += a * S**2

    if table.n_groups == 2:
        # ψ̂ is only formed for three or more groups
        Q[:, 0, 1] = Q[:, 1, 0] = 0.0
    return 0.5 * (Q + np.swapaxes(Q, 1, 2))


def lr_increments(
    table: RiskTable,
    weight: WeightSpec,
    u: np.ndarray | None = None,
    hazard: np.ndarray | None = None,
) -> np.ndarray:
    """
    n^{-1/2} u(ℓ) V_q(ℓ) [ĥ_q(ℓ) − ΔR★(ℓ)/V★(ℓ)], shape (J, max_cat).

    Without `hazard` the product V_q ĥ_q is taken as ΔR_q, which is exact.
    """
    if u is None:
        u = u_curve(weight, table)
    pooled_hazard = safe_ratio(table.pooled_events, table.pooled_at_risk)
    if hazard is None:
        observed = table.events
    else:
        observed = table.at_risk * _hazard_array(table, hazard)
    excess = observed - table.at_risk * pooled_hazard
    return (u / math.sqrt(table.n)) * excess


def lr_process(
    table: RiskTable,
    hazard: np.ndarray | None,
    weight: WeightSpec,
) -> np.ndarray:
    """
    Cumulative weighted log-rank processes LR_q(j), shape (J, max_cat).

    A supplied `hazard` replaces ĥ_q in the increments; None uses the
    Kaplan-Meier hazards of the table.
    """
    return np.cumsum(lr_increments(table, weight, hazard=hazard), axis=1)


def phi2_hat(
    table: RiskTable,
    hazard: np.ndarray | None,
    weight: WeightSpec,
    q: int,
    category: int,
) -> float:
    """Variance estimator φ̂²_q(ℓ)."""
    if not 0 <= q < table.n_groups:
        raise InvalidInputError(f"group index {q} outside 0..{table.n_groups - 1}")
    column = table.column(category)
    return float(covariance_increments(table, hazard, weight)[column, q, q])


def psi_hat(
    table: RiskTable,
    hazard: np.ndarray | None,
    weight: WeightSpec,
    k: int,
    r: int,
    category: int,
) -> float:
    """
    Symmetrized cross-covariance estimator ψ̂(k, r, ℓ).

    Raises:
        InvalidInputError: If k == r, fewer than 3 groups, or an index is out of range
    """
    if table.n_groups < 3:
        raise InvalidInputError("ψ̂ is defined for three or more groups")
    if k == r:
        raise InvalidInputError("ψ̂ needs two distinct groups")
    for g in (k, r):
        if not 0 <= g < table.n_groups:
            raise InvalidInputError(f"group index {g} outside 0..{table.n_groups - 1}")
    column = table.column(category)
    return float(covariance_increments(table, hazard, weight)[column, k, r])


def gamma_hat(increments: np.ndarray) -> np.ndarray:
    """Γ̂(j) = Σ_{ℓ≤j} Q̂(ℓ); Γ̂(0) = 0 is implicit."""
    return np.cumsum(increments, axis=0)


@dataclass(frozen=True)
class LogRankState:
    """Log-rank processes and covariance estimators of one sample."""

    table: RiskTable
    weight: WeightSpec
    hazard: np.ndarray
    lr: np.ndarray  # (J, max_cat)
    increments: np.ndarray  # Q̂, (max_cat, J, J)
    gamma: np.ndarray  # Γ̂, (max_cat, J, J)

    @classmethod
    def build(cls, table: RiskTable, weight: WeightSpec) -> "LogRankState":
        hazard = hazards(table)
        increments = covariance_increments(table, hazard, weight)
        return cls(
            table=table,
            weight=weight,
            hazard=hazard,
            lr=lr_process(table, None, weight),
            increments=increments,
            gamma=gamma_hat(increments),
        )

    @property
    def phi2(self) -> np.ndarray:
        """φ̂²_q(ℓ), shape (J, max_cat)."""
        return np.diagonal(self.increments, axis1=1, axis2=2).T

    @property
    def phi(self) -> np.ndarray:
        """φ̂_q(ℓ) = sqrt(φ̂²_q(ℓ)), shape (J, max_cat)."""
        return np.sqrt(np.maximum(self.phi2, 0.0))

    def reduced(self, category: int) -> tuple[np.ndarray, np.ndarray]:
        """(LR₀(j), Γ̂₀(j)): the last group's component dropped."""
        column = self.table.column(category)
        return self.lr[:-1, column], self.gamma[column, :-1, :-1]

    def chi_square(self, category: int, rcond_min: float) -> tuple[float, float]:
        """
        X²(j) = LR₀ᵀ Γ̂₀⁻¹ LR₀ and the reciprocal condition of Γ̂₀(j).

        Raises:
            DegenerateCovarianceError: If Γ̂₀(j) is singular to tolerance
        """
        lr0, gamma0 = self.reduced(category)
        try:
            solution, rcond = spd_solve(gamma0, lr0, rcond_min=rcond_min)
        except SingularMatrixError as e:
            raise DegenerateCovarianceError(
                f"degenerate covariance; test not computable ({e})"
            ) from e
        return float(lr0 @ solution), rcond


def _logrank_at(
    state: LogRankState,
    d_lo: int,
    stop: int,
    observable_count: int,
    rcond_min: float | None,
    trajectory: bool,
    test_name: str,
) -> HomogeneityResult:
    if rcond_min is None:
        rcond_min = get_settings().rcond_min

    statistic, rcond = state.chi_square(stop, rcond_min)
    statistic = max(statistic, 0.0)
    df = state.table.n_groups - 1
    p_value = chisq_sf(statistic, df)

    path: tuple[tuple[int, float], ...] = ()
    if trajectory:
        points = []
        for category in range(d_lo, stop + 1):
            try:
                points.append((category, state.chi_square(category, rcond_min)[0]))
            except DegenerateCovarianceError:
                continue
        path = tuple(points)

    logger.info(
        "logrank_test_done",
        test=test_name,
        statistic=statistic,
        df=df,
        p_value=p_value,
        d_lo=d_lo,
        stop=stop,
        rcond=rcond,
    )
    return HomogeneityResult(
        test=test_name,
        statistic=statistic,
        p_value=p_value,
        weight=state.weight,
        d_lo=d_lo,
        d_hi=stop,
        observable_count=observable_count,
        df=df,
        dropped_group=state.table.group_labels[-1],
        rcond=rcond,
        trajectory=path,
    )


def logrank_test(
    table: RiskTable,
    weight: WeightSpec,
    rcond_min: float | None = None,
    trajectory: bool = False,
) -> HomogeneityResult:
    """
    Weighted log-rank homogeneity test X² evaluated at d_hi.

    Raises:
        NoObservableCategoriesError: If the category window is empty
        DegenerateCovarianceError: If Γ̂₀(d_hi) is singular to tolerance
    """
    window = category_range(table)
    state = LogRankState.build(table, weight)
    return _logrank_at(state, window.d_lo, window.d_hi, window.size, rcond_min, trajectory, "LR")


def logrank_test_type2(
    table: RiskTable,
    weight: WeightSpec,
    beta: float,
    rcond_min: float | None = None,
    trajectory: bool = False,
) -> HomogeneityResult:
    """
    Log-rank test stopped at the pooled β-quantile (Type 2 censoring).

    All sums stop at min(type2_stop(β), d_hi).
    """
    window = category_range(table)
    stop = min(type2_stop(table, beta), window.d_hi)
    observable = sum(1 for category in window.observable if category <= stop)
    state = LogRankState.build(table, weight)
    logger.debug("type2_stop", beta=beta, stop=stop, d_hi=window.d_hi)
    return _logrank_at(state, window.d_lo, stop, observable, rcond_min, trajectory, "LR-type2")
