"""Predictable weights u(n★, ℓ) and the pairwise class-K weight process."""

import math

import numpy as np

from .base import RiskTable, WeightKind, WeightSpec
from .exceptions import InvalidInputError
from .km import safe_ratio


def u_curve(spec: WeightSpec, table: RiskTable) -> np.ndarray:
    """
    u(n★, ℓ) for every category ℓ = 1..max_cat.

    Conventions: ΔR★(0) = 0 and V★(0) = n, so the Fleming-Harrington hazard
    factor at ℓ = 1 is 0 and the survival factor is 1; 0⁰ = 1.
    """
    pooled_at_risk = table.pooled_at_risk
    if spec.kind == WeightKind.UNIT:
        base = np.ones(table.max_cat)
    elif spec.kind == WeightKind.TARONE_WARE:
        base = (pooled_at_risk / table.n) ** spec.gamma
    else:
        pooled_hazard = safe_ratio(table.pooled_events, pooled_at_risk)
        previous = np.concatenate([[0.0], pooled_hazard[:-1]])
        survival = np.cumprod(1.0 - previous)
        base = np.power(previous, spec.beta) * np.power(survival, spec.delta)
    return spec.scale * base


def u_eval(spec: WeightSpec, table: RiskTable, category: int) -> float:
    """u(n★, ℓ) at a single category."""
    if category < 1:
        raise InvalidInputError(f"category must be ≥ 1, got {category}")
    if category > table.max_cat:
        # Past the table every count is zero; extend with the last-category state
        padded = RiskTable(
            at_risk=np.pad(table.at_risk, ((0, 0), (0, category - table.max_cat))),
            events=np.pad(table.events, ((0, 0), (0, category - table.max_cat))),
            censored=np.pad(table.censored, ((0, 0), (0, category - table.max_cat))),
            group_labels=table.group_labels,
        )
        return float(u_curve(spec, padded)[-1])
    return float(u_curve(spec, table)[category - 1])


def pair_weights(spec: WeightSpec, table: RiskTable, u: np.ndarray | None = None) -> np.ndarray:
    """
    U_{q,q1}(ℓ) = n^{-1/2} u(ℓ) V_q(ℓ) V_{q1}(ℓ) / V★(ℓ), shape (max_cat, J, J).

    The diagonal q = q1 is not part of the class and is set to 0.
    """
    if u is None:
        u = u_curve(spec, table)
    at_risk = table.at_risk.T.astype(float)  # (max_cat, J)
    coefficient = safe_ratio(u / math.sqrt(table.n), table.pooled_at_risk)
    weights = coefficient[:, None, None] * (at_risk[:, :, None] * at_risk[:, None, :])
    index = np.arange(table.n_groups)
    weights[:, index, index] = 0.0
    return weights


def pair_weight(spec: WeightSpec, table: RiskTable, q: int, q1: int, category: int) -> float:
    """
    Class-K weight U^{n_q}_{n_q1}(n★, ℓ) for one ordered pair of groups.

    Raises:
        InvalidInputError: If q == q1 or an index is out of range
    """
    if q == q1:
        raise InvalidInputError("pair weight needs two distinct groups")
    for g in (q, q1):
        if not 0 <= g < table.n_groups:
            raise InvalidInputError(f"group index {g} outside 0..{table.n_groups - 1}")
    column = table.column(category)
    pooled = table.pooled_at_risk[column]
    if pooled == 0:
        return 0.0
    u = u_eval(spec, table, category)
    product = int(table.at_risk[q, column]) * int(table.at_risk[q1, column])
    return (u / math.sqrt(table.n) / pooled) * float(product)
