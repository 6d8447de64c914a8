"""Risk tables, the test category window and Type 2 stopping."""

from collections.abc import Sequence

import numpy as np

from .base import CategoryRange, Observation, RiskTable
from .exceptions import (
    InvalidInputError,
    NoObservableCategoriesError,
    QuantileNotAttainedError,
)


def build_risk_table(
    observations: Sequence[Observation],
    group_labels: Sequence[str] | None = None,
) -> RiskTable:
    """
    Count at-risk subjects, events and censorings per group and category.

    Args:
        observations: Censored records; group indices must be 0..J-1
        group_labels: Optional labels for the group indices

    Returns:
        RiskTable sized to the largest observed category

    Raises:
        InvalidInputError: If there are no observations or fewer than 2 groups
    """
    if not observations:
        raise InvalidInputError("no observations")

    n_groups = max(obs.group for obs in observations) + 1
    if group_labels is not None:
        if len(group_labels) < n_groups:
            raise InvalidInputError("group index outside the label mapping")
        n_groups = len(group_labels)
    if n_groups < 2:
        raise InvalidInputError(f"at least 2 groups are required, found {n_groups}")

    max_cat = max(obs.time for obs in observations)
    groups = np.fromiter((obs.group for obs in observations), dtype=np.int64)
    columns = np.fromiter((obs.time - 1 for obs in observations), dtype=np.int64)
    flags = np.fromiter((obs.event for obs in observations), dtype=bool)

    events = np.zeros((n_groups, max_cat), dtype=np.int64)
    censored = np.zeros((n_groups, max_cat), dtype=np.int64)
    np.add.at(events, (groups[flags], columns[flags]), 1)
    np.add.at(censored, (groups[~flags], columns[~flags]), 1)

    # V(ℓ) counts records with X ≥ ℓ: reverse cumulative sum of exits
    exits = events + censored
    at_risk = np.cumsum(exits[:, ::-1], axis=1)[:, ::-1]

    return RiskTable(
        at_risk=at_risk,
        events=events,
        censored=censored,
        group_labels=tuple(group_labels) if group_labels is not None else (),
    )


def category_range(table: RiskTable) -> CategoryRange:
    """
    Locate [d_lo, d_hi] and the observable categories inside it.

    d_lo is the first category with a pooled event, d_hi the last category at
    which every group still has subjects at risk.

    Raises:
        NoObservableCategoriesError: If no pooled event falls inside the window
    """
    all_at_risk = np.flatnonzero(table.at_risk.min(axis=0) > 0)
    pooled_events = table.pooled_events
    with_events = np.flatnonzero(pooled_events > 0)

    if all_at_risk.size == 0 or with_events.size == 0:
        raise NoObservableCategoriesError("no observable categories")

    d_lo = int(with_events[0]) + 1
    d_hi = int(all_at_risk[-1]) + 1
    if d_lo > d_hi:
        raise NoObservableCategoriesError("no observable categories")

    # V is nonincreasing, so every ℓ ≤ d_hi has all groups at risk
    window = pooled_events[d_lo - 1 : d_hi]
    observable = tuple(int(i) + d_lo for i in np.flatnonzero(window > 0))
    return CategoryRange(d_lo=d_lo, d_hi=d_hi, observable=observable)


def type2_stop(table: RiskTable, beta: float) -> int:
    """
    Smallest category at which the pooled event fraction reaches `beta`.

    Raises:
        InvalidInputError: If beta is outside (0, 1)
        QuantileNotAttainedError: If the fraction is never reached
    """
    if not 0 < beta < 1:
        raise InvalidInputError(f"beta must lie in (0, 1), got {beta}")

    fraction = np.cumsum(table.pooled_events) / table.n
    reached = np.flatnonzero(fraction >= beta)
    if reached.size == 0:
        raise QuantileNotAttainedError(
            f"beta-quantile not attained: maximum event fraction is {fraction[-1]:.4g}"
        )
    return int(reached[0]) + 1
