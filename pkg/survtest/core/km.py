"""Discrete Kaplan-Meier estimators: hazard, cumulative hazard and mass function."""

from dataclasses import dataclass

import numpy as np

from .base import RiskTable
from .exceptions import InvalidInputError


def safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """numerator / denominator where denominator > 0, else 0."""
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    out = np.zeros(np.broadcast(numerator, denominator).shape)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


@dataclass(frozen=True)
class HazardEstimate:
    """Per-group hazard, cumulative hazard and probability mass, shape (J, max_cat)."""

    hazard: np.ndarray
    cumulative_hazard: np.ndarray
    pmf: np.ndarray

    @classmethod
    def from_table(cls, table: RiskTable) -> "HazardEstimate":
        hazard = hazards(table)
        return cls(
            hazard=hazard,
            cumulative_hazard=cumulative_hazard_hat(hazard),
            pmf=pmf_hat(hazard),
        )


def hazards(table: RiskTable) -> np.ndarray:
    """ĥ for every group at once; zero where the group has nobody at risk."""
    return safe_ratio(table.events, table.at_risk)


def hazard_hat(table: RiskTable, group: int) -> np.ndarray:
    """
    Kaplan-Meier hazard ĥ_p(ℓ) = ΔR_p(ℓ) / V_p(ℓ) of one group.

    Raises:
        InvalidInputError: If the group index is out of range
    """
    if not 0 <= group < table.n_groups:
        raise InvalidInputError(f"group index {group} outside 0..{table.n_groups - 1}")
    return safe_ratio(table.events[group], table.at_risk[group])


def cumulative_hazard_hat(hazard: np.ndarray) -> np.ndarray:
    """Ĥ(i) = Σ_{ℓ≤i} ĥ(ℓ) along the last axis."""
    return np.cumsum(hazard, axis=-1)


def pmf_hat(hazard: np.ndarray) -> np.ndarray:
    """π̂(i) = ĥ(i) · Π_{ℓ<i} (1 − ĥ(ℓ)) along the last axis."""
    survival = np.cumprod(1.0 - hazard, axis=-1)
    before = np.concatenate([np.ones_like(hazard[..., :1]), survival[..., :-1]], axis=-1)
    return hazard * before


def survival_hat(hazard: np.ndarray) -> np.ndarray:
    """Product-limit survival Π_{ℓ≤i} (1 − ĥ(ℓ))."""
    return np.cumprod(1.0 - hazard, axis=-1)
