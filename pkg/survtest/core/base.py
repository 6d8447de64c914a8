"""Domain types shared by the estimators and tests."""

import math
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import InvalidInputError


@dataclass(frozen=True, slots=True)
class Observation:
    """One censored record: observed category, event flag and group index."""

    time: int
    event: bool
    group: int

    def __post_init__(self):
        if self.time < 1:
            raise InvalidInputError("category must be ≥ 1")
        if self.group < 0:
            raise InvalidInputError(f"group index must be non-negative, got {self.group}")


@dataclass(frozen=True)
class ParsedSample:
    """Observations plus the label → index mapping recorded at ingestion."""

    observations: tuple[Observation, ...]
    group_labels: tuple[str, ...]
    digest: str | None = None

    @property
    def n_groups(self) -> int:
        return len(self.group_labels)

    @property
    def group_index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.group_labels)}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RiskTable:
    """
    Per-group at-risk, event and censor counts over categories 1..max_cat.

    Arrays have shape (J, max_cat); column ℓ-1 holds category ℓ.
    """

    at_risk: np.ndarray
    events: np.ndarray
    censored: np.ndarray
    group_labels: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("at_risk", "events", "censored"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=np.int64)))
        if not self.group_labels:
            labels = tuple(str(i) for i in range(self.at_risk.shape[0]))
            object.__setattr__(self, "group_labels", labels)

    @property
    def n_groups(self) -> int:
        return self.at_risk.shape[0]

    @property
    def max_cat(self) -> int:
        return self.at_risk.shape[1]

    @property
    def sizes(self) -> np.ndarray:
        """Sample size n_p of each group."""
        return self.at_risk[:, 0]

    @property
    def n(self) -> int:
        return int(self.sizes.sum())

    @property
    def group_max_cat(self) -> np.ndarray:
        """Largest observed category of each group (0 for an empty group)."""
        positive = self.at_risk > 0
        last = self.max_cat - np.argmax(positive[:, ::-1], axis=1)
        return np.where(positive.any(axis=1), last, 0)

    @property
    def pooled_at_risk(self) -> np.ndarray:
        return self.at_risk.sum(axis=0)

    @property
    def pooled_events(self) -> np.ndarray:
        return self.events.sum(axis=0)

    def column(self, category: int) -> int:
        """Array column of a category."""
        if not 1 <= category <= self.max_cat:
            raise InvalidInputError(f"category {category} outside 1..{self.max_cat}")
        return category - 1

    def truncated(self, last_category: int) -> "RiskTable":
        """Table restricted to categories 1..last_category."""
        stop = self.column(last_category) + 1
        return RiskTable(
            at_risk=self.at_risk[:, :stop],
            events=self.events[:, :stop],
            censored=self.censored[:, :stop],
            group_labels=self.group_labels,
        )


@dataclass(frozen=True)
class CategoryRange:
    """Category window [d_lo, d_hi] and its observable categories."""

    d_lo: int
    d_hi: int
    observable: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.observable)


class WeightKind(str, Enum):
    """Supported members of the class-K weight family."""

    UNIT = "unit"
    TARONE_WARE = "tw"
    FLEMING_HARRINGTON = "fh"


_NUMBER = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"
_WEIGHT_PATTERNS = {
    WeightKind.UNIT: re.compile(rf"^unit(?:\*(?P<scale>{_NUMBER}))?$"),
    WeightKind.TARONE_WARE: re.compile(rf"^tw:(?P<gamma>{_NUMBER})(?:\*(?P<scale>{_NUMBER}))?$"),
    WeightKind.FLEMING_HARRINGTON: re.compile(
        rf"^fh:(?P<beta>{_NUMBER}),(?P<delta>{_NUMBER})(?:\*(?P<scale>{_NUMBER}))?$"
    ),
}


@dataclass(frozen=True)
class WeightSpec:
    """
    Choice of the predictable weight u(n★, ·).

    `scale` is a positive constant multiplier applied on top of the family.
    """

    kind: WeightKind = WeightKind.UNIT
    gamma: float = 1.0
    beta: float = 0.0
    delta: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        values = {"gamma": self.gamma, "beta": self.beta, "delta": self.delta}
        for name, value in values.items():
            if not math.isfinite(value) or value < 0:
                raise InvalidInputError(f"weight parameter {name} must be finite and ≥ 0")
        if self.kind == WeightKind.TARONE_WARE and self.gamma <= 0:
            raise InvalidInputError("Tarone-Ware exponent must be > 0")
        if not math.isfinite(self.scale) or self.scale <= 0:
            raise InvalidInputError("weight scale must be finite and > 0")

    @classmethod
    def unit(cls) -> "WeightSpec":
        return cls()

    @classmethod
    def tarone_ware(cls, gamma: float = 0.5) -> "WeightSpec":
        return cls(kind=WeightKind.TARONE_WARE, gamma=gamma)

    @classmethod
    def fleming_harrington(cls, beta: float, delta: float) -> "WeightSpec":
        return cls(kind=WeightKind.FLEMING_HARRINGTON, beta=beta, delta=delta)

    @classmethod
    def parse(cls, text: str) -> "WeightSpec":
        """
        Parse the CLI grammar `unit | tw:<gamma> | fh:<beta>,<delta>`.

        Each form accepts an optional `*<scale>` suffix.

        Raises:
            InvalidInputError: If the text matches none of the forms
        """
        text = text.strip().lower()
        for kind, pattern in _WEIGHT_PATTERNS.items():
            match = pattern.match(text)
            if not match:
                continue
            groups = match.groupdict()
            scale = float(groups["scale"]) if groups.get("scale") else 1.0
            if kind == WeightKind.TARONE_WARE:
                return cls(kind=kind, gamma=float(groups["gamma"]), scale=scale)
            if kind == WeightKind.FLEMING_HARRINGTON:
                return cls(
                    kind=kind,
                    beta=float(groups["beta"]),
                    delta=float(groups["delta"]),
                    scale=scale,
                )
            return cls(kind=kind, scale=scale)
        raise InvalidInputError(
            f"invalid weight '{text}': expected unit, tw:<gamma> or fh:<beta>,<delta>"
        )

    def scaled(self, factor: float) -> "WeightSpec":
        """Same family with u multiplied by `factor`."""
        return WeightSpec(self.kind, self.gamma, self.beta, self.delta, self.scale * factor)

    def __str__(self) -> str:
        if self.kind == WeightKind.TARONE_WARE:
            text = f"tw:{self.gamma:g}"
        elif self.kind == WeightKind.FLEMING_HARRINGTON:
            text = f"fh:{self.beta:g},{self.delta:g}"
        else:
            text = "unit"
        if self.scale != 1.0:
            text += f"*{self.scale:g}"
        return text


@dataclass(frozen=True)
class HomogeneityResult:
    """Result of one homogeneity test before serialization."""

    test: str
    statistic: float
    p_value: float
    weight: WeightSpec
    d_lo: int
    d_hi: int
    observable_count: int
    df: int | None = None
    eigenvalues: tuple[float, ...] = ()
    dropped_group: str | None = None
    rcond: float | None = None
    gate: bool | None = None
    trajectory: tuple[tuple[int, float], ...] = field(default=())
