"""Pydantic schemas for reports and simulation documents."""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from . import __version__
from .core.base import HomogeneityResult, WeightSpec
from .core.exceptions import InvalidInputError

SCHEMA_VERSION = 1


class TestReport(BaseModel):
    """Outcome of one homogeneity test."""

    __test__ = False  # not a pytest class

    test: str
    statistic: float
    p_value: float = Field(ge=0.0, le=1.0)
    df: Optional[int] = None
    eigenvalues: Optional[list[float]] = None
    weight: str
    d_lo: int
    d_hi: int
    observable_count: int
    dropped_group: Optional[str] = None
    rcond: Optional[float] = None
    gate: Optional[bool] = None
    trajectory: Optional[list[tuple[int, float]]] = None
    version: str = __version__
    input_digest: Optional[str] = None

    @classmethod
    def from_result(cls, result: HomogeneityResult, input_digest: str | None = None) -> "TestReport":
        return cls(
            test=result.test,
            statistic=result.statistic,
            p_value=result.p_value,
            df=result.df,
            eigenvalues=list(result.eigenvalues) if result.test == "CVM" else None,
            weight=str(result.weight),
            d_lo=result.d_lo,
            d_hi=result.d_hi,
            observable_count=result.observable_count,
            dropped_group=result.dropped_group,
            rcond=result.rcond,
            gate=result.gate,
            trajectory=[list(p) for p in result.trajectory] or None,
            input_digest=input_digest,
        )


class TestFailure(BaseModel):
    """A test whose null law could not be evaluated on the sample."""

    __test__ = False

    test: str
    error: str
    message: str


class CommandReport(BaseModel):
    """Envelope printed by `survtest test --json`."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: Literal[1] = Field(default=SCHEMA_VERSION, alias="schema")
    version: str = __version__
    input_digest: Optional[str] = None
    groups: dict[str, int]
    dropped_group: str
    weight: str
    type2_beta: Optional[float] = None
    reports: list[TestReport] = Field(default_factory=list)
    failures: list[TestFailure] = Field(default_factory=list)


class GroupSpec(BaseModel):
    """One simulated population: Poisson(λ) lifetimes conditioned on ≥ 1."""

    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(alias="lambda", gt=0, le=700)
    n: int = Field(ge=1)


class CensoringSpec(BaseModel):
    """Censoring scheme: none, or Poisson(λ_c) conditioned on ≥ 1."""

    model_config = ConfigDict(populate_by_name=True)

    kind: Literal["none", "poisson"] = "none"
    lam: Optional[float] = Field(default=None, alias="lambda", gt=0, le=700)

    @model_validator(mode="after")
    def _check_rate(self) -> "CensoringSpec":
        if self.kind == "poisson" and self.lam is None:
            raise ValueError("poisson censoring requires lambda")
        return self

    @property
    def label(self) -> str:
        return "none" if self.kind == "none" else f"poisson:{self.lam:g}"


def _check_weight(value: str) -> str:
    try:
        WeightSpec.parse(value)
    except InvalidInputError as e:
        raise ValueError(str(e)) from e
    return value


class SimConfig(BaseModel):
    """Simulation document: `{groups, censoring, replications, alpha, weight, seed}`."""

    model_config = ConfigDict(populate_by_name=True)

    groups: list[GroupSpec] = Field(min_length=2)
    censoring: CensoringSpec = Field(default_factory=CensoringSpec)
    replications: int = Field(ge=1)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    weight: str = "unit"
    seed: int = Field(default=0, ge=0, lt=2**64)

    _weight = field_validator("weight")(classmethod(lambda cls, v: _check_weight(v)))

    @property
    def weight_spec(self) -> WeightSpec:
        return WeightSpec.parse(self.weight)

    @property
    def sample_size(self) -> Optional[int]:
        """Common group size, if all groups share one."""
        sizes = {group.n for group in self.groups}
        return sizes.pop() if len(sizes) == 1 else None


class StudyConfig(BaseModel):
    """Grid of simulations: sample sizes × population counts × censoring schemes."""

    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(default=100.0, alias="lambda", gt=0, le=700)
    sample_sizes: list[int] = Field(min_length=1)
    populations: list[int] = Field(min_length=1)
    censoring: list[CensoringSpec] = Field(default_factory=lambda: [CensoringSpec()])
    replications: int = Field(ge=1)
    alpha: float = Field(default=0.05, gt=0, lt=1)
    weight: str = "unit"
    seed: int = Field(default=0, ge=0, lt=2**64)

    _weight = field_validator("weight")(classmethod(lambda cls, v: _check_weight(v)))

    @field_validator("sample_sizes")
    @classmethod
    def _positive_sizes(cls, v: list[int]) -> list[int]:
        if any(size < 1 for size in v):
            raise ValueError("sample sizes must be ≥ 1")
        return v

    @field_validator("populations")
    @classmethod
    def _at_least_two(cls, v: list[int]) -> list[int]:
        if any(count < 2 for count in v):
            raise ValueError("population counts must be ≥ 2")
        return v


class LevelRow(BaseModel):
    """Empirical level of one test in one simulation cell."""

    sample_size: Optional[int]
    populations: int
    censoring: str
    test: Literal["CVM", "LR"]
    level: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    rejections: int
    valid: int
    failures: dict[str, int] = Field(default_factory=dict)


class SimResult(BaseModel):
    """Rows of empirical levels, laid out SS × populations × test."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: Literal[1] = Field(default=SCHEMA_VERSION, alias="schema")
    version: str = __version__
    rng: str
    seed: int
    replications: int
    alpha: float
    weight: str
    rows: list[LevelRow]
    wall_time_seconds: Optional[float] = None

    def row(self, test: str, sample_size: int | None = None, populations: int | None = None,
            censoring: str | None = None) -> LevelRow:
        """First row matching the given coordinates."""
        for row in self.rows:
            if row.test != test:
                continue
            if sample_size is not None and row.sample_size != sample_size:
                continue
            if populations is not None and row.populations != populations:
                continue
            if censoring is not None and row.censoring != censoring:
                continue
            return row
        raise KeyError(f"no row for test={test}")
