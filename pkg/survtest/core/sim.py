"""
Monte Carlo harness for empirical significance levels.

Each replication draws J Poisson populations (conditioned on values ≥ 1),
optionally censored by an independent Poisson variable, runs the log-rank and
Cramér-von Mises tests and records p-values or a failure flag. Aggregation
keeps counts only, so results do not depend on execution order.
"""

import math
import time
from bisect import bisect_left
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TypeVar

from pydantic import BaseModel, ValidationError

from ..config import get_settings
from ..logging_config import get_logger
from ..schemas import LevelRow, SimConfig, SimResult, StudyConfig
from .base import Observation
from .cvm import cvm_test
from .exceptions import (
    ConfigError,
    DegenerateCovarianceError,
    GateError,
    NoObservableCategoriesError,
    NumericalError,
    SimulationError,
)
from .logrank import logrank_test
from .rng import ALGORITHM, Xoshiro256StarStar, replication_stream, stream_seed
from .survival_data import build_risk_table

logger = get_logger(__name__)

GATE_WARNING_RATE = 0.01

_FLAGS: tuple[tuple[type[Exception], str], ...] = (
    (NoObservableCategoriesError, "no_range"),
    (DegenerateCovarianceError, "singular"),
    (GateError, "gate"),
    (NumericalError, "numerical"),
)

ModelT = TypeVar("ModelT", bound=BaseModel)


@lru_cache(maxsize=64)
def _poisson_cdf(lam: float) -> tuple[float, ...]:
    """Running sums F(0), F(1), … of the Poisson(λ) pmf up to a negligible tail."""
    p = math.exp(-lam)
    if p == 0.0:
        raise ConfigError(f"Poisson rate {lam} too large for CDF inversion")
    limit = int(lam + 40.0 * math.sqrt(lam) + 100)
    cdf = []
    total = 0.0
    for k in range(limit):
        total += p
        cdf.append(total)
        if k > lam and (total >= 1.0 or p < 1e-300):
            break
        p *= lam / (k + 1)
    return tuple(cdf)


def poisson_draw(rng: Xoshiro256StarStar, lam: float) -> int:
    """Poisson(λ) by inversion: the smallest k with F(k) ≥ U."""
    cdf = _poisson_cdf(lam)
    k = bisect_left(cdf, rng.random())
    return min(k, len(cdf) - 1)


def positive_poisson_draw(rng: Xoshiro256StarStar, lam: float) -> int:
    """Poisson(λ) conditioned on ≥ 1, zeros resampled."""
    while True:
        value = poisson_draw(rng, lam)
        if value >= 1:
            return value


def sample_group(
    rng: Xoshiro256StarStar,
    lam_event: float,
    censor: float | None,
    n: int,
    group: int = 0,
) -> list[Observation]:
    """
    Draw n censored observations for one population.

    Per subject the lifetime W is drawn before the censoring time C;
    X = min(W, C) and a tie W = C counts as an event.
    """
    observations = []
    for _ in range(n):
        lifetime = positive_poisson_draw(rng, lam_event)
        if censor is None:
            observations.append(Observation(time=lifetime, event=True, group=group))
            continue
        censoring = positive_poisson_draw(rng, censor)
        observations.append(
            Observation(time=min(lifetime, censoring), event=lifetime <= censoring, group=group)
        )
    return observations


@dataclass(frozen=True)
class ReplicationOutcome:
    """p-values of one replication; a test that failed carries a flag instead."""

    p_lr: float | None
    p_cvm: float | None
    lr_flag: str | None = None
    cvm_flag: str | None = None


def _flag(error: Exception) -> str:
    for kind, name in _FLAGS:
        if isinstance(error, kind):
            return name
    raise error


def run_replication(cfg: SimConfig, index: int) -> ReplicationOutcome:
    """Simulate replication `index` of `cfg` and run both tests on it."""
    rng = replication_stream(cfg.seed, index)
    censor = cfg.censoring.lam if cfg.censoring.kind == "poisson" else None

    observations: list[Observation] = []
    for group, spec in enumerate(cfg.groups):
        observations.extend(sample_group(rng, spec.lam, censor, spec.n, group))
    table = build_risk_table(observations)
    weight = cfg.weight_spec

    p_lr = p_cvm = None
    lr_flag = cvm_flag = None
    try:
        p_lr = logrank_test(table, weight).p_value
    except (NoObservableCategoriesError, DegenerateCovarianceError, NumericalError) as e:
        lr_flag = _flag(e)
    try:
        p_cvm = cvm_test(table, weight).p_value
    except (NoObservableCategoriesError, GateError, NumericalError) as e:
        cvm_flag = _flag(e)
    return ReplicationOutcome(p_lr=p_lr, p_cvm=p_cvm, lr_flag=lr_flag, cvm_flag=cvm_flag)


@dataclass
class RejectionTally:
    """Rejections and failures of one test over a set of replications."""

    rejections: int = 0
    valid: int = 0
    failures: Counter = field(default_factory=Counter)

    def record(self, p_value: float | None, flag: str | None, alpha: float):
        if flag is not None:
            self.failures[flag] += 1
            return
        self.valid += 1
        if p_value <= alpha:
            self.rejections += 1

    def __add__(self, other: "RejectionTally") -> "RejectionTally":
        return RejectionTally(
            rejections=self.rejections + other.rejections,
            valid=self.valid + other.valid,
            failures=self.failures + other.failures,
        )

    @property
    def level(self) -> float | None:
        return self.rejections / self.valid if self.valid else None


@dataclass
class ReplicationCounts:
    """Per-test tallies; addition is commutative, so chunks merge in any order."""

    lr: RejectionTally = field(default_factory=RejectionTally)
    cvm: RejectionTally = field(default_factory=RejectionTally)

    def __add__(self, other: "ReplicationCounts") -> "ReplicationCounts":
        return ReplicationCounts(lr=self.lr + other.lr, cvm=self.cvm + other.cvm)

    @property
    def replications(self) -> int:
        return self.lr.valid + sum(self.lr.failures.values())


def count_replications(cfg: SimConfig, indices: Iterable[int]) -> ReplicationCounts:
    """Run the given replications and tally them."""
    counts = ReplicationCounts()
    for index in indices:
        outcome = run_replication(cfg, index)
        counts.lr.record(outcome.p_lr, outcome.lr_flag, cfg.alpha)
        counts.cvm.record(outcome.p_cvm, outcome.cvm_flag, cfg.alpha)
    return counts


def level_rows(cfg: SimConfig, counts: ReplicationCounts) -> list[LevelRow]:
    """
    CVM and LR rows of one simulation cell.

    Raises:
        SimulationError: If every replication was flagged for both tests
    """
    if counts.lr.valid == 0 and counts.cvm.valid == 0:
        raise SimulationError(
            f"all {cfg.replications} replications flagged "
            f"(LR {dict(counts.lr.failures)}, CVM {dict(counts.cvm.failures)})"
        )

    gate_rate = counts.cvm.failures["gate"] / cfg.replications
    if gate_rate >= GATE_WARNING_RATE:
        logger.warning(
            "cvm_gate_failure_rate",
            rate=gate_rate,
            populations=len(cfg.groups),
            sample_size=cfg.sample_size,
        )

    rows = []
    for name, tally in (("CVM", counts.cvm), ("LR", counts.lr)):
        if tally.valid == 0:
            logger.warning("no_valid_replications", test=name, failures=dict(tally.failures))
        rows.append(
            LevelRow(
                sample_size=cfg.sample_size,
                populations=len(cfg.groups),
                censoring=cfg.censoring.label,
                test=name,
                level=tally.level,
                rejections=tally.rejections,
                valid=tally.valid,
                failures=dict(sorted(tally.failures.items())),
            )
        )
    return rows


def study_cells(study: StudyConfig) -> list[SimConfig]:
    """Simulation cells in report order: censoring, then sample size, then J."""
    cells = []
    for censoring in study.censoring:
        for sample_size in study.sample_sizes:
            for populations in study.populations:
                cells.append(
                    SimConfig(
                        groups=[{"lambda": study.lam, "n": sample_size}] * populations,
                        censoring=censoring,
                        replications=study.replications,
                        alpha=study.alpha,
                        weight=study.weight,
                        seed=stream_seed(study.seed, len(cells)),
                    )
                )
    return cells


def make_result(
    cfg: SimConfig | StudyConfig,
    rows: list[LevelRow],
    wall_time: float | None = None,
) -> SimResult:
    return SimResult(
        rng=ALGORITHM,
        seed=cfg.seed,
        replications=cfg.replications,
        alpha=cfg.alpha,
        weight=cfg.weight,
        rows=rows,
        wall_time_seconds=wall_time,
    )


def empirical_level(cfg: SimConfig, timing: bool = False) -> SimResult:
    """
    Empirical rejection rates of both tests, run sequentially.

    Flagged replications are excluded from a test's denominator and reported
    under `failures`. `SimulationRunner` runs the same computation in parallel.
    """
    start = time.perf_counter()
    counts = count_replications(cfg, range(cfg.replications))
    rows = level_rows(cfg, counts)
    return make_result(cfg, rows, time.perf_counter() - start if timing else None)


def run_study(study: StudyConfig, timing: bool = False) -> SimResult:
    """Empirical levels over a grid of sample sizes, population counts and censoring."""
    start = time.perf_counter()
    rows: list[LevelRow] = []
    for cell in study_cells(study):
        counts = count_replications(cell, range(cell.replications))
        rows.extend(level_rows(cell, counts))
    return make_result(study, rows, time.perf_counter() - start if timing else None)


def load_config(model: type[ModelT], text: str | bytes) -> ModelT:
    """
    Validate a JSON simulation document; SURVTEST_SEED overrides its seed.

    Raises:
        ConfigError: If the document fails validation
    """
    try:
        cfg = model.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e
    seed = get_settings().seed
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    return cfg
