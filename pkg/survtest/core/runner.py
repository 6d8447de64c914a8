"""Parallel simulation runner."""

import asyncio
import time
from concurrent.futures import Executor, ProcessPoolExecutor

from ..config import get_settings
from ..logging_config import configure_logging, get_logger, new_run_id
from ..schemas import SimConfig, SimResult, StudyConfig
from .exceptions import ConfigError
from .sim import ReplicationCounts, count_replications, level_rows, make_result, study_cells

logger = get_logger(__name__)


def _init_worker(json_logs: bool, log_level: str):
    configure_logging(json_logs=json_logs, log_level=log_level)


def chunk_indices(replications: int, chunks: int) -> list[range]:
    """Split 0..replications-1 into at most `chunks` contiguous ranges."""
    chunks = max(1, min(chunks, replications))
    size, extra = divmod(replications, chunks)
    ranges = []
    start = 0
    for i in range(chunks):
        stop = start + size + (1 if i < extra else 0)
        ranges.append(range(start, stop))
        start = stop
    return ranges


class SimulationRunner:
    """
    Fan replications out over a process pool.

    Replication indices are split into chunks; each chunk runs in a worker
    process and returns counts, which are summed. The sum is order-free, so
    results are identical for any worker count.
    """

    def __init__(self, workers: int | None = None, chunks_per_worker: int = 4):
        settings = get_settings()
        self._workers = workers or settings.workers
        if self._workers < 1:
            raise ConfigError(f"worker count must be ≥ 1, got {self._workers}")
        self._chunks_per_worker = chunks_per_worker

    @property
    def workers(self) -> int:
        return self._workers

    def _executor(self) -> Executor | None:
        if self._workers == 1:
            return None
        settings = get_settings()
        return ProcessPoolExecutor(
            max_workers=self._workers,
            initializer=_init_worker,
            initargs=(settings.json_logs, settings.log_level),
        )

    async def _count(
        self,
        cfg: SimConfig,
        pool: Executor | None,
        semaphore: asyncio.Semaphore,
    ) -> ReplicationCounts:
        loop = asyncio.get_running_loop()
        chunks = chunk_indices(cfg.replications, self._workers * self._chunks_per_worker)

        async def process(indices: range) -> ReplicationCounts:
            async with semaphore:
                return await loop.run_in_executor(pool, count_replications, cfg, indices)

        results = await asyncio.gather(*(process(chunk) for chunk in chunks))
        return sum(results, ReplicationCounts())

    async def count(self, cfg: SimConfig) -> ReplicationCounts:
        """Tally every replication of `cfg`."""
        pool = self._executor()
        try:
            return await self._count(cfg, pool, asyncio.Semaphore(self._workers))
        finally:
            if pool is not None:
                pool.shutdown()

    async def level(self, cfg: SimConfig, timing: bool = False) -> SimResult:
        """Empirical levels of one simulation configuration."""
        new_run_id()
        start = time.perf_counter()
        logger.info(
            "simulation_started",
            replications=cfg.replications,
            populations=len(cfg.groups),
            workers=self._workers,
        )
        counts = await self.count(cfg)
        elapsed = time.perf_counter() - start
        logger.info("simulation_finished", seconds=round(elapsed, 3))
        return make_result(cfg, level_rows(cfg, counts), elapsed if timing else None)

    async def study(self, study: StudyConfig, timing: bool = False) -> SimResult:
        """Empirical levels for every cell of a study grid."""
        new_run_id()
        start = time.perf_counter()
        cells = study_cells(study)
        logger.info("study_started", cells=len(cells), workers=self._workers)

        pool = self._executor()
        semaphore = asyncio.Semaphore(self._workers)
        try:
            counts = await asyncio.gather(
                *(self._count(cell, pool, semaphore) for cell in cells)
            )
        finally:
            if pool is not None:
                pool.shutdown()

        rows = []
        for cell, cell_counts in zip(cells, counts):
            rows.extend(level_rows(cell, cell_counts))
        elapsed = time.perf_counter() - start
        logger.info("study_finished", seconds=round(elapsed, 3))
        return make_result(study, rows, elapsed if timing else None)
