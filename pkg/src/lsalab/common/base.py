"""Replica execution and retry plumbing shared by the Monte Carlo estimators."""

import logging
import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import Any, TypeVar

import numpy as np
from tenacity import (
    before_sleep_log,
    retry,
    retry_if_exception_type,
    stop_after_attempt,
)

from .exceptions import AveragingNotConvergedError
from .models import AveragingConfig
from .rng import batch_sizes, stream

logger = logging.getLogger(__name__)

T = TypeVar("T")

BatchTask = Callable[[np.random.Generator, int, int], T]


def default_workers() -> int:
    """Worker pool size from ``LSALAB_WORKERS`` or the CPU count."""
    value = os.getenv("LSALAB_WORKERS")
    if value:
        return max(1, int(value))
    return max(1, min(8, os.cpu_count() or 1))


class ReplicaRunner:
    """Runs replica batches on a bounded thread pool with a deterministic merge.

    Batch ``k`` always receives stream ``(seed, k)`` and results come back in
    batch order, so the output does not depend on ``workers``.

    Example:
        ```python
        runner = ReplicaRunner(seed=7, replicas=10_000, batches=50)
        means = runner.map(lambda rng, size, k: rng.random(size).mean())
        ```
    """

    def __init__(
        self,
        seed: int,
        *,
        replicas: int,
        batches: int = 50,
        workers: int | None = None,
    ) -> None:
        """Initialize replica runner.

        Args:
            seed: 64-bit master seed
            replicas: Total number of replicas
            batches: Number of CI batches (one stream per batch)
            workers: Thread pool size (defaults to ``LSALAB_WORKERS``)
        """
        self.seed = seed
        self.replicas = replicas
        self.sizes = batch_sizes(replicas, batches)
        self.workers = workers or default_workers()

    @property
    def batches(self) -> int:
        """Effective number of batches."""
        return len(self.sizes)

    def map(self, task: BatchTask[T]) -> list[T]:
        """Run ``task(rng, size, batch_index)`` for every batch.

        Args:
            task: Batch simulation; must only touch its own generator

        Returns:
            Task results ordered by batch index
        """
        jobs = [(stream(self.seed, k), size, k) for k, size in enumerate(self.sizes)]
        logger.debug(
            f"Dispatching {len(jobs)} batches ({self.replicas} replicas) "
            f"to {self.workers} workers"
        )
        if self.workers == 1 or len(jobs) == 1:
            return [task(*job) for job in jobs]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(lambda job: task(*job), jobs))


def create_retry_decorator(config: AveragingConfig) -> Any:
    """Create the retry decorator for Monte Carlo averaging.

    Args:
        config: Averaging configuration (attempt budget)

    Returns:
        tenacity decorator retrying on AveragingNotConvergedError
    """
    return retry(
        stop=stop_after_attempt(config.max_attempts),
        retry=retry_if_exception_type(AveragingNotConvergedError),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    )
