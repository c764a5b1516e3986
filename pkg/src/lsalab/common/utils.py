"""Utility functions for lsalab."""

import csv
import hashlib
import json
import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from .exceptions import OutputError, RangeViolationError
from .models import ConfidenceInterval

logger = logging.getLogger(__name__)


def config_hash(payload: dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON rendering of a config.

    Args:
        payload: JSON-serializable config mapping

    Returns:
        Hex digest
    """
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    *,
    digest: str,
    seed: int,
    version: str,
) -> Path:
    """Write a CSV file with a provenance comment line.

    Args:
        path: Output path (parent directories are created)
        header: Column names
        rows: Data rows
        digest: Config hash recorded in the comment line
        seed: Master seed recorded in the comment line
        version: Package version recorded in the comment line

    Returns:
        Path written

    Raises:
        OutputError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            handle.write(f"# config_hash={digest} seed={seed} version={version}\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(value) for value in row])
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}", path=str(path)) from e

    logger.info(f"Wrote {path}")
    return path


def format_value(value: Any) -> str:
    """Render a CSV cell with round-trip float precision."""
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Read a dense real matrix from comma-separated rows.

    Args:
        path: CSV file; lines starting with ``#`` are ignored

    Returns:
        2-D float array
    """
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        rows = [
            [float(cell) for cell in line.split(",")]
            for line in handle
            if line.strip() and not line.lstrip().startswith("#")
        ]
    return np.atleast_2d(np.asarray(rows, dtype=float))


def normal_quantile(confidence: float) -> float:
    """Two-sided normal quantile, e.g. 2.5758 for 99%."""
    return float(norm.ppf(0.5 + confidence / 2.0))


def log_mean_exp(values: np.ndarray) -> float:
    """log(mean(exp(values))) without overflow; -inf entries are allowed."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise RangeViolationError("log_mean_exp of an empty array", parameter="values")
    return float(logsumexp(values) - math.log(values.size))


def moment_interval(
    batch_log_moments: np.ndarray,
    p: float,
    *,
    confidence: float = 0.99,
) -> ConfidenceInterval:
    """Combine per-batch log p-th moments into an estimate of E^{1/p}[X^p].

    The batch means ``m_b = exp(l_b)`` are rescaled by their maximum before the
    normal-approximation interval on the p-th moment is formed; the interval is
    carried to the 1/p power by the delta method and clamped at zero.

    Args:
        batch_log_moments: log of the batch means of X^p
        p: Moment order
        confidence: Two-sided confidence level

    Returns:
        Estimate of the L_p norm with its interval
    """
    logs = np.asarray(batch_log_moments, dtype=float)
    if np.all(np.isneginf(logs)):
        return ConfidenceInterval(estimate=0.0, ci_low=0.0, ci_high=0.0, std_error=0.0)

    shift = float(np.max(logs))
    scaled = np.exp(logs - shift)
    mean = float(np.mean(scaled))
    spread = float(np.std(scaled, ddof=1)) if scaled.size > 1 else 0.0
    std_error = spread / math.sqrt(scaled.size)

    estimate = math.exp((shift + math.log(mean)) / p)
    se_estimate = estimate * std_error / (p * mean)
    half = normal_quantile(confidence) * se_estimate
    return ConfidenceInterval(
        estimate=estimate,
        ci_low=max(0.0, estimate - half),
        ci_high=estimate + half,
        std_error=se_estimate,
    )


def mean_interval(
    batch_means: np.ndarray,
    *,
    confidence: float = 0.99,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch-means estimate and CI half-width (elementwise over trailing axes)."""
    values = np.asarray(batch_means, dtype=float)
    estimate = values.mean(axis=0)
    half = normal_quantile(confidence) * values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])
    return estimate, half


def relative_gap(first: float, second: float) -> float:
    """|first - second| / max(|first|, |second|), with 0 for two zeros."""
    if first == second:
        return 0.0
    if math.isinf(first) or math.isinf(second):
        return math.inf
    scale = max(abs(first), abs(second))
    return abs(first - second) / scale
