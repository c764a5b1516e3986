"""Unit tests for shared utilities, streams and the replica runner."""

import math

import numpy as np
import pytest

from lsalab.common import (
    AveragingConfig,
    AveragingNotConvergedError,
    BoundViolatedError,
    ConfigError,
    InvariantViolationError,
    OutputError,
    RangeViolationError,
    ReplicaRunner,
    batch_sizes,
    config_hash,
    create_retry_decorator,
    log_mean_exp,
    moment_interval,
    normal_quantile,
    read_matrix_csv,
    relative_gap,
    stream,
    write_csv,
)


def test_stream_reproducible():
    """Test that a stream is a pure function of seed and stream id."""
    first = stream(7, 3).random(5)
    second = stream(7, 3).random(5)
    other = stream(7, 4).random(5)

    assert np.array_equal(first, second)
    assert not np.array_equal(first, other)


def test_stream_rejects_bad_seed():
    """Test seed and stream id validation."""
    with pytest.raises(RangeViolationError):
        stream(-1)
    with pytest.raises(RangeViolationError):
        stream(2**64)
    with pytest.raises(RangeViolationError):
        stream(1, -2)


def test_batch_sizes():
    """Test contiguous batch partitioning."""
    assert batch_sizes(10, 3) == [4, 3, 3]
    assert batch_sizes(2, 50) == [1, 1]
    assert sum(batch_sizes(10_000, 50)) == 10_000


def test_replica_runner_independent_of_workers():
    """Test that merged batch results do not depend on the pool size."""

    def task(rng, size, k):
        return float(rng.random(size).sum()) + k

    serial = ReplicaRunner(11, replicas=1000, batches=20, workers=1).map(task)
    pooled = ReplicaRunner(11, replicas=1000, batches=20, workers=4).map(task)

    assert serial == pooled
    assert len(serial) == 20


def test_log_mean_exp():
    """Test overflow-free log mean exp."""
    assert log_mean_exp(np.array([0.0, math.log(3.0)])) == pytest.approx(math.log(2.0))
    assert log_mean_exp(np.array([1000.0, 1000.0])) == pytest.approx(1000.0)
    assert log_mean_exp(np.array([-np.inf, 0.0])) == pytest.approx(math.log(0.5))


def test_moment_interval_constant_batches():
    """Test that identical batches give a zero-width interval."""
    interval = moment_interval(np.full(10, math.log(4.0)), 2.0)

    assert interval.estimate == pytest.approx(2.0)
    assert interval.ci_low == pytest.approx(2.0)
    assert interval.ci_high == pytest.approx(2.0)


def test_moment_interval_zero_moments():
    """Test the all-zero case."""
    interval = moment_interval(np.full(5, -np.inf), 2.0)
    assert interval.estimate == 0.0
    assert interval.ci_high == 0.0


def test_moment_interval_brackets_estimate():
    """Test interval ordering for spread batches."""
    logs = np.log(np.array([1.0, 2.0, 3.0, 4.0]))
    interval = moment_interval(logs, 1.0, confidence=0.95)

    assert interval.estimate == pytest.approx(2.5)
    assert interval.ci_low < interval.estimate < interval.ci_high
    assert interval.std_error > 0.0


def test_normal_quantile():
    """Test two-sided normal quantiles."""
    assert normal_quantile(0.95) == pytest.approx(1.959964, abs=1e-6)
    assert normal_quantile(0.99) == pytest.approx(2.575829, abs=1e-6)


def test_relative_gap():
    """Test the relative gap used by dual evaluation."""
    assert relative_gap(1.0, 1.0) == 0.0
    assert relative_gap(1.0, 2.0) == pytest.approx(0.5)
    assert relative_gap(math.inf, math.inf) == 0.0
    assert relative_gap(math.inf, 1.0) == math.inf


def test_config_hash_ignores_key_order():
    """Test canonical hashing."""
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_write_csv(tmp_path):
    """Test provenance line, header and float rendering."""
    path = write_csv(
        tmp_path / "out" / "table.csv",
        ["n", "value"],
        [[1, 0.1], [2, 1.0 / 3.0]],
        digest="abc",
        seed=9,
        version="0.1.0",
    )

    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# config_hash=abc seed=9 version=0.1.0"
    assert lines[1] == "n,value"
    assert lines[2] == "1,0.1"
    assert float(lines[3].split(",")[1]) == 1.0 / 3.0


def test_write_csv_output_error(tmp_path):
    """Test that unwritable targets raise OutputError."""
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory", encoding="utf-8")

    with pytest.raises(OutputError) as excinfo:
        write_csv(blocker / "table.csv", ["n"], [[1]], digest="x", seed=0, version="0")
    assert "table.csv" in excinfo.value.path


def test_read_matrix_csv(tmp_path):
    """Test reading a kernel with comment lines."""
    path = tmp_path / "kernel.csv"
    path.write_text("# kernel\n0.5,0.5\n0.2,0.8\n", encoding="utf-8")

    matrix = read_matrix_csv(path)
    assert matrix.shape == (2, 2)
    assert matrix[1, 1] == pytest.approx(0.8)


def test_retry_decorator_retries_until_success():
    """Test that averaging retries stop once the precision is reached."""
    calls = []

    @create_retry_decorator(AveragingConfig(max_attempts=3))
    def attempt():
        calls.append(1)
        if len(calls) < 3:
            raise AveragingNotConvergedError(relative_width=0.1)
        return "done"

    assert attempt() == "done"
    assert len(calls) == 3


def test_retry_decorator_reraises():
    """Test that the last averaging error propagates."""

    @create_retry_decorator(AveragingConfig(max_attempts=2))
    def attempt():
        raise AveragingNotConvergedError(relative_width=0.5)

    with pytest.raises(AveragingNotConvergedError) as excinfo:
        attempt()
    assert excinfo.value.relative_width == 0.5


def test_exception_hierarchy():
    """Test error attributes and the invariant family."""
    error = ConfigError("missing", key="model.kernel")
    assert error.key == "model.kernel"
    assert error.details == {"key": "model.kernel"}
    assert issubclass(BoundViolatedError, InvariantViolationError)
    assert BoundViolatedError("low", margin=0.5).margin == 0.5
