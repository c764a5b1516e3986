"""Counter-based random streams.

Every stream is a Philox generator keyed by ``(master_seed, stream_id)`` through
``SeedSequence(master_seed, spawn_key=(stream_id,))``. Philox is counter based, so
the k-th draw of a stream depends only on its key and the counter ``k``; streams
for different replica batches never overlap and can be consumed in any order.
"""

import numpy as np

from .exceptions import RangeViolationError

MAX_SEED = 2**64 - 1


def stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Create the generator for one stream.

    Args:
        seed: 64-bit master seed
        stream_id: Replica batch (or replica) index

    Returns:
        Independent numpy Generator

    Example:
        ```python
        rng = stream(2024, stream_id=3)
        draws = rng.random(10)
        ```
    """
    if not 0 <= seed <= MAX_SEED:
        raise RangeViolationError(f"Seed must be a 64-bit unsigned integer, got {seed}", parameter="seed")
    if stream_id < 0:
        raise RangeViolationError(f"Stream id must be non-negative, got {stream_id}", parameter="stream_id")
    sequence = np.random.SeedSequence(seed, spawn_key=(stream_id,))
    return np.random.Generator(np.random.Philox(sequence))


def batch_sizes(replicas: int, batches: int) -> list[int]:
    """Split replicas into contiguous, near-equal batches.

    Args:
        replicas: Total number of replicas
        batches: Requested number of batches (capped at ``replicas``)

    Returns:
        Batch sizes in batch-index order
    """
    if replicas < 1:
        raise RangeViolationError("At least one replica is required", parameter="replicas")
    count = min(batches, replicas)
    return [len(block) for block in np.array_split(np.arange(replicas), count)]
