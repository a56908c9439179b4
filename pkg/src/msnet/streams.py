"""Reproducible random streams.

Every stream is a Philox-4x64 counter-based generator keyed by
``SeedSequence(seed, spawn_key=key)``.  A stream is identified by the pair
``(seed, key)``; children are derived by appending integers to the key, so
the same logical stream is reproduced regardless of how many workers
consume it or in which order.

Replica work is split into fixed-size chunks (``CHUNK`` replicas each); chunk
``i`` of a stream always draws from ``stream.child(i)``.  Results are
concatenated in chunk order, which makes every reduction independent of the
worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import os

import numpy as np

CHUNK = 4096


@dataclass(frozen=True)
class Stream:
    seed: int
    key: tuple[int, ...] = ()

    def child(self, *key: int) -> "Stream":
        return Stream(self.seed, self.key + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))

    def record(self) -> dict:
        return {"seed": self.seed, "key": list(self.key), "bit_generator": "Philox4x64"}


def as_stream(rng) -> Stream:
    """Accept a Stream or an integer seed."""
    if isinstance(rng, Stream):
        return rng
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        if rng < 0:
            raise ValueError("seed must be nonnegative")
        return Stream(int(rng))
    raise TypeError(f"expected Stream or int seed, got {type(rng).__name__}")


def default_workers() -> int:
    return int(os.environ.get("MSNET_WORKERS", "1"))


def chunk_sizes(total: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, stream: Stream, total: int, workers: int | None = None,
               chunk: int = CHUNK) -> list:
    """Apply ``fn(generator, size)`` to each chunk of ``total`` replicas.

    Returns the per-chunk results in chunk order.
    """
    sizes = chunk_sizes(total, chunk)
    jobs = [(stream.child(i), size) for i, size in enumerate(sizes)]
    workers = default_workers() if workers is None else workers

    def run(job):
        s, size = job
        return fn(s.generator(), size)

    if workers <= 1 or len(jobs) <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))
