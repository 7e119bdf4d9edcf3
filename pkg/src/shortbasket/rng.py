"""Reproducible random substreams keyed by (master seed, index path).

Each substream is derived from ``numpy.random.SeedSequence`` with the
substream id as the spawn key, so the sequence a stream produces depends
only on ``(master_seed, substream_id)`` and never on how many other
streams were consumed first. That makes per-security simulation order
free: workers can draw their streams in any order (or in parallel) and
still reproduce the exact dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MAX_SEED = 2**64


@dataclass(frozen=True)
class NoiseStream:
    """A named, independently seeded source of random draws.

    ``substream_id`` is a tuple of small non-negative integers (for the
    simulation engine: security index, variable channel, purpose). Two
    streams with different ids are statistically independent; two streams
    with equal ``(master_seed, substream_id)`` yield identical samples.
    """

    master_seed: int
    substream_id: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= int(self.master_seed) < _MAX_SEED:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if any(i < 0 for i in self.substream_id):
            raise ValueError(f"substream indices must be non-negative, got {self.substream_id}")

    def child(self, *indices: int) -> "NoiseStream":
        """Derive a sub-stream by appending indices to the id path."""
        return NoiseStream(self.master_seed, self.substream_id + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream's sequence."""
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.substream_id)
        return np.random.default_rng(seq)
