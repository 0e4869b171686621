"""Seed streams.

Every random draw in the package flows from a :class:`Seed`: a 64-bit master
seed plus a stream path.  Streams are derived with :class:`numpy.random.SeedSequence`
(``spawn_key`` = stream path) and fed to the Philox4x64 counter-based bit
generator, so trial ``i`` of an experiment draws the same numbers no matter how
many other trials exist or in which order workers pick them up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    master: int
    stream: tuple[int, ...] = ()

    def __post_init__(self):
        if isinstance(self.stream, int):
            object.__setattr__(self, "stream", (self.stream,))
        else:
            object.__setattr__(self, "stream", tuple(int(s) for s in self.stream))
        if not 0 <= self.master <= _MASK64:
            raise ValueError(f"master seed must be a 64-bit unsigned integer, got {self.master}")
        if any(s < 0 for s in self.stream):
            raise ValueError("stream indices must be non-negative")

    def child(self, index: int) -> Seed:
        """Sub-stream ``index`` below this one."""
        return Seed(self.master, self.stream + (int(index),))

    def sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master, spawn_key=self.stream)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.sequence()))

    def uint64(self) -> int:
        """A 64-bit integer derived from this stream (seeds the search kernel)."""
        lo, hi = self.sequence().generate_state(2, dtype=np.uint32)
        return (int(hi) << 32) | int(lo)


def as_seed(seed: Seed | int | None) -> Seed:
    if seed is None:
        return Seed(0)
    if isinstance(seed, Seed):
        return seed
    return Seed(int(seed))
