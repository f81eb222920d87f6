"""
Seeded random streams.

Every consumer of randomness gets its own numpy Generator derived from the
scenario seed plus stable labels, so adding or renaming one consumer never
shifts the draws of another.
"""

import zlib

import numpy as np


def stable_label(label: str) -> int:
    """Process-independent 32-bit hash of a label (``hash()`` is salted)."""
    return zlib.crc32(label.encode('utf-8'))


def derive_rng(seed: int, *labels: str) -> np.random.Generator:
    """
    Get a counter-based generator for ``(seed, *labels)``.

    Philox is a counter-based bit generator: the stream depends only on its
    key, never on how draws from other streams were interleaved.

    Args:
        seed: Scenario seed (unsigned 64-bit)
        labels: Stream identity, e.g. ("attacker", "AS0-C1", "V2")

    Returns:
        numpy Generator instance
    """
    entropy = [seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF]
    entropy.extend(stable_label(label) for label in labels)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


class BufferedUniform:
    """
    Block-buffered draws of U[low, high) from one generator.

    Per-call scalar draws from numpy are expensive; drawing in blocks keeps
    the sequence identical to a single long ``uniform(size=n)`` call.
    """

    BLOCK = 4096

    def __init__(self, rng: np.random.Generator, low: float, high: float):
        self._rng = rng
        self._low = low
        self._high = high
        self._buffer: list[float] = []
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buffer):
            self._buffer = self._rng.uniform(self._low, self._high, size=self.BLOCK).tolist()
            self._pos = 0
        value = self._buffer[self._pos]
        self._pos += 1
        return value


class BufferedIntegers:
    """Block-buffered draws of integers in the closed range [low, high]."""

    BLOCK = 4096

    def __init__(self, rng: np.random.Generator, low: int, high: int):
        self._rng = rng
        self._low = low
        self._high = high
        self._buffer: list[int] = []
        self._pos = 0

    def next(self) -> int:
        if self._pos >= len(self._buffer):
            self._buffer = self._rng.integers(self._low, self._high, size=self.BLOCK, endpoint=True).tolist()
            self._pos = 0
        value = self._buffer[self._pos]
        self._pos += 1
        return value


class BufferedChoice:
    """Block-buffered weighted choice over a fixed list of values."""

    BLOCK = 4096

    def __init__(self, rng: np.random.Generator, values: list, weights: list[float]):
        self._rng = rng
        self._values = list(values)
        self._weights = np.asarray(weights, dtype=float)
        self._weights = self._weights / self._weights.sum()
        self._buffer: list[int] = []
        self._pos = 0

    def next(self):
        if len(self._values) == 1:
            return self._values[0]
        if self._pos >= len(self._buffer):
            self._buffer = self._rng.choice(len(self._values), size=self.BLOCK, p=self._weights).tolist()
            self._pos = 0
        value = self._values[self._buffer[self._pos]]
        self._pos += 1
        return value
