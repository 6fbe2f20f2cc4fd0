"""Seeded random streams.

All randomness derives from one 64-bit seed.  A named substream is
``SeedSequence(entropy=seed, spawn_key=words(sha256(label)))`` fed to PCG64,
where ``words`` splits the digest into eight big-endian 32-bit integers.
Streams with different labels are statistically independent and a given
(seed, label) pair always produces the same numbers.
"""

from __future__ import annotations

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1
BUFFER = 4096


def _label_words(label: str) -> tuple[int, ...]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i : i + 4], "big") for i in range(0, 32, 4))


def substream(seed: int, label: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & SEED_MASK, spawn_key=_label_words(label))
    return np.random.Generator(np.random.PCG64(ss))


class UniformStream:
    """Scalar uniforms on [0, 1) drawn from a generator in fixed-size blocks.

    Block size is part of the reproducibility contract: the i-th number is
    the same whatever mix of calls consumed the earlier ones.
    """

    __slots__ = ("gen", "seed", "label", "_buf", "_pos")

    def __init__(self, seed: int, label: str):
        self.seed = int(seed) & SEED_MASK
        self.label = label
        self.gen = substream(seed, label)
        self._buf = []
        self._pos = 0

    def __call__(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self.gen.random(BUFFER).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def metadata(self) -> dict:
        return {"seed": self.seed, "label": self.label}


def as_stream(rng, label: str = "default") -> UniformStream:
    """Accept a UniformStream or an integer seed."""
    if isinstance(rng, UniformStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return UniformStream(int(rng), label)
    raise TypeError("rng must be a UniformStream or an integer seed")
