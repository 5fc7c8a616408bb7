"""Deterministic random streams built on the Philox counter-based generator.

Reproducibility contract: every random quantity in a run is drawn from a
stream addressed by ``(seed, path)``, where ``path`` is a tuple of short
strings and integers naming the consumer (``("noise",)``, ``("delay", t)``,
``("queue", worker, t)``, ...).  The 128-bit Philox key is derived from the
seed and path with BLAKE2b, so streams are independent, platform-stable,
and insensitive to how many draws other streams have consumed.

Streams addressed down to a step index (e.g. ``("delay", t)``) are
*repeatable*: asking for the same address twice yields the same draws.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

# Written into every run record so outputs are traceable to the generator.
RNG_ALGORITHM = "philox4x64-10/blake2b-keyed"


def derive_key(seed: int, path: tuple) -> int:
    """128-bit Philox key for a (seed, path) address."""
    tag = repr((int(seed),) + tuple(path)).encode()
    return int.from_bytes(hashlib.blake2b(tag, digest_size=16).digest(), "little")


def generator(seed: int, *path) -> np.random.Generator:
    """Fresh Generator for the given address; same address, same stream."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, path)))


@dataclass(frozen=True)
class SeededRng:
    """Handle to a family of deterministic streams rooted at one seed.

    ``child(*path)`` narrows the address; ``at(*index)`` returns a repeatable
    generator for a fully-addressed draw (used for per-step delay and service
    samples); ``stream()`` returns a stateful generator meant to be consumed
    sequentially (used for gradient noise).
    """

    seed: int
    path: tuple = ()

    def child(self, *path) -> "SeededRng":
        return SeededRng(self.seed, self.path + tuple(path))

    def at(self, *index) -> np.random.Generator:
        return generator(self.seed, *(self.path + tuple(index)))

    def stream(self) -> np.random.Generator:
        return generator(self.seed, *self.path)
