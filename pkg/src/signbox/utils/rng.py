"""Named, splittable random streams.

Every stochastic step (weight init, shuffling, dropout, fold assignment,
synthetic data) draws from its own named stream so that adding draws in one
place never shifts the numbers seen by another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _name_key(name: str) -> int:
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "little")


class RngStreams:
    """A tree of Philox generators keyed by a seed and a path of names."""

    def __init__(self, seed: int, path: tuple[str, ...] = ()) -> None:
        self.seed = int(seed)
        self.path = path

    def child(self, name: str) -> RngStreams:
        """Split off an independent sub-tree (e.g. one per fold)."""
        return RngStreams(self.seed, (*self.path, name))

    def generator(self, name: str) -> np.random.Generator:
        """Return a fresh generator for the named stream.

        Two calls with the same name return generators producing the same
        sequence.
        """
        keys = tuple(_name_key(part) for part in (*self.path, name))
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=keys)
        return np.random.Generator(np.random.Philox(sequence))

    def integer_seed(self, name: str) -> int:
        """Derive a plain int seed for libraries that want ``random_state``."""
        return int(self.generator(name).integers(0, 2**31 - 1))

    def __repr__(self) -> str:
        return f"RngStreams(seed={self.seed}, path={'/'.join(self.path) or '.'})"
