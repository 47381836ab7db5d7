"""Deterministic, platform-independent randomness.

All randomness in the package flows through numpy's PCG64 generator. Derived
seeds come from BLAKE2b over the master seed plus string labels, so every
stage of a pipeline run is replayable from one logged master seed regardless
of platform or process layout.
"""

from __future__ import annotations

import hashlib

import numpy as np

GENERATOR_NAME = "numpy PCG64"


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(master_seed: int, *labels: str | int) -> int:
    """Derive a 64-bit child seed from a master seed and a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master_seed)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode())
    return int.from_bytes(h.digest(), "big")
