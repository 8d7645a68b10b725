"""Deterministic seed derivation.

PCG64 is the package's fixed pseudo-random generator. Sub-seeds for named
pipeline stages derive from a SHA-256 digest of the master seed and the
stage name, so results never depend on Python's salted hash or on
execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(base: int, *parts: str) -> int:
    digest = hashlib.sha256(str(int(base)).encode())
    for part in parts:
        digest.update(b"\x00")
        digest.update(part.encode())
    return int.from_bytes(digest.digest()[:8], "little")


def generator(seed: int, *parts: str) -> np.random.Generator:
    """PCG64 generator for a (seed, stage-name...) pair."""
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *parts)))
