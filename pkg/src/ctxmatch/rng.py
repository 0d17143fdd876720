"""Seeded randomness with documented stream derivation.

Every random quantity in the package is drawn from a counter-based Philox
generator whose 64-bit key is derived by hashing ``(seed, label, ...)``
with SHA-256.  Distinct label paths give independent streams, so an
instance seed fans out into substreams for the hidden permutation, the
edge weights, the edge noise, the features, and the feature noise, and
parallel sweep trials can derive their own seeds without coordination.
"""

import hashlib

import numpy as np

_MASK63 = (1 << 63) - 1


def derive_key(seed: int, *labels) -> int:
    """Return a 63-bit key derived from ``seed`` and a label path."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:8], "little") & _MASK63


def substream(seed: int, *labels) -> np.random.Generator:
    """Generator for the substream named by ``labels`` under ``seed``."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, *labels)))


def fisher_yates(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform permutation of {0,...,n-1} via the Fisher-Yates shuffle."""
    p = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        p[i], p[j] = p[j], p[i]
    return p
