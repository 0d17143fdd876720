"""Permutations of {0,...,n-1} and the displacement sets they induce.

For a permutation p, the unfixed points are D_p = {i : p(i) != i} and the
unfixed edges are the unordered pairs {i,j} with {p(i),p(j)} != {i,j}.
Both sets drive the energy computations: only unfixed edges and unfixed
rows contribute.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ParameterError


class Permutation:
    """Bijection on {0,...,n-1}, stored as the image sequence ``mapping``."""

    __slots__ = ("_map",)

    def __init__(self, mapping):
        arr = np.asarray(mapping, dtype=np.int64)
        if arr.ndim != 1:
            raise DimensionError("permutation mapping must be a 1-d integer sequence")
        n = arr.shape[0]
        seen = np.zeros(n, dtype=bool)
        if n and (arr.min() < 0 or arr.max() >= n):
            raise ParameterError("permutation values must lie in [0, n)")
        seen[arr] = True
        if not seen.all():
            raise ParameterError("mapping is not a bijection")
        arr = arr.copy()
        arr.setflags(write=False)
        self._map = arr

    @property
    def mapping(self) -> np.ndarray:
        """Read-only image array; mapping[i] = p(i)."""
        return self._map

    def __len__(self) -> int:
        return self._map.shape[0]

    def __call__(self, i: int) -> int:
        return int(self._map[i])

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self._map, other._map)

    def __hash__(self) -> int:
        return hash(self._map.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self._map.tolist()})"

    def tolist(self) -> list[int]:
        return self._map.tolist()

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        if not (0 <= i < n and 0 <= j < n and i != j):
            raise ParameterError("transposition needs two distinct indices in [0, n)")
        m = np.arange(n, dtype=np.int64)
        m[i], m[j] = j, i
        return cls(m)

    def compose(self, other: "Permutation") -> "Permutation":
        """Return self o other, i.e. i -> self(other(i))."""
        if len(self) != len(other):
            raise DimensionError("cannot compose permutations of different sizes")
        return Permutation(self._map[other._map])

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self._map)
        inv[self._map] = np.arange(len(self), dtype=np.int64)
        return Permutation(inv)

    def swap_images(self, i: int, j: int) -> "Permutation":
        """Return p o (i j): the images of positions i and j exchanged."""
        m = self._map.copy()
        m[i], m[j] = m[j], m[i]
        return Permutation(m)


def overlap(p: Permutation, q: Permutation) -> int:
    """Number of points where p and q agree."""
    if len(p) != len(q):
        raise DimensionError("overlap requires permutations of equal size")
    return int(np.count_nonzero(p.mapping == q.mapping))


def unfixed_points(p: Permutation) -> set[int]:
    """D_p = {i : p(i) != i}."""
    m = p.mapping
    return {int(i) for i in np.nonzero(m != np.arange(len(p)))[0]}


def unfixed_edge_mask(mapping: np.ndarray) -> np.ndarray:
    """Boolean strict-upper-triangular mask of edges with {p(i),p(j)} != {i,j}."""
    n = mapping.shape[0]
    idx = np.arange(n)
    fixed_pt = mapping == idx
    # {p(i),p(j)} == {i,j} iff both points are fixed or p swaps i and j.
    both_fixed = fixed_pt[:, None] & fixed_pt[None, :]
    swapped = (mapping[:, None] == idx[None, :]) & (mapping[None, :] == idx[:, None])
    mask = ~(both_fixed | swapped)
    return np.triu(mask, 1)


def unfixed_edges(p: Permutation) -> set[tuple[int, int]]:
    """Unordered pairs {i,j} (returned as i < j tuples) moved by p."""
    mask = unfixed_edge_mask(p.mapping)
    ii, jj = np.nonzero(mask)
    return {(int(i), int(j)) for i, j in zip(ii, jj)}


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    from .rng import fisher_yates

    return Permutation(fisher_yates(n, rng))


def random_with_unfixed(n: int, t: int, rng: np.random.Generator) -> Permutation:
    """Uniform permutation with exactly t unfixed points (t = 0 or t >= 2)."""
    if t == 0:
        return Permutation.identity(n)
    if not (2 <= t <= n):
        raise ParameterError("number of unfixed points must be 0 or between 2 and n")
    support = rng.choice(n, size=t, replace=False)
    # Rejection-sample a derangement of the support; acceptance rate ~ 1/e.
    while True:
        images = support.copy()
        rng.shuffle(images)
        if not np.any(images == support):
            break
    m = np.arange(n, dtype=np.int64)
    m[support] = images
    return Permutation(m)
