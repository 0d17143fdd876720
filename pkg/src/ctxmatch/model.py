"""Correlated Gaussian graph pairs with node features.

An instance consists of two weighted graphs and two feature matrices tied
together by a hidden permutation pi*:

    B[pi*(i), pi*(j)] = rho * A[i, j] + sqrt(1 - rho^2) * Z[i, j]
    Y[pi*(i), k]      = eta * X[i, k] + sqrt(1 - eta^2) * Z'[i, k]

where A (i < j), Z, X, Z' are i.i.d. standard normal and pi* is uniform
on S_n.  A and B are symmetric with zero diagonal; weights are indexed by
unordered pairs.  All randomness comes from named substreams of the
instance seed (see :mod:`ctxmatch.rng`), so sampling is reproducible
entry for entry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .perm import Permutation
from .rng import fisher_yates, substream

# Substream labels of an instance seed.
_STREAM_PI = "pi_star"
_STREAM_A = "a"
_STREAM_Z = "z"
_STREAM_X = "x"
_STREAM_ZP = "z_prime"


@dataclass(frozen=True)
class ModelParams:
    """Problem size and signal strengths: n nodes, d features, correlations rho, eta."""

    n: int
    d: int
    rho: float
    eta: float

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ParameterError("n must be an integer >= 1")
        if not (isinstance(self.d, (int, np.integer)) and self.d >= 1):
            raise ParameterError("d must be an integer >= 1")
        if not (math.isfinite(self.rho) and -1.0 <= self.rho <= 1.0):
            raise ParameterError("rho must lie in [-1, 1]")
        if not (math.isfinite(self.eta) and -1.0 <= self.eta <= 1.0):
            raise ParameterError("eta must lie in [-1, 1]")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Instance:
    """One sampled problem: graphs a, b, features x, y, and the hidden pi_star."""

    params: ModelParams
    a: np.ndarray
    b: np.ndarray
    x: np.ndarray
    y: np.ndarray
    pi_star: Permutation
    seed: int

    def __post_init__(self):
        n, d = self.params.n, self.params.d
        for name, mat in (("a", self.a), ("b", self.b)):
            if mat.shape != (n, n):
                raise DimensionError(f"{name} must have shape ({n}, {n})")
            if not np.array_equal(mat, mat.T) or np.any(np.diag(mat) != 0.0):
                raise ParameterError(f"{name} must be symmetric with zero diagonal")
        for name, mat in (("x", self.x), ("y", self.y)):
            if mat.shape != (n, d):
                raise DimensionError(f"{name} must have shape ({n}, {d})")
        if len(self.pi_star) != n:
            raise DimensionError("pi_star size must equal n")
        object.__setattr__(self, "a", _frozen(self.a))
        object.__setattr__(self, "b", _frozen(self.b))
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "y", _frozen(self.y))


def sample_instance(params: ModelParams, seed: int) -> Instance:
    """Draw an instance from the model at ``params`` using ``seed``.

    At |rho| = 1 or |eta| = 1 the noise coefficient is exactly zero, so
    the corresponding channel is a noise-free relabelling.
    """
    n, d = params.n, params.d
    rho, eta = params.rho, params.eta

    pi = fisher_yates(n, substream(seed, _STREAM_PI))

    iu, ju = np.triu_indices(n, 1)
    a_up = substream(seed, _STREAM_A).standard_normal(iu.shape[0])
    z_up = substream(seed, _STREAM_Z).standard_normal(iu.shape[0])
    noise_g = 0.0 if abs(rho) == 1.0 else math.sqrt(1.0 - rho * rho)
    b_aligned = rho * a_up + noise_g * z_up

    a = np.zeros((n, n))
    a[iu, ju] = a_up
    a[ju, iu] = a_up
    b = np.zeros((n, n))
    b[pi[iu], pi[ju]] = b_aligned
    b[pi[ju], pi[iu]] = b_aligned

    x = substream(seed, _STREAM_X).standard_normal((n, d))
    zp = substream(seed, _STREAM_ZP).standard_normal((n, d))
    noise_f = 0.0 if abs(eta) == 1.0 else math.sqrt(1.0 - eta * eta)
    y = np.empty((n, d))
    y[pi] = eta * x + noise_f * zp

    return Instance(params, a, b, x, y, Permutation(pi), int(seed))


def relabel_to_identity(inst: Instance) -> Instance:
    """Rewrite the instance in the frame where the hidden permutation is the identity.

    b'[i, j] = b[pi*(i), pi*(j)] and y'[i, :] = y[pi*(i), :], so b' pairs
    with a and y' pairs with x entry for entry.  Estimates q found in this
    frame correspond to pi* o q in the original frame.
    """
    p = inst.pi_star.mapping
    b_id = inst.b[np.ix_(p, p)]
    y_id = inst.y[p]
    n = inst.params.n
    return Instance(inst.params, inst.a, b_id, inst.x, y_id,
                    Permutation.identity(n), inst.seed)


def _fmt(v: float) -> str:
    # 17 significant digits: lossless round-trip for IEEE doubles.
    return format(float(v), ".17g")


def instance_to_json(inst: Instance) -> str:
    """Serialize an instance to the canonical JSON document.

    Graphs are stored as their strict upper triangles in row-major order,
    features in row-major order, floats with 17 significant digits.  The
    output is byte-deterministic, so serialize/parse/serialize is the
    identity on bytes.
    """
    n, d = inst.params.n, inst.params.d
    iu, ju = np.triu_indices(n, 1)

    def arr(vals) -> str:
        return "[" + ", ".join(_fmt(v) for v in vals) + "]"

    parts = [
        f'"n": {n}',
        f'"d": {d}',
        f'"rho": {_fmt(inst.params.rho)}',
        f'"eta": {_fmt(inst.params.eta)}',
        f'"seed": {inst.seed}',
        f'"pi_star": {json.dumps(inst.pi_star.tolist())}',
        f'"a": {arr(inst.a[iu, ju])}',
        f'"b": {arr(inst.b[iu, ju])}',
        f'"x": {arr(inst.x.ravel())}',
        f'"y": {arr(inst.y.ravel())}',
    ]
    return "{" + ", ".join(parts) + "}"


def instance_from_json(text: str) -> Instance:
    """Parse the document produced by :func:`instance_to_json`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"malformed instance document: {exc}") from exc
    try:
        n, d = int(doc["n"]), int(doc["d"])
        params = ModelParams(n, d, float(doc["rho"]), float(doc["eta"]))
        pi = Permutation(doc["pi_star"])
        m = n * (n - 1) // 2
        a_up = np.asarray(doc["a"], dtype=np.float64)
        b_up = np.asarray(doc["b"], dtype=np.float64)
        x = np.asarray(doc["x"], dtype=np.float64).reshape(n, d)
        y = np.asarray(doc["y"], dtype=np.float64).reshape(n, d)
        seed = int(doc["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"invalid instance document: {exc}") from exc
    if a_up.shape != (m,) or b_up.shape != (m,):
        raise DimensionError("upper-triangle arrays must have length n(n-1)/2")
    iu, ju = np.triu_indices(n, 1)
    a = np.zeros((n, n))
    a[iu, ju] = a_up
    a[ju, iu] = a_up
    b = np.zeros((n, n))
    b[iu, ju] = b_up
    b[ju, iu] = b_up
    return Instance(params, a, b, x, y, pi, seed)
