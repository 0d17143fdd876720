"""Relative alignment energy, its swap increments, and the exact posterior.

In the frame where the hidden permutation is the identity, a candidate
permutation p is scored by

    V(p) = rho/(1-rho^2) * (Vg*(p) - Vg(p)) + eta/(1-eta^2) * (Vf*(p) - Vf(p))

with the four alignment sums restricted to the parts p actually moves:

    Vg*(p) = sum over unfixed edges {i,j}   of  b[i,j] * a[i,j]
    Vg(p)  = sum over unfixed edges {i,j}   of  b[p(i),p(j)] * a[i,j]
    Vf*(p) = sum over unfixed points i, all k of  y[i,k] * x[i,k]
    Vf(p)  = sum over unfixed points i, all k of  y[p(i),k] * x[i,k]

V(id) = 0 and the posterior over permutations is exp(-V(p)) / Z with
Z = sum_q exp(-V(q)) >= 1.  Summing b[i,j]*(a - a permuted) over all
edges instead of only unfixed ones changes nothing (fixed edges cancel),
which gives the fast form used for full enumeration:

    V(p) = cg * (sum_{i<j} a*b - 0.5 * <a, b[p,:][:,p]>) + cf * (tr c - sum_i c[i, p(i)])

with c = x @ y.T.  Enumeration of S_n is capped at n = 10.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (CoefficientSingularityError, EnumerationCapError,
                     ParameterError)
from .model import Instance
from .perm import Permutation, unfixed_edge_mask

ENUMERATION_CAP = 10
_CHUNK = 40320  # permutations scored per vectorized block


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances shared by the consistency checks."""

    delta_abs: float = 1e-9          # swap increment vs. full recomputation
    normalization_abs: float = 1e-8  # posterior mass sum vs. 1

TOL = Tolerances()


def coefficients(params) -> tuple[float, float]:
    """(rho/(1-rho^2), eta/(1-eta^2)); raises when a correlation is +-1."""
    rho, eta = params.rho, params.eta
    if abs(rho) >= 1.0 or abs(eta) >= 1.0:
        raise CoefficientSingularityError(
            "energy coefficients are singular at |rho| = 1 or |eta| = 1; "
            "use the noise-free matching path instead")
    cg = rho / (1.0 - rho * rho)
    cf = eta / (1.0 - eta * eta)
    return cg, cf


@dataclass(frozen=True)
class HamiltonianBreakdown:
    """The four alignment sums plus their coefficients; v is the assembled energy."""

    v_star_g: float
    v_g: float
    v_star_f: float
    v_f: float
    coeff_g: float
    coeff_f: float

    @property
    def v(self) -> float:
        return (self.coeff_g * (self.v_star_g - self.v_g)
                + self.coeff_f * (self.v_star_f - self.v_f))


def _require_identity_frame(inst: Instance):
    if not np.array_equal(inst.pi_star.mapping, np.arange(inst.params.n)):
        raise ParameterError(
            "energy operations expect the identity frame; call relabel_to_identity first")


def hamiltonian(inst: Instance, p: Permutation) -> HamiltonianBreakdown:
    """Full energy breakdown of p on an identity-frame instance."""
    _require_identity_frame(inst)
    if len(p) != inst.params.n:
        raise ParameterError("permutation size must equal n")
    cg, cf = coefficients(inst.params)
    m = p.mapping
    a, b = inst.a, inst.b

    mask = unfixed_edge_mask(m)
    ii, jj = np.nonzero(mask)
    v_star_g = float(np.dot(b[ii, jj], a[ii, jj]))
    v_g = float(np.dot(b[m[ii], m[jj]], a[ii, jj]))

    moved = np.nonzero(m != np.arange(inst.params.n))[0]
    v_star_f = float(np.einsum("ij,ij->", inst.y[moved], inst.x[moved])) if moved.size else 0.0
    v_f = float(np.einsum("ij,ij->", inst.y[m[moved]], inst.x[moved])) if moved.size else 0.0

    return HamiltonianBreakdown(v_star_g, v_g, v_star_f, v_f, cg, cf)


def _pair_terms(a, b, x, y, m, i, j):
    """Alignment sums restricted to edges touching {i,j} and to rows i, j under mapping m."""
    n = a.shape[0]
    idx = np.arange(n)
    sg = g = sf = f = 0.0
    for u in (i, j):
        kk = idx[idx != u]
        mk = m[kk]
        unfixed = ~(((m[u] == u) & (mk == kk)) | ((m[u] == kk) & (mk == u)))
        ks = kk[unfixed]
        if ks.size:
            sg += float(np.dot(a[u, ks], b[u, ks]))
            g += float(np.dot(a[u, ks], b[m[u], m[ks]]))
        if m[u] != u:
            sf += float(np.dot(x[u], y[u]))
            f += float(np.dot(x[u], y[m[u]]))
    # The edge {i,j} was visited from both endpoints; remove one copy.
    if not ((m[i] == i and m[j] == j) or (m[i] == j and m[j] == i)):
        sg -= float(a[i, j] * b[i, j])
        g -= float(a[i, j] * b[m[i], m[j]])
    return sg, g, sf, f


def delta_swap(inst: Instance, p: Permutation, breakdown: HamiltonianBreakdown,
               i: int, j: int) -> HamiltonianBreakdown:
    """Breakdown of p o (i j) from that of p, touching only O(n + d) entries.

    Edges with both endpoints outside {i,j} keep their image set, so only
    terms involving i or j change.
    """
    _require_identity_frame(inst)
    n = inst.params.n
    if not (0 <= i < n and 0 <= j < n and i != j):
        raise ParameterError("swap needs two distinct indices in [0, n)")
    a, b, x, y = inst.a, inst.b, inst.x, inst.y
    m_old = p.mapping
    m_new = m_old.copy()
    m_new[i], m_new[j] = m_old[j], m_old[i]

    old = _pair_terms(a, b, x, y, m_old, i, j)
    new = _pair_terms(a, b, x, y, m_new, i, j)
    return HamiltonianBreakdown(
        breakdown.v_star_g - old[0] + new[0],
        breakdown.v_g - old[1] + new[1],
        breakdown.v_star_f - old[2] + new[2],
        breakdown.v_f - old[3] + new[3],
        breakdown.coeff_g,
        breakdown.coeff_f,
    )


def _check_cap(n: int):
    if n > ENUMERATION_CAP:
        raise EnumerationCapError(f"enumeration cap n <= {ENUMERATION_CAP} (got n = {n})")


def _perm_chunks(n: int, chunk: int = _CHUNK):
    """Yield int64 arrays of permutations of [n] in lexicographic order."""
    it = iter(itertools.permutations(range(n)))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def iter_energy_chunks(inst: Instance, chunk: int = _CHUNK):
    """Yield (perms, energies) over all of S_n in lexicographic order.

    Uses the constant-minus-inner-product form from the module docstring;
    per block the quadratic term is a gathered einsum, so memory stays at
    O(chunk * n^2).
    """
    _require_identity_frame(inst)
    n = inst.params.n
    _check_cap(n)
    cg, cf = coefficients(inst.params)
    a, b = inst.a, inst.b
    const_g = 0.5 * float(np.vdot(a, b))
    c = inst.x @ inst.y.T
    tr_c = float(np.trace(c))
    rows = np.arange(n)
    for perms in _perm_chunks(n, chunk):
        bp = b[perms[:, :, None], perms[:, None, :]]
        quad = 0.5 * np.einsum("ij,kij->k", a, bp)
        lin = c[rows[None, :], perms].sum(axis=1)
        v = cg * (const_g - quad) + cf * (tr_c - lin)
        yield perms, v


@dataclass(frozen=True)
class LogPartition:
    """log Z over all of S_n; always >= 0 because V(id) = 0 contributes a 1."""

    log_z: float
    n_terms: int


def log_partition(inst: Instance) -> LogPartition:
    """Streaming log-sum-exp of exp(-V) over all n! permutations."""
    n = inst.params.n
    running_max = -math.inf
    running_sum = 0.0
    count = 0
    for _, v in iter_energy_chunks(inst):
        neg = -v
        block_max = float(neg.max())
        if block_max > running_max:
            running_sum *= math.exp(running_max - block_max) if count else 0.0
            running_max = block_max
        running_sum += float(np.exp(neg - running_max).sum())
        count += v.shape[0]
    log_z = running_max + math.log(running_sum)
    assert log_z >= 0.0, "log Z must be nonnegative (identity contributes exp(0))"
    assert count == math.factorial(n)
    return LogPartition(log_z, count)


def posterior(inst: Instance, p: Permutation) -> float:
    """Posterior probability exp(-V(p)) / Z of a single permutation."""
    lp = log_partition(inst)
    return math.exp(-hamiltonian(inst, p).v - lp.log_z)


def posterior_ball_mass(inst: Instance, p: Permutation, r: float) -> float:
    """Posterior mass of {q : 1 - overlap(p,q)/n <= r}."""
    if not (0.0 <= r < 1.0):
        raise ParameterError("ball radius r must lie in [0, 1)")
    n = inst.params.n
    lp = log_partition(inst)
    target = p.mapping
    # overlap >= n(1-r); overlaps are integers, so guard the float threshold.
    threshold = n - r * n - 1e-9
    mass = 0.0
    for perms, v in iter_energy_chunks(inst):
        ov = (perms == target[None, :]).sum(axis=1)
        sel = ov >= threshold
        if np.any(sel):
            mass += float(np.exp(-v[sel] - lp.log_z).sum())
    return mass
