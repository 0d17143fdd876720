"""Monte Carlo verifiers for the concentration facts behind the thresholds.

Each suite samples the relevant statistics, compares them against the
closed-form envelope they are supposed to obey, and emits a JSON-able
report with a single pass flag:

* ``hstar``: aligned alignment sums Vg*(p), Vf*(p) concentrate around
  rho |DE_p| and eta d |D_p| at scale t sqrt(n log(en/t)) resp.
  t sqrt(max(d, log(en/t)) log(en/t)); the normalized deviation
  quantiles must be stable (within a factor 2) when n doubles.
* ``laplace``: the conditional Laplace transforms of the cross terms,
  evaluated in closed form in log domain, stay under the envelope
  exp(rho^2/(2(1-rho^2)) (|DE_p| + C |D_p| sqrt(n log n))) (and the
  feature analogue with d |D_p| + C |D_p| sqrt(max(d, log n) log n)).
* ``tails``: the joint Gaussian tail bound
  P(W1 > t, W2 > t) <= (1 + bbar + alpha)/(sqrt(2 pi) t) exp(-t^2/(1 + bbar + alpha)).
* ``partition``: mean log Z / (n log n) along a parameter rule pinned to
  the half-recovery budget 2(1-eps) log n must be non-decreasing in n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .energy import ENUMERATION_CAP, log_partition
from .errors import ParameterError
from .model import ModelParams, relabel_to_identity, sample_instance
from .perm import random_with_unfixed, unfixed_edge_mask
from .rng import derive_key, substream

_LAPLACE_CONSTANTS = (1.0, 2.0, 4.0)


@dataclass(frozen=True)
class VerifierReport:
    suite: str
    params: dict
    metrics: dict
    passed: bool

    def to_json(self) -> str:
        doc = {"suite": self.suite, "params": self.params,
               "metrics": self.metrics, "pass": self.passed}
        return json.dumps(doc, indent=2, sort_keys=True)


def _unfixed_counts(n: int, support: np.ndarray, images: np.ndarray) -> int:
    """|DE_p| for a permutation deranging ``support``: t(n-t) + C(t,2) - (#2-cycles).

    Edges between the support and its complement are always moved; edges
    inside the support are fixed exactly when p swaps their endpoints.
    """
    t = support.shape[0]
    pos = {int(s): k for k, s in enumerate(support)}
    two_cycles = 0
    for k, s in enumerate(support):
        img = int(images[k])
        if img > int(s) and int(images[pos[img]]) == int(s):
            two_cycles += 1
    return t * (n - t) + t * (t - 1) // 2 - two_cycles


def verify_hstar_concentration(params: ModelParams, t_values, trials: int,
                               seed: int) -> VerifierReport:
    """Deviation quantiles of Vg*, Vf* at n and 2n; pass iff stable within x2.

    The aligned sums only involve i.i.d. correlated pairs on the moved
    edges and rows, so the sampler draws exactly those entries rather
    than whole instances; the statistic's law is identical.
    """
    rho, eta, d = params.rho, params.eta, params.d
    t_values = tuple(int(t) for t in t_values)
    metrics: dict = {}
    passed = True
    for t in t_values:
        if not 2 <= t <= params.n:
            raise ParameterError("each t must satisfy 2 <= t <= n")
    noise_g = math.sqrt(1.0 - rho * rho)
    noise_f = math.sqrt(1.0 - eta * eta)
    for scale, n in (("n", params.n), ("2n", 2 * params.n)):
        for t in t_values:
            rng = substream(seed, "hstar", n, t)
            log_ent = math.log(math.e * n / t)
            denom_g = t * math.sqrt(n * log_ent)
            denom_f = t * math.sqrt(max(d, log_ent) * log_ent)
            dev_g = np.empty(trials)
            dev_f = np.empty(trials)
            for k in range(trials):
                support = rng.choice(n, size=t, replace=False)
                while True:
                    images = support.copy()
                    rng.shuffle(images)
                    if not np.any(images == support):
                        break
                n_edges = _unfixed_counts(n, support, images)
                a = rng.standard_normal(n_edges)
                b = rho * a + noise_g * rng.standard_normal(n_edges)
                v_star_g = float(np.dot(a, b))
                xr = rng.standard_normal((t, d))
                yr = eta * xr + noise_f * rng.standard_normal((t, d))
                v_star_f = float(np.vdot(xr, yr))
                dev_g[k] = abs(v_star_g - rho * n_edges) / denom_g
                dev_f[k] = abs(v_star_f - eta * d * t) / denom_f
            metrics[f"{scale}_t{t}"] = {
                "n": n,
                "max_dev_g": float(dev_g.max()),
                "p99_dev_g": float(np.quantile(dev_g, 0.99)),
                "mean_dev_g": float(dev_g.mean()),
                "max_dev_f": float(dev_f.max()),
                "p99_dev_f": float(np.quantile(dev_f, 0.99)),
                "mean_dev_f": float(dev_f.mean()),
            }
    for t in t_values:
        lo, hi = metrics[f"n_t{t}"], metrics[f"2n_t{t}"]
        for side in ("p99_dev_g", "p99_dev_f"):
            ratio = hi[side] / lo[side] if lo[side] > 0 else math.inf
            metrics[f"ratio_t{t}_{side}"] = ratio
            if not (0.5 <= ratio <= 2.0) or not math.isfinite(hi[side]):
                passed = False
    return VerifierReport(
        "hstar",
        {"n": params.n, "d": d, "rho": rho, "eta": eta,
         "t_values": list(t_values), "trials": trials, "seed": seed},
        metrics, passed)


def verify_laplace_bound(params: ModelParams, t: int, trials: int,
                         seed: int) -> VerifierReport:
    """Exceedance of the conditional Laplace-transform envelope at C in {1,2,4}.

    Conditional on b, the graph cross term is Gaussian with mean
    rho sum_DE b_p b and variance (1-rho^2) sum_DE b_p^2, so its
    exponential moment at cg = rho/(1-rho^2) is (in log)

        cg rho sum_DE b_p b + cg^2 (1-rho^2)/2 sum_DE b_p^2
      = rho^2/(1-rho^2) sum_DE b_p b + rho^2/(2(1-rho^2)) S_b(p)

    and analogously for the features with S_y(p).  Pass iff the C = 4
    exceedance is at most 1% on both sides.
    """
    n, d = params.n, params.d
    rho, eta = params.rho, params.eta
    if not 2 <= t <= n:
        raise ParameterError("need 2 <= t <= n")
    rng = substream(seed, "laplace")
    iu, ju = np.triu_indices(n, 1)
    log_n = math.log(n)
    kg = rho * rho / (1.0 - rho * rho)
    kf = eta * eta / (1.0 - eta * eta)
    exceed = {f"graph_C{c:g}": 0 for c in _LAPLACE_CONSTANTS}
    exceed.update({f"feature_C{c:g}": 0 for c in _LAPLACE_CONSTANTS})
    sb_sum = 0.0
    de_sum = 0.0
    for _ in range(trials):
        p = random_with_unfixed(n, t, rng).mapping
        mask = unfixed_edge_mask(p)
        ei, ej = np.nonzero(mask)
        b = np.zeros((n, n))
        vals = rng.standard_normal(iu.shape[0])
        b[iu, ju] = vals
        b[ju, iu] = vals
        bp = b[p[ei], p[ej]]
        cross_g = float(np.dot(bp, b[ei, ej]))
        s_b = float(np.dot(bp, bp))
        log_mgf_g = kg * cross_g + 0.5 * kg * s_b
        y = rng.standard_normal((n, d))
        moved = np.nonzero(p != np.arange(n))[0]
        cross_f = float(np.einsum("ij,ij->", y[p[moved]], y[moved]))
        s_y = float(np.einsum("ij,ij->", y[p[moved]], y[p[moved]]))
        log_mgf_f = kf * cross_f + 0.5 * kf * s_y
        n_edges = ei.shape[0]
        sb_sum += s_b
        de_sum += n_edges
        for c in _LAPLACE_CONSTANTS:
            bound_g = 0.5 * kg * (n_edges + c * t * math.sqrt(n * log_n))
            bound_f = 0.5 * kf * (d * t + c * t * math.sqrt(max(d, log_n) * log_n))
            exceed[f"graph_C{c:g}"] += int(log_mgf_g > bound_g)
            exceed[f"feature_C{c:g}"] += int(log_mgf_f > bound_f)
    metrics = {k: v / trials for k, v in exceed.items()}
    metrics["mean_s_b"] = sb_sum / trials
    metrics["mean_unfixed_edges"] = de_sum / trials
    passed = metrics["graph_C4"] <= 0.01 and metrics["feature_C4"] <= 0.01
    return VerifierReport(
        "laplace",
        {"n": n, "d": d, "rho": rho, "eta": eta, "t": t,
         "trials": trials, "seed": seed},
        metrics, passed)


def verify_gaussian_tails(var1: float, var2: float, alpha: float, t: float,
                          trials: int, seed: int) -> VerifierReport:
    """Monte Carlo check of the joint tail bound for one (alpha, t) cell.

    W1, W2 are jointly Gaussian with variances var1, var2 and correlation
    alpha; the empirical P(W1 > t, W2 > t) must not exceed the bound by
    more than three standard errors.
    """
    b1, b2 = var1 - 1.0, var2 - 1.0
    if abs(b1) > 0.2 or abs(b2) > 0.2:
        raise ParameterError("variance excesses must satisfy |var - 1| <= 0.2")
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError("alpha must lie in [0, 1]")
    if t <= 0.0:
        raise ParameterError("threshold t must be positive")
    rng = substream(seed, "tails", alpha, t)
    bbar = 0.5 * (b1 + b2)
    hits = 0
    block = 1_000_000
    done = 0
    while done < trials:
        m = min(block, trials - done)
        g = rng.standard_normal(m)
        gp = rng.standard_normal(m)
        w1 = math.sqrt(var1) * g
        w2 = math.sqrt(var2) * (alpha * g + math.sqrt(1.0 - alpha * alpha) * gp)
        hits += int(np.count_nonzero((w1 > t) & (w2 > t)))
        done += m
    est = hits / trials
    se = math.sqrt(est * (1.0 - est) / trials)
    denom = 1.0 + bbar + alpha
    bound = denom / (math.sqrt(2.0 * math.pi) * t) * math.exp(-t * t / denom)
    violated = est > bound + 3.0 * se
    return VerifierReport(
        "tails",
        {"var1": var1, "var2": var2, "alpha": alpha, "t": t,
         "trials": trials, "seed": seed},
        {"estimate": est, "se": se, "bound": bound, "violated": violated},
        not violated)


def budget_rule(epsilon: float, gamma: float = 0.5, d_of_n=None):
    """Parameter rule pinning rho^2 n/(1-rho^2) + 2 eta^2 d/(1-eta^2) = 2(1-eps) log n.

    gamma is the fraction of the budget carried by the graph channel;
    d_of_n defaults to ceil(log(n)^2).
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ParameterError("epsilon must lie in [0, 1]")
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError("gamma must lie in [0, 1]")
    if d_of_n is None:
        d_of_n = lambda n: max(1, math.ceil(math.log(n) ** 2))

    def rule(n: int) -> ModelParams:
        budget = 2.0 * (1.0 - epsilon) * math.log(n)
        d = int(d_of_n(n))
        sg = gamma * budget          # rho^2 n / (1 - rho^2)
        sf = (1.0 - gamma) * budget  # 2 eta^2 d / (1 - eta^2)
        rho_sq = sg / (n + sg)
        eta_sq = sf / (2.0 * d + sf)
        return ModelParams(n, d, math.sqrt(rho_sq), math.sqrt(eta_sq))

    return rule


def partition_trend(n_values, params_rule, trials: int, seed: int) -> VerifierReport:
    """Mean log Z / (n log n) along ``params_rule``; pass iff non-decreasing.

    log Z >= 0 is asserted on every evaluation.  At rho = eta = 0 the
    ratio is exactly log(n!) / (n log n), which climbs toward 1.
    """
    n_values = tuple(int(n) for n in n_values)
    for n in n_values:
        if not 2 <= n <= ENUMERATION_CAP:
            raise ParameterError(f"each n must satisfy 2 <= n <= {ENUMERATION_CAP}")
    ratios = []
    per_n = {}
    for n in n_values:
        params = params_rule(n)
        logs = np.empty(trials)
        for k in range(trials):
            inst = sample_instance(params, derive_key(seed, "partition", n, k))
            lp = log_partition(relabel_to_identity(inst))
            logs[k] = lp.log_z
        ratio = float(logs.mean()) / (n * math.log(n))
        ratios.append(ratio)
        per_n[str(n)] = {"mean_log_z": float(logs.mean()), "ratio": ratio,
                         "rho": params.rho, "eta": params.eta, "d": params.d}
    non_decreasing = all(b >= a for a, b in zip(ratios, ratios[1:]))
    return VerifierReport(
        "partition",
        {"n_values": list(n_values), "trials": trials, "seed": seed},
        {"per_n": per_n, "ratios": ratios, "non_decreasing": non_decreasing},
        non_decreasing)
