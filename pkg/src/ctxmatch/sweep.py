"""Monte Carlo phase-diagram sweeps over the signal plane.

Cells live on the axes x = rho^2 n / log n and y = eta^2 d / log n.  Each
cell converts (x, y) back to (rho, eta), runs independent trials with
seeds derived from (base_seed, cell indices, trial index), and records
the exact-recovery rate and mean overlap.  Cells where the implied
rho^2 = x log n / n leaves [0, 1) are infeasible: they are flagged and
skipped, never sampled.

Theory lines drawn on this plane (equalities classify as "boundary"):

    x + y  = 4   exact recovery threshold
    x + 2y = 4   almost-exact threshold; also the conjectured partial-
                 recovery boundary (proven impossibility covers x + 2y <= 2)
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import estimators
from .energy import ENUMERATION_CAP
from .errors import EnumerationCapError, ParameterError
from .model import ModelParams, sample_instance
from .rng import derive_key

_ESTIMATOR_NAMES = ("exhaustive", "feature", "local", "ball")

CSV_HEADER = "x,y,rho,eta,n,d,trials,estimator,exact_rate,se_exact,mean_overlap,base_seed,region"


def theory_classify(x: float, y: float) -> str:
    """Theoretical label of the cell (x, y); see the module docstring."""
    if x < 0.0 or y < 0.0:
        raise ParameterError("phase coordinates must be nonnegative")
    exact_line = x + y
    partial_line = x + 2.0 * y
    if exact_line == 4.0 or (partial_line == 4.0 and exact_line < 4.0):
        return "boundary"
    if exact_line > 4.0:
        return "exact"
    if partial_line > 4.0:
        return "almost-exact-gap"
    return "impossible-half"


def conjecture_annotation(x: float, y: float) -> str:
    """Advisory label for the conjectured partial-recovery boundary x + 2y = 4."""
    partial_line = x + 2.0 * y
    if partial_line == 4.0:
        return "conjecture-boundary"
    if partial_line < 4.0:
        return "conjectured-no-partial"
    return "above-conjecture-line"


@dataclass(frozen=True)
class SweepConfig:
    n: int
    d: int
    x_grid: tuple[float, ...]
    y_grid: tuple[float, ...]
    trials: int
    estimator: str
    base_seed: int = 0
    epsilon_lines: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("sweep needs n >= 2")
        if self.d < 1:
            raise ParameterError("sweep needs d >= 1")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.estimator not in _ESTIMATOR_NAMES:
            raise ParameterError(
                f"estimator must be one of {', '.join(_ESTIMATOR_NAMES)}")
        if any(v < 0 for v in self.x_grid) or any(v < 0 for v in self.y_grid):
            raise ParameterError("grid coordinates must be nonnegative")
        object.__setattr__(self, "x_grid", tuple(float(v) for v in self.x_grid))
        object.__setattr__(self, "y_grid", tuple(float(v) for v in self.y_grid))

    @classmethod
    def from_json(cls, text: str) -> "SweepConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed sweep config: {exc}") from exc
        try:
            return cls(
                n=int(doc["n"]),
                d=int(doc["d"]),
                x_grid=tuple(doc["x_grid"]),
                y_grid=tuple(doc["y_grid"]),
                trials=int(doc["trials"]),
                estimator=str(doc["estimator"]),
                base_seed=int(doc.get("base_seed", 0)),
                epsilon_lines=tuple(doc.get("epsilon_lines", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"invalid sweep config: {exc}") from exc


@dataclass(frozen=True)
class SweepCell:
    x: float
    y: float
    rho: float
    eta: float
    exact_rate: float
    se_exact: float
    mean_overlap: float
    region: str
    feasible: bool
    trials_run: int = 0


def cell_signal(config: SweepConfig, x: float, y: float):
    """(rho, eta, feasible) for a grid cell; rho^2 or eta^2 >= 1 is infeasible."""
    log_n = math.log(config.n)
    rho_sq = x * log_n / config.n
    eta_sq = y * log_n / config.d
    if rho_sq >= 1.0 or eta_sq >= 1.0:
        return math.nan, math.nan, False
    return math.sqrt(rho_sq), math.sqrt(eta_sq), True


def _check_estimator_feasible(config: SweepConfig):
    if config.estimator == "exhaustive" and config.n > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"estimator 'exhaustive' needs n <= {ENUMERATION_CAP} (got n = {config.n})")
    if config.estimator == "ball" and config.n > estimators._BALL_CAP:
        raise EnumerationCapError(
            f"estimator 'ball' needs n <= {estimators._BALL_CAP} (got n = {config.n})")


def _run_estimator(name: str, inst) -> estimators.MatchResult:
    if name == "exhaustive":
        return estimators.map_exhaustive(inst)
    if name == "feature":
        return estimators.feature_map(inst)
    if name == "local":
        return estimators.local_search_map(
            inst, estimators.LocalSearchConfig(seed=inst.seed))
    return estimators.bayes_ball_estimator(inst, r=0.25)


def run_cell(config: SweepConfig, xi: int, yi: int) -> SweepCell:
    """Run all trials of one grid cell; deterministic given config."""
    x, y = config.x_grid[xi], config.y_grid[yi]
    rho, eta, feasible = cell_signal(config, x, y)
    region = theory_classify(x, y)
    if not feasible:
        return SweepCell(x, y, math.nan, math.nan, math.nan, math.nan,
                         math.nan, "infeasible", False, 0)
    params = ModelParams(config.n, config.d, rho, eta)
    exact = 0
    overlap_sum = 0
    for trial in range(config.trials):
        seed = derive_key(config.base_seed, "cell", xi, yi, trial)
        inst = sample_instance(params, seed)
        res = _run_estimator(config.estimator, inst)
        exact += int(res.exact)
        overlap_sum += res.overlap_with_truth
    p = exact / config.trials
    se = math.sqrt(p * (1.0 - p) / config.trials)
    mean_ov = overlap_sum / (config.trials * config.n)
    return SweepCell(x, y, rho, eta, p, se, mean_ov, region, True, config.trials)


def _run_cell_args(args) -> SweepCell:
    return run_cell(*args)


def run_phase_sweep(config: SweepConfig, threads: int = 1) -> list[SweepCell]:
    """All grid cells in row-major (x outer, y inner) order.

    With threads > 1 the cells are farmed out to a process pool; results
    are reassembled in grid order, so the output is independent of the
    thread count.
    """
    _check_estimator_feasible(config)
    tasks = [(config, xi, yi)
             for xi in range(len(config.x_grid))
             for yi in range(len(config.y_grid))]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_run_cell_args, tasks))
    return [run_cell(*t) for t in tasks]


def _csv_num(v: float) -> str:
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def sweep_to_csv(cells: list[SweepCell], config: SweepConfig) -> str:
    """Render cells as the canonical CSV document (header, LF, UTF-8)."""
    lines = [CSV_HEADER]
    for c in cells:
        lines.append(",".join([
            _csv_num(c.x), _csv_num(c.y), _csv_num(c.rho), _csv_num(c.eta),
            str(config.n), str(config.d), str(config.trials), config.estimator,
            _csv_num(c.exact_rate), _csv_num(c.se_exact),
            _csv_num(c.mean_overlap), str(config.base_seed), c.region,
        ]))
    return "\n".join(lines) + "\n"
