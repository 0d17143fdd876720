"""Command-line interface.

Subcommands: sample, match, sweep, verify, derange.  Exit codes:
0 success, 1 failed property suite, 2 bad arguments, 3 enumeration cap
exceeded, 4 I/O error.  Every JSON artifact embeds the tool version, the
resolved configuration, and the base seed; the resolved configuration is
also logged to stderr before any work starts.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .combinatorics import count_derangements, orbit_size
from .energy import hamiltonian
from .errors import EnumerationCapError, ParameterError
from .estimators import (LocalSearchConfig, bayes_ball_estimator, feature_map,
                         local_search_map, map_exhaustive)
from .model import (ModelParams, instance_from_json, instance_to_json,
                    relabel_to_identity, sample_instance)
from .perm import Permutation
from .sweep import SweepConfig, run_phase_sweep, sweep_to_csv
from .verify import (budget_rule, partition_trend, verify_gaussian_tails,
                     verify_hstar_concentration, verify_laplace_bound)

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_USAGE = 2
EXIT_CAP = 3
EXIT_IO = 4

log = logging.getLogger("ctxmatch")


def _default_threads() -> int:
    env = os.environ.get("CTXMATCH_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError("CTXMATCH_THREADS must be an integer") from None
    return os.cpu_count() or 1


def _write_out(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _stamp(doc: dict, config: dict, seed: int) -> dict:
    return {"version": __version__, "config": config, "seed": seed, **doc}


def _model_params(args) -> ModelParams:
    return ModelParams(args.n, args.d, args.rho, args.eta)


def _load_instance(args):
    if args.inst is not None:
        with open(args.inst, "r", encoding="utf-8") as fh:
            return instance_from_json(fh.read())
    return sample_instance(_model_params(args), args.seed)


def _cmd_sample(args) -> int:
    inst = sample_instance(_model_params(args), args.seed)
    _write_out(instance_to_json(inst) + "\n", args.out)
    return EXIT_OK


def _cmd_match(args) -> int:
    inst = _load_instance(args)
    if args.estimator == "exhaustive":
        res = map_exhaustive(inst)
    elif args.estimator == "feature":
        res = feature_map(inst)
    elif args.estimator == "local":
        res = local_search_map(inst, LocalSearchConfig(
            restarts=args.restarts, seed=args.seed))
    else:
        res = bayes_ball_estimator(inst, args.r)
    doc = res.to_dict()
    if args.explain:
        idf = relabel_to_identity(inst)
        sigma = inst.pi_star.inverse().compose(res.estimate)
        bd = hamiltonian(idf, sigma)
        doc["breakdown"] = {"v": bd.v, "v_star_g": bd.v_star_g, "v_g": bd.v_g,
                            "v_star_f": bd.v_star_f, "v_f": bd.v_f}
    config = {"estimator": args.estimator, "n": inst.params.n,
              "d": inst.params.d, "rho": inst.params.rho,
              "eta": inst.params.eta, "inst": args.inst,
              "r": args.r, "restarts": args.restarts}
    _write_out(json.dumps(_stamp(doc, config, args.seed), indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = SweepConfig.from_json(fh.read())
    log.info("sweep config: %s", json.dumps(config.__dict__, default=str))
    cells = run_phase_sweep(config, threads=args.threads)
    if args.format == "json":
        doc = _stamp({"cells": [c.__dict__ for c in cells]},
                     config.__dict__, config.base_seed)
        _write_out(json.dumps(doc, indent=2, default=str) + "\n", args.out)
    else:
        _write_out(sweep_to_csv(cells, config), args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.suite == "hstar":
        params = ModelParams(args.n, args.d, args.rho, args.eta)
        t_values = [int(v) for v in args.t_values.split(",")]
        report = verify_hstar_concentration(params, t_values, args.trials, args.seed)
    elif args.suite == "laplace":
        params = ModelParams(args.n, args.d, args.rho, args.eta)
        report = verify_laplace_bound(params, args.t, args.trials, args.seed)
    elif args.suite == "tails":
        alphas = [float(v) for v in args.alphas.split(",")]
        ts = [float(v) for v in args.thresholds.split(",")]
        reports = [verify_gaussian_tails(args.var1, args.var2, a, t,
                                         args.trials, args.seed)
                   for a in alphas for t in ts]
        doc = {"suite": "tails-grid",
               "cells": [json.loads(r.to_json()) for r in reports],
               "pass": all(r.passed for r in reports)}
        payload = _stamp(doc, {"alphas": alphas, "thresholds": ts,
                               "var1": args.var1, "var2": args.var2,
                               "trials": args.trials}, args.seed)
        _write_out(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_OK if doc["pass"] else EXIT_PROPERTY
    else:
        n_values = list(range(2, args.n_max + 1))
        rule = budget_rule(args.epsilon, args.gamma)
        report = partition_trend(n_values, rule, args.trials, args.seed)
    payload = _stamp(json.loads(report.to_json()), report.params, args.seed)
    _write_out(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_PROPERTY


def _cmd_derange(args) -> int:
    if args.t is None:
        value = count_derangements(args.n)
    else:
        value = orbit_size(args.n, args.t)
    doc = _stamp({"count": value, "n": args.n, "t": args.t},
                 {"n": args.n, "t": args.t}, 0)
    _write_out(json.dumps(doc) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxmatch",
        description="Contextual Gaussian graph matching: sampling, matching, sweeps, verifiers.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default stdout)")

    def model_flags(p):
        p.add_argument("--n", type=int, default=5)
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--rho", type=float, default=0.0)
        p.add_argument("--eta", type=float, default=0.0)

    p = sub.add_parser("sample", help="draw an instance and write its JSON document")
    model_flags(p)
    common(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("match", help="run an estimator on an instance")
    p.add_argument("--inst", default=None, help="instance JSON path; omit to sample inline")
    model_flags(p)
    p.add_argument("--estimator", default="exhaustive",
                   choices=("exhaustive", "feature", "local", "ball"))
    p.add_argument("--r", type=float, default=0.25, help="ball radius for --estimator ball")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--explain", action="store_true",
                   help="include the energy breakdown of the estimate")
    common(p)
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("sweep", help="run a phase-diagram sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run a Monte Carlo property suite")
    p.add_argument("--suite", required=True,
                   choices=("hstar", "laplace", "tails", "partition"))
    model_flags(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--t", type=int, default=2, help="unfixed points (laplace suite)")
    p.add_argument("--t-values", default="2", help="comma list of t (hstar suite)")
    p.add_argument("--alphas", default="0,0.25,0.5", help="comma list (tails suite)")
    p.add_argument("--thresholds", default="2,2.5,3", help="comma list of t (tails suite)")
    p.add_argument("--var1", type=float, default=1.0)
    p.add_argument("--var2", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=6, help="largest n (partition suite)")
    p.add_argument("--epsilon", type=float, default=1.0,
                   help="budget slack (partition suite); 1.0 is the uniform rho=eta=0 rule")
    p.add_argument("--gamma", type=float, default=0.5, help="graph budget share (partition suite)")
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("derange", help="derangement and orbit counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_derange)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None and args.command == "sweep":
        try:
            args.threads = _default_threads()
        except ParameterError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    log.info("resolved config: %s", json.dumps(resolved, default=str))
    try:
        return args.func(args)
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
