"""Command-line front end.

Subcommands: validate, estimator, frontier rd|re, simulate rd|ht,
typicality bound.  Results go to stdout or --out (written atomically);
the fully resolved configuration is echoed to stderr so every run is
self-describing.  Exit codes: 0 success, 2 invalid model file, 3
infeasible parameters, 1 internal failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import frontier as frontier_mod
from . import model as model_mod
from . import simulator as simulator_mod
from . import typeclasses as typeclasses_mod
from .frontier import InfeasibleError, SolverConfig
from .model import ModelFormatError


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _emit(text: str, out_path):
    """Write results to stdout, or atomically to a file (write-then-rename)."""
    if out_path is None:
        sys.stdout.write(text)
        return
    tmp = f"{out_path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, out_path)


def _csv(header, rows) -> str:
    def cell(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = [",".join(header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _load_validated(path):
    instance = model_mod.load_model(path)
    violations = model_mod.validate_model(instance)
    return instance, violations


def _plot_frontier(points, x_label, path):
    try:
        import matplotlib
    except ImportError:
        raise ValueError("--plot needs matplotlib (pip install isackit[plot])") from None

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    ax.plot([p.objective for p in points], [p.rate for p in points], marker="o")
    ax.set_xlabel(x_label)
    ax.set_ylabel("rate (bits/channel use)")
    fmt = os.path.splitext(path)[1].lstrip(".") or "svg"
    tmp = f"{path}.tmp"
    fig.savefig(tmp, format=fmt)
    plt.close(fig)
    os.replace(tmp, path)


def _cmd_validate(args, config):
    _, violations = _load_validated(args.model)
    if violations:
        for line in violations:
            print(line)
        return 2
    print("valid")
    return 0


def _cmd_estimator(args, config):
    from .sensing import optimal_estimator, per_input_cost, posterior

    instance, violations = _load_validated(args.model)
    if violations:
        for line in violations:
            print(line, file=sys.stderr)
        return 2
    if instance.distortion is None:
        raise InfeasibleError("distortion spec required")
    post = posterior(instance.channel, instance.p_s)
    est = optimal_estimator(post, instance.distortion)
    cost = per_input_cost(instance.channel, instance.p_s, instance.distortion, est)
    ch = instance.channel
    if args.format == "json":
        doc = {
            "config": config,
            "shat": [[instance.distortion.s_hat.labels[est.shat[xi, zi]]
                      for zi in range(ch.z.size)] for xi in range(ch.x.size)],
            "supported": post.support.tolist(),
            "per_input_cost": cost.tolist(),
        }
        _emit(json.dumps(_sanitize(doc), indent=2) + "\n", args.out)
    else:
        rows = [
            (ch.x.labels[xi], ch.z.labels[zi],
             instance.distortion.s_hat.labels[est.shat[xi, zi]])
            for xi in range(ch.x.size) for zi in range(ch.z.size)
        ]
        _emit(_csv(("x", "z", "shat"), rows), args.out)
    return 0


def _cmd_frontier(args, config):
    instance, violations = _load_validated(args.model)
    if violations:
        for line in violations:
            print(line, file=sys.stderr)
        return 2
    cfg = SolverConfig()
    if args.kind == "rd":
        points = frontier_mod.rd_frontier(instance, args.points, cfg)
        bound_key, x_label = "D", "distortion cap"
    else:
        points = frontier_mod.re_frontier(instance, args.points, cfg)
        bound_key, x_label = "E", "exponent target (bits)"
    k = instance.channel.x.size
    if args.format == "json":
        doc = {
            "config": config,
            "points": [
                {bound_key: p.objective, "R": p.rate, "p_x": p.p_x.tolist(),
                 "achieved": p.achieved, "converged": p.converged,
                 "iterations": p.iterations, "clamped": p.clamped}
                for p in points
            ],
        }
        _emit(json.dumps(_sanitize(doc), indent=2) + "\n", args.out)
    else:
        header = (bound_key, "R", *(f"px_{i}" for i in range(k)), "converged")
        rows = [
            (p.objective, p.rate, *(float(v) for v in p.p_x), p.converged)
            for p in points
        ]
        _emit(_csv(header, rows), args.out)
    if args.plot:
        _plot_frontier(points, x_label, args.plot)
    return 0


def _cmd_simulate(args, config):
    instance, violations = _load_validated(args.model)
    if violations:
        for line in violations:
            print(line, file=sys.stderr)
        return 2
    if args.kind == "rd":
        report = simulator_mod.run_rd_experiment(
            instance, rate=args.rate, distortion=args.distortion, n=args.n,
            trials=args.trials, seed=args.seed, workers=args.workers,
        )
    else:
        if args.px is not None:
            p_x = np.array([float(v) for v in args.px.split(",")])
        else:
            p_x = np.full(instance.channel.x.size, 1.0 / instance.channel.x.size)
        mode = {"mc": "monte_carlo", "exact_dp": "exact_dp"}[args.mode]
        report = simulator_mod.run_ht_experiment(
            instance, p_x, n=args.n, alpha_target=args.alpha, mode=mode,
            bin_width=args.bin_width, trials=args.trials, seed=args.seed,
            workers=args.workers,
        )
    flat = {"config": config, **report.to_json_dict()}
    if args.format == "csv":
        body = {k: v for k, v in flat.items() if k != "config"}
        keys = list(body)
        _emit(_csv(keys, [tuple(_sanitize(body[k]) for k in keys)]), args.out)
    else:
        _emit(json.dumps(_sanitize(flat), indent=2) + "\n", args.out)
    return 0


def _cmd_typicality(args, config):
    bound = typeclasses_mod.typicality_lower_bound(args.mu, args.n, args.cells)
    if args.format == "json":
        doc = {"config": config, "mu": args.mu, "n": args.n,
               "cells": args.cells, "bound": bound}
        _emit(json.dumps(_sanitize(doc), indent=2) + "\n", args.out)
    else:
        _emit(_csv(("mu", "n", "cells", "bound"),
                   [(args.mu, args.n, args.cells, bound)]), args.out)
    return 0


def _add_output_flags(sp):
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default=None, help="write results to this path (atomic)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isackit",
        description="Communication-sensing tradeoffs for finite state-dependent channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="check a model file against all invariants")
    sp.add_argument("model")

    sp = sub.add_parser("estimator", help="optimal per-symbol state estimator table")
    sp.add_argument("model")
    _add_output_flags(sp)

    fr = sub.add_parser("frontier", help="tradeoff frontier computations")
    fr_sub = fr.add_subparsers(dest="kind", required=True)
    for kind, desc in (("rd", "rate vs distortion"), ("re", "rate vs detection exponent")):
        sp = fr_sub.add_parser(kind, help=desc)
        sp.add_argument("model")
        sp.add_argument("--points", type=int, required=True)
        _add_output_flags(sp)
        sp.add_argument("--plot", default=None, help="write a frontier polyline plot")

    sim = sub.add_parser("simulate", help="Monte-Carlo / exact achievability runs")
    sim_sub = sim.add_subparsers(dest="kind", required=True)
    sp = sim_sub.add_parser("rd", help="random coding + per-symbol estimation")
    sp.add_argument("model")
    sp.add_argument("--rate", type=float, required=True)
    sp.add_argument("--distortion", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--workers", type=int, default=1)
    _add_output_flags(sp)
    sp.set_defaults(format="json")
    sp = sim_sub.add_parser("ht", help="likelihood-ratio state detection")
    sp.add_argument("model")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--mode", choices=("mc", "exact_dp"), default="exact_dp")
    sp.add_argument("--trials", type=int, default=0)
    sp.add_argument("--bin-width", dest="bin_width", type=float, default=1e-9)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--px", default=None,
                    help="comma-separated input pmf (default: uniform)")
    _add_output_flags(sp)
    sp.set_defaults(format="json")

    ty = sub.add_parser("typicality", help="typicality utilities")
    ty_sub = ty.add_subparsers(dest="kind", required=True)
    sp = ty_sub.add_parser("bound", help="typical-set mass lower bound")
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--cells", type=int, required=True)
    _add_output_flags(sp)

    return parser


_DISPATCH = {
    "validate": _cmd_validate,
    "estimator": _cmd_estimator,
    "frontier": _cmd_frontier,
    "simulate": _cmd_simulate,
    "typicality": _cmd_typicality,
}


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = {k: v for k, v in sorted(vars(args).items())}
    print("config " + json.dumps(_sanitize(config)), file=sys.stderr)
    try:
        return _DISPATCH[args.command](args, config)
    except ModelFormatError as exc:
        print(f"invalid model file: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"invalid model file: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleError, ValueError) as exc:
        print(f"infeasible parameters: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal failure: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
