"""Command-line front end.

Subcommands:

* ``classify``  divisibility verdicts for one model or a pair,
* ``diagram``   divisibility-diagram grids (fig1 / fig2 / fig3),
* ``witness``   randomized revival search for product dynamics,
* ``example1``  CP phase table of the sinusoidal-rate family.

Exit codes: 0 success, 1 internal numerical failure, 2 usage error.
The environment variable QDIVIDE_THREADS caps worker threads of the
diagram sweep.
"""

import argparse
import json
import math
import os
import re
import subprocess
import sys

import numpy as np

from . import __version__, divisibility, dynamics, mixtures, witness
from ._pauli import BASIS4


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def version_string() -> str:
    base = f"qdivide-{__version__}"
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=os.path.dirname(os.path.abspath(__file__)),
            capture_output=True, text=True, timeout=2,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{base}+g{out.stdout.strip()}"
    except Exception:
        pass
    return base


def _workers() -> int:
    cap = os.environ.get("QDIVIDE_THREADS", "").strip()
    if not cap:
        return 1
    try:
        return max(1, int(cap))
    except ValueError:
        raise ValueError(f"QDIVIDE_THREADS must be an integer, got {cap!r}")


def _parse_floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"could not parse numbers from {text!r}")
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


_SIN_RE = re.compile(r"^(-?)sin\(\s*(?:(-?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*\*)?\s*t\s*\)$")


def _parse_rates_spec(text: str, coupling: float) -> dynamics.RateModel:
    """Rate triple from a literal spec: three floats, or (1, 1, +-sin(w*t)).

    Only numeric literals and the sin token are accepted; this is a fixed
    grammar, not an expression language.
    """
    toks = [tok.strip() for tok in text.split(",")]
    if len(toks) != 3:
        raise ValueError(f"rate spec needs three components, got {text!r}")
    sin_match = _SIN_RE.match(toks[2])
    if sin_match:
        if float(toks[0]) != 1.0 or float(toks[1]) != 1.0:
            raise ValueError(
                "sinusoidal third rate requires the first two rates to be 1")
        omega = float(sin_match.group(2)) if sin_match.group(2) else 1.0
        if sin_match.group(1) == "-":
            omega = -omega
        return dynamics.RateModel.sinusoid3(omega, coupling=coupling)
    return dynamics.RateModel.constants(*[float(t) for t in toks], coupling=coupling)


def _add_model_args(parser, suffix: str = "") -> None:
    parser.add_argument(f"--mixture{suffix}", metavar="P1,P2,P3",
                        help="mixture of dephasing semigroups with these weights")
    parser.add_argument(f"--rates{suffix}", metavar="G1,G2,G3",
                        help="constant rates, or 1,1,+-sin(W*t)")
    parser.add_argument(f"--sin{suffix}", type=float, metavar="OMEGA",
                        help="rates (1, 1, sin(OMEGA t))")


def _model_from_args(args, suffix: str = "") -> dynamics.RateModel | None:
    mix = getattr(args, f"mixture{suffix}")
    rates = getattr(args, f"rates{suffix}")
    sin = getattr(args, f"sin{suffix}")
    given = [x for x in (mix, rates, sin) if x is not None]
    if len(given) > 1:
        raise ValueError("give at most one model specification per slot")
    coupling = getattr(args, "coupling", None) or 1.0
    if mix is not None:
        return dynamics.RateModel.mixture(*_parse_floats(mix, 3))
    if rates is not None:
        return _parse_rates_spec(rates, coupling)
    if sin is not None:
        return dynamics.RateModel.sinusoid3(sin, coupling=coupling)
    return None


def _model_config(model: dynamics.RateModel) -> dict:
    cfg = {"kind": model.kind, "coupling": model.coupling}
    if model.kind == "constants":
        cfg["rates"] = list(model.constant_rates)
    elif model.kind == "sinusoid3":
        cfg["omega"] = model.omega
    elif model.kind == "mixture":
        cfg["weights"] = list(model.weights)
    return cfg


def _parse_grid(text: str | None) -> np.ndarray | None:
    if text is None:
        return None
    parts = text.split(",")
    if len(parts) not in (3, 4):
        raise ValueError("grid must be tmin,tmax,points[,lin|log]")
    tmin, tmax, pts = float(parts[0]), float(parts[1]), int(parts[2])
    spacing = parts[3].strip() if len(parts) == 4 else "log"
    if spacing == "log":
        return np.geomspace(tmin, tmax, pts)
    if spacing == "lin":
        return np.linspace(tmin, tmax, pts)
    raise ValueError(f"unknown grid spacing {spacing!r}")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _verdict_dict(v: divisibility.DivisibilityVerdict) -> dict:
    return {
        "label": v.label,
        "is_cp_divisible": v.is_cp_divisible,
        "is_p_divisible": v.is_p_divisible,
        "margin": v.margin,
        "witness_time": v.witness_time,
        "witness_detail": v.witness_detail,
    }


def _matrix_dict(m: np.ndarray) -> dict:
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_classify(args) -> int:
    model = _model_from_args(args)
    if model is None:
        raise ValueError("classify needs a model (--mixture, --rates or --sin)")
    second = _model_from_args(args, "2")
    if args.tensor_with == "self":
        second = model
    elif args.tensor_with is not None:
        raise ValueError("--tensor-with only accepts 'self'; use --mixture2/--rates2/--sin2")
    grid = _parse_grid(args.grid)
    tol = args.tol

    report = {
        "version": version_string(),
        "config": {
            "command": "classify",
            "model": _model_config(model),
            "model2": _model_config(second) if second is not None else None,
            "tol": tol,
        },
        "cp": _verdict_dict(divisibility.cp_divisible(model, grid, tol)),
        "p": _verdict_dict(divisibility.p_divisible(model, grid, tol)),
    }
    if second is not None:
        report["tensor"] = _verdict_dict(
            divisibility.tensor_p_divisible(model, second, grid, tol))
    _write(args.out, json.dumps(report, indent=2) + "\n")
    return 0


def _diagram_csv(grid: mixtures.DiagramGrid) -> str:
    lines = ["coord1,coord2,label,margin"]
    for (c1, c2), lab, m in zip(grid.coords, grid.labels, grid.margins):
        lines.append(f"{_fmt(c1)},{_fmt(c2)},{lab},{_fmt(m)}")
    return "\n".join(lines) + "\n"


def _diagram_json(grid: mixtures.DiagramGrid) -> str:
    doc = {
        "version": version_string(),
        "config": {"command": "diagram", "mode": grid.mode,
                   "resolution": grid.resolution, **grid.params},
        "cells": [
            [float(c1), float(c2), str(lab), float(m)]
            for (c1, c2), lab, m in zip(grid.coords, grid.labels, grid.margins)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _diagram_gnuplot(grid: mixtures.DiagramGrid) -> str:
    blocks = []
    for lab in sorted(set(grid.labels.tolist())):
        sel = grid.labels == lab
        rows = [f"{_fmt(c1)} {_fmt(c2)} {_fmt(m)}"
                for (c1, c2), m in zip(grid.coords[sel], grid.margins[sel])]
        blocks.append(f"# label {lab}\n" + "\n".join(rows) + "\n")
    return "\n\n".join(blocks)


def _cmd_diagram(args) -> int:
    p = _parse_floats(args.p, 3) if args.p else None
    t = None
    if args.t is not None:
        t = math.inf if args.t.strip().lower() in ("inf", "infinity") else float(args.t)
    grid = mixtures.diagram(args.mode, args.resolution, p=p, t=t,
                            workers=_workers())
    if args.format == "csv":
        text = _diagram_csv(grid)
    elif args.format == "json":
        text = _diagram_json(grid)
    else:
        text = _diagram_gnuplot(grid)
    _write(args.out, text)
    return 0


def _cmd_witness(args) -> int:
    if args.rates_pair:
        model = _parse_rates_spec(args.rates_pair[0], args.coupling or 1.0)
        second = _parse_rates_spec(args.rates_pair[1], args.coupling or 1.0)
    else:
        model = _model_from_args(args)
        if model is None:
            raise ValueError("witness needs a model (--mixture, --rates, --sin "
                             "or --rates-pair)")
        second = _model_from_args(args, "2") or model
    grid = _parse_grid(args.grid)
    report = witness.witness_search(model, second, budget=args.budget,
                                    seed=args.seed, grid=grid)
    doc = {
        "version": version_string(),
        "config": {
            "command": "witness",
            "model": _model_config(model),
            "model2": _model_config(second),
            "budget": args.budget,
            "seed": args.seed,
        },
        "found": report.found,
        "max_derivative": report.max_derivative,
        "time_interval": list(report.time_interval) if report.time_interval else None,
        "evaluations": report.evaluations,
        "spec": {
            "mu": report.spec.mu,
            "rho": _matrix_dict(report.spec.rho),
            "sigma": _matrix_dict(report.spec.sigma),
        },
    }
    _write(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def _cmd_example1(args) -> int:
    lambdas = _parse_floats(args.lambdas)
    omegas = _parse_floats(args.omegas)
    ts = np.geomspace(1e-3, args.t_max, args.points)
    lines = ["lambda,omega,is_cp_for_all_t,first_violation_t"]
    for lam in lambdas:
        for om in omegas:
            model = dynamics.RateModel.sinusoid3(om, coupling=lam)
            f = dynamics.decay_factors(model, ts)
            min_eig = dynamics.choi_min_eigenvalues(f)
            bad = min_eig < -1e-10
            if bad.any():
                first = ts[int(np.argmax(bad))]
                lines.append(f"{_fmt(lam)},{_fmt(om)},false,{_fmt(first)}")
            else:
                lines.append(f"{_fmt(lam)},{_fmt(om)},true,")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdivide",
        description="Divisibility classification and backflow witnesses "
                    "for qubit Pauli dynamics.",
    )
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    cl = sub.add_parser("classify", help="divisibility verdicts for a model or pair")
    _add_model_args(cl)
    _add_model_args(cl, "2")
    cl.add_argument("--tensor-with", metavar="self",
                    help="classify the tensor product with a copy of the model")
    cl.add_argument("--coupling", type=float, default=None)
    cl.add_argument("--grid", help="tmin,tmax,points[,lin|log]")
    cl.add_argument("--tol", type=float, default=divisibility.DEFAULT_TOL)
    cl.add_argument("--out", default=None)
    cl.set_defaults(func=_cmd_classify)

    dg = sub.add_parser("diagram", help="divisibility-diagram grid")
    dg.add_argument("--mode", required=True, choices=["fig1", "fig2", "fig3"])
    dg.add_argument("--resolution", type=int, required=True)
    dg.add_argument("--p", help="fixed weights for fig3, e.g. 0.4,0.4,0.2")
    dg.add_argument("--t", help="time for fig3 (number or inf)")
    dg.add_argument("--format", choices=["csv", "json", "gnuplot-dat"], default="csv")
    dg.add_argument("--out", default=None)
    dg.set_defaults(func=_cmd_diagram)

    wt = sub.add_parser("witness", help="search for a product-dynamics revival")
    _add_model_args(wt)
    _add_model_args(wt, "2")
    wt.add_argument("--rates-pair", nargs=2, metavar=("RATES1", "RATES2"),
                    help='literal rate triples, e.g. "1,1,sin(t)" "1,1,-sin(t)"')
    wt.add_argument("--coupling", type=float, default=None)
    wt.add_argument("--budget", type=int, required=True)
    wt.add_argument("--seed", type=int, required=True)
    wt.add_argument("--grid", help="tmin,tmax,points[,lin|log]")
    wt.add_argument("--out", default=None)
    wt.set_defaults(func=_cmd_witness)

    ex = sub.add_parser("example1", help="CP phase table of the sinusoidal family")
    ex.add_argument("--lambdas", required=True, help="comma-separated couplings")
    ex.add_argument("--omegas", required=True, help="comma-separated frequencies")
    ex.add_argument("--t-max", type=float, default=50.0)
    ex.add_argument("--points", type=int, default=4000)
    ex.add_argument("--out", default=None)
    ex.set_defaults(func=_cmd_example1)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, dynamics.NonInvertibleDynamicsError) as exc:
        print(f"qdivide: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # numerical failure inside a computation
        print(f"qdivide: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
