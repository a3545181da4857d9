"""Command-line front end.

Subcommands:
  gen       synthesize a point set and write it as PSET1
  embed     embed a point set, writing a codes CSV plus an operator sidecar
  eval      all-pairs distortion of codes against angles, JSON report
  sweep     grid of (k, delta) distortion experiments, CSV plus JSON summary
  validate  frozen Monte Carlo gate suite

Exit codes: 0 on success (and when all gates pass), 1 when gates fail,
2 on usage errors (bad flags or parameter combinations), 3 on I/O failures
including unreadable or malformed files.

All randomness flows from --seed through named substreams; no entropy is
taken from the environment. Reruns with identical flags produce
byte-identical outputs, independent of --threads.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embedders import (
    embed_points,
    sample_circulant_operator,
    sample_gaussian_operator,
    sample_randomized_operator,
    serialize_operator,
    deserialize_operator,
)
from .errors import ParseError
from .geometry import coherence
from .io import (
    ResultDocument,
    generate_pointset,
    load_codes,
    load_pointset,
    save_codes,
    save_pointset,
    save_result,
)
from .validation import distortion_experiment, evaluate_codes, run_gate_suite, sweep

__all__ = ["main", "RunConfig"]


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run; echoed into every output document."""

    subcommand: str
    options: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"subcommand": self.subcommand, **self.options}


def _float_fmt(v: float) -> str:
    return f"{v:.17g}"


def _sample_operator(kind: str, n: int, k: int, seed: int, r_dist: str):
    if kind == "gaussian":
        return sample_gaussian_operator(n, k, seed)
    if kind == "circulant":
        return sample_circulant_operator(n, k, seed, r_dist=r_dist)
    if kind == "randomized":
        return sample_randomized_operator(n, k, seed, r_dist=r_dist)
    raise ValueError(f"unknown operator kind {kind!r}")


def cmd_gen(args) -> int:
    params = {}
    if args.theta is not None:
        params["theta"] = args.theta
    if args.noise is not None:
        params["noise"] = args.noise
    ps = generate_pointset(args.kind, args.n, args.N, args.seed, params)
    save_pointset(ps, args.out)
    stats = coherence(ps)
    print(f"wrote {args.out}: N={ps.N} n={ps.n}")
    print(
        f"rho_direct={stats.rho_direct:.6g} rho_cross={stats.rho_cross:.6g} "
        f"theta_min={stats.theta_min:.6g}"
    )
    return 0


def cmd_embed(args) -> int:
    ps = load_pointset(args.pointset)
    op = _sample_operator(args.kind, ps.n, args.k, args.seed, args.r_dist)
    codes = embed_points(op, ps.points, threads=args.threads)
    save_codes(codes, args.out)
    sidecar = args.operator_out or (str(args.out) + ".beop")
    Path(sidecar).write_bytes(serialize_operator(op))
    print(f"wrote {args.out} ({codes.shape[0]} codes of length {codes.shape[1]}) and {sidecar}")
    return 0


def cmd_eval(args) -> int:
    ps = load_pointset(args.pointset)
    config = RunConfig(
        "eval",
        {
            "pointset": str(args.pointset),
            "delta_target": args.delta,
        },
    )
    if args.codes:
        codes = load_codes(args.codes)
        op_echo = {"codes": str(args.codes)}
        if args.operator:
            op = deserialize_operator(Path(args.operator).read_bytes())
            op_echo["operator"] = str(args.operator)
            op_echo["operator_seed"] = op.seed
            op_echo["operator_kind"] = type(op).__name__
        report = evaluate_codes(ps, codes, delta_target=args.delta)
    else:
        if args.kind is None or args.k is None:
            raise ValueError("eval needs either --codes or --kind plus --k")
        op = _sample_operator(args.kind, ps.n, args.k, args.seed, args.r_dist)
        codes = embed_points(op, ps.points, threads=args.threads)
        op_echo = {"kind": args.kind, "k": args.k, "seed": args.seed, "r_dist": args.r_dist}
        report = evaluate_codes(ps, codes, delta_target=args.delta, kind=args.kind, seed=args.seed)
    doc = ResultDocument(
        kind="eval",
        params={**config.as_dict(), **op_echo, "n": ps.n, "N": ps.N, "k": report.k},
        stats=report.to_stats(),
        arrays={"per_pair": [list(row) for row in (report.per_pair or ())]},
    )
    if args.out:
        save_result(doc, args.out)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(doc.to_json())
    return 0


_SWEEP_COLUMNS = "kind,n,N,k,delta,trial,max_distortion,mean_distortion"


def cmd_sweep(args) -> int:
    ps = load_pointset(args.pointset)
    k_values = [int(v) for v in args.k_list.split(",") if v]
    delta_values = [float(v) for v in args.delta_list.split(",") if v]
    if not k_values or not delta_values:
        raise ValueError("--k-list and --delta-list must be nonempty")
    reports = sweep(
        ps, args.kind, k_values, delta_values, args.trials, args.seed,
        r_dist=args.r_dist, threads=args.threads,
    )
    lines = [_SWEEP_COLUMNS]
    for rep in reports:
        for t, (mx, mean) in enumerate(zip(rep.per_trial_max, rep.per_trial_mean)):
            lines.append(
                f"{rep.kind},{rep.n},{rep.N},{rep.k},{_float_fmt(rep.delta_target)},"
                f"{t},{_float_fmt(mx)},{_float_fmt(mean)}"
            )
    Path(args.csv_out).write_text("\n".join(lines) + "\n")
    print(f"wrote {args.csv_out} ({len(lines) - 1} rows)")
    if args.json_out:
        cells = [
            {
                "k": rep.k,
                "delta": rep.delta_target,
                "max_distortion": rep.max_distortion,
                "mean_distortion": rep.mean_distortion,
                "success_fraction": rep.success_fraction,
            }
            for rep in reports
        ]
        doc = ResultDocument(
            kind="sweep",
            params={
                "subcommand": "sweep",
                "pointset": str(args.pointset),
                "kind": args.kind,
                "k_list": k_values,
                "delta_list": delta_values,
                "trials": args.trials,
                "seed": args.seed,
                "r_dist": args.r_dist,
                "n": ps.n,
                "N": ps.N,
            },
            stats={"cells": len(cells)},
            arrays={"cells": cells},
        )
        save_result(doc, args.json_out)
        print(f"wrote {args.json_out}")
    return 0


def cmd_validate(args) -> int:
    results = run_gate_suite(seed=args.seed, quick=args.quick, threads=args.threads)
    all_pass = True
    for g in results:
        verdict = "PASS" if g.passed else "FAIL"
        extra = f"  [{g.detail}]" if g.detail else ""
        print(f"GATE {g.name}: measured={g.measured:.6g} {g.op} {g.threshold:.6g} {verdict}{extra}")
        all_pass &= g.passed
    if args.json_out:
        doc = ResultDocument(
            kind="validate",
            params={"subcommand": "validate", "seed": args.seed, "quick": args.quick},
            stats={"all_pass": all_pass},
            arrays={
                "gates": [
                    {
                        "name": g.name,
                        "measured": g.measured,
                        "op": g.op,
                        "threshold": g.threshold,
                        "passed": g.passed,
                    }
                    for g in results
                ]
            },
        )
        save_result(doc, args.json_out)
        print(f"wrote {args.json_out}")
    print("all gates passed" if all_pass else "gate failures detected")
    return 0 if all_pass else 1


def _add_common(p, threads=True):
    p.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    if threads:
        p.add_argument(
            "--threads", type=int, default=os.cpu_count() or 1,
            help="worker threads; results do not depend on this",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circembed",
        description="Binary embedding via circulant sign projections: generation, embedding, evaluation, validation.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gen", help="generate a synthetic point set (PSET1)")
    p.add_argument("--kind", required=True,
                   choices=["uniform_sphere", "flat_signs", "spiky", "clustered_pairs"])
    p.add_argument("--n", type=int, required=True, help="ambient dimension")
    p.add_argument("--N", type=int, required=True, help="number of points")
    p.add_argument("--theta", type=float, default=None, help="pair angle for clustered_pairs")
    p.add_argument("--noise", type=float, default=None, help="noise scale for spiky")
    p.add_argument("--out", required=True)
    _add_common(p, threads=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("embed", help="embed a point set into sign codes")
    p.add_argument("--pointset", required=True)
    p.add_argument("--kind", required=True, choices=["gaussian", "circulant", "randomized"])
    p.add_argument("--k", type=int, required=True, help="code length")
    p.add_argument("--r-dist", default="gaussian", choices=["gaussian", "rademacher"],
                   help="distribution of the modulation vector r")
    p.add_argument("--out", required=True, help="codes CSV path")
    p.add_argument("--operator-out", default=None, help="operator sidecar path (default <out>.beop)")
    _add_common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("eval", help="all-pairs distortion report")
    p.add_argument("--pointset", required=True)
    p.add_argument("--codes", default=None, help="codes CSV written by embed")
    p.add_argument("--operator", default=None, help="operator sidecar, echoed into the report")
    p.add_argument("--kind", default=None, choices=["gaussian", "circulant", "randomized"])
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--r-dist", default="gaussian", choices=["gaussian", "rademacher"])
    p.add_argument("--delta", type=float, default=0.15, help="distortion target")
    p.add_argument("--out", default=None, help="JSON report path (default stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="distortion grid over k and delta")
    p.add_argument("--pointset", required=True)
    p.add_argument("--kind", required=True, choices=["gaussian", "circulant", "randomized"])
    p.add_argument("--k-list", required=True, help="comma-separated code lengths")
    p.add_argument("--delta-list", required=True, help="comma-separated distortion targets")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--r-dist", default="gaussian", choices=["gaussian", "rademacher"])
    p.add_argument("--csv-out", required=True)
    p.add_argument("--json-out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the frozen gate suite")
    p.add_argument("--quick", action="store_true", help="reduced trial counts")
    p.add_argument("--json-out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return int(e.code or 0)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
