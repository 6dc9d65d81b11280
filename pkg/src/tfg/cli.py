"""Command line: ``tfg sample|window3|window4|sat-window|validate``.

Exit codes: 0 ok, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _floats(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,M, got {text!r}")
    return a, b


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # configuration errors exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tfg", description="Random triangle-free graph experiments.")
    p.add_argument("command", choices=["sample", "window3", "window4", "sat-window", "validate"])
    p.add_argument("--n", type=int)
    p.add_argument("--nm", type=_pair, help="bank sizes N,M for sat-window")
    p.add_argument("--omega", type=_floats)
    p.add_argument("--c", type=_floats)
    p.add_argument("--kappa", type=_floats)
    p.add_argument("--m-edges", type=int, help="edge count for sampling the fixed-m model")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    p.add_argument("--budget-seconds", type=float)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _sample(args) -> int:
    from .graphcore import write_edgelist
    from .numerics import params_for_fixed_m, params_for_window3, params_for_window4
    from .sampler import SamplerConfig, sample, sidecar

    chosen = [x is not None for x in (args.omega, args.c, args.m_edges)]
    if args.n is None or sum(chosen) != 1:
        raise ValueError("sample needs --n and exactly one of --omega, --c, --m-edges")
    if args.omega is not None:
        cfg = SamplerConfig("mu_lambda_1", params_for_window3(args.n, args.omega[0]), seed=args.seed)
    elif args.c is not None:
        cfg = SamplerConfig("mu_lambda_2", params_for_window4(args.n, args.c[0]), seed=args.seed)
    else:
        cfg = SamplerConfig("mu_m_1", params_for_fixed_m(args.n, args.m_edges), seed=args.seed)
    g = sample(cfg)
    _emit(write_edgelist(g), args.out)
    meta = sidecar(g, cfg)
    if args.out:
        with open(args.out + ".json", "w") as fh:
            fh.write(meta)
    else:
        sys.stderr.write(meta + "\n")
    return EXIT_OK


def _join_negative_lists(argv: Sequence[str]) -> list[str]:
    """Let ``--kappa -3,0,3`` through: argparse reads a leading minus as a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in ("--omega", "--c", "--kappa"):
            nxt = next(it, None)
            if nxt is None:
                out.append(tok)
            else:
                out.append(f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_lists(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    from .experiments import ExperimentSpec, run_sat_window, run_validate, run_window3, run_window4, write_table

    try:
        if args.command == "sample":
            return _sample(args)
        values = {"window3": args.omega, "window4": args.c, "sat-window": args.kappa}.get(args.command, ())
        if args.command != "validate" and values is None:
            flag = {"window3": "--omega", "window4": "--c", "sat-window": "--kappa"}[args.command]
            raise ValueError(f"{args.command} needs {flag}")
        spec = ExperimentSpec(
            kind=args.command,
            n=args.n,
            nm=args.nm,
            values=values or (),
            trials=args.trials,
            seed=args.seed,
            out=args.out,
            fmt=args.fmt,
            budget_seconds=args.budget_seconds,
        )
        if args.command == "validate":
            report = run_validate(spec)
            _emit(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n", args.out)
            return EXIT_OK if report["pass"] else EXIT_VALIDATION
        runner = {"window3": run_window3, "window4": run_window4, "sat-window": run_sat_window}[args.command]
        rows = runner(spec)
    except ValueError as exc:
        sys.stderr.write(f"tfg: configuration error: {exc}\n")
        return EXIT_CONFIG
    _emit(write_table(rows, args.fmt), args.out)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
