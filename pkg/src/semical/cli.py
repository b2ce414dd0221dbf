"""Command line runner.

    semical run   <config> [--output-dir DIR] [--threads N] [--tolerance-scale X]
    semical sweep <config> [--output-dir DIR] [--threads N] [--tolerance-scale X]

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 identity residual above the configured tolerance.  Failures also leave a
structured error.json in the output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .elliptic import ConvergenceError, SmallnessError
from .pipelines import run_pipeline

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_RESIDUAL = 4


def _write_error(outdir: Path | None, code: int, exc: Exception) -> None:
    obj = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    try:
        if outdir is not None:
            outdir.mkdir(parents=True, exist_ok=True)
            with open(outdir / "error.json", "w") as fh:
                json.dump(obj, fh, indent=2)
                fh.write("\n")
    except OSError:
        pass
    print(json.dumps(obj), file=sys.stderr)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semical", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "execute the pipeline named in the config"),
        ("sweep", "run the pipeline at several resolutions and report convergence order"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="path to the experiment config")
        sp.add_argument("--output-dir", default=None, help="override the config's output_dir")
        sp.add_argument("--threads", type=int, default=None, help="worker threads for sweeps")
        sp.add_argument("--tolerance-scale", type=float, default=1.0,
                        help="multiply residual gates (for slow CI machines)")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    outdir: Path | None = Path(args.output_dir) if args.output_dir else None

    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        _write_error(outdir, EXIT_CONFIG, exc)
        return EXIT_CONFIG

    if outdir is None:
        outdir = Path(cfg.output_dir)

    if args.command == "sweep" and cfg.pipeline != "sweep-convergence":
        sweep = dict(cfg.sweep)
        sweep["of"] = cfg.pipeline
        cfg = dataclasses.replace(cfg, pipeline="sweep-convergence", sweep=sweep)

    try:
        result = run_pipeline(cfg, outdir, tol_scale=args.tolerance_scale,
                              threads=args.threads)
    except ConfigError as exc:
        _write_error(outdir, EXIT_CONFIG, exc)
        return EXIT_CONFIG
    except (ConvergenceError, SmallnessError) as exc:
        _write_error(outdir, EXIT_SOLVER, exc)
        return EXIT_SOLVER
    except Exception as exc:  # noqa: BLE001 - keep the exit-code contract
        _write_error(outdir, EXIT_INTERNAL, exc)
        return EXIT_INTERNAL

    if not result.gate_ok:
        exc = RuntimeError(
            "identity residual above the configured tolerance "
            f"({result.metric:.3e} > {cfg.tolerance * args.tolerance_scale:.3e})"
        )
        _write_error(outdir, EXIT_RESIDUAL, exc)
        return EXIT_RESIDUAL
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
