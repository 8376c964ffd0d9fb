"""
Command-line entry point.

    sqzkit report --out results
    sqzkit infer --config my.cfg --set infer.mc_samples=50000 --seed 7

Exit codes: 0 success, 2 usage, 3 I/O, 4 validation, 5 convergence,
6 other analysis failure.
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .formats import FormatError
from .plots import emit_plots
from .report import (ANALYSES, EXIT_IO, EXIT_USAGE, EXIT_VALIDATION, AnalysisConfig, UsageError,
                     dumps, run_report, section_errors)

HELP = {
    "fit": "fit the noise model to a squeezing/antisqueezing curve",
    "infer": "infer generated squeezing and project application levels",
    "overlap": "spatial and temporal overlap of the interfering fields",
    "modes": "solve the ordinary and extraordinary fundamental modes",
    "pulses": "fit pulse durations from visibility scans",
    "simulate": "write synthetic input files",
    "report": "run every analysis and emit the full report with plots",
}


def default_config_path() -> Path:
    return Path(str(resources.files("sqzkit").joinpath("data/reproduction.cfg")))


def _parse_set(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--set expects section.key=value, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        if "." not in k:
            raise UsageError(f"--set key {k!r} must look like section.key")
        out[k] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="flat section.key = value file (default: bundled reproduction config)")
    common.add_argument("--seed", type=int, default=None, help="random seed (overrides run.seed)")
    common.add_argument("--out", type=Path, default=Path("sqzkit-out"), help="output directory")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config value; may be repeated")
    common.add_argument("--no-plots", action="store_true", help="skip SVG output")
    common.add_argument("--timestamp", default=None, help=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="sqzkit", description=__doc__.split("\n")[1])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="analysis", metavar="ANALYSIS")
    for name in ANALYSES:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.analysis is None:
        parser.print_usage(sys.stderr)
        print("sqzkit: error: no analysis selected", file=sys.stderr)
        return EXIT_USAGE
    try:
        overrides = _parse_set(args.set)
        if args.seed is not None:
            overrides["run.seed"] = str(args.seed)
        cfg = AnalysisConfig.from_file(args.config or default_config_path(), analyses=(args.analysis,),
                                       overrides=overrides, out_dir=args.out)
        result = run_report(cfg, timestamp=args.timestamp)
    except UsageError as e:
        print(f"sqzkit: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, PermissionError, IsADirectoryError) as e:
        print(f"sqzkit: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (FormatError, ValueError) as e:
        print(f"sqzkit: invalid input: {e}", file=sys.stderr)
        return EXIT_VALIDATION

    args.out.mkdir(parents=True, exist_ok=True)
    report_path = args.out / f"{args.analysis}.json"
    report_path.write_text(dumps(result.report), encoding="utf-8")
    print(f"wrote {report_path}")
    if not args.no_plots:
        outcome = emit_plots(result.report, result.artifacts, args.out)
        for path in outcome.written:
            print(f"wrote {path}")
        for note in outcome.notices:
            print(f"note: {note}")
    for where, err in section_errors(result.report):
        print(f"section {where} failed: {err['type']}: {err['message']}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
