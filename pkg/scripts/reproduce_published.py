"""
Run the bundled reproduction config and print the headline numbers next to
the published values.

    python scripts/reproduce_published.py [--out DIR] [--golden tests/golden/report_headline.json]

``--golden`` rewrites the golden headline file used by the test suite.  Only
do that together with a schema version bump or a deliberate fixture change.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from sqzkit.cli import default_config_path
from sqzkit.plots import emit_plots
from sqzkit.report import AnalysisConfig, dumps, headline, run_report, section_errors

PUBLISHED = {
    "fit.eta_total": 0.61,
    "fit.delta_rad": 0.012,
    "fit.alpha_per_sqrt_w": 12.4,
    "electronic_noise.homodyne_db": -3.9,
    "electronic_noise.direct_db": -3.35,
    "electronic_noise.direct_predicted_db": -3.3,
    "loss_budget.homodyne_total": 0.61,
    "infer.generated_db": -15.4,
    "projections.srs_db": -6.2,
    "projections.on_chip_db": -8.1,
    "modes.spatial_overlap": 0.997,
    "pulses.tau_lo_ps": 6.4,
    "pulses.tau_pump_ps": 5.17,
    "pulses.temporal_overlap": 0.977,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    ap.add_argument("--out", type=Path, default=Path("reproduction-out"))
    ap.add_argument("--golden", type=Path, default=None, help="write the headline numbers here")
    ap.add_argument("--no-plots", action="store_true")
    args = ap.parse_args(argv)

    cfg = AnalysisConfig.from_file(default_config_path(), analyses=("report",), out_dir=args.out)
    res = run_report(cfg, timestamp="fixed")
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.json").write_text(dumps(res.report), encoding="utf-8")
    if not args.no_plots:
        emit_plots(res.report, res.artifacts, args.out)

    head = headline(res.report)
    print(f"{'quantity':40s} {'computed':>12s} {'published':>10s}")
    for key, pub in PUBLISHED.items():
        got = head[key]
        shown = "n/a" if got is None else f"{got:.4f}"
        print(f"{key:40s} {shown:>12s} {pub:>10}")
    for where, err in section_errors(res.report):
        print(f"note: {where}: {err['type']}: {err['message']}")
    if args.golden:
        args.golden.write_text(json.dumps(head, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {args.golden}")
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
