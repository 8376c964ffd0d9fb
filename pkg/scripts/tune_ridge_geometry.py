"""
Sweep square ridge cross-sections and report the ordinary/extraordinary
fundamental-mode overlap.

The device dimensions are unpublished.  This sweep was run once to pick the
frozen default in src/sqzkit/data/ridge_default.cfg; rerun it to see how the
overlap depends on the assumed size and substrate index.

    python scripts/tune_ridge_geometry.py [--sizes 3 4 5 6] [--substrate 2.1]
"""
from __future__ import annotations

import argparse
import dataclasses
from concurrent.futures import ThreadPoolExecutor

from sqzkit.modes import mode_overlap, solve_fundamental
from sqzkit.report import AnalysisConfig


def overlap_for(base, size: float, n_sub: float, n_o: float, n_e: float) -> tuple[float, float, float]:
    g = dataclasses.replace(base, ridge_width=size, ridge_height=size, substrate_index=n_sub)
    mo = solve_fundamental(dataclasses.replace(g, core_index=n_o))
    me = solve_fundamental(dataclasses.replace(g, core_index=n_e))
    return mo.n_eff, me.n_eff, mode_overlap(mo, me)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    ap.add_argument("--sizes", type=float, nargs="+", default=[3.0, 4.0, 5.0, 6.0, 7.0])
    ap.add_argument("--substrate", type=float, nargs="+", default=[2.0, 2.1])
    ap.add_argument("--grid", type=float, default=None, help="grid step in um (default from config)")
    args = ap.parse_args(argv)

    cfg = AnalysisConfig(("modes",))
    n_o, n_e = cfg.num("modes.n_ordinary"), cfg.num("modes.n_extraordinary")
    base = cfg.geometry(n_o, grid=args.grid)
    jobs = [(s, n) for n in args.substrate for s in args.sizes]
    with ThreadPoolExecutor() as ex:
        rows = list(ex.map(lambda j: overlap_for(base, j[0], j[1], n_o, n_e), jobs))
    print(f"{'size_um':>8s} {'n_sub':>6s} {'n_eff_o':>10s} {'n_eff_e':>10s} {'overlap':>9s}")
    for (s, n), (a, b, ov) in zip(jobs, rows):
        mark = "  <- default" if (s == cfg.num("modes.ridge_width_um")
                                  and n == cfg.num("modes.substrate_index")) else ""
        print(f"{s:8.2f} {n:6.3f} {a:10.6f} {b:10.6f} {ov:9.5f}{mark}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
