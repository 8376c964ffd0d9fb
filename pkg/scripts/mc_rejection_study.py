"""
How often the Monte-Carlo loss correction of the homodyne level falls below
the loss floor, as a function of the phase-noise and efficiency spreads.

With the published spreads (efficiency 0.02, phase noise 0.030 rad) most
draws of the phase noise put the floor above the measured level, so the
propagation refuses to report a percentile interval.  This script maps the
acceptance fraction and, where enough samples survive, the interval.

    python scripts/mc_rejection_study.py [--samples 20000] [--seed 1234]
"""
from __future__ import annotations

import argparse

import numpy as np

from sqzkit.curve_fit import FitResult, PropagationError, propagate_waveguide_squeezing
from sqzkit.noise_model import NoiseParams, electronic_noise_from_clearance, subtract_electronic_noise


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=1234)
    ap.add_argument("--v-sigma", type=float, default=0.05, help="measured-level sigma in dB")
    args = ap.parse_args(argv)

    params = NoiseParams(0.61, 0.012, 12.4, electronic_noise_from_clearance(13.2))
    v_meas = subtract_electronic_noise(-3.61, 13.2)
    print(f"measured level after electronic-noise subtraction: {v_meas:.4f} dB")
    print(f"{'sig_delta':>9s} {'sig_eta':>8s} {'accepted':>9s} {'central':>9s} {'+err':>7s} {'-err':>7s}")
    for sd in (0.0, 0.005, 0.010, 0.020, 0.030):
        for se in (0.01, 0.02):
            fit = FitResult.from_reported(params, {"eta_total": se, "delta": sd, "alpha": 0.1})
            try:
                r = propagate_waveguide_squeezing(fit, v_meas, args.v_sigma, n=args.samples,
                                                  seed=args.seed, max_reject_fraction=1.0)
            except PropagationError as e:
                print(f"{sd:9.3f} {se:8.3f} {1 - e.n_rejected / e.n_samples:9.1%}   (no surviving samples)")
                continue
            acc = 1 - r.n_rejected / r.n_samples
            print(f"{sd:9.3f} {se:8.3f} {acc:9.1%} {r.central_db:9.2f} {r.upper_err_db:7.2f} "
                  f"{r.lower_err_db:7.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
