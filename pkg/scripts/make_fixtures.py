"""
Regenerate the bundled input files under src/sqzkit/data.

These are synthetic reconstructions, not digitized measurements: each file is
drawn from the forward models at the published parameter values, with noise
levels chosen so that a fit recovers roughly the published uncertainties
(Cramer-Rao bound of the fitted parameter).

    python scripts/make_fixtures.py [--check]
"""
from __future__ import annotations

import argparse
import math
import sys
import tempfile
from pathlib import Path

import numpy as np

from sqzkit.curve_fit import jacobian
from sqzkit.formats import file_digest, write_curve, write_spectra, write_visibility
from sqzkit.noise_model import (ANTISQUEEZED, NoiseParams, apply_loss, db_to_lin, eq1_variance,
                                electronic_noise_from_clearance, lin_to_db)
from sqzkit.pulses import _model_and_jac
from sqzkit.synth import gen_curve, gen_spectrum, gen_visibility_scan

DATA = Path(__file__).resolve().parents[1] / "src" / "sqzkit" / "data"
SEED = 20240601
NOTE = "synthetic reconstruction from published parameters; not a measurement"

PARAMS = NoiseParams(0.61, 0.012, 12.4, electronic_noise_from_clearance(13.2))
POWERS_MW = np.array([2.5, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 40.0])
DELAYS_PS = np.linspace(-15.0, 15.0, 31)
TARGETS = {"eta": 0.02, "tau_lo": 0.07, "tau_pump": 0.15}


def curve_sigma_db(target_eta_sigma: float) -> float:
    """dB noise per point whose CRB on eta (EN fixed) equals the target."""
    J = jacobian(PARAMS, POWERS_MW * 1e-3)[:, :3]
    unit = math.sqrt(np.linalg.inv(J.T @ J)[0, 0])
    return target_eta_sigma / unit


def visibility_sigma(tau: float, target: float) -> float:
    _, J = _model_and_jac(np.array([tau, 1.0, 0.0]), DELAYS_PS)
    unit = math.sqrt(np.linalg.inv(J.T @ J)[0, 0])
    return target / unit


def write_all(out: Path) -> dict[str, str]:
    out.mkdir(parents=True, exist_ok=True)
    s_db = curve_sigma_db(TARGETS["eta"])
    curve = gen_curve(PARAMS, POWERS_MW * 1e-3, s_db, SEED, sideband_hz=20e6, rbw_hz=100e3)
    write_curve(curve, out / "curve_homodyne.csv",
                [NOTE, f"per-point noise {s_db:.4f} dB targets a 0.02 efficiency uncertainty"])

    band = (19e6, 21e6)
    hom = gen_spectrum({"squeezed": -3.61, "antisqueezed": 13.54, "shot": 0.0, "electronic": -13.2},
                       band, 401, 0.3, SEED)
    write_spectra(hom, out / "spectra_homodyne.csv", [NOTE, "homodyne detection at 20 mW pump"])

    # direct detection at 40 mW: antisqueezing from the model behind a further 0.9 efficiency
    anti = apply_loss(eq1_variance(0.040, PARAMS, ANTISQUEEZED), 0.9)
    en = electronic_noise_from_clearance(15.3)
    anti_meas = lin_to_db(anti * (1 - en) + en)
    direct = gen_spectrum({"squeezed": -3.2, "antisqueezed": float(anti_meas), "shot": 0.0,
                           "electronic": -15.3}, band, 401, 0.3, SEED + 1)
    write_spectra(direct, out / "spectra_direct.csv", [NOTE, "direct detection at 40 mW pump, 3.2 mW"])

    for name, tau, label, key in (("lo", 6.4, "1064", "tau_lo"), ("pump", 5.17, "532", "tau_pump")):
        sig = visibility_sigma(tau, TARGETS[key])
        scan = gen_visibility_scan(tau, DELAYS_PS, sig, SEED + 2 + (name == "pump"), label=label)
        write_visibility(scan, out / f"visibility_{name}.csv",
                         [NOTE, f"per-point noise {sig:.4f} targets a {TARGETS[key]} ps uncertainty"])
    return {p.name: file_digest(p) for p in sorted(out.glob("*.csv"))}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    ap.add_argument("--check", action="store_true", help="verify the bundled files are up to date")
    args = ap.parse_args(argv)
    if args.check:
        with tempfile.TemporaryDirectory() as tmp:
            fresh = write_all(Path(tmp))
        stale = [k for k, v in fresh.items() if not (DATA / k).is_file() or file_digest(DATA / k) != v]
        for k in stale:
            print(f"stale: {k}")
        return 1 if stale else 0
    for name, digest in write_all(DATA).items():
        print(f"{digest[:12]}  {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
