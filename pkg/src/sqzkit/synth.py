"""
Seeded synthetic data: squeezing-vs-power curves, spectrum-analyzer traces
and visibility scans.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .curve_fit import CurvePoint, MeasuredCurve
from .noise_model import ANTISQUEEZED, SQUEEZED, NoiseParams, eq1_variance, lin_to_db
from .pulses import VisibilityPoint, VisibilityScan, visibility_model

TRACE_LABELS = ("squeezed", "antisqueezed", "shot", "electronic")


@dataclass
class SpectrumTrace:
    freqs: np.ndarray  # Hz
    levels: np.ndarray  # dB relative to shot noise
    label: str
    rbw: float
    seed: int

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.levels = np.asarray(self.levels, dtype=float)
        if self.freqs.shape != self.levels.shape:
            raise ValueError("freqs and levels differ in length")
        if np.any(np.diff(self.freqs) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if not np.all(np.isfinite(self.levels)):
            raise ValueError("levels must be finite")


def gen_curve(params: NoiseParams, powers: Sequence[float], sigma_db: float, seed: int = 0,
              nominal_sigma_db: float = 0.05, sideband_hz: Optional[float] = 20e6,
              rbw_hz: Optional[float] = None) -> MeasuredCurve:
    """Model levels at ``powers`` (W) plus Gaussian dB noise of width ``sigma_db``.

    The curve records ``sigma_db`` as its per-point uncertainty, or
    ``nominal_sigma_db`` when generating noiseless data.
    """
    P = np.asarray(powers, dtype=float)
    rng = np.random.default_rng(seed)
    vm = lin_to_db(np.atleast_1d(eq1_variance(P, params, SQUEEZED)))
    vp = lin_to_db(np.atleast_1d(eq1_variance(P, params, ANTISQUEEZED)))
    if sigma_db > 0:
        noise = rng.normal(0.0, sigma_db, size=(2, P.size))
        vm = vm + noise[0]
        vp = vp + noise[1]
    s = sigma_db if sigma_db > 0 else nominal_sigma_db
    pts = [CurvePoint(float(p), float(a), float(b), s, s) for p, a, b in zip(P, vm, vp)]
    return MeasuredCurve(pts, sideband_hz=sideband_hz, rbw_hz=rbw_hz)


def gen_spectrum(levels: Mapping[str, float], band: tuple[float, float], n_points: int = 401,
                 trace_noise_db: float = 0.0, seed: int = 0, rbw: float = 100e3
                 ) -> list[SpectrumTrace]:
    """Flat traces across ``band`` (Hz), one per label, with Gaussian jitter in dB.

    Labels are drawn in the order given; each draws from its own child of
    the seed so adding a label leaves the others unchanged.
    """
    f0, f1 = band
    if not f1 > f0:
        raise ValueError("band width must be positive")
    freqs = np.linspace(f0, f1, n_points)
    children = np.random.SeedSequence(seed).spawn(len(TRACE_LABELS))
    streams = dict(zip(TRACE_LABELS, children))
    out = []
    for label, level in levels.items():
        if label not in streams:
            raise ValueError(f"unknown trace label {label!r}")
        rng = np.random.default_rng(streams[label])
        jitter = rng.normal(0.0, trace_noise_db, n_points) if trace_noise_db > 0 else 0.0
        out.append(SpectrumTrace(freqs, np.full(n_points, float(level)) + jitter, label, rbw, seed))
    return out


def band_average_db(trace: SpectrumTrace, band: Optional[tuple[float, float]] = None) -> float:
    """Mean level in dB over ``band`` (whole trace by default)."""
    m = np.ones(trace.freqs.shape, bool)
    if band is not None:
        m = (trace.freqs >= band[0]) & (trace.freqs <= band[1])
    if not m.any():
        raise ValueError("band selects no points")
    return float(np.mean(trace.levels[m]))


def gen_visibility_scan(tau_fwhm: float, delays: Sequence[float], sigma: float, seed: int = 0,
                        amplitude: float = 1.0, center: float = 0.0, label: str = "1064",
                        nominal_sigma: float = 0.01) -> VisibilityScan:
    d = np.asarray(delays, dtype=float)
    v = visibility_model(d, tau_fwhm, amplitude, center)
    if sigma > 0:
        v = v + np.random.default_rng(seed).normal(0.0, sigma, d.size)
    v = np.clip(v, 0.0, 1.0)
    s = sigma if sigma > 0 else nominal_sigma
    return VisibilityScan([VisibilityPoint(float(a), float(b), s) for a, b in zip(d, v)], label)
