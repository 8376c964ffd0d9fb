"""
Pulse durations from interferometric visibility scans, and the temporal
overlap between Gaussian pulses.  Durations are intensity FWHM in ps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT_LN2 = math.sqrt(math.log(2.0))


@dataclass
class VisibilityPoint:
    delay: float  # ps
    visibility: float
    sigma: float


@dataclass
class VisibilityScan:
    points: list[VisibilityPoint]
    label: str = "1064"

    def __post_init__(self):
        for p in self.points:
            if not 0.0 <= p.visibility <= 1.0:
                raise ValueError(f"visibility {p.visibility} outside [0, 1]")
            if not p.sigma > 0:
                raise ValueError("visibility sigma must be positive")

    def __len__(self):
        return len(self.points)

    def arrays(self):
        d = np.array([p.delay for p in self.points], float)
        v = np.array([p.visibility for p in self.points], float)
        s = np.array([p.sigma for p in self.points], float)
        return d, v, s


@dataclass
class PulseFit:
    tau_fwhm: float
    tau_sigma: float
    amplitude: float
    offset: float
    amplitude_sigma: float = 0.0
    offset_sigma: float = 0.0
    chi2_red: float = float("nan")
    iterations: int = 0


def sigma_from_fwhm(tau_fwhm: float) -> float:
    return tau_fwhm / (2.0 * SQRT_LN2)


def visibility_model(delay, tau_fwhm: float, amplitude: float = 1.0, center: float = 0.0):
    """Gaussian fringe visibility amplitude * exp(-(delay - center)^2 / (4 sigma^2)).

    Half maximum falls at |delay - center| = tau_fwhm.
    """
    if not tau_fwhm > 0:
        raise ValueError("tau_fwhm must be positive")
    if math.isinf(tau_fwhm):
        return amplitude * np.ones_like(np.asarray(delay, float))
    s = sigma_from_fwhm(tau_fwhm)
    return amplitude * np.exp(-((np.asarray(delay, float) - center) ** 2) / (4 * s * s))


def _model_and_jac(theta, d):
    tau, amp, c = theta
    e = visibility_model(d, tau, amp, c)
    x = d - c
    # exponent = -ln2 * x^2 / tau^2
    dtau = e * 2 * math.log(2) * x**2 / tau**3
    damp = e / amp if amp != 0 else np.exp(-math.log(2) * x**2 / tau**2)
    dc = e * 2 * math.log(2) * x / tau**2
    return e, np.stack([dtau, damp, dc], axis=1)


def fit_pulse(scan: VisibilityScan) -> PulseFit:
    """Weighted fit of ``visibility_model``; 1-sigma errors from the scaled covariance."""
    from .curve_fit import FitConvergenceError, levenberg_marquardt

    if len(scan) < 6:
        raise ValueError("need at least 6 visibility points")
    d, v, s = scan.arrays()
    w = 1.0 / s
    c0 = float(d[np.argmax(v)])
    a0 = float(np.max(v))
    wts = np.clip(v, 0, None)
    var = float(np.sum(wts * (d - c0) ** 2) / np.sum(wts))
    tau0 = math.sqrt(2 * math.log(2) * var) if var > 0 else float(np.ptp(d)) / 4

    def unpack(u):
        return np.array([math.exp(u[0]), u[1], u[2]])

    def res(u):
        return (visibility_model(d, *unpack(u)) - v) * w

    def jac(u):
        th = unpack(u)
        _, J = _model_and_jac(th, d)
        J = J * w[:, None]
        J[:, 0] *= th[0]
        return J

    lm = levenberg_marquardt(res, jac, [math.log(tau0), a0, c0])
    if not lm.converged:
        raise FitConvergenceError(f"pulse fit did not converge: {lm.message}")
    th = unpack(lm.x)
    r = res(lm.x)
    chi2_red = float(r @ r) / max(len(d) - 3, 1)
    _, J = _model_and_jac(th, d)
    J = J * w[:, None]
    cov = np.linalg.pinv(J.T @ J) * chi2_red
    err = np.sqrt(np.clip(np.diag(cov), 0, None))
    return PulseFit(tau_fwhm=float(th[0]), tau_sigma=float(err[0]), amplitude=float(th[1]),
                    offset=float(th[2]), amplitude_sigma=float(err[1]), offset_sigma=float(err[2]),
                    chi2_red=chi2_red, iterations=lm.iterations)


def temporal_overlap(tau_a: float, tau_b: float) -> float:
    """Intensity-profile overlap 2 ab / (a^2 + b^2) of two Gaussian pulses."""
    if not (tau_a > 0 and tau_b > 0):
        raise ValueError("durations must be positive")
    return 2.0 * tau_a * tau_b / (tau_a**2 + tau_b**2)


def temporal_overlap_sigma(tau_a: float, sig_a: float, tau_b: float, sig_b: float) -> float:
    """First-order uncertainty of :func:`temporal_overlap` for independent durations."""
    s = tau_a**2 + tau_b**2
    da = 2 * tau_b * (tau_b**2 - tau_a**2) / s**2
    db = 2 * tau_a * (tau_a**2 - tau_b**2) / s**2
    return math.hypot(da * sig_a, db * sig_b)


def ideal_pump_ratio(tau_lo: float, tau_pump: float) -> float:
    """Measured pump duration over the ideal second-harmonic duration tau_lo / sqrt(2)."""
    if not (tau_lo > 0 and tau_pump > 0):
        raise ValueError("durations must be positive")
    return tau_pump / (tau_lo / math.sqrt(2.0))
