"""
Quadrature-variance model for a lossy, phase-noisy squeezer.

Variances are linear and normalized to shot noise (= 1).  Decibels appear only
at the boundaries (``db_to_lin`` / ``lin_to_db``).  The squeezing parameter is
``r = alpha * sqrt(P)`` with ``P`` in watts and ``alpha`` in W^-1/2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

SQUEEZED = "squeezed"
ANTISQUEEZED = "antisqueezed"


class LossFloorError(ValueError):
    """The measured variance lies below the loss-limited floor for (eta, delta)."""

    def __init__(self, v_min: float, eta: float, delta: float):
        self.v_min = v_min
        super().__init__(
            f"below loss floor: minimum reachable variance for eta={eta:.4g}, "
            f"delta={delta:.4g} rad is {v_min:.6g} ({lin_to_db(v_min):.3f} dB)")


class NoiseFloorError(ValueError):
    """Signal at or below the electronic-noise floor."""


class EmptyBudgetWarning(UserWarning):
    pass


def db_to_lin(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("decibel value must be finite")
    out = 10.0 ** (x / 10.0)
    return float(out) if out.ndim == 0 else out


def lin_to_db(v):
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise ValueError("linear ratio must be finite and positive")
    out = 10.0 * np.log10(v)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NoiseParams:
    eta_total: float
    delta: float
    alpha: float
    electronic_noise: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta_total <= 1.0:
            raise ValueError(f"eta_total must lie in (0, 1], got {self.eta_total}")
        if not 0.0 <= self.delta < math.pi / 2:
            raise ValueError(f"delta must lie in [0, pi/2), got {self.delta}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.electronic_noise < 0:
            raise ValueError("electronic_noise must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([self.eta_total, self.delta, self.alpha, self.electronic_noise])


@dataclass(frozen=True)
class QuadraturePair:
    v_minus: float
    v_plus: float


@dataclass
class LossBudget:
    """Ordered chain of named efficiencies."""

    entries: list[tuple[str, float]] = field(default_factory=list)

    def __post_init__(self):
        self.entries = [(str(k), float(v)) for k, v in self.entries]
        labels = [k for k, _ in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate loss-budget labels")
        for k, v in self.entries:
            if not 0.0 < v <= 1.0:
                raise ValueError(f"efficiency {k}={v} outside (0, 1]")

    @classmethod
    def from_mapping(cls, mapping) -> "LossBudget":
        return cls(list(mapping.items()))

    @property
    def labels(self) -> list[str]:
        return [k for k, _ in self.entries]

    def __getitem__(self, label: str) -> float:
        for k, v in self.entries:
            if k == label:
                return v
        raise KeyError(f"unknown loss-budget label {label!r}")

    def subset(self, labels: Iterable[str]) -> "LossBudget":
        return LossBudget([(k, self[k]) for k in labels])

    def total(self) -> float:
        return compose(self)


def eq1_variance(P, params: NoiseParams, sign: str = SQUEEZED):
    """Variance of the squeezed or antisqueezed quadrature at pump power ``P`` (W)."""
    P = np.asarray(P, dtype=float)
    if np.any(P < 0) or not np.all(np.isfinite(P)):
        raise ValueError("pump power must be finite and non-negative")
    if sign == SQUEEZED:
        s = -1.0
    elif sign == ANTISQUEEZED:
        s = 1.0
    else:
        raise ValueError(f"sign must be {SQUEEZED!r} or {ANTISQUEEZED!r}")
    r = params.alpha * np.sqrt(P)
    c2 = math.cos(params.delta) ** 2
    s2 = math.sin(params.delta) ** 2
    eta = params.eta_total
    v = eta * (np.exp(2 * s * r) * c2 + np.exp(-2 * s * r) * s2) + (1.0 - eta) + params.electronic_noise
    return float(v) if v.ndim == 0 else v


def quadratures(P: float, params: NoiseParams) -> QuadraturePair:
    return QuadraturePair(eq1_variance(P, params, SQUEEZED), eq1_variance(P, params, ANTISQUEEZED))


def generated_squeezing_db(alpha: float, P: float) -> float:
    """Squeezing produced inside the squeezer, 10 log10 exp(-2 alpha sqrt(P))."""
    return -20.0 * alpha * math.sqrt(P) / math.log(10.0)


def _check_eta(eta):
    if not np.all((np.asarray(eta) > 0) & (np.asarray(eta) <= 1)):
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")


def apply_loss(v, eta):
    """Beam-splitter loss: keep fraction ``eta`` of the state, admit vacuum for the rest."""
    _check_eta(eta)
    if np.any(np.asarray(v) <= 0):
        raise ValueError("variance must be positive")
    # same as eta v + 1 - eta, but exact at v = 1 and at eta = 1
    return v + (1.0 - eta) * (1.0 - v)


def compose(budget: LossBudget) -> float:
    """Total efficiency of a loss chain; an empty chain is lossless (and warns)."""
    if not budget.entries:
        warnings.warn("empty loss budget; total efficiency is 1", EmptyBudgetWarning, stacklevel=2)
        return 1.0
    return float(np.prod([v for _, v in budget.entries]))


def electronic_noise_from_clearance(clearance_db: float) -> float:
    if not clearance_db > 0:
        raise ValueError("electronic-noise clearance must be positive")
    return db_to_lin(-clearance_db)


def subtract_electronic_noise(v_meas_db: float, en_clearance_db: float) -> float:
    """Remove the detector noise floor from a shot-noise-relative level.

    Both the signal and the shot-noise reference carry the same electronic
    noise, so the corrected ratio is (v - EN) / (1 - EN).
    """
    if math.isinf(en_clearance_db) and en_clearance_db > 0:
        return float(v_meas_db)
    en = electronic_noise_from_clearance(en_clearance_db)
    v = db_to_lin(v_meas_db)
    if v <= en:
        raise NoiseFloorError(
            f"signal {v_meas_db} dB is not above the electronic noise floor {-en_clearance_db} dB")
    return lin_to_db((v - en) / (1.0 - en))


def loss_floor(eta: float, delta: float) -> float:
    """Minimum reachable variance η·sin(2δ) + 1 − η over all squeezing strengths."""
    return eta * math.sin(2 * delta) + 1.0 - eta


def squeezing_roots(v_meas: float, eta: float, delta: float) -> tuple[float, ...]:
    """Positive solutions x = exp(-2r) of η[x cos²δ + sin²δ / x] + 1 − η = v_meas.

    Returned in descending order (least squeezed first).  For δ = 0 there is
    a single root.
    """
    _check_eta(eta)
    y = (v_meas - 1.0 + eta) / eta
    c2 = math.cos(delta) ** 2
    s2 = math.sin(delta) ** 2
    if s2 == 0.0:
        if y <= 0:
            raise LossFloorError(1.0 - eta, eta, delta)
        return (y / c2,)
    disc = y * y - 4.0 * c2 * s2
    if y <= 0 or disc < 0:
        raise LossFloorError(loss_floor(eta, delta), eta, delta)
    # stable pairing: large root directly, small one from the product c2*x1*x2 = s2
    x1 = (y + math.sqrt(disc)) / (2.0 * c2)
    x2 = s2 / (c2 * x1)
    return (x1, x2)


def infer_generated_squeezing(v_meas_db: float, eta: float, delta: float,
                              v_plus_db: Optional[float] = None) -> float:
    """Invert the loss + phase-noise model for the generated squeezing, in dB.

    ``v_meas_db`` must already be corrected for electronic noise.  With phase
    noise there are two admissible roots.  If the matching antisqueezing level
    ``v_plus_db`` is given, the root whose forward-modelled antisqueezing is
    closest to it (in dB) is returned; otherwise the larger root, i.e. the
    smaller (conservative) squeezing.
    """
    roots = squeezing_roots(db_to_lin(v_meas_db), eta, delta)
    x = roots[0]
    if v_plus_db is not None and len(roots) > 1:
        c2 = math.cos(delta) ** 2
        s2 = math.sin(delta) ** 2

        def anti_db(xr):
            return lin_to_db(eta * (c2 / xr + s2 * xr) + 1.0 - eta)

        x = min(roots, key=lambda xr: abs(anti_db(xr) - v_plus_db))
    return lin_to_db(x)
