"""
Jones model of the waveplate/PBS displacement stage.

Conventions: H/V basis, e^{-i omega t} time dependence, the PBS transmits H.
The LO enters in H and the squeezed field in V.  WP1 is a quarter-wave plate
(linear -> circular), WP2 a half-wave plate (relative phase), WP3 a
quarter-wave plate (back to linear, sets the split).  The detected "bright"
port is the reflected (V) output, which carries ``split`` of the squeezed
field and ``1 - split`` of the LO.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .noise_model import apply_loss

H = np.array([1.0 + 0j, 0.0 + 0j])
V = np.array([0.0 + 0j, 1.0 + 0j])
GRID_STEP = math.radians(0.1)


class UnreachableTargetError(ValueError):
    def __init__(self, message: str, closest=None):
        super().__init__(message)
        self.closest = closest


@dataclass
class JonesState:
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(2)

    @classmethod
    def linear(cls, angle: float, power: float = 1.0) -> "JonesState":
        return cls(math.sqrt(power) * np.array([math.cos(angle), math.sin(angle)], dtype=complex))

    @property
    def power(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def transformed(self, matrix: np.ndarray) -> "JonesState":
        return JonesState(matrix @ self.amplitudes)


@dataclass(frozen=True)
class Waveplate:
    retardance: float
    fast_axis: float

    @classmethod
    def quarter(cls, angle: float) -> "Waveplate":
        return cls(math.pi / 2, angle)

    @classmethod
    def half(cls, angle: float) -> "Waveplate":
        return cls(math.pi, angle)


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


def waveplate_matrix(wp: Waveplate) -> np.ndarray:
    """R(-theta) diag(1, e^{i Gamma}) R(theta)."""
    retard = np.diag([1.0, np.exp(1j * wp.retardance)])
    return rotation(-wp.fast_axis) @ retard @ rotation(wp.fast_axis)


def pbs_split(state: JonesState) -> tuple[JonesState, JonesState]:
    """(transmitted H, reflected V) components."""
    a = state.amplitudes
    return JonesState([a[0], 0.0]), JonesState([0.0, a[1]])


class ChainAngles(NamedTuple):
    wp1: float
    wp2: float
    wp3: float


def chain_matrix(angles: ChainAngles) -> np.ndarray:
    w1 = waveplate_matrix(Waveplate.quarter(angles[0]))
    w2 = waveplate_matrix(Waveplate.half(angles[1]))
    w3 = waveplate_matrix(Waveplate.quarter(angles[2]))
    return w3 @ w2 @ w1


def lo_split(angles: ChainAngles) -> float:
    """Fraction of LO power transmitted by the PBS."""
    U = chain_matrix(angles)
    return float(abs(U[0, 0]) ** 2)


def bright_port_phase(angles: ChainAngles) -> float:
    """Phase of the squeezed-field amplitude relative to the LO at the reflected port, in [0, 2pi)."""
    U = chain_matrix(angles)
    ph = float(np.angle(U[1, 1] * np.conj(U[1, 0]))) % (2 * math.pi)
    # tiny negative angles round up to exactly 2 pi
    return 0.0 if ph >= 2 * math.pi else ph


def _wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


def _scan_refine(f, lo: float, hi: float) -> float:
    """Root of ``f`` nearest to zero on a 0.1 degree grid, refined by Brent's method."""
    grid = np.arange(lo, hi, GRID_STEP)
    vals = np.array([f(t) for t in grid])
    i = int(np.argmin(np.abs(vals)))
    for a, b in ((grid[i] - GRID_STEP, grid[i]), (grid[i], grid[i] + GRID_STEP)):
        fa, fb = f(a), f(b)
        if fa == 0:
            return a
        if fa * fb < 0:
            return brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(grid[i])


def solve_chain_angles(target_split: float, target_phase: float = 0.0,
                       wp1: float = math.pi / 4) -> ChainAngles:
    """Waveplate angles giving the requested LO split and bright-port phase.

    WP1 sits at 45 degrees.  WP3 is found by a 0.1 degree scan of the LO
    transmission followed by Brent refinement; WP2 likewise for the phase.
    WP2 acts on circular states only, so it does not move the split.
    """
    if not 0.0 < target_split < 1.0:
        closest = ChainAngles(wp1, 0.0, math.pi / 4 if target_split >= 1 else 3 * math.pi / 4)
        raise UnreachableTargetError(
            f"split {target_split} is not strictly between 0 and 1", closest)
    th3 = _scan_refine(lambda t: lo_split(ChainAngles(wp1, 0.0, t)) - target_split, 0.0, math.pi)
    th2 = _scan_refine(lambda t: _wrap(bright_port_phase(ChainAngles(wp1, t, th3)) - target_phase),
                       0.0, math.pi / 2)
    angles = ChainAngles(wp1, float(th2), float(th3))
    if abs(lo_split(angles) - target_split) > 1e-6 or \
            abs(_wrap(bright_port_phase(angles) - target_phase)) > 1e-6:
        raise UnreachableTargetError("chain cannot reach the requested split/phase", angles)
    return angles


def displaced_variance(v_sq: float, split: float) -> float:
    """Squeezed-field variance at the bright port, which keeps ``split`` of that field."""
    return apply_loss(v_sq, split)
