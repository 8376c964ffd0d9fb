"""
Scalar finite-difference eigenmode solver for rectangular ridge waveguides.

Transverse fields live on a cell-centred grid; every material boundary sits on
a cell edge, so all dimensions must be integer multiples of the grid spacing.
Lengths are in micrometres.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu


class NoGuidedModeError(ValueError):
    """Raised when the fundamental eigenpair is not bound by the core."""


class ModeConvergenceError(RuntimeError):
    def __init__(self, message: str, trace: list[float]):
        super().__init__(message)
        self.trace = trace


class GridMismatchError(ValueError):
    pass


def _cells(length: float, step: float, what: str) -> int:
    n = length / step
    if abs(n - round(n)) > 1e-6:
        raise ValueError(f"{what}={length} is not a multiple of the grid step {step}")
    return int(round(n))


class IndexStructure(Protocol):
    wavelength: float
    dx: float
    dy: float

    def index_map(self) -> np.ndarray: ...

    @property
    def core_index(self) -> float: ...

    @property
    def cladding_index(self) -> float: ...


@dataclass(frozen=True)
class WaveguideGeometry:
    """Ridge of core material on a slab of core material, over a substrate.

    Everything above the slab and beside the ridge is cover.  ``pad_x`` is the
    lateral cover on each side of the ridge, ``pad_top`` the cover above it and
    ``pad_bottom`` the substrate depth kept inside the computational window.
    """

    ridge_width: float
    ridge_height: float
    slab_height: float
    core_index: float
    substrate_index: float
    cover_index: float = 1.0
    wavelength: float = 1.064
    dx: float = 0.1
    dy: float = 0.1
    pad_x: float = 4.0
    pad_top: float = 3.0
    pad_bottom: float = 3.0
    # integer-cell lateral offset of the ridge (shifts cover from right to left)
    shift_cells: int = 0

    def __post_init__(self):
        for name in ("ridge_width", "ridge_height", "wavelength", "dx", "dy"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.slab_height < 0:
            raise ValueError("slab_height must be non-negative")
        if self.core_index <= max(self.substrate_index, self.cover_index):
            # uniform or anti-guiding structures are still solvable; the
            # solver reports the missing guided mode
            pass
        for name, step in (("pad_x", self.dx), ("pad_top", self.dy), ("pad_bottom", self.dy)):
            pad = getattr(self, name)
            if pad / step < 5 - 1e-9:
                raise ValueError(f"{name} must span at least 5 cells")
        self.shape  # validates commensurability
        if abs(self.shift_cells) > _cells(self.pad_x, self.dx, "pad_x") - 5:
            raise ValueError("shift leaves fewer than 5 padding cells")

    @property
    def cladding_index(self) -> float:
        return max(self.substrate_index, self.cover_index)

    @property
    def shape(self) -> tuple[int, int]:
        """(ny, nx) of the computational grid."""
        nx = 2 * _cells(self.pad_x, self.dx, "pad_x") + _cells(self.ridge_width, self.dx, "ridge_width")
        ny = (
            _cells(self.pad_bottom, self.dy, "pad_bottom")
            + _cells(self.slab_height, self.dy, "slab_height")
            + _cells(self.ridge_height, self.dy, "ridge_height")
            + _cells(self.pad_top, self.dy, "pad_top")
        )
        return ny, nx

    def ridge_cells(self) -> tuple[slice, slice]:
        """(rows, cols) index ranges of the ridge on the grid."""
        px = _cells(self.pad_x, self.dx, "pad_x") + self.shift_cells
        wx = _cells(self.ridge_width, self.dx, "ridge_width")
        y0 = _cells(self.pad_bottom, self.dy, "pad_bottom") + _cells(self.slab_height, self.dy, "slab_height")
        hy = _cells(self.ridge_height, self.dy, "ridge_height")
        return slice(y0, y0 + hy), slice(px, px + wx)

    def index_map(self) -> np.ndarray:
        ny, nx = self.shape
        n = np.full((ny, nx), self.cover_index, dtype=float)
        sub = _cells(self.pad_bottom, self.dy, "pad_bottom")
        slab = _cells(self.slab_height, self.dy, "slab_height")
        n[:sub, :] = self.substrate_index
        n[sub:sub + slab, :] = self.core_index
        rows, cols = self.ridge_cells()
        n[rows, cols] = self.core_index
        return n

    def refined(self, factor: int) -> "WaveguideGeometry":
        return dataclasses.replace(self, dx=self.dx / factor, dy=self.dy / factor,
                                   shift_cells=self.shift_cells * factor)


@dataclass(frozen=True)
class SlabGeometry:
    """Symmetric slab, uniform along x; the x window is wide and coarse.

    Used as the analytic benchmark: the x dependence separates exactly, so the
    2D eigenvalue is the 1D slab eigenvalue plus the lowest discrete Dirichlet
    eigenvalue along x.
    """

    thickness: float
    core_index: float
    clad_index: float
    wavelength: float = 1.064
    dy: float = 0.05
    pad: float = 4.0
    width: float = 1000.0
    nx: int = 1

    @property
    def dx(self) -> float:
        return self.width / self.nx

    @property
    def cladding_index(self) -> float:
        return self.clad_index

    @property
    def shape(self) -> tuple[int, int]:
        ny = 2 * _cells(self.pad, self.dy, "pad") + _cells(self.thickness, self.dy, "thickness")
        return ny, self.nx

    def index_map(self) -> np.ndarray:
        ny, nx = self.shape
        p = _cells(self.pad, self.dy, "pad")
        n = np.full((ny, nx), self.clad_index)
        n[p:ny - p, :] = self.core_index
        return n

    def x_eigenvalue(self) -> float:
        """Lowest eigenvalue of the discrete 1D Dirichlet Laplacian along x (negative)."""
        return -(4.0 / self.dx**2) * math.sin(math.pi / (2 * (self.nx + 1))) ** 2

    def refined(self, factor: int) -> "SlabGeometry":
        return dataclasses.replace(self, dy=self.dy / factor)


@dataclass
class ScalarMode:
    field: np.ndarray
    n_eff: float
    residual: float
    dx: float
    dy: float
    wavelength: float
    iterations: int = 0

    @property
    def intensity(self) -> np.ndarray:
        return self.field**2


def helmholtz_operator(n: np.ndarray, dx: float, dy: float, wavelength: float) -> sparse.csr_matrix:
    """5-point scalar Helmholtz operator d2/dx2 + d2/dy2 + k0^2 n^2 with zero Dirichlet walls."""
    ny, nx = n.shape
    k0 = 2 * np.pi / wavelength

    def lap1d(m, h):
        return sparse.diags([np.ones(m - 1), -2 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) / h**2

    # row-major flattening: index = iy * nx + ix
    lap = sparse.kron(sparse.identity(ny), lap1d(nx, dx)) + sparse.kron(lap1d(ny, dy), sparse.identity(nx))
    return (lap + sparse.diags((k0 * n).ravel() ** 2)).tocsr()


def _start_vector(n: np.ndarray, core_index: float) -> np.ndarray:
    ny, nx = n.shape
    rows, cols = np.nonzero(np.isclose(n, core_index))
    if rows.size == 0:
        cy, cx, sy, sx = ny / 2, nx / 2, ny / 6, nx / 6
    else:
        cy, cx = rows.mean(), cols.mean()
        sy = max(np.ptp(rows) / 2, 1.0)
        sx = max(np.ptp(cols) / 2, 1.0)
    yy, xx = np.mgrid[0:ny, 0:nx]
    v = np.exp(-((yy - cy) / sy) ** 2 - ((xx - cx) / sx) ** 2)
    return v.ravel() / np.linalg.norm(v)


def solve_fundamental(geom: IndexStructure, tol: float = 1e-10, max_iter: int = 5000) -> ScalarMode:
    """Fundamental mode by shift-inverted power iteration.

    The shift is k0^2 n_core^2, which upper-bounds the spectrum, so the
    iteration converges to the largest beta^2.  ``tol`` is relative to the
    infinity norm of the operator.
    """
    n = geom.index_map()
    k0 = 2 * np.pi / geom.wavelength
    A = helmholtz_operator(n, geom.dx, geom.dy, geom.wavelength)
    scale = abs(A).sum(axis=1).max()
    sigma = (k0 * geom.core_index) ** 2
    lu = splu((A - sigma * sparse.identity(A.shape[0], format="csr")).tocsc())

    v = _start_vector(n, geom.core_index)
    trace = []
    lam = float(v @ (A @ v))
    for it in range(1, max_iter + 1):
        v = lu.solve(v)
        v /= np.linalg.norm(v)
        Av = A @ v
        lam = float(v @ Av)
        res = float(np.linalg.norm(Av - lam * v))
        trace.append(res / scale)
        if res <= tol * scale:
            break
    else:
        raise ModeConvergenceError(f"no convergence after {max_iter} iterations", trace)

    n_eff = math.sqrt(lam) / k0 if lam > 0 else 0.0
    if isinstance(geom, SlabGeometry):
        bound = geom.clad_index**2 + geom.x_eigenvalue() / k0**2
        guided = lam / k0**2 > bound
    else:
        guided = n_eff > geom.cladding_index
    if not guided:
        raise NoGuidedModeError(
            f"n_eff={n_eff:.6f} does not exceed the cladding index {geom.cladding_index}")

    field = v.reshape(n.shape)
    if field.flat[np.argmax(np.abs(field))] < 0:
        field = -field
    return ScalarMode(field=field, n_eff=n_eff, residual=res, dx=geom.dx, dy=geom.dy,
                      wavelength=geom.wavelength, iterations=it)


def mode_overlap(a: ScalarMode, b: ScalarMode) -> float:
    """Normalized modal overlap (sum f_a f_b)^2 / (sum f_a^2 sum f_b^2)."""
    if a.field.shape != b.field.shape or not (
            math.isclose(a.dx, b.dx) and math.isclose(a.dy, b.dy)):
        raise GridMismatchError("modes are defined on different grids")
    num = float(np.sum(a.field * b.field)) ** 2
    return num / float(np.sum(a.field**2) * np.sum(b.field**2))


def slab_effective_index(thickness: float, n_core: float, n_clad: float, wavelength: float,
                         tol: float = 1e-14) -> float:
    """Fundamental even TE mode of a symmetric slab, by bisection on the dispersion relation."""
    k0 = 2 * np.pi / wavelength

    def f(neff):
        kappa = k0 * math.sqrt(n_core**2 - neff**2)
        gamma = k0 * math.sqrt(neff**2 - n_clad**2)
        return kappa * math.tan(kappa * thickness / 2) - gamma

    # first branch: kappa*d/2 in (0, pi/2)
    lo = max(n_clad, math.sqrt(max(n_core**2 - (math.pi / (thickness * k0)) ** 2, 0.0))) + 1e-15
    hi = n_core - 1e-15
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise NoGuidedModeError("no sign change for the fundamental slab mode")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (fhi > 0):
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def slab_oracle_2d(geom: SlabGeometry) -> float:
    """Effective index the 2D discretization should reach for a slab as h -> 0."""
    n1 = slab_effective_index(geom.thickness, geom.core_index, geom.clad_index, geom.wavelength)
    k0 = 2 * np.pi / geom.wavelength
    return math.sqrt(n1**2 + geom.x_eigenvalue() / k0**2)


@dataclass
class ConvergenceRow:
    h: float
    n_eff: tuple[float, ...]
    overlap: float


def observed_order(values: Sequence[float]) -> float:
    """Richardson order estimate from three values at h, h/2, h/4."""
    a, b, c = values[-3:]
    return math.log2(abs(a - b) / abs(b - c))


def convergence_study(geoms: Sequence[IndexStructure], levels: Sequence[int] = (1, 2, 4)
                      ) -> list[ConvergenceRow]:
    """Solve every geometry at each refinement factor.

    With two geometries (e.g. ordinary and extraordinary core index) the
    overlap column holds their modal overlap; with one it is the self-overlap.
    """
    if len(levels) < 3:
        raise ValueError("need at least three refinement levels")
    rows = []
    for f in levels:
        modes = [solve_fundamental(g.refined(f)) for g in geoms]
        ov = mode_overlap(modes[0], modes[-1])
        h = geoms[0].refined(f).dy
        rows.append(ConvergenceRow(h=h, n_eff=tuple(m.n_eff for m in modes), overlap=ov))
    for k in range(len(geoms)):
        d = np.diff([r.n_eff[k] for r in rows])
        if len(d) > 1 and not np.all(np.abs(d[1:]) < np.abs(d[:-1])):
            warnings.warn("n_eff refinement sequence is not monotonically converging")
    return rows
