"""
Joint dB-space fit of squeezing/antisqueezing curves and Monte-Carlo
propagation to the loss-corrected generated squeezing.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .noise_model import (
    LossBudget,
    LossFloorError,
    NoiseParams,
    apply_loss,
    compose,
    db_to_lin,
    generated_squeezing_db,
    infer_generated_squeezing,
    lin_to_db,
)

LN10 = math.log(10.0)
PARAM_NAMES = ("eta_total", "delta", "alpha", "electronic_noise")


class FitConvergenceError(RuntimeError):
    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class PropagationError(RuntimeError):
    def __init__(self, message: str, n_samples: int, n_rejected: int):
        super().__init__(message)
        self.n_samples = n_samples
        self.n_rejected = n_rejected


@dataclass
class CurvePoint:
    pump_power: float  # W
    v_minus_db: float
    v_plus_db: float
    sigma_minus_db: float
    sigma_plus_db: float


@dataclass
class MeasuredCurve:
    points: list[CurvePoint]
    sideband_hz: Optional[float] = None
    rbw_hz: Optional[float] = None

    def __post_init__(self):
        p = self.pump_powers
        if len(p) and p[0] < 0:
            raise ValueError("pump powers must be non-negative")
        if np.any(np.diff(p) <= 0):
            raise ValueError("pump powers must be strictly increasing")
        for pt in self.points:
            if not (pt.sigma_minus_db > 0 and pt.sigma_plus_db > 0):
                raise ValueError("per-point sigmas must be positive")
            if not all(math.isfinite(v) for v in (pt.v_minus_db, pt.v_plus_db)):
                raise ValueError("levels must be finite")

    def __len__(self):
        return len(self.points)

    @property
    def pump_powers(self) -> np.ndarray:
        return np.array([pt.pump_power for pt in self.points], dtype=float)

    @property
    def levels_db(self) -> np.ndarray:
        """Stacked data vector: all squeezed levels, then all antisqueezed."""
        return np.concatenate([[pt.v_minus_db for pt in self.points],
                               [pt.v_plus_db for pt in self.points]])

    @property
    def sigmas_db(self) -> np.ndarray:
        return np.concatenate([[pt.sigma_minus_db for pt in self.points],
                               [pt.sigma_plus_db for pt in self.points]])


@dataclass
class FitResult:
    params: NoiseParams
    covariance: np.ndarray
    residual_norm: float
    per_point_residuals: np.ndarray
    free: tuple[str, ...] = PARAM_NAMES[:3]
    chi2_red: float = float("nan")
    iterations: int = 0
    converged: bool = True
    degenerate: bool = False
    cost_history: list[float] = field(default_factory=list)

    @property
    def stderr(self) -> dict[str, float]:
        """1-sigma uncertainties of the free parameters (0 for fixed ones)."""
        out = dict.fromkeys(PARAM_NAMES, 0.0)
        d = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        for name, s in zip(self.free, d):
            out[name] = float(s)
        return out

    @classmethod
    def from_reported(cls, params: NoiseParams, sigmas: dict[str, float]) -> "FitResult":
        """Wrap externally reported values (e.g. published fit numbers)."""
        free = tuple(k for k in PARAM_NAMES if k in sigmas)
        cov = np.diag([sigmas[k] ** 2 for k in free])
        return cls(params=params, covariance=cov, residual_norm=float("nan"),
                   per_point_residuals=np.empty(0), free=free)


@dataclass
class PropagationResult:
    central_db: float
    upper_err_db: float
    lower_err_db: float
    n_samples: int
    n_rejected: int


# --------------------------------------------------------------------------
# optimizer

@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool
    history: list[float]
    message: str


def levenberg_marquardt(residuals: Callable[[np.ndarray], np.ndarray],
                        jacobian: Callable[[np.ndarray], np.ndarray],
                        x0: Sequence[float],
                        max_iter: int = 500,
                        ftol: float = 1e-10,
                        xtol: float = 1e-12,
                        gtol: float = 1e-14,
                        lam0: float = 1e-3) -> LMResult:
    """Damped Gauss-Newton on 0.5*|r|^2 with x10 / /10 damping updates.

    Stops when an accepted step lowers the cost by a relative amount below
    ``ftol``, when the step norm drops below ``xtol``, or when the gradient
    vanishes.  ``history`` holds the cost after every accepted step, so it is
    non-increasing by construction.
    """
    x = np.array(x0, dtype=float)
    r = residuals(x)
    cost = float(r @ r)
    J = jacobian(x)
    lam = lam0
    history = [cost]
    for it in range(1, max_iter + 1):
        g = J.T @ r
        if cost == 0.0 or np.max(np.abs(g)) <= gtol:
            return LMResult(x, cost, it, True, history, "gradient vanished")
        H = J.T @ J
        d = np.diag(H).copy()
        d[d <= 0] = max(np.max(d), 1.0) * 1e-12
        while True:
            try:
                step = np.linalg.solve(H + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            break
        x_new = x + step
        r_new = residuals(x_new)
        cost_new = float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
        if cost_new < cost:
            rel = (cost - cost_new) / cost
            x, r, cost = x_new, r_new, cost_new
            J = jacobian(x)
            history.append(cost)
            lam = max(lam / 10, 1e-15)
            if rel < ftol:
                return LMResult(x, cost, it, True, history, "relative cost decrease below ftol")
        else:
            lam *= 10
        if np.linalg.norm(step) < xtol:
            return LMResult(x, cost, it, True, history, "step below xtol")
        if lam > 1e20:
            return LMResult(x, cost, it, True, history, "damping saturated")
    return LMResult(x, cost, max_iter, False, history, "maximum iterations reached")


# --------------------------------------------------------------------------
# dB-space model and derivatives

def model_db(theta: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Stacked [squeezed, antisqueezed] model levels in dB for theta=(eta, delta, alpha, EN)."""
    eta, delta, alpha, en = theta
    r = alpha * np.sqrt(P)
    c2, s2 = math.cos(delta) ** 2, math.sin(delta) ** 2
    em, ep = np.exp(-2 * r), np.exp(2 * r)
    vm = eta * (em * c2 + ep * s2) + 1 - eta + en
    vp = eta * (ep * c2 + em * s2) + 1 - eta + en
    return 10 * np.log10(np.concatenate([vm, vp]))


def jacobian(params: NoiseParams | np.ndarray, data: MeasuredCurve | np.ndarray) -> np.ndarray:
    """Analytic derivatives of the dB model with respect to (eta, delta, alpha, EN).

    Rows follow :attr:`MeasuredCurve.levels_db` ordering.
    """
    theta = params.as_array() if isinstance(params, NoiseParams) else np.asarray(params, float)
    P = data.pump_powers if isinstance(data, MeasuredCurve) else np.asarray(data, float)
    eta, delta, alpha, en = theta
    sq = np.sqrt(P)
    r = alpha * sq
    c2, s2 = math.cos(delta) ** 2, math.sin(delta) ** 2
    sin2d = math.sin(2 * delta)
    em, ep = np.exp(-2 * r), np.exp(2 * r)
    rows = []
    for a, b in ((em, ep), (ep, em)):  # (leading, trailing) exponentials
        sgn = -1.0 if a is em else 1.0
        v = eta * (a * c2 + b * s2) + 1 - eta + en
        dv = np.stack([
            a * c2 + b * s2 - 1.0,
            eta * (b - a) * sin2d,
            eta * 2 * sq * sgn * (a * c2 - b * s2),
            np.ones_like(P),
        ], axis=1)
        rows.append(dv * (10.0 / (LN10 * v))[:, None])
    return np.vstack(rows)


# --------------------------------------------------------------------------
# fitting

def initial_guess(data: MeasuredCurve, en: float) -> np.ndarray:
    vmin = np.min([pt.v_minus_db for pt in data.points])
    eta0 = float(np.clip(1 - 10 ** (vmin / 10), 0.3, 0.95))
    P = data.pump_powers
    vp = db_to_lin(np.array([pt.v_plus_db for pt in data.points]))
    z = np.log(np.clip((vp - (1 - eta0) - en) / eta0, 1e-12, None))
    t = np.sqrt(P)
    alpha0 = float(np.sum(z * t) / (2 * np.sum(t * t))) if np.any(t > 0) else 1.0
    return np.array([eta0, 0.0, max(alpha0, 1e-3), en])


def _lead_trail(alpha, P):
    """exp(-2r), exp(+2r) for the squeezed rows followed by the antisqueezed rows."""
    x = np.exp(-2 * alpha * np.sqrt(P))
    return np.concatenate([x, 1 / x]), np.concatenate([1 / x, x])


def _phi_model(q, P):
    """Linear variances for q = (eta, phi = sin^2 delta, alpha, EN); phi may leave [0, 1]."""
    eta, phi, alpha, en = q
    lead, trail = _lead_trail(alpha, P)
    return eta * (lead * (1 - phi) + trail * phi) + (1.0 - eta) + en


def projected_guess(data: MeasuredCurve, en: Optional[float], alpha0: float) -> np.ndarray:
    """Start from a scan over alpha with the remaining parameters solved linearly.

    At fixed alpha, v - 1 - EN = a (lead - 1) + b (trail - lead), with
    a = eta and b = eta sin^2 delta.  A free EN (``en=None``) joins them as a
    constant column.  The scan keeps the alpha whose linear solution has the
    smallest dB residual.  Returns (eta, phi, alpha, EN).
    """
    P = data.pump_powers
    y = data.levels_db
    w = 1.0 / data.sigmas_db
    v = db_to_lin(y)
    # linear-space weights matching the dB sigmas to first order
    wl = w * LN10 / (10 * v)
    best = None
    for alpha in alpha0 * np.geomspace(0.25, 4.0, 81):
        lead, trail = _lead_trail(alpha, P)
        cols = [lead - 1, trail - lead] + ([np.ones_like(lead)] if en is None else [])
        A = np.stack(cols, axis=1)
        coef, *_ = np.linalg.lstsq(A * wl[:, None], (v - 1 - (en or 0.0)) * wl, rcond=None)
        eta = float(np.clip(coef[0], 0.05, 0.999))
        q = np.array([eta, coef[1] / eta, alpha, en if en is not None else max(coef[2], 1e-6)])
        with np.errstate(invalid="ignore", divide="ignore"):
            r = (10 * np.log10(_phi_model(q, P)) - y) * w
        cost = float(r @ r) if np.all(np.isfinite(r)) else math.inf
        if best is None or cost < best[0]:
            best = (cost, q)
    return best[1]


def _covariance(Jw, theta, P, w, k):
    """Unscaled covariance and a degeneracy flag.

    At zero phase noise the delta column vanishes (the model is even in
    delta).  There the covariance is formed in phi = delta^2, where the
    information is finite, and the delta row is mapped so that its 1-sigma
    width is sqrt(sigma_phi).
    """
    N = Jw.T @ Jw
    if np.linalg.cond(N) < 1e14:
        cov = np.linalg.inv(N)
        return 0.5 * (cov + cov.T), False
    eta, delta, alpha, en = theta
    r = alpha * np.sqrt(P)
    em, ep = np.exp(-2 * r), np.exp(2 * r)
    v = 10 ** (model_db(theta, P) / 10)
    # d/dphi of eta*(lead*cos^2 + trail*sin^2) at small delta
    dphi = np.concatenate([eta * (ep - em), eta * (em - ep)]) * 10 / (LN10 * v)
    Jp = Jw.copy()
    Jp[:, 1] = dphi * w
    Np = Jp.T @ Jp
    try:
        cov = np.linalg.inv(Np)
    except np.linalg.LinAlgError:
        return np.linalg.pinv(N), True
    s_phi = math.sqrt(max(cov[1, 1], 0.0))
    if s_phi > 0:
        T = np.eye(k)
        T[1, 1] = 1.0 / math.sqrt(s_phi)
        cov = T @ cov @ T
    return 0.5 * (cov + cov.T), True


class _Problem:
    """Residuals in internal coordinates u = (logit eta, [phi], log alpha, [log EN]).

    phi = sin^2 delta enters the model linearly and is left unbounded so that
    zero phase noise is not a stationary point; ``phi_fixed`` pins it to a
    boundary value and drops it from u.
    """

    def __init__(self, P, y, w, en_fixed=None, phi_fixed=None):
        self.P, self.y, self.w = P, y, w
        self.en_fixed, self.phi_fixed = en_fixed, phi_fixed

    def natural(self, u):
        # numpy exp: trial steps may overflow, which the optimizer then rejects
        it = iter(u)
        eta = 1.0 / (1.0 + np.exp(-next(it)))
        phi = next(it) if self.phi_fixed is None else self.phi_fixed
        alpha = np.exp(next(it))
        en = np.exp(next(it)) if self.en_fixed is None else self.en_fixed
        return np.array([eta, phi, alpha, en])

    def internal(self, q):
        eta, phi, alpha, en = q
        u = [math.log(eta / (1 - eta))]
        if self.phi_fixed is None:
            u.append(phi)
        u.append(math.log(alpha))
        if self.en_fixed is None:
            u.append(math.log(max(en, 1e-12)))
        return np.array(u)

    def residuals(self, u):
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            v = _phi_model(self.natural(u), self.P)
            return (10 * np.log10(v) - self.y) * self.w

    def jacobian(self, u):
        eta, phi, alpha, en = q = self.natural(u)
        lead, trail = _lead_trail(alpha, self.P)
        t = np.sqrt(np.concatenate([self.P, self.P]))
        n = len(self.P)
        sgn = np.concatenate([-np.ones(n), np.ones(n)])
        cols = [(lead * (1 - phi) + trail * phi - 1) * eta * (1 - eta)]
        if self.phi_fixed is None:
            cols.append(eta * (trail - lead))
        cols.append(eta * 2 * t * sgn * (lead * (1 - phi) - trail * phi) * alpha)
        if self.en_fixed is None:
            cols.append(np.full(2 * n, en))
        scale = 10.0 / (LN10 * _phi_model(q, self.P)) * self.w
        return np.stack(cols, axis=1) * scale[:, None]


def fit_eq1(data: MeasuredCurve, fix_en: Optional[float] = None, max_iter: int = 500) -> FitResult:
    """Weighted least-squares fit of both quadratures in dB.

    ``fix_en`` holds the linear electronic noise fixed; ``None`` fits it.
    The optimizer works in unconstrained coordinates (logit eta, sin^2 delta,
    log alpha, log EN) from two deterministic starts; a phase-noise optimum
    below zero is refit on the delta = 0 boundary.  The covariance is reported
    in natural units, scaled by the reduced chi-square.
    """
    if len(data) < 4:
        raise ValueError("need at least 4 pump powers for the fit")
    free_en = fix_en is None
    free = PARAM_NAMES if free_en else PARAM_NAMES[:3]
    P = data.pump_powers
    y = data.levels_db
    w = 1.0 / data.sigmas_db
    theta0 = initial_guess(data, 0.0 if free_en else fix_en)
    if free_en:
        theta0[3] = 0.01
    starts = [projected_guess(data, fix_en, theta0[2]), theta0]

    prob = _Problem(P, y, w, en_fixed=fix_en)
    lm = None
    for q0 in starts:
        cand = levenberg_marquardt(prob.residuals, prob.jacobian, prob.internal(q0), max_iter=max_iter)
        if lm is None or (cand.converged, -cand.cost) > (lm.converged, -lm.cost):
            lm = cand
    q = prob.natural(lm.x)
    if not 0.0 <= q[1] < 1.0:
        # optimum outside the physical range: refit on the nearest boundary
        edge = _Problem(P, y, w, en_fixed=fix_en, phi_fixed=min(max(q[1], 0.0), 1.0 - 1e-12))
        q_start = q.copy()
        q_start[1] = edge.phi_fixed
        lm = levenberg_marquardt(edge.residuals, edge.jacobian, edge.internal(q_start), max_iter=max_iter)
        q = edge.natural(lm.x)
    theta = np.array([q[0], math.asin(math.sqrt(q[1])), q[2], q[3]])
    resid = (model_db(theta, P) - y) * w
    dof = max(len(y) - len(free), 1)
    chi2_red = float(resid @ resid) / dof
    Jw = jacobian(theta, P)[:, :len(free)] * w[:, None]
    cov, degenerate = _covariance(Jw, theta, P, w, len(free))
    cov = cov * chi2_red

    delta = float(theta[1])
    if delta >= math.pi / 2:
        degenerate = True
        delta = math.pi / 2 - 1e-12
    params = NoiseParams(float(min(theta[0], 1.0)), delta, float(theta[2]), float(theta[3]))
    result = FitResult(params=params, covariance=cov, residual_norm=float(np.linalg.norm(resid)),
                       per_point_residuals=resid, free=free, chi2_red=chi2_red,
                       iterations=lm.iterations, converged=lm.converged, degenerate=degenerate,
                       cost_history=lm.history)
    if not lm.converged:
        raise FitConvergenceError(f"fit did not converge: {lm.message}", best=result)
    return result


# --------------------------------------------------------------------------
# uncertainty propagation

_CHUNK = 4096


def _propagate_chunk(k, n_k, seed, means, sigmas, v_plus_db):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, k])))
    eta = rng.normal(means[0], sigmas[0], n_k)
    delta = np.abs(rng.normal(means[1], sigmas[1], n_k))
    v_db = rng.normal(means[2], sigmas[2], n_k)
    out = np.full(n_k, np.nan)
    for i in range(n_k):
        if not 0 < eta[i] <= 1 or delta[i] >= math.pi / 2:
            continue
        try:
            out[i] = infer_generated_squeezing(v_db[i], eta[i], delta[i], v_plus_db)
        except LossFloorError:
            pass
    return out


def propagate_waveguide_squeezing(fit: FitResult, v_meas_db: float, v_meas_sigma_db: float,
                                  budget: Optional[LossBudget] = None, n: int = 20_000,
                                  seed: int = 0, *, v_plus_db: Optional[float] = None,
                                  max_reject_fraction: float = 0.5,
                                  workers: int = 1) -> PropagationResult:
    """Monte-Carlo the loss correction of a measured squeezing level.

    Efficiency, phase noise and the measured level are drawn from independent
    normals (phase noise reflected at zero).  The mean efficiency is the fitted
    one, or the composed ``budget`` when given.  Samples are generated in
    fixed-size chunks, each from its own seed-derived Philox stream, so the
    result does not depend on ``workers``.  Samples below the loss floor are
    counted in ``n_rejected``.
    """
    if n < 10_000:
        raise ValueError("need at least 1e4 samples")
    err = fit.stderr
    eta_mean = compose(budget) if budget is not None else fit.params.eta_total
    means = (eta_mean, fit.params.delta, v_meas_db)
    sigmas = (err["eta_total"], err["delta"], v_meas_sigma_db)
    sizes = [min(_CHUNK, n - k * _CHUNK) for k in range(math.ceil(n / _CHUNK))]
    args = [(k, nk, seed, means, sigmas, v_plus_db) for k, nk in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda a: _propagate_chunk(*a), args))
    else:
        parts = [_propagate_chunk(*a) for a in args]
    samples = np.concatenate(parts)
    ok = np.isfinite(samples)
    n_rej = int(n - ok.sum())
    if n_rej > max_reject_fraction * n:
        raise PropagationError(
            f"{n_rej}/{n} samples ({n_rej / n:.1%}) fall below the loss floor; "
            "review the efficiency, phase-noise and level inputs", n, n_rej)
    lo, mid, hi = np.percentile(samples[ok], [16, 50, 84])
    return PropagationResult(central_db=float(mid), upper_err_db=float(hi - mid),
                             lower_err_db=float(mid - lo), n_samples=n, n_rejected=n_rej)


def project_application_squeezing(fit: FitResult, budget: LossBudget, labels: Sequence[str],
                                  pump_power: float = 0.020) -> float:
    """Generated squeezing at ``pump_power`` pushed through the named losses only."""
    unknown = [k for k in labels if k not in budget.labels]
    if unknown:
        raise ValueError(f"unknown loss-budget labels: {unknown}")
    v = db_to_lin(generated_squeezing_db(fit.params.alpha, pump_power))
    for k in labels:
        v = apply_loss(v, budget[k])
    return lin_to_db(v)
