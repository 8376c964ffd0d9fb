import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqzkit.curve_fit import (CurvePoint, FitConvergenceError, FitResult, MeasuredCurve,
                              PropagationError, fit_eq1, jacobian, levenberg_marquardt, model_db,
                              project_application_squeezing, propagate_waveguide_squeezing)
from sqzkit.formats import read_curve
from sqzkit.noise_model import LossBudget, NoiseParams, electronic_noise_from_clearance
from sqzkit.synth import gen_curve

EN = electronic_noise_from_clearance(13.2)
TRUTH = NoiseParams(0.61, 0.012, 12.4, EN)
POWERS = np.linspace(2e-3, 40e-3, 8)
REPORTED = FitResult.from_reported(NoiseParams(0.61, 0.012, 12.4, EN),
                                   {"eta_total": 0.02, "delta": 0.030, "alpha": 0.1})
BUDGET = LossBudget([("wg", 0.87), ("prop", 0.96), ("overlap", 0.97), ("det", 0.75), ("direct", 0.9)])


def fd_jacobian(theta, P, h=1e-3):
    # fourth-order central differences
    J = np.empty((2 * len(P), 4))
    for j in range(4):
        step = h * max(abs(theta[j]), 1e-3)
        e = step * np.eye(4)[j]
        J[:, j] = (8 * (model_db(theta + e, P) - model_db(theta - e, P))
                   - (model_db(theta + 2 * e, P) - model_db(theta - 2 * e, P))) / (12 * step)
    return J


def test_curve_validation():
    pt = CurvePoint(1e-3, -1, 1, 0.1, 0.1)
    with pytest.raises(ValueError):
        MeasuredCurve([pt, pt])
    with pytest.raises(ValueError):
        MeasuredCurve([CurvePoint(1e-3, -1, 1, 0.0, 0.1)])
    with pytest.raises(ValueError):
        MeasuredCurve([CurvePoint(-1e-3, -1, 1, 0.1, 0.1)])


def test_fit_needs_four_points():
    data = gen_curve(TRUTH, POWERS[:3], 0.0)
    with pytest.raises(ValueError):
        fit_eq1(data, fix_en=EN)


@pytest.mark.parametrize("fix", [EN, None])
def test_noiseless_recovery(fix):
    fit = fit_eq1(gen_curve(TRUTH, POWERS, 0.0), fix_en=fix)
    got = fit.params.as_array()
    assert np.all(np.abs(got - TRUTH.as_array()) <= 1e-6 * np.abs(TRUTH.as_array()))
    assert fit.converged


def test_recovery_improves_as_noise_vanishes():
    errs = []
    for noise in (1e-1, 1e-2, 1e-3):
        fit = fit_eq1(gen_curve(TRUTH, POWERS, noise, seed=5), fix_en=EN)
        errs.append(abs(fit.params.alpha - TRUTH.alpha))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 5e-3


def test_three_sigma_coverage_over_many_seeds():
    # about 99.7 % per parameter for Gaussian errors; small dof widens the tails a little
    inside = []
    for seed in range(200):
        fit = fit_eq1(gen_curve(TRUTH, POWERS, 0.05, seed=seed), fix_en=EN)
        z = [(fit.params.eta_total - TRUTH.eta_total) / fit.stderr["eta_total"],
             (fit.params.alpha - TRUTH.alpha) / fit.stderr["alpha"]]
        inside.append(all(abs(x) <= 3 for x in z))
    assert np.mean(inside) >= 0.93


def test_fixture_curve_matches_published_fit():
    path = resources.files("sqzkit").joinpath("data/curve_homodyne.csv")
    fit = fit_eq1(read_curve(path), fix_en=EN)
    err = fit.stderr
    assert abs(fit.params.eta_total - 0.61) <= 2 * 0.02
    assert err["eta_total"] == pytest.approx(0.02, rel=0.3)
    assert abs(fit.params.alpha - 12.4) <= 2 * math.hypot(0.1, err["alpha"])
    assert abs(fit.params.delta - 0.012) <= 2 * math.hypot(0.030, err["delta"])


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        theta = np.array([rng.uniform(0.2, 1.0), rng.uniform(0.0, 0.5), rng.uniform(1, 20),
                          rng.uniform(0, 0.1)])
        P = np.sort(rng.uniform(1e-3, 0.04, 6))
        worst = max(worst, np.max(np.abs(jacobian(theta, P) - fd_jacobian(theta, P))))
    assert worst <= 1e-6


def test_jacobian_structure():
    theta = np.array([0.7, 0.0, 10.0, 0.01])
    J = jacobian(theta, POWERS)
    n = len(POWERS)
    assert np.all(J[:, 1] == 0.0)
    assert np.all(J[:n, 2] < 0)
    assert np.all(J[n:, 2] > 0)


def test_objective_non_increasing():
    fit = fit_eq1(gen_curve(TRUTH, POWERS, 0.1, seed=3), fix_en=None)
    assert np.all(np.diff(fit.cost_history) <= 0)


def test_lm_on_rosenbrock():
    def res(x):
        return np.array([10 * (x[1] - x[0] ** 2), 1 - x[0]])

    def jac(x):
        return np.array([[-20 * x[0], 10.0], [-1.0, 0.0]])

    out = levenberg_marquardt(res, jac, [-1.2, 1.0])
    assert out.converged
    assert out.x == pytest.approx([1.0, 1.0], abs=1e-6)


def test_nonconvergence_carries_best_so_far():
    with pytest.raises(FitConvergenceError) as exc:
        fit_eq1(gen_curve(TRUTH, POWERS, 0.05, seed=1), fix_en=EN, max_iter=1)
    assert exc.value.best is not None


@pytest.mark.parametrize("fix", [EN, None])
def test_covariance_psd(fix):
    fit = fit_eq1(gen_curve(TRUTH, POWERS, 0.05, seed=2), fix_en=fix)
    C = fit.covariance
    assert C.shape == ((3, 3) if fix is not None else (4, 4))
    assert np.allclose(C, C.T)
    assert np.min(np.linalg.eigvalsh(C)) >= -1e-12 * np.trace(C)


def test_boundary_fit_is_flagged_with_finite_delta_error():
    # pure loss, no phase noise: delta sits on its boundary
    data = gen_curve(NoiseParams(0.61, 0.0, 12.4, EN), POWERS, 0.0, nominal_sigma_db=0.05)
    fit = fit_eq1(data, fix_en=EN)
    assert fit.params.delta < 1e-3
    assert fit.degenerate


def test_propagation_deterministic_limit():
    fit = FitResult.from_reported(TRUTH, {"eta_total": 0.0, "delta": 0.0, "alpha": 0.0})
    res = propagate_waveguide_squeezing(fit, -3.9, 0.0, n=10_000, seed=1)
    assert res.upper_err_db == 0.0 and res.lower_err_db == 0.0
    assert res.n_rejected == 0


def test_propagation_needs_enough_samples():
    with pytest.raises(ValueError):
        propagate_waveguide_squeezing(REPORTED, -3.9, 0.05, n=9_999)


def test_propagation_determinism_across_workers():
    fit = FitResult.from_reported(TRUTH, {"eta_total": 0.02, "delta": 0.0, "alpha": 0.0})
    a = propagate_waveguide_squeezing(fit, -3.0, 0.05, n=20_000, seed=9, workers=1)
    b = propagate_waveguide_squeezing(fit, -3.0, 0.05, n=20_000, seed=9, workers=4)
    c = propagate_waveguide_squeezing(fit, -3.0, 0.05, n=20_000, seed=9)
    assert a == b == c
    d = propagate_waveguide_squeezing(fit, -3.0, 0.05, n=20_000, seed=10)
    assert d != a


def test_propagation_percentile_ordering():
    fit = FitResult.from_reported(TRUTH, {"eta_total": 0.02, "delta": 0.0, "alpha": 0.0})
    res = propagate_waveguide_squeezing(fit, -3.0, 0.05, n=10_000, seed=4)
    assert res.upper_err_db >= 0 and res.lower_err_db >= 0
    assert res.central_db - res.lower_err_db <= res.central_db <= res.central_db + res.upper_err_db


def test_propagation_rejection_gate():
    with pytest.raises(PropagationError) as exc:
        propagate_waveguide_squeezing(REPORTED, -4.5, 0.05, n=10_000, seed=0)
    assert exc.value.n_rejected > exc.value.n_samples / 2


def test_budget_sets_mean_efficiency():
    fit = FitResult.from_reported(TRUTH, {"eta_total": 0.0, "delta": 0.0, "alpha": 0.0})
    a = propagate_waveguide_squeezing(fit, -3.0, 0.0, n=10_000)
    b = propagate_waveguide_squeezing(fit, -3.0, 0.0, budget=LossBudget([("x", 0.7)]), n=10_000)
    assert b.central_db > a.central_db


def test_projections():
    srs = project_application_squeezing(REPORTED, BUDGET, ["wg", "direct"])
    chip = project_application_squeezing(REPORTED, BUDGET, ["wg"])
    gen = project_application_squeezing(REPORTED, BUDGET, [])
    assert srs == pytest.approx(-6.2, abs=0.3)
    assert chip == pytest.approx(-8.1, abs=0.3)
    assert gen == pytest.approx(-15.23, abs=0.01)
    with pytest.raises(ValueError):
        project_application_squeezing(REPORTED, BUDGET, ["nope"])


@given(st.floats(0.3, 0.95), st.floats(0.01, 0.1), st.floats(4.0, 20.0))
@settings(max_examples=25, deadline=None)
def test_noiseless_recovery_over_parameter_space(eta, delta, alpha):
    truth = NoiseParams(eta, delta, alpha, EN)
    fit = fit_eq1(gen_curve(truth, POWERS, 0.0), fix_en=EN)
    assert fit.params.as_array() == pytest.approx(truth.as_array(), rel=1e-6)
