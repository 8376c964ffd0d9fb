import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqzkit.noise_model import (ANTISQUEEZED, SQUEEZED, EmptyBudgetWarning, LossBudget,
                                LossFloorError, NoiseFloorError, NoiseParams, apply_loss, compose,
                                db_to_lin, electronic_noise_from_clearance, eq1_variance,
                                generated_squeezing_db, infer_generated_squeezing, lin_to_db,
                                loss_floor, quadratures, squeezing_roots,
                                subtract_electronic_noise)

FITTED = NoiseParams(0.61, 0.012, 12.4, 0.0479)
etas = st.floats(1e-3, 1.0)


def test_db_conversions():
    assert db_to_lin(0.0) == 1.0
    assert db_to_lin(-3.61) == pytest.approx(0.43551, abs=5e-6)
    assert db_to_lin(13.54) == pytest.approx(22.594, abs=5e-4)
    assert lin_to_db(db_to_lin(-3.61)) == pytest.approx(-3.61, rel=1e-12)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_db_to_lin_rejects_nonfinite(bad):
    with pytest.raises(ValueError):
        db_to_lin(bad)


def test_lin_to_db_rejects_nonpositive():
    with pytest.raises(ValueError):
        lin_to_db(0.0)


def test_params_validation():
    for kw in ({"eta_total": 0.0}, {"eta_total": 1.2}, {"delta": -0.1}, {"delta": math.pi / 2},
               {"alpha": -1.0}, {"electronic_noise": -1e-3}):
        args = dict(eta_total=0.6, delta=0.0, alpha=1.0, electronic_noise=0.0)
        args.update(kw)
        with pytest.raises(ValueError):
            NoiseParams(**args)


def test_forward_model_at_fitted_parameters():
    # hand computation: r = 12.4 sqrt(0.02) = 1.75362, e^{-2r} = 0.029979
    r = 12.4 * math.sqrt(0.020)
    assert r == pytest.approx(1.7536, abs=1e-4)
    assert math.exp(-2 * r) == pytest.approx(0.029979, abs=1e-6)
    vm = eq1_variance(0.020, FITTED, SQUEEZED)
    vp = eq1_variance(0.020, FITTED, ANTISQUEEZED)
    assert vm == pytest.approx(0.4591, abs=1e-4)
    assert vp == pytest.approx(20.78, abs=1e-2)
    assert lin_to_db(vm) == pytest.approx(-3.38, abs=5e-3)
    assert lin_to_db(vp) == pytest.approx(13.18, abs=5e-3)


def test_zero_pump_is_shot_noise_plus_en():
    p = NoiseParams(0.5, 0.3, 20.0, 0.0)
    assert eq1_variance(0.0, p, SQUEEZED) == 1.0
    assert eq1_variance(0.0, p, ANTISQUEEZED) == 1.0
    q = quadratures(0.0, FITTED)
    assert q.v_minus == pytest.approx(1.0479, abs=1e-15)
    assert q.v_plus == pytest.approx(1.0479, abs=1e-15)


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        eq1_variance(-1e-3, FITTED)


@given(st.floats(0, 0.1), st.floats(0, 40))
def test_pure_state_saturates_uncertainty(P, alpha):
    p = NoiseParams(1.0, 0.0, alpha)
    assert eq1_variance(P, p, SQUEEZED) * eq1_variance(P, p, ANTISQUEEZED) == pytest.approx(1.0, rel=1e-12)


def test_generated_squeezing_from_alpha():
    assert generated_squeezing_db(12.4, 0.020) == pytest.approx(-15.2, abs=0.1)


def test_apply_loss_examples():
    assert apply_loss(1.0, 0.3) == 1.0
    assert apply_loss(0.40713, 0.9) == pytest.approx(0.46642, abs=1e-5)
    assert lin_to_db(apply_loss(0.40713, 0.9)) == pytest.approx(-3.313, abs=1e-3)
    assert apply_loss(0.029978, 0.61) == pytest.approx(0.40829, abs=1e-5)
    assert lin_to_db(apply_loss(0.029978, 0.61)) == pytest.approx(-3.89, abs=5e-3)


@pytest.mark.parametrize("eta", [0.0, -0.1, 1.01, math.nan])
def test_apply_loss_rejects_bad_eta(eta):
    with pytest.raises(ValueError):
        apply_loss(0.5, eta)


def test_compose_examples():
    b = LossBudget.from_mapping({"wg": 0.87, "prop": 0.96, "overlap": 0.97, "det": 0.75})
    assert compose(b) == pytest.approx(0.6077, abs=1e-4)
    assert compose(LossBudget([("x", 0.42)])) == 0.42
    assert compose(LossBudget([("spatial", 0.997), ("temporal", 0.977)])) == pytest.approx(0.974, abs=5e-4)


def test_compose_empty_budget_warns():
    with pytest.warns(EmptyBudgetWarning):
        assert compose(LossBudget([])) == 1.0


def test_budget_lookup_and_validation():
    b = LossBudget([("wg", 0.87), ("det", 0.75)])
    assert b["det"] == 0.75
    assert b.labels == ["wg", "det"]
    with pytest.raises(KeyError):
        b["nope"]
    with pytest.raises(ValueError):
        LossBudget([("wg", 1.5)])


def test_electronic_noise_subtraction_examples():
    assert subtract_electronic_noise(-3.61, 13.2) == pytest.approx(-3.90, abs=0.02)
    assert subtract_electronic_noise(-3.2, 15.3) == pytest.approx(-3.35, abs=0.02)
    assert subtract_electronic_noise(-3.2, math.inf) == -3.2
    assert electronic_noise_from_clearance(13.2) == pytest.approx(0.0479, abs=1e-4)


def test_signal_below_noise_floor_rejected():
    with pytest.raises(NoiseFloorError):
        subtract_electronic_noise(-14.0, 13.2)


def test_inversion_roots_quadratic_oracle():
    # independent quadratic formula on cos^2 d x^2 - y x + sin^2 d = 0
    v, eta, d = db_to_lin(-3.9026), 0.61, 0.012
    y = (v - 1 + eta) / eta
    a, c = math.cos(d) ** 2, math.sin(d) ** 2
    disc = math.sqrt(y * y - 4 * a * c)
    expected = sorted([(y + disc) / (2 * a), (y - disc) / (2 * a)], reverse=True)
    roots = squeezing_roots(v, eta, d)
    assert roots == pytest.approx(expected, rel=1e-9)
    assert roots[0] == pytest.approx(0.0212, abs=2e-4)
    assert roots[1] == pytest.approx(0.0068, abs=1e-4)
    assert [lin_to_db(x) for x in roots] == pytest.approx([-16.7, -21.7], abs=0.05)


def test_inversion_selects_larger_root_without_antisqueezing():
    got = infer_generated_squeezing(-3.9026, 0.61, 0.012)
    assert got == pytest.approx(-16.7, abs=0.05)


def test_inversion_uses_antisqueezing_when_given():
    eta, d = 0.61, 0.012
    for x_true in (0.0212, 0.0068):
        v = apply_loss(x_true * math.cos(d) ** 2 + math.sin(d) ** 2 / x_true, eta)
        vp = apply_loss(math.cos(d) ** 2 / x_true + x_true * math.sin(d) ** 2, eta)
        got = infer_generated_squeezing(lin_to_db(v), eta, d, lin_to_db(vp))
        assert got == pytest.approx(lin_to_db(x_true), abs=1e-9)


def test_inversion_identities():
    v = apply_loss(db_to_lin(-15.23), 0.61)
    assert infer_generated_squeezing(lin_to_db(v), 0.61, 0.0) == pytest.approx(-15.23, abs=1e-10)
    assert infer_generated_squeezing(-3.90, 1.0, 0.0) == pytest.approx(-3.90, abs=1e-12)


def test_below_loss_floor_reports_minimum():
    eta, d = 0.61, 0.1
    floor = loss_floor(eta, d)
    with pytest.raises(LossFloorError) as exc:
        infer_generated_squeezing(lin_to_db(floor * 0.95), eta, d)
    assert exc.value.v_min == pytest.approx(floor)
    assert floor == pytest.approx(eta * math.sin(2 * d) + 1 - eta)


# property suites, vectorized over 1e4 random samples

def test_shot_noise_fixed_point_vectorized():
    eta = np.random.default_rng(1).uniform(1e-6, 1.0, 10_000)
    assert np.all(apply_loss(np.ones_like(eta), eta) == 1.0)


def test_loss_composition_vectorized():
    rng = np.random.default_rng(2)
    e1, e2 = rng.uniform(1e-3, 1, (2, 10_000))
    v = np.exp(rng.uniform(-5, 5, 10_000))
    lhs = apply_loss(apply_loss(v, e1), e2)
    assert np.max(np.abs(lhs - apply_loss(v, e1 * e2)) / np.abs(lhs)) <= 1e-12


def test_uncertainty_product_vectorized():
    rng = np.random.default_rng(3)
    n = 10_000
    P = rng.uniform(0, 0.1, n)
    eta = rng.uniform(1e-3, 1, n)
    delta = rng.uniform(0, math.pi / 2 * 0.999, n)
    alpha = rng.uniform(0, 30, n)
    prod = np.array([eq1_variance(P[i], NoiseParams(eta[i], delta[i], alpha[i]), SQUEEZED)
                     * eq1_variance(P[i], NoiseParams(eta[i], delta[i], alpha[i]), ANTISQUEEZED)
                     for i in range(n)])
    assert np.all(prod >= 1 - 1e-12)


@given(st.floats(1e-4, 1e4), etas)
def test_loss_moves_toward_shot_noise(v, eta):
    out = apply_loss(v, eta)
    assert abs(out - 1) <= abs(v - 1) * (1 + 1e-12) + 1e-15
    if eta < 1 and abs(v - 1) > 1e-6:
        assert abs(out - 1) < abs(v - 1)


@given(st.floats(1e-3, 0.08), st.floats(0.05, 1.0), st.floats(0.5, 30))
@settings(max_examples=50)
def test_phase_noise_degrades_squeezing(P, eta, alpha):
    grid = np.linspace(0, math.pi / 4, 60)
    vm = [eq1_variance(P, NoiseParams(eta, d, alpha), SQUEEZED) for d in grid]
    assert np.all(np.diff(vm) >= -1e-12)


@given(st.floats(-25, -0.1), st.floats(0.05, 1.0))
def test_inversion_roundtrip(gen_db, eta):
    v = apply_loss(db_to_lin(gen_db), eta)
    assert infer_generated_squeezing(lin_to_db(v), eta, 0.0) == pytest.approx(gen_db, abs=1e-10 * max(1, abs(gen_db)) + 1e-9)


def test_quadrature_ordering_invariant():
    q = quadratures(0.02, FITTED)
    assert q.v_minus <= q.v_plus


def test_empty_budget_warning_is_not_error():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(EmptyBudgetWarning):
            compose(LossBudget([]))
