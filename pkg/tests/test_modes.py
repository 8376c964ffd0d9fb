import dataclasses
import math
import warnings
from unittest import mock

import numpy as np
import pytest

from sqzkit import modes
from sqzkit.modes import (GridMismatchError, ModeConvergenceError, NoGuidedModeError, ScalarMode,
                          SlabGeometry, WaveguideGeometry, convergence_study, helmholtz_operator,
                          mode_overlap, observed_order, slab_effective_index, slab_oracle_2d,
                          solve_fundamental)
from sqzkit.report import AnalysisConfig

N_O, N_E = 2.2288, 2.1474
SLAB = SlabGeometry(2.0, N_O, N_E)


@pytest.fixture(scope="module")
def ridge():
    cfg = AnalysisConfig(("modes",))
    return cfg.geometry(N_O), cfg.geometry(N_E)


@pytest.fixture(scope="module")
def ridge_modes(ridge):
    return [solve_fundamental(g) for g in ridge]


def brent_slab_root(d, n1, n2, lam):
    # oracle by a different route: brentq on the cos/sin form of the even-mode condition
    from scipy.optimize import brentq
    k0 = 2 * math.pi / lam

    def g(ne):
        kap = k0 * math.sqrt(n1**2 - ne**2)
        gam = k0 * math.sqrt(ne**2 - n2**2)
        return kap * math.sin(kap * d / 2) - gam * math.cos(kap * d / 2)

    lo = max(n2, math.sqrt(n1**2 - (math.pi / (d * k0)) ** 2)) + 1e-12
    return brentq(g, lo, n1 - 1e-12, xtol=1e-15, rtol=1e-15)


def test_slab_dispersion_root_matches_independent_solver():
    for d in (0.5, 2.0, 5.0):
        assert slab_effective_index(d, N_O, N_E, 1.064) == pytest.approx(
            brent_slab_root(d, N_O, N_E, 1.064), abs=1e-12)


def test_slab_matches_analytic_oracle():
    m = solve_fundamental(SLAB)
    assert abs(m.n_eff - slab_oracle_2d(SLAB)) <= 1e-4


def test_slab_convergence_order():
    rows = convergence_study([SLAB], levels=(1, 2, 4))
    order = observed_order([r.n_eff[0] for r in rows])
    assert 1.7 <= order <= 2.3
    assert all(r.overlap == pytest.approx(1.0, abs=1e-12) for r in rows)


def test_convergence_study_needs_three_levels():
    with pytest.raises(ValueError):
        convergence_study([SLAB], levels=(1, 2))


def test_non_monotone_refinement_warns():
    seq = iter([2.0, 2.1, 2.15, 2.3])

    def fake_solve(g):
        return ScalarMode(np.ones((2, 2)), next(seq), 0.0, g.dx, g.dy, g.wavelength)

    with mock.patch.object(modes, "solve_fundamental", fake_solve):
        with pytest.warns(UserWarning, match="monotonic"):
            convergence_study([SLAB], levels=(1, 2, 4, 8))


def test_uniform_medium_has_no_guided_mode():
    g = WaveguideGeometry(2.0, 2.0, 0.0, 2.1, 2.1, cover_index=2.1, pad_x=1.0, pad_top=1.0, pad_bottom=1.0)
    with pytest.raises(NoGuidedModeError):
        solve_fundamental(g)


def test_iteration_limit_reports_trace():
    with pytest.raises(ModeConvergenceError) as exc:
        solve_fundamental(SLAB, tol=1e-30, max_iter=3)
    assert len(exc.value.trace) == 3


def test_geometry_validation():
    with pytest.raises(ValueError):
        WaveguideGeometry(5.0, 5.0, 0.0, N_O, 2.1, pad_x=0.3)
    with pytest.raises(ValueError):
        WaveguideGeometry(5.05, 5.0, 0.0, N_O, 2.1, dx=0.1)
    with pytest.raises(ValueError):
        WaveguideGeometry(-1.0, 5.0, 0.0, N_O, 2.1)


def test_operator_is_symmetric():
    n = WaveguideGeometry(1.0, 1.0, 0.0, N_O, 2.1, pad_x=0.5, pad_top=0.5, pad_bottom=0.5).index_map()
    A = helmholtz_operator(n, 0.1, 0.1, 1.064)
    assert abs(A - A.T).max() == 0.0


def test_ridge_modes_are_single_lobed(ridge_modes):
    for m in ridge_modes:
        f = m.field
        assert np.all(f >= -1e-12 * np.abs(f).max())


def test_ridge_mode_invariants(ridge, ridge_modes):
    for g, m in zip(ridge, ridge_modes):
        A = helmholtz_operator(g.index_map(), g.dx, g.dy, g.wavelength)
        scale = abs(A).sum(axis=1).max()
        v = m.field.ravel()
        beta2 = (2 * math.pi / g.wavelength * m.n_eff) ** 2
        assert np.linalg.norm(A @ v - beta2 * v) <= 1e-8 * scale
        assert np.sum(m.field**2) == pytest.approx(1.0, abs=1e-12)
        assert g.cladding_index < m.n_eff < g.core_index


def test_ridge_overlap_near_published_value(ridge_modes):
    assert mode_overlap(*ridge_modes) == pytest.approx(0.997, abs=0.003)


def test_overlap_properties(ridge_modes):
    a, b = ridge_modes
    assert mode_overlap(a, a) == pytest.approx(1.0, abs=1e-14)
    assert mode_overlap(a, b) == mode_overlap(b, a)
    assert 0.0 <= mode_overlap(a, b) <= 1.0


def test_even_and_odd_fields_are_orthogonal():
    y, x = np.mgrid[-20:21, -30:31] * 0.1
    even = np.exp(-x**2 - y**2)
    odd = x * even
    a = ScalarMode(even, 2.2, 0.0, 0.1, 0.1, 1.064)
    b = ScalarMode(odd, 2.2, 0.0, 0.1, 0.1, 1.064)
    assert mode_overlap(a, b) <= 1e-12


def test_overlap_rejects_grid_mismatch():
    a = ScalarMode(np.ones((3, 3)), 2.2, 0.0, 0.1, 0.1, 1.064)
    b = ScalarMode(np.ones((3, 4)), 2.2, 0.0, 0.1, 0.1, 1.064)
    c = ScalarMode(np.ones((3, 3)), 2.2, 0.0, 0.05, 0.1, 1.064)
    for other in (b, c):
        with pytest.raises(GridMismatchError):
            mode_overlap(a, other)


def test_grid_translation_invariance(ridge, ridge_modes):
    shifted = solve_fundamental(dataclasses.replace(ridge[0], shift_cells=7))
    assert abs(shifted.n_eff - ridge_modes[0].n_eff) <= 1e-10
    assert np.allclose(np.roll(ridge_modes[0].field, 7, axis=1)[:, 10:-10], shifted.field[:, 10:-10],
                       atol=1e-9)


def test_padding_sensitivity(ridge, ridge_modes):
    wider = dataclasses.replace(ridge[0], pad_x=ridge[0].pad_x + 1.0, pad_top=ridge[0].pad_top + 1.0,
                                pad_bottom=ridge[0].pad_bottom + 1.0)
    assert abs(solve_fundamental(wider).n_eff - ridge_modes[0].n_eff) < 1e-5


def test_ridge_overlap_stable_under_refinement(ridge):
    coarse = [dataclasses.replace(g, dx=2 * g.dx, dy=2 * g.dy) for g in ridge]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = convergence_study(coarse, levels=(1, 2, 4))
    assert abs(rows[-1].overlap - rows[-2].overlap) < 1e-3
    assert round(rows[-1].overlap, 3) == round(rows[-2].overlap, 3)
