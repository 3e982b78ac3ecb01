import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize as sciopt

from qkdopt.infomath import CascadeCubic
from qkdopt.optimize import (
    GOLDEN,
    OptimizeDirective,
    golden_iteration_bound,
    maximize,
    maximize_bivariate,
    maximize_scalar,
)
from qkdopt.profiles import get_profile
from qkdopt.rates import bb84_wcp_rate, sweep


def test_quadratic_and_mu_exp():
    r = maximize_scalar(lambda x: -((x - 0.3) ** 2), (0.0, 1.0), tol=1e-8)
    assert r.x == pytest.approx(0.3, abs=1e-6)
    assert r.converged
    r = maximize_scalar(lambda m: m * math.exp(-m), (0.0, 5.0))
    assert r.x == pytest.approx(1.0, abs=1e-6)


def test_golden_method_recovers_argmax():
    r = maximize_scalar(lambda m: m * math.exp(-m), (0.0, 5.0), tol=1e-8, method="golden")
    assert r.x == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("width, tol", [(5.0, 1e-6), (2.0, 1e-8), (1.0, 1e-3)])
def test_golden_iterations_within_bound(width, tol):
    r = maximize_scalar(lambda m: m * math.exp(-m), (0.0, width), tol=tol, prescan=0, method="golden")
    assert r.iterations <= golden_iteration_bound(width, tol) + 2
    assert r.iterations >= golden_iteration_bound(width, tol) - 2


def test_golden_ratio_constant():
    assert GOLDEN == pytest.approx(0.6180339887498949, abs=1e-15)


@settings(max_examples=60)
@given(st.floats(-3.0, 3.0), st.floats(0.1, 5.0), st.floats(0.05, 2.0))
def test_matches_scipy_on_unimodal(center, width, scale):
    lo, hi = center - width, center + width
    peak = center + 0.37 * width

    def f(x):
        return -math.cosh((x - peak) / scale)

    ours = maximize_scalar(f, (lo, hi), tol=1e-9)
    ref = sciopt.minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    assert ours.x == pytest.approx(ref.x, abs=1e-5)
    assert ours.value >= -ref.fun - 1e-12


@given(st.floats(-2.0, 2.0), st.floats(0.1, 3.0))
def test_never_worse_than_endpoints_or_candidates(a, w):
    f = lambda x: math.sin(5 * x) + 0.1 * x
    r = maximize_scalar(f, (a, a + w), candidates=[a + w / 3])
    assert r.value >= f(a)
    assert r.value >= f(a + w)
    assert r.value >= f(a + w / 3)


def test_plateau_tie_picks_smallest_argument():
    r = maximize_scalar(lambda x: 0.0, (0.5, 2.0))
    assert r.x == 0.5


def test_budget_exhaustion_returns_best_so_far():
    r = maximize_scalar(lambda m: m * math.exp(-m), (0.0, 5.0), max_evals=10)
    assert not r.converged
    assert r.evals == 10
    assert r.value > 0.0


def test_bb84_raw_rate_argmax_at_upper_bound():
    prof = get_profile("KTH15")
    f = lambda m: bb84_wcp_rate(prof, m, CascadeCubic(), 30.0, distill=False).rate_per_pulse
    grid = np.linspace(1e-6, 2.0, 201)
    assert int(np.argmax([f(m) for m in grid])) == 200
    assert maximize_scalar(f, (1e-6, 2.0)).x == pytest.approx(2.0, abs=1e-6)


def test_bivariate_separable():
    r = maximize_bivariate(lambda x, y: -((x - 0.2) ** 2) - (y - 0.7) ** 2, ((0.0, 1.0), (0.0, 1.0)))
    assert r.x[0] == pytest.approx(0.2, abs=1e-5)
    assert r.x[1] == pytest.approx(0.7, abs=1e-5)
    assert r.converged


def test_bivariate_constant_converges_first_sweep():
    r = maximize_bivariate(lambda x, y: 1.0, ((0.0, 1.0), (2.0, 3.0)))
    assert r.converged
    assert r.iterations == 1
    assert r.x == (0.0, 2.0)


def test_bivariate_coupled_valley():
    # Rotated narrow ridge; coordinate ascent crawls, the fallback finishes.
    f = lambda x, y: -((x + y - 1.0) ** 2) * 100 - (x - y) ** 2
    r = maximize_bivariate(f, ((0.0, 1.0), (0.0, 1.0)), tol=1e-9, max_evals=4000)
    assert r.x[0] == pytest.approx(0.5, abs=1e-3)
    assert r.x[1] == pytest.approx(0.5, abs=1e-3)


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_bivariate_never_below_corners(cx, cy):
    f = lambda x, y: math.cos(3 * (x - cx)) * math.cos(2 * (y - cy))
    box = ((-1.0, 1.0), (-1.0, 1.0))
    r = maximize_bivariate(f, box)
    for x in box[0]:
        for y in box[1]:
            assert r.value >= f(x, y)


def test_directive_validation_and_restriction():
    with pytest.raises(ValueError):
        OptimizeDirective(())
    with pytest.raises(ValueError):
        OptimizeDirective(("mu",), {"mu": (1.0, 1.0)})
    with pytest.raises(ValueError):
        OptimizeDirective(("mu",), tolerance=0.0)
    d = OptimizeDirective(("mu", "chi"))
    assert d.restricted(("chi",)).variables == ("chi",)
    assert d.restricted(()) is None


def test_two_variable_directive_on_chi_only_protocol_matches_scalar_path():
    prof = get_profile("KTH15")
    grid = [0.0, 25.0, 50.0]
    both = sweep("bbm92-spdc", prof, grid, directive=OptimizeDirective(("mu", "chi")))
    chi = sweep("bbm92-spdc", prof, grid, directive=OptimizeDirective(("chi",)))
    assert both == chi


def test_maximize_by_name():
    best, res = maximize(lambda v: -((v["mu"] - 0.4) ** 2), OptimizeDirective(("mu",)))
    assert best["mu"] == pytest.approx(0.4, abs=1e-6)
    with pytest.raises(ValueError):
        maximize(lambda v: 0.0, OptimizeDirective(("mu", "chi", "nu"), {"mu": (0, 1), "chi": (0, 1), "nu": (0, 1)}))


def test_deterministic():
    f = lambda m: math.sin(7 * m) * math.exp(-m)
    assert maximize_scalar(f, (0.0, 3.0)) == maximize_scalar(f, (0.0, 3.0))
