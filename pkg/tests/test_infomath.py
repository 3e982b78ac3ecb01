import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import assume, given, settings, strategies as st

from qkdopt.infomath import (
    CascadeCubic,
    Constant,
    Custom,
    ShannonLimit,
    asymptotic_key_rate,
    binary_entropy,
    conditional_entropy,
    ec_cost,
    parse_ec_model,
)

mp.mp.dps = 40


def mp_h2(x):
    x = mp.mpf(x)
    if x == 0 or x == 1:
        return mp.mpf(0)
    return -x * mp.log(x, 2) - (1 - x) * mp.log1p(-x) / mp.log(2)


def mp_cond(e_b, e_p, a):
    e_b, e_p, a = mp.mpf(e_b), mp.mpf(e_p), mp.mpf(a)

    def t(x, y):
        return mp.mpf(0) if x <= 0 else x * mp.log(x / y, 2)

    return -(t(1 + a - e_b - e_p, 1 - e_b) + t(e_p - a, 1 - e_b) + t(e_b - a, e_b) + t(a, e_b))


def test_binary_entropy_anchor_values():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(0.49991, abs=1e-5)
    assert binary_entropy(0.11) == pytest.approx(float(mp_h2(0.11)), rel=1e-14)


@given(st.floats(1e-300, 1.0 - 1e-16))
def test_binary_entropy_matches_mpmath(x):
    assert binary_entropy(x) == pytest.approx(float(mp_h2(x)), rel=1e-12, abs=1e-300)


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric_and_bounded(x):
    assert 0.0 <= binary_entropy(x) <= 1.0
    assert binary_entropy(x) == pytest.approx(binary_entropy(1.0 - x), abs=1e-12)


@pytest.mark.parametrize("x", [-1e-9, 1.0 + 1e-9, math.nan])
def test_binary_entropy_domain(x):
    with pytest.raises(ValueError):
        binary_entropy(x)


def test_ec_models():
    assert ec_cost(CascadeCubic(), 0.0) == 1.1581
    # 1.1581 + 57.2 * 0.05**3, evaluated exactly in rationals.
    assert ec_cost(CascadeCubic(), 0.05) == pytest.approx(float(Fraction("1.1581") + Fraction("57.2") * Fraction(1, 20) ** 3), abs=1e-12)
    assert ec_cost(ShannonLimit(), 0.3) == 1.0
    assert ec_cost(Constant(), 0.2) == 1.33
    with pytest.raises(ValueError):
        Constant(0.9)
    with pytest.raises(ValueError):
        ec_cost(CascadeCubic(), 0.6)


@given(st.floats(0.0, 0.5))
def test_builtin_ec_models_at_least_one(x):
    for model in (ShannonLimit(), Constant(), CascadeCubic()):
        assert ec_cost(model, x) >= 1.0


def test_custom_table_interpolates_and_holds():
    m = Custom((0.0, 0.1, 0.2), (1.1, 1.2, 1.5))
    assert m.cost(0.05) == pytest.approx(1.15)
    assert m.cost(0.15) == pytest.approx(1.35)
    assert m.cost(0.4) == 1.5
    with pytest.raises(ValueError):
        Custom((0.2, 0.1), (1.0, 1.0))


@pytest.mark.parametrize(
    "text, expected",
    [
        ("shannon", ShannonLimit()),
        ("cascade", CascadeCubic()),
        ("const", Constant(1.33)),
        ("const:1.2", Constant(1.2)),
        ("table:0:1.1,0.1:1.2", Custom((0.0, 0.1), (1.1, 1.2))),
    ],
)
def test_parse_ec_model(text, expected):
    assert parse_ec_model(text) == expected
    assert parse_ec_model(expected.spec()) == expected


@pytest.mark.parametrize("text", ["", "cubic", "shannon:1", "table:", "table:0.1"])
def test_parse_ec_model_rejects(text):
    with pytest.raises(ValueError):
        parse_ec_model(text)


def test_conditional_entropy_examples():
    assert conditional_entropy(0.2, 0.2, 0.2) == 0.0
    assert conditional_entropy(0.1, 0.1, 0.01) == pytest.approx(binary_entropy(0.1), abs=1e-12)
    assert conditional_entropy(0.1, 0.1, 0.01) == pytest.approx(0.46900, abs=5e-6)
    # Oracle: 40-digit term-by-term evaluation.
    assert conditional_entropy(0.1, 0.2, 0.02) == pytest.approx(float(mp_cond(0.1, 0.2, 0.02)), abs=1e-14)


@settings(max_examples=300)
@given(st.floats(1e-9, 1 - 1e-9), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_conditional_entropy_matches_mpmath(e_b, e_p, t):
    lo, hi = max(0.0, e_b + e_p - 1.0), min(e_b, e_p)
    a = lo + t * (hi - lo)
    got = conditional_entropy(e_b, e_p, a)
    assert got == pytest.approx(max(float(mp_cond(e_b, e_p, a)), 0.0), abs=1e-12)
    assert 0.0 <= got <= binary_entropy(e_p) + 1e-12


@given(st.floats(1e-6, 0.5), st.floats(1e-6, 0.5))
def test_independence_collapses_to_h2(e_b, e_p):
    assert conditional_entropy(e_b, e_p, e_b * e_p) == pytest.approx(binary_entropy(e_p), abs=1e-10)


def test_conditional_entropy_bound_violations_name_the_bound():
    with pytest.raises(ValueError, match="upper bound"):
        conditional_entropy(0.1, 0.2, 0.15)
    with pytest.raises(ValueError, match="lower bound"):
        conditional_entropy(0.8, 0.7, 0.1)
    with pytest.raises(ValueError):
        conditional_entropy(1.2, 0.1, 0.0)


def test_asymptotic_key_rate_examples():
    assert asymptotic_key_rate(0.01, 0.0, 0.02, 0.0, CascadeCubic()) == 0.01
    assert asymptotic_key_rate(0.01, 0.5, 0.01, 0.5, CascadeCubic()) == pytest.approx(-0.01 * CascadeCubic().cost(0.5))
    h = float(mp_h2(0.05))
    expected = 0.01 * (1 - h) - 0.012 * 1.16525 * h
    assert asymptotic_key_rate(0.01, 0.05, 0.012, 0.05, CascadeCubic()) == pytest.approx(expected, abs=1e-12)
    assert asymptotic_key_rate(0.01, 0.05, 0.012, 0.05, CascadeCubic()) == pytest.approx(0.0031313, abs=5e-8)


@given(st.floats(0.0, 1.0), st.floats(0.0, 0.5), st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_key_rate_decreases_with_errors(Q, e1, e2, E):
    assume(e1 <= e2)
    k1 = asymptotic_key_rate(Q, e1, Q, E, ShannonLimit())
    k2 = asymptotic_key_rate(Q, e2, Q, E, ShannonLimit())
    assert k1 >= k2 - 1e-15
