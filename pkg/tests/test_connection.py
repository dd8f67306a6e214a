import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softrgg import (
    Hard,
    Tabulated,
    evaluate,
    generalized_inverse,
    l1_norm,
    make_connection,
    mean_degree,
    rayleigh,
    solve_rc_for_mean_degree,
    waxman,
    with_scale,
)
from softrgg.connection import GeneralizedExponential
from softrgg.errors import InfeasibleTargetError, InvalidParameterError

mp.mp.dps = 30


def test_eval_examples():
    assert evaluate(waxman(), 0.0) == 1.0
    assert evaluate(rayleigh(), 1.0) == pytest.approx(math.exp(-1), abs=1e-15)
    assert evaluate(Hard(2.0), 2.000001) == 0.0
    assert evaluate(Hard(2.0), 2.0) == 1.0


def test_eval_array_in_unit_interval():
    r = np.linspace(0, 50, 1001)
    for cf in (waxman(2, 0.7), rayleigh(), Hard(3), GeneralizedExponential(1.5, 4.0, 0.9)):
        h = evaluate(cf, r)
        assert h.shape == r.shape
        assert np.all((h >= 0) & (h <= 1))


def test_l1_examples():
    assert l1_norm(waxman()) == 1.0
    assert l1_norm(rayleigh()) == pytest.approx(0.8862269255, abs=1e-9)
    for cf in (waxman(1.3), rayleigh(0.4, 0.5), Hard(2.0), GeneralizedExponential(1, 4, 0.5)):
        for s in (0.1, 3.0, 17.0):
            assert l1_norm(with_scale(cf, s)) == pytest.approx(s * l1_norm(cf), rel=1e-12)


def test_inverse_examples():
    assert generalized_inverse(waxman(), math.exp(-1)) == pytest.approx(1.0, rel=1e-15)
    assert generalized_inverse(rayleigh(), 0.5) == pytest.approx(0.832555, abs=1e-6)
    assert generalized_inverse(Hard(2.0), 0.5) == 2.0
    with pytest.raises(InvalidParameterError):
        generalized_inverse(waxman(beta=0.5), 0.6)


def _bisect_inverse(cf, p):
    lo, hi = 0.0, 1.0
    while cf(hi) >= p:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if cf(mid) >= p else (lo, mid)
    return lo


@pytest.mark.parametrize("p", [0.9, 0.5, 0.1, 1e-6])
def test_inverse_matches_bisection(p):
    cf = rayleigh()
    assert generalized_inverse(cf, p) == pytest.approx(_bisect_inverse(cf, p), rel=1e-12)


def test_mean_degree_examples():
    assert mean_degree(waxman(), 1e6, "torus") == pytest.approx(2.0, abs=1e-6)
    assert mean_degree(Hard(1.0), 10, "torus") == 2.0
    assert mean_degree(Hard(7.0), 10, "torus") == 10.0
    for cf in (waxman(3), rayleigh(2), Hard(1.5)):
        for L in (1.0, 10.0, 100.0):
            assert mean_degree(cf, L, "torus") <= 2 * l1_norm(cf) + 1e-12


def test_line_mean_degree_matches_position_average():
    cf, L = waxman(2.0), 30.0
    # average over x of the integral of H(|x - y|) for y in [0, L]
    f = lambda x: mp.quad(lambda y: mp.exp(-abs(x - y) / 2), [0, x, L])
    oracle = mp.quad(f, [0, L]) / L
    assert mean_degree(cf, L, "line") == pytest.approx(float(oracle), rel=1e-10)


def test_solve_rc_examples():
    L = 1000.0
    rc = solve_rc_for_mean_degree(math.log(L), L, "torus", "waxman")
    assert rc == pytest.approx(3.45388, abs=1e-5)
    assert 2 * rc * (1 - math.exp(-L / (2 * rc))) == pytest.approx(math.log(L), rel=1e-12)
    assert solve_rc_for_mean_degree(4.0, L, "torus", "hard") == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("family", ["waxman", "rayleigh", "hard"])
@pytest.mark.parametrize("boundary", ["torus", "line"])
@pytest.mark.parametrize("kbar", [2.0, 5.0, 10.0])
def test_solve_rc_round_trip(family, boundary, kbar):
    rc = solve_rc_for_mean_degree(kbar, 200.0, boundary, family)
    cf = make_connection(family, rc)
    assert mean_degree(cf, 200.0, boundary) == pytest.approx(kbar, rel=1e-7)


def test_solve_rc_infeasible():
    with pytest.raises(InfeasibleTargetError):
        solve_rc_for_mean_degree(25.0, 20.0, "torus", "waxman")


def test_with_scale_examples():
    cf = waxman()
    assert evaluate(with_scale(cf, 3.0), 3.0) == pytest.approx(math.exp(-1), rel=1e-15)
    r = np.linspace(0, 10, 101)
    for c in (waxman(1.7), rayleigh(0.3), Hard(2.0)):
        np.testing.assert_array_equal(evaluate(with_scale(c, 1.0), r), evaluate(c, r))


@pytest.mark.parametrize("beta", [0.5, 1.0])
@pytest.mark.parametrize("eta", [1.0, 2.0, 4.0])
@pytest.mark.parametrize("rc", [0.5, 1.0, 5.0])
def test_closed_forms_against_quadrature(beta, eta, rc):
    cf = GeneralizedExponential(rc, eta, beta)
    h = lambda r: beta * mp.exp(-((r / rc) ** eta))
    l1 = mp.quad(h, [0, rc, 10 * rc, mp.inf])
    assert l1_norm(cf) == pytest.approx(float(l1), rel=1e-8)
    for L in (3.0, 40.0):
        torus = 2 * mp.quad(h, [0, min(rc, L / 2), L / 2])
        assert mean_degree(cf, L, "torus") == pytest.approx(float(torus), rel=1e-8)
        line = 2 * mp.quad(h, [0, min(rc, L), L]) - 2 / L * mp.quad(lambda r: r * h(r), [0, min(rc, L), L])
        assert mean_degree(cf, L, "line") == pytest.approx(float(line), rel=1e-8)


cfs = st.one_of(
    st.builds(GeneralizedExponential, st.floats(0.1, 10), st.floats(0.5, 5), st.floats(0.05, 1)),
    st.builds(Hard, st.floats(0.1, 10)),
)


@settings(max_examples=200, deadline=None)
@given(cfs, st.floats(0, 50), st.floats(0, 50))
def test_monotone(cf, r1, r2):
    lo, hi = sorted((r1, r2))
    assert evaluate(cf, lo) >= evaluate(cf, hi)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.5, 5), st.floats(0.05, 1), st.floats(1e-9, 1))
def test_inverse_is_right_inverse(rc, eta, beta, frac):
    cf = GeneralizedExponential(rc, eta, beta)
    p = frac * beta
    assert evaluate(cf, generalized_inverse(cf, p)) >= p - 1e-10


def test_tabulated_validation_and_moments():
    tab = Tabulated.from_pairs([(0, 1.0), (1, 0.5), (3, 0.0)])
    assert tab(0.5) == pytest.approx(0.75)
    assert tab(5.0) == 0.0
    assert l1_norm(tab) == pytest.approx(0.75 + 0.5)
    assert generalized_inverse(tab, 0.5) == pytest.approx(1.0)
    assert mean_degree(tab, 100.0, "torus") == pytest.approx(2.5)
    with pytest.raises(InvalidParameterError):
        Tabulated.from_pairs([(0, 0.5), (1, 0.7)])
    with pytest.raises(InvalidParameterError):
        Tabulated.from_pairs([(0.1, 0.5), (1, 0.2)])
    with pytest.raises(InvalidParameterError):
        Tabulated.from_pairs([(0, 1.5), (1, 0.2)])


def test_tabulated_line_degree_against_quadrature():
    tab = Tabulated.from_pairs([(0, 0.9), (0.5, 0.6), (2, 0.1), (4, 0.0)], scale=1.5)
    L = 9.0
    h = lambda r: float(tab(float(r)))
    knots = [0, 0.75, 3, 6]
    line = 2 * mp.quad(h, knots + [L]) - 2 / L * mp.quad(lambda r: r * h(r), knots + [L])
    assert mean_degree(tab, L, "line") == pytest.approx(float(line), rel=1e-9)


def test_family_parsing_errors():
    with pytest.raises(InvalidParameterError):
        make_connection("rayleigh", eta=3.0)
    with pytest.raises((InvalidParameterError, TypeError)):
        make_connection("zigzag")
    with pytest.raises(InvalidParameterError):
        waxman(-1.0)
