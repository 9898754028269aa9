import math

import numpy as np
import pytest

from netspread.limits import (
    closed_form_bass_1d,
    closed_form_bass_compart,
    closed_form_si_1d,
    closed_form_si_compart,
    solve_1d_limit,
    solve_compartmental,
    solve_limit_for,
    solve_twogroups_limit,
)
from netspread.networks import CircleNetwork, GeneralNetwork
from netspread.schedules import RateSchedule

GRID = np.linspace(0.0, 10.0, 50)


def test_pure_external():
    np.testing.assert_allclose(solve_compartmental(1.0, 0.0, 0.0, GRID).f, 1 - np.exp(-GRID), atol=1e-8)


def test_bass_compartmental():
    f = solve_compartmental(0.1, 1.0, 0.0, GRID).f
    assert np.abs(f - closed_form_bass_compart(0.1, 1.0, GRID)).max() < 1e-8


def test_si_compartmental_value():
    f = solve_compartmental(0.0, 1.0, 0.5, [0.0, math.log(3)]).f
    assert f[-1] == pytest.approx(0.75, abs=1e-8)
    assert closed_form_si_compart(1.0, 0.5, math.log(3)) == pytest.approx(0.75)


def test_bass_1d():
    f = solve_1d_limit(0.1, 1.0, 0.0, GRID).f
    assert np.abs(f - closed_form_bass_1d(0.1, 1.0, GRID)).max() < 1e-8


def test_si_1d():
    f = solve_1d_limit(0.0, 1.0, 0.3, GRID).f
    assert np.abs(f - closed_form_si_1d(1.0, 0.3, GRID)).max() < 1e-8
    assert closed_form_si_1d(1.0, 0.5, 2.0) == pytest.approx(1 - 0.5 * math.exp(-1.0))


def test_1d_without_influence():
    p = RateSchedule.piecewise_constant([2.0], [0.2, 0.6])
    f = solve_1d_limit(p, 0.0, 0.1, GRID).f
    P = np.array([p.antiderivative(t) for t in GRID])
    np.testing.assert_allclose(f, 1 - 0.9 * np.exp(-P), atol=1e-8)


def test_two_groups_equal_is_compartmental():
    r = solve_twogroups_limit(0.2, 0.2, 1.5, 1.5, 0.1, 0.1, GRID)
    c = solve_compartmental(0.2, 1.5, 0.1, GRID)
    assert np.abs(r.f - c.f).max() < 1e-8


def test_two_groups_decoupled():
    r = solve_twogroups_limit(0.2, 0.5, 0.0, 0.0, 0.1, 0.3, GRID)
    np.testing.assert_allclose(r.parts["f1"], (1 - 0.9 * np.exp(-0.2 * GRID)) / 2, atol=1e-8)
    np.testing.assert_allclose(r.parts["f2"], (1 - 0.7 * np.exp(-0.5 * GRID)) / 2, atol=1e-8)


def test_bass_asymptote():
    assert closed_form_bass_compart(1.0, 10.0, 10.0) > 1 - 1e-4


def test_bass_needs_positive_p():
    with pytest.raises(ValueError):
        closed_form_bass_compart(0.0, 1.0, 1.0)


def test_dispatch():
    r = solve_limit_for(CircleNetwork(4, 0.1, 0.7, 0.3), GRID)
    np.testing.assert_allclose(r.f, closed_form_bass_1d(0.1, 1.0, GRID), atol=1e-8)
    with pytest.raises(ValueError):
        solve_limit_for(GeneralNetwork(2, 0.1, {}, 0.0), GRID)


def _fd(y, h):
    return (y[2:] - y[:-2]) / (2 * h)


@pytest.mark.parametrize("td", [False, True])
def test_product_ansatz_residual_compartmental(td):
    p = RateSchedule.ramp(0.1, 0.2, 5.0) if td else RateSchedule.constant(0.1)
    q = RateSchedule.piecewise_constant([1.0], [1.0, 2.0]) if td else RateSchedule.constant(1.0)
    h = 1e-3
    t = np.arange(0.0, 6.0 + h / 2, h)
    S = 1.0 - solve_compartmental(p, q, 0.0, t, 1e-12, 1e-14).f
    pt, qt = p(t[1:-1]), q(t[1:-1])
    # skip the stencils that straddle a kink of the rates
    ok = np.ones(t.size - 2, bool)
    for b in (1.0, 5.0):
        ok &= np.abs(t[1:-1] - b) > 1.5 * h
    for n in range(1, 6):
        lhs = _fd(S**n, h)
        rhs = -n * (pt + qt) * S[1:-1] ** n + n * qt * S[1:-1] ** (n + 1)
        assert np.abs(lhs - rhs)[ok].max() < 1e-6


def test_product_ansatz_residual_1d():
    p0, q0, I0 = 0.2, 1.0, 0.1
    h = 1e-3
    t = np.arange(0.0, 6.0 + h / 2, h)
    S1 = 1.0 - solve_1d_limit(p0, q0, I0, t, 1e-12, 1e-14).f
    base = (1 - I0) * np.exp(-p0 * t)
    for n in range(1, 6):
        Sn = base ** (n - 1) * S1
        Sn1 = base**n * S1
        lhs = _fd(Sn, h)
        rhs = -(n * p0 + q0) * Sn[1:-1] + q0 * Sn1[1:-1]
        assert np.abs(lhs - rhs).max() < 1e-6
