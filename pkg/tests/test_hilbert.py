import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biharmonic_control.errors import DimensionMismatch, GridTooCoarse
from biharmonic_control.hilbert import (
    CoeffState,
    inner,
    norm_theta,
    project,
    synthesize,
    theta_weights,
    unit_state,
    zero_state,
)
from biharmonic_control.spectrum import enumerate_modes, make_params

PI = math.pi


def parabola_coeff(n):
    # int_0^pi x (pi - x) sqrt(2/pi) sin(n x) dx, by two integrations by parts
    return math.sqrt(2 / PI) * 2 * (1 - (-1) ** n) / n**3


def test_project_single_mode(p3):
    x = np.linspace(0, PI, 4097)
    s = project(math.sqrt(2 / PI) * np.sin(3 * x), p3, 8)
    for m, c in zip(s.modes, s.coeffs):
        assert abs(c - (1.0 if m.n == 3 else 0.0)) <= 1e-8


def test_project_parabola(p3):
    x = np.linspace(0, PI, 4097)
    s = project(x * (PI - x), p3, 4)
    for m, c in zip(s.modes, s.coeffs):
        assert c == pytest.approx(parabola_coeff(m.n), abs=1e-10)


def test_project_zero_and_coarse(p3):
    assert not np.any(project(np.zeros(101), p3, 8).coeffs)
    with pytest.raises(GridTooCoarse):
        project(np.zeros(17), p3, 8)


def test_norm_examples(p3):
    modes = enumerate_modes(p3, 6)
    w0, w4 = theta_weights(modes, 0.0), theta_weights(modes, 0.25)
    for n in range(1, 7):
        u = unit_state(modes, n)
        assert norm_theta(u, w0) == pytest.approx(1.0)
        lam = abs(n * n * (n * n - 3.0))
        assert norm_theta(u, w4) == pytest.approx(lam**0.25)
    st2 = CoeffState(enumerate_modes(p3, 2), [1.0, 1.0])
    assert norm_theta(st2, theta_weights(st2.modes, 0.25)) == pytest.approx(math.sqrt(math.sqrt(2) + 2))


def test_norm_dimension_mismatch(p3):
    s = unit_state(enumerate_modes(p3, 4), 1)
    with pytest.raises(DimensionMismatch):
        norm_theta(s, theta_weights(enumerate_modes(p3, 5), 0.0))
    with pytest.raises(DimensionMismatch):
        CoeffState(enumerate_modes(p3, 4), [1, 2, 3])


def test_nonfinite_rejected(p3):
    with pytest.raises(ValueError):
        CoeffState(enumerate_modes(p3, 2), [1.0, np.nan])


def test_zero_mode_weight_substitution():
    p = make_params(-1.0, PI)
    w = theta_weights(enumerate_modes(p, 4), 0.25)
    assert w.substituted == (1,)
    assert np.all(w.weights > 0)


def test_synthesize_examples(p3):
    modes = enumerate_modes(p3, 5)
    x = np.linspace(0, PI, 33)
    assert np.allclose(synthesize(unit_state(modes, 4), x, PI), math.sqrt(2 / PI) * np.where((x > 0) & (x < PI), np.sin(4 * x), 0))
    vals = synthesize(CoeffState(modes, np.ones(5)), x, PI)
    assert vals[0] == 0 and vals[-1] == 0
    assert not np.any(synthesize(zero_state(modes), x, PI))


def test_round_trip_parabola_within_truncation_tail(p3):
    x = np.linspace(0, PI, 8193)
    f = x * (PI - x)
    err = np.max(np.abs(synthesize(project(f, p3, 64), x, PI) - f))
    tail = sum(abs(parabola_coeff(n)) * math.sqrt(2 / PI) for n in range(65, 200001))
    assert err <= tail + 1e-9


def test_parseval(p3):
    x = np.linspace(0, PI, 8193)
    s = project(x * (PI - x), p3, 64)
    exact = math.sqrt(PI**5 / 30)
    assert abs(norm_theta(s, theta_weights(s.modes, 0.0)) - exact) / exact <= 1e-6


def test_round_trip_identity_on_span(p3, rng):
    modes = enumerate_modes(p3, 16)
    s = CoeffState(modes, rng.normal(size=16) + 1j * rng.normal(size=16))
    x = np.linspace(0, PI, 2049)
    back = project(synthesize(s, x, PI), p3, 16)
    assert np.max(np.abs(back.coeffs - s.coeffs)) <= 1e-8


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.25, 0.5, 1.0]))
def test_weighted_cauchy_schwarz(seed, theta):
    r = np.random.default_rng(seed)
    modes = enumerate_modes(make_params(-7.3, 1.9), 12)
    a = CoeffState(modes, r.normal(size=12) + 1j * r.normal(size=12))
    c = CoeffState(modes, r.normal(size=12) + 1j * r.normal(size=12))
    lhs = abs(inner(a, c))
    rhs = norm_theta(a, theta_weights(modes, -theta)) * norm_theta(c, theta_weights(modes, theta))
    assert lhs <= rhs * (1 + 1e-12)
