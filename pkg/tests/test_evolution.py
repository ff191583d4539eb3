import math

import numpy as np
import pytest

import biharmonic_control.evolution as ev
from biharmonic_control.errors import QuadratureUnderResolved, StepTooLarge, UnresolvedSignConvention
from biharmonic_control.evolution import (
    boundary_trace,
    controlled_evolve,
    duality_defect,
    energy,
    free_evolve,
    gauss_legendre_grid,
    green_identity_defect,
    rk4_oracle,
    solution_map_norm,
)
from biharmonic_control.hilbert import CoeffState, theta_weights, unit_state, zero_state
from biharmonic_control.observability import invisible_mode
from biharmonic_control.signal import ControlSignal
from biharmonic_control.spectrum import enumerate_modes, make_params

PI = math.pi


def random_state(rng, modes):
    n = len(modes)
    return CoeffState(modes, rng.normal(size=n) + 1j * rng.normal(size=n))


def test_free_evolve_examples(p3, rng):
    modes = enumerate_modes(p3, 6)
    s = random_state(rng, modes)
    assert np.array_equal(free_evolve(s, 0.0).coeffs, s.coeffs)
    assert np.allclose(np.abs(free_evolve(s, 3.7).coeffs), np.abs(s.coeffs), rtol=1e-15)
    u = unit_state(modes, 1)
    assert free_evolve(u, PI).by_index(1) == pytest.approx(1.0, abs=1e-14)


def test_trace_invisible_mode(p5):
    z = invisible_mode(p5, (1, 2), 8)
    vals = boundary_trace(z, np.linspace(0, 10, 1000)).values
    assert np.max(np.abs(vals)) <= 1e-12


def test_trace_single_mode(p3):
    modes = enumerate_modes(p3, 5)
    s = CoeffState(modes, [0, 0, 2.5 - 1j, 0, 0])
    n = s.modes[2].n
    assert boundary_trace(s, [0.0]).values[0] == pytest.approx((2.5 - 1j) * math.sqrt(2 / PI) * n)


def test_trace_time_average_converges(p3):
    modes = enumerate_modes(p3, 3)
    c = np.array([0.7, 0.0, -0.4 + 0.2j])
    s = CoeffState(modes, c)
    tr = np.array([m.trace0 for m in modes])
    limit = np.sum(np.abs(c * tr) ** 2)
    dl = modes[2].lam - modes[0].lam
    for T in (10.0, 100.0, 1000.0):
        t, w = gauss_legendre_grid(T, 4000)
        avg = np.sum(w * np.abs(boundary_trace(s, t).values) ** 2) / T
        cross = 2 * abs(c[0] * tr[0] * c[2] * tr[2])
        assert abs(avg - limit) <= cross * 2 / (dl * T) + 1e-9


def test_energy_examples(p3, rng):
    modes = enumerate_modes(p3, 10)
    s = random_state(rng, modes)
    for theta in (0.0, 0.25, -0.25):
        w = theta_weights(modes, theta)
        assert energy(s, w, 17.3) == pytest.approx(energy(s, w, 0.0), rel=1e-12)
    w = theta_weights(modes, 0.0)
    assert energy(zero_state(modes), w, 2.0) == 0.0
    assert energy(unit_state(modes, 4), w, 9.1) == pytest.approx(1.0, rel=1e-15)


def test_controlled_zero_forcing_is_free(p3, rng):
    modes = enumerate_modes(p3, 8)
    y0 = random_state(rng, modes)
    out = controlled_evolve(y0, ControlSignal.zero(1.3), 1.3)
    assert np.allclose(out.coeffs, free_evolve(y0, 1.3).coeffs, atol=1e-14)


def test_resonant_forcing_grows_linearly(p3):
    modes = enumerate_modes(p3, 6)
    target = modes[3]
    for T in (1.0, 2.0, 4.0):
        f = ControlSignal([target.lam], [1.0], T)
        yT = controlled_evolve(zero_state(modes), f, T)
        assert abs(yT.by_index(target.n)) == pytest.approx(target.trace0 * T, rel=1e-13)
        for m in modes:
            if m.n != target.n:
                assert abs(yT.by_index(m.n)) <= 2 * m.trace0 / abs(m.lam - target.lam) + 1e-13


def test_sampled_control_matches_closed_form(p3, rng):
    modes = enumerate_modes(p3, 8)
    y0 = random_state(rng, modes)
    f = ControlSignal(rng.uniform(-50, 50, size=5), rng.normal(size=5) + 1j * rng.normal(size=5), 0.8)
    exact = controlled_evolve(y0, f, 0.8)
    sampled = controlled_evolve(y0, lambda t: f(t), 0.8, panels=2000)
    assert np.max(np.abs(exact.coeffs - sampled.coeffs)) <= 1e-10
    with pytest.raises(QuadratureUnderResolved):
        controlled_evolve(y0, lambda t: f(t), 0.8, panels=10)


def test_rk4_free_single_mode(p3):
    modes = enumerate_modes(p3, 4)
    u = unit_state(modes, 4)
    lam = modes[-1].lam
    T = 50.0 / abs(lam)
    out = rk4_oracle(u, ControlSignal.zero(T), T, 10_000)
    assert abs(out.by_index(4) - np.exp(1j * lam * T)) <= 1e-8


def test_rk4_matches_duhamel_random_control(rng):
    p = make_params(-3.0, PI)
    modes = enumerate_modes(p, 8)
    y0 = random_state(rng, modes)
    lam_max = max(abs(m.lam) for m in modes)
    f = ControlSignal(rng.uniform(-lam_max, lam_max, 6), 0.3 * (rng.normal(size=6) + 1j * rng.normal(size=6)), 0.5)
    exact = controlled_evolve(y0, f, 0.5)
    out = rk4_oracle(y0, f, 0.5, 400_000)
    assert np.max(np.abs(out.coeffs - exact.coeffs)) <= 1e-6


def test_rk4_fourth_order(rng):
    p = make_params(-3.0, PI)
    modes = enumerate_modes(p, 4)
    y0 = random_state(rng, modes)
    f = ControlSignal([10.0, -3.0], [1.0, 0.5j], 1.0)
    exact = controlled_evolve(y0, f, 1.0)
    errs = [np.max(np.abs(rk4_oracle(y0, f, 1.0, s).coeffs - exact.coeffs)) for s in (4000, 8000)]
    assert 14.0 < errs[0] / errs[1] < 18.0


def test_rk4_step_guard(p3):
    modes = enumerate_modes(p3, 8)
    with pytest.raises(StepTooLarge):
        rk4_oracle(unit_state(modes, 1), ControlSignal.zero(1.0), 1.0, 100)


def test_green_identity_holds(rng):
    for gamma, ell in ((-3.0, PI), (-12.5, 0.7), (-0.2, 4.0)):
        f0 = complex(*rng.normal(size=2))
        free = (complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
        assert green_identity_defect(make_params(gamma, ell), 10, f0, free) <= 1e-9


def test_duality_identity_random_triples(rng):
    p = make_params(-4.4, 1.8)
    for _ in range(8):
        y0, z0, f = ev._random_triple(rng, p, 8, 0.9)
        assert duality_defect(y0, z0, f, 0.9) <= 1e-8


def test_wrong_sign_is_caught(monkeypatch, p3, rng):
    monkeypatch.setattr(ev, "BOUNDARY_TERM_SIGN", -1.0)
    with pytest.raises(UnresolvedSignConvention):
        ev.check_sign_convention()
    with pytest.raises(UnresolvedSignConvention):
        controlled_evolve(unit_state(enumerate_modes(p3, 2), 1), ControlSignal.zero(1.0), 1.0)


def test_solution_map_bounded_under_refinement(p3):
    norms = [solution_map_norm(p3, N, 1.0) for N in (8, 16, 32)]
    assert max(norms) / min(norms) <= 1.5
    assert all(np.isfinite(norms))


def _textbook_rk4(lam, gain, y0, f, T, steps):
    h = T / steps
    y = np.array(y0, dtype=complex)

    def rhs(t, y):
        return 1j * lam * y + 1j * gain * f(t)[0]

    for k in range(steps):
        t = k * h
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def test_kernel_is_classical_rk4(rng):
    p = make_params(-3.0, PI)
    modes = enumerate_modes(p, 3)
    y0 = random_state(rng, modes)
    f = ControlSignal([5.0, -2.0], [0.4, 1j], 1.0)
    arr = y0.arrays
    ref = _textbook_rk4(arr.lam, arr.trace0, y0.coeffs, f, 1.0, 700)
    assert np.max(np.abs(rk4_oracle(y0, f, 1.0, 700).coeffs - ref)) <= 1e-12
