import numpy as np
import pytest

from biharmonic_control import _kernels_py as py
from biharmonic_control import kernels

compiled = pytest.importorskip("biharmonic_control._kernels")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "python")
    assert compiled.BACKEND == "cython" and py.BACKEND == "python"


def test_expsum_agrees(rng):
    lam = rng.uniform(-100, 100, 7)
    amp = rng.normal(size=7) + 1j * rng.normal(size=7)
    t = np.linspace(0, 3, 501)
    assert np.allclose(compiled.expsum(lam, amp, t), py.expsum(lam, amp, t), atol=1e-12)


def test_cross_gram_agrees_including_near_coincident(rng):
    a = np.array([-2.0, 4.0, 4.0 + 1e-9, 50.0])
    b = np.concatenate([a, rng.uniform(-30, 30, 3)])
    g1, g2 = compiled.cross_gram(a, b, 1.3), py.cross_gram(a, b, 1.3)
    assert np.allclose(g1, g2, atol=1e-14)
    assert g1[1, 2] == pytest.approx(1.3, abs=1e-8)


def test_rk4_drive_agrees(rng):
    lam = np.array([-2.0, 4.0, 18.0, 40.0])
    gain = rng.uniform(0.5, 3.0, 4)
    y0 = rng.normal(size=4) + 1j * rng.normal(size=4)
    clam = np.array([3.0, -7.0])
    camp = np.array([1.0, 0.5j], dtype=complex)
    a = compiled.rk4_drive(lam, gain, y0, clam, camp, 1.0, 70_001)
    b = py.rk4_drive(lam, gain, y0, clam, camp, 1.0, 70_001)
    assert np.max(np.abs(a - b)) <= 1e-10
