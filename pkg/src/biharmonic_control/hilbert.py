"""Coefficient-space states and the graded norms ||u||_theta^2 = sum |lambda_n|^(2 theta) |c_n|^2.

States are stored against the sorted mode tuple from
:func:`~biharmonic_control.spectrum.enumerate_modes`; the basis functions are
Phi_n(x) = sqrt(2/ell) sin(n pi x / ell) and do not depend on gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .errors import DimensionMismatch, GridTooCoarse
from .spectrum import ZERO, MediumParams, enumerate_modes, mode_arrays


@dataclass(frozen=True, eq=False)
class CoeffState:
    modes: tuple
    coeffs: np.ndarray
    meta: Optional[str] = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.shape[0] != len(self.modes):
            raise DimensionMismatch(f"{c.shape[0]} coefficients for {len(self.modes)} modes")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def arrays(self):
        return mode_arrays(self.modes)

    def with_coeffs(self, coeffs, meta=None) -> "CoeffState":
        return CoeffState(self.modes, coeffs, self.meta if meta is None else meta)

    def index_of(self, n: int) -> int:
        """Position of original mode index ``n`` in the sorted mode tuple."""
        for i, m in enumerate(self.modes):
            if m.n == n:
                return i
        raise KeyError(n)

    def by_index(self, n: int) -> complex:
        return complex(self.coeffs[self.index_of(n)])

    def __len__(self):
        return len(self.modes)


def zero_state(modes) -> CoeffState:
    return CoeffState(modes, np.zeros(len(modes), dtype=complex))


def unit_state(modes, n: int) -> CoeffState:
    """Unit vector on the mode with original index ``n``."""
    c = np.zeros(len(modes), dtype=complex)
    for i, m in enumerate(modes):
        if m.n == n:
            c[i] = 1.0
            return CoeffState(modes, c, meta=f"mode {n}")
    raise KeyError(f"mode {n} not in mode list")


def from_index_coeffs(modes, values: dict) -> CoeffState:
    """Build a state from ``{original index: coefficient}``."""
    c = np.zeros(len(modes), dtype=complex)
    pos = {m.n: i for i, m in enumerate(modes)}
    for n, v in values.items():
        c[pos[n]] = v
    return CoeffState(modes, c)


@dataclass(frozen=True, eq=False)
class ThetaWeight:
    theta: float
    weights: np.ndarray
    modes: tuple
    # original indices whose weight was replaced by 1 (zero eigenvalue)
    substituted: tuple = ()


def theta_weights(modes, theta: float) -> ThetaWeight:
    lam = mode_arrays(modes).lam
    w = np.empty(len(modes))
    sub = []
    for i, m in enumerate(modes):
        if m.kind == ZERO:
            w[i] = 1.0
            sub.append(m.n)
        else:
            w[i] = abs(lam[i]) ** (2.0 * theta)
    w.setflags(write=False)
    return ThetaWeight(float(theta), w, modes, tuple(sub))


def _check_same_modes(state: CoeffState, w: ThetaWeight):
    if len(w.weights) != len(state.coeffs) or (w.modes is not state.modes and w.modes != state.modes):
        raise DimensionMismatch("weights and state are built on different mode lists")


def norm_theta(state: CoeffState, w: ThetaWeight) -> float:
    _check_same_modes(state, w)
    return math.sqrt(float(np.sum(w.weights * np.abs(state.coeffs) ** 2)))


def inner(a: CoeffState, b: CoeffState) -> complex:
    """L^2 inner product sum a_n conj(b_n)."""
    if len(a) != len(b):
        raise DimensionMismatch("states of different length")
    return complex(np.vdot(b.coeffs, a.coeffs))


def basis_matrix(modes, x, ell: float) -> np.ndarray:
    """Phi_n(x_j) as a (len(x), len(modes)) array; exactly zero at the endpoints."""
    x = np.asarray(x, dtype=float)
    k = mode_arrays(modes).k
    B = math.sqrt(2.0 / ell) * np.sin(np.outer(x, k))
    B[(x <= 0.0) | (x >= ell), :] = 0.0
    return B


def project(samples, params: MediumParams, N: int, modes=None) -> CoeffState:
    """Simpson-rule coefficients c_n = int_0^ell z0(x) Phi_n(x) dx on a uniform grid.

    ``samples`` are values on ``numpy.linspace(0, ell, len(samples))``.
    """
    samples = np.asarray(samples)
    M = samples.shape[0]
    if M < 2 * N + 2:
        raise GridTooCoarse(f"{M} grid points cannot resolve mode {N}; need at least {2 * N + 2}")
    if modes is None:
        modes = enumerate_modes(params, N)
    x = np.linspace(0.0, params.ell, M)
    B = basis_matrix(modes, x, params.ell)
    c = simpson(samples[:, None] * B, dx=x[1] - x[0], axis=0)
    return CoeffState(modes, c)


def synthesize(state: CoeffState, x, ell: float) -> np.ndarray:
    return basis_matrix(state.modes, x, ell) @ state.coeffs
