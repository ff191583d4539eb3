"""Closed-form spectrum of phi'''' - gamma phi'' = lambda phi with hinged ends.

For gamma < 0 every eigenfunction is a pure sine, sin(n pi x / ell), with
eigenvalue k^2 (k^2 + gamma), k = n pi / ell. Two distinct indices p < q give
the same eigenvalue exactly when p^2 + q^2 = -gamma ell^2 / pi^2; those are the
resonant pairs where the boundary control loses a direction.

The characteristic-equation helpers at the bottom of the module are
deliberately written only in terms of the branch wavenumbers eta, xi, xi_bar,
so they can serve as an oracle for the closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import (
    InsufficientModes,
    LambdaBelowSpectralFloor,
    NonNegativeGamma,
    NonPositiveEigenvalue,
    NonPositiveLength,
)

DEFAULT_INT_TOL = 1e-9
ZERO_EIG_TOL = 1e-9

POSITIVE = "positive"
ZERO = "zero"
NEGATIVE = "negative"


@dataclass(frozen=True)
class MediumParams:
    """Dispersion coefficient ``gamma`` (< 0) and interval length ``ell``."""

    gamma: float
    ell: float
    n0: int = field(init=False)

    def __post_init__(self):
        if not self.ell > 0 or not math.isfinite(self.ell):
            raise NonPositiveLength(f"interval length must be > 0, got {self.ell!r}")
        if not self.gamma < 0 or not math.isfinite(self.gamma):
            raise NonNegativeGamma(f"gamma must be < 0, got {self.gamma!r}")
        object.__setattr__(self, "n0", math.floor(self.ell * math.sqrt(-self.gamma) / math.pi) + 1)

    @property
    def floor(self) -> float:
        """Spectral lower bound -gamma^2/4."""
        return -0.25 * self.gamma * self.gamma

    @property
    def s_value(self) -> float:
        return -self.gamma * self.ell**2 / math.pi**2


@dataclass(frozen=True)
class Mode:
    n: int
    k: float
    lam: float
    trace0: float
    kind: str
    partner: Optional[int] = None


@dataclass(frozen=True)
class ResonanceInfo:
    resonant: bool
    pairs: tuple
    zero_mode: Optional[int]
    s_value: float
    # largest relative mismatch |p^2+q^2-s|/max(1,s) over the accepted pairs
    defect: float = 0.0


def make_params(gamma: float, ell: float) -> MediumParams:
    return MediumParams(float(gamma), float(ell))


def wavenumber(params: MediumParams, n) -> float:
    # n * (pi/ell) keeps k integral when ell == pi
    return n * (math.pi / params.ell)


def eigenvalue(params: MediumParams, n: int) -> float:
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    k2 = wavenumber(params, n) ** 2
    return k2 * (k2 + params.gamma)


def eigenvalues(params: MediumParams, N: int) -> np.ndarray:
    """lambda_1..lambda_N in index order (not sorted)."""
    k2 = (np.arange(1, N + 1) * (math.pi / params.ell)) ** 2
    return k2 * (k2 + params.gamma)


def _rel_defect(value, s):
    return abs(value - s) / max(1.0, s)


def resonance_check(params: MediumParams, int_tol: float = DEFAULT_INT_TOL) -> ResonanceInfo:
    if int_tol < 0:
        raise ValueError("int_tol must be >= 0")
    s = params.s_value
    qmax = math.ceil(math.sqrt(s)) + 1
    pairs = []
    defect = 0.0
    for p in range(1, qmax + 1):
        for q in range(p + 1, qmax + 1):
            d = _rel_defect(p * p + q * q, s)
            if d <= int_tol:
                pairs.append((p, q))
                defect = max(defect, d)
    zero_mode = None
    for p in range(1, qmax + 1):
        if _rel_defect(p * p, s) <= int_tol:
            zero_mode = p
            break
    return ResonanceInfo(bool(pairs), tuple(pairs), zero_mode, s, defect)


def classify(params: MediumParams, lam: float) -> str:
    if abs(lam) <= ZERO_EIG_TOL * max(1.0, -params.floor):
        return ZERO
    return POSITIVE if lam > 0 else NEGATIVE


@lru_cache(maxsize=256)
def enumerate_modes(params: MediumParams, N: int, int_tol: float = DEFAULT_INT_TOL) -> tuple:
    """Modes 1..N sorted by eigenvalue, ties broken by index.

    Partners are filled from `resonance_check` even when the partner index
    lies beyond N.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    info = resonance_check(params, int_tol)
    partner = {}
    for p, q in info.pairs:
        partner[p] = q
        partner[q] = p
    scale = math.sqrt(2.0 / params.ell)
    modes = []
    for n in range(1, N + 1):
        k = wavenumber(params, n)
        lam = k * k * (k * k + params.gamma)
        modes.append(Mode(n, k, lam, scale * k, classify(params, lam), partner.get(n)))
    modes.sort(key=lambda m: (m.lam, m.n))
    return tuple(modes)


@dataclass(frozen=True)
class ModeArrays:
    n: np.ndarray
    k: np.ndarray
    lam: np.ndarray
    trace0: np.ndarray


@lru_cache(maxsize=512)
def mode_arrays(modes: tuple) -> ModeArrays:
    arrs = ModeArrays(
        np.array([m.n for m in modes], dtype=np.int64),
        np.array([m.k for m in modes]),
        np.array([m.lam for m in modes]),
        np.array([m.trace0 for m in modes]),
    )
    for a in (arrs.n, arrs.k, arrs.lam, arrs.trace0):
        a.setflags(write=False)
    return arrs


def spectral_gap_floor(params: MediumParams, N: int) -> float:
    if N <= params.n0:
        raise ValueError(f"N must exceed n0={params.n0}, got {N}")
    lam = eigenvalues(params, N)
    return float(np.min(np.diff(lam[params.n0 - 1:])))


def trace_ratio(params: MediumParams, n: int) -> float:
    """|Phi_n'(0)| / lambda_n^(1/4); tends to sqrt(2/ell)."""
    lam = eigenvalue(params, n)
    if classify(params, lam) != POSITIVE:
        raise NonPositiveEigenvalue(f"lambda_{n} = {lam!r} is not positive")
    return math.sqrt(2.0 / params.ell) * wavenumber(params, n) / lam**0.25


def upper_density_estimate(params: MediumParams, r: float, N: int) -> float:
    """Max number of eigenvalues in a window of length r inside [lambda_min, lambda_max], over r."""
    if r <= 0:
        raise ValueError("window length must be positive")
    lam = np.sort(eigenvalues(params, N))
    lo, hi = lam[0], lam[-1]
    if hi <= lo + r:
        raise InsufficientModes(f"lambda range [{lo}, {hi}] does not contain a window of length {r}")
    starts = np.concatenate([lam, lam - r])
    starts = starts[(starts >= lo) & (starts <= hi - r)]
    starts = np.append(starts, [lo, hi - r])
    counts = np.searchsorted(lam, starts + r, side="right") - np.searchsorted(lam, starts, side="left")
    return float(counts.max()) / r


# ---------------------------------------------------------------------------
# characteristic equation (independent oracle)


def _branches(params: MediumParams, lam: float):
    g = params.gamma
    disc = g * g + 4.0 * lam
    if disc < 0:
        if disc >= -16.0 * np.finfo(float).eps * g * g:
            disc = 0.0
        else:
            raise LambdaBelowSpectralFloor(f"lambda={lam!r} is below the spectral floor {params.floor!r}")
    root = math.sqrt(disc)
    upper = math.sqrt(max(0.0, (root - g) / 2.0))
    lower = math.sqrt(max(0.0, (-root - g) / 2.0))
    return upper, lower


def characteristic_factors(params: MediumParams, lam: float) -> tuple:
    """Factors whose product is the characteristic residual.

    lambda > 0: (sin(ell eta),); lambda = 0: (sin(ell sqrt|gamma|),);
    lambda < 0: (sin(ell xi), sin(ell xi_bar)).
    """
    ell = params.ell
    if lam > 0:
        eta, _ = _branches(params, lam)
        return (math.sin(ell * eta),)
    if lam == 0:
        return (math.sin(ell * math.sqrt(-params.gamma)),)
    xi, xi_bar = _branches(params, lam)
    return (math.sin(ell * xi), math.sin(ell * xi_bar))


def characteristic_residual(params: MediumParams, lam: float) -> float:
    return math.prod(characteristic_factors(params, lam))


def _bisect(fn, a, b, fa, maxiter=200):
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = fn(m)
        if fm == 0.0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _scan_factor(fn, grid):
    roots = []
    vals = [fn(x) for x in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i + 1] != 0.0 and (vals[i] < 0) != (vals[i + 1] < 0):
            roots.append(_bisect(fn, grid[i], grid[i + 1], vals[i]))
    if vals and vals[-1] == 0.0:
        roots.append(grid[-1])
    return roots


def characteristic_roots(params: MediumParams, lam_max: float, zero_tol: float = 1e-12) -> list:
    """Locate eigenvalues in [-gamma^2/4, lam_max] by bisection on the characteristic factors.

    Returns a sorted list of ``(root, multiplicity)``. A root where both
    negative-branch factors vanish with xi != xi_bar counts twice.
    """
    ell, g = params.ell, params.gamma
    absg = -g
    floor = params.floor
    step = math.pi / (8.0 * ell)
    found = []

    # negative branch, parametrised by xi_bar = a in (0, sqrt(|g|/2)); lambda(a) = a^2 (a^2 + g)
    a_top = math.sqrt(absg / 2.0)
    na = max(8, math.ceil(a_top / step))
    a_grid = np.linspace(a_top * 1e-9, a_top * (1.0 - 1e-12), na + 1)
    lam_grid = sorted(float(a * a * (a * a + g)) for a in a_grid)
    lam_grid = [x for x in lam_grid if floor < x < 0.0]

    def upper_factor(x):
        return characteristic_factors(params, x)[0]

    def lower_factor(x):
        return characteristic_factors(params, x)[1]

    up_roots = _scan_factor(upper_factor, lam_grid)
    # xi_bar -> 0 as lambda -> 0^- is the trivial solution; genuine roots have xi_bar >= pi/ell
    a_min = math.pi / (2.0 * ell)
    low_grid = [x for x in lam_grid if _branches(params, x)[1] >= a_min]
    low_roots = _scan_factor(lower_factor, low_grid)

    def close(x, y):
        return abs(x - y) <= 1e-9 * max(1.0, abs(x), abs(y))

    for r in up_roots:
        found.append([r, 1])
    for r in low_roots:
        for entry in found:
            if close(entry[0], r):
                entry[1] += 1
                break
        else:
            found.append([r, 1])

    # spectral floor: xi == xi_bar there, so a vanishing factor gives a simple root
    if abs(math.sin(ell * a_top)) <= zero_tol * max(1.0, ell * a_top):
        found.append([floor, 1])

    if abs(math.sin(ell * math.sqrt(absg))) <= zero_tol * max(1.0, ell * math.sqrt(absg)):
        found.append([0.0, 1])

    if lam_max > 0:
        eta_lo = math.sqrt(absg)
        eta_hi = _branches(params, lam_max)[0]
        ne = max(8, math.ceil((eta_hi - eta_lo) / step))
        eta_grid = np.linspace(eta_lo, eta_hi, ne + 1)
        eta_grid[0] = eta_lo + 1e-10 * max(1.0, eta_lo)
        pos_grid = [float(e * e * (e * e + g)) for e in eta_grid]
        pos_grid[-1] = float(lam_max)
        pos_grid = [x for x in pos_grid if x > 0.0]
        for r in _scan_factor(upper_factor, pos_grid):
            if not any(close(r, e[0]) for e in found):
                found.append([r, 1])

    found = [(float(r), m) for r, m in found if r <= lam_max]
    found.sort()
    return found
