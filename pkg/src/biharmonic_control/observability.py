"""Gram matrices of {exp(i lambda_n t)} on (0, T) and observability constants.

The boundary observation of a free state with coefficients c is
int_0^T |z_x(t,0)|^2 dt = c^* Ghat c with Ghat[n,m] = Phi_n'(0) Phi_m'(0) G[n,m].
Its best lower constant relative to the H^1_0 norm (theta = 1/4 weights) is
the smallest eigenvalue of D^-1/2 Ghat D^-1/2.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotResonantPair
from .hilbert import CoeffState, theta_weights
from .spectrum import DEFAULT_INT_TOL, MediumParams, enumerate_modes, make_params, mode_arrays, resonance_check

WORKERS_ENV = "BIHARMONIC_MAX_WORKERS"
# relative defect under which a float gamma counts as exactly on the critical set
EXACT_RESONANCE_TOL = 8 * np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class GramData:
    T: float
    lambdas: np.ndarray
    G: np.ndarray
    cond_proxy: float


def _hermitian(G):
    upper = np.triu(G)
    return upper + np.triu(G, 1).conj().T


def _cond(evals):
    lo, hi = evals[0], evals[-1]
    return float(hi / lo) if lo > 0 else math.inf


def gram_matrix(lambdas, T: float) -> GramData:
    if not T > 0:
        raise ValueError("T must be positive")
    lam = np.ascontiguousarray(lambdas, dtype=float)
    G = _hermitian(kernels.cross_gram(lam, lam, float(T)))
    return GramData(float(T), lam, G, _cond(np.linalg.eigvalsh(G)))


def weighted_gramian(params: MediumParams, N: int, T: float, modes=None) -> np.ndarray:
    if modes is None:
        modes = enumerate_modes(params, N)
    arr = mode_arrays(modes)
    g = gram_matrix(arr.lam, T).G
    d = arr.trace0 / np.sqrt(theta_weights(modes, 0.25).weights)
    return _hermitian(d[:, None] * g * d[None, :])


# ---------------------------------------------------------------------------
# second eigenvalue route: Householder tridiagonalisation + Sturm bisection


def householder_tridiagonal(H):
    """Reduce a Hermitian matrix to a real symmetric tridiagonal (diag, offdiag)."""
    A = np.array(H, dtype=complex)
    n = A.shape[0]
    for k in range(n - 2):
        x = A[k + 1:, k]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * nx
        v /= np.linalg.norm(v)
        A[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ A[k + 1:, :])
        A[:, k + 1:] -= 2.0 * np.outer(A[:, k + 1:] @ v, v.conj())
    return np.real(np.diag(A)).copy(), np.abs(np.diag(A, 1))


def sturm_count(d, e, x: float) -> int:
    """Number of eigenvalues of the tridiagonal (d, e) strictly below x."""
    count = 0
    q = 1.0
    tiny = np.finfo(float).tiny
    for i in range(len(d)):
        off = e[i - 1] ** 2 / q if i > 0 else 0.0
        q = d[i] - x - off
        if q == 0.0:
            q = -tiny
        if q < 0:
            count += 1
    return count


def sturm_eigenvalue(H, index: int = 0) -> float:
    """``index``-th smallest eigenvalue of Hermitian H by bisection on Sturm counts."""
    d, e = householder_tridiagonal(H)
    r = np.abs(d) + np.concatenate([[0.0], e]) + np.concatenate([e, [0.0]])
    lo, hi = float(np.min(d - r)) - 1e-300, float(np.max(d + r))
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(d, e, mid) > index:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def smallest_eigenvalue(H, method: str = "eigh") -> float:
    if method == "eigh":
        return float(np.linalg.eigvalsh(H)[0])
    if method == "sturm":
        return sturm_eigenvalue(H, 0)
    raise ValueError(f"unknown method {method!r}")


def observability_constant(params: MediumParams, N: int, T: float, method: str = "eigh") -> float:
    """Best c with int_0^T |z_x(t,0)|^2 dt >= c ||z0||^2_{1/4} on modes 1..N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return smallest_eigenvalue(weighted_gramian(params, N, T), method)


def observability_bounds(params: MediumParams, N: int, T: float) -> tuple:
    ev = np.linalg.eigvalsh(weighted_gramian(params, N, T))
    return float(ev[0]), float(ev[-1])


def observed_energy(state: CoeffState, T: float) -> float:
    """c^* Ghat c for a free state; equals int_0^T |z_x(t,0)|^2 dt."""
    arr = state.arrays
    g = gram_matrix(arr.lam, T).G
    v = arr.trace0 * state.coeffs
    return float(np.real(np.vdot(v, g @ v)))


def invisible_mode(params: MediumParams, pair, N: int | None = None, int_tol: float = DEFAULT_INT_TOL) -> CoeffState:
    """Unit state on modes (p, q) with coefficients (q, -p)/sqrt(p^2+q^2).

    Its boundary trace vanishes identically because Phi_n'(0) is proportional
    to n and lambda_p == lambda_q.
    """
    p, q = sorted(int(v) for v in pair)
    info = resonance_check(params, int_tol)
    if (p, q) not in info.pairs:
        raise NotResonantPair(f"({p}, {q}) is not a resonant pair for gamma={params.gamma}, ell={params.ell}")
    modes = enumerate_modes(params, max(N or q, q), int_tol)
    c = np.zeros(len(modes), dtype=complex)
    norm = math.hypot(p, q)
    for i, m in enumerate(modes):
        if m.n == p:
            c[i] = q / norm
        elif m.n == q:
            c[i] = -p / norm
    return CoeffState(modes, c, meta=f"invisible({p},{q})")


def nearest_critical_gamma(gamma: float, ell: float) -> tuple:
    """Closest point of the critical set -pi^2 (p^2+q^2)/ell^2, p < q, and its distance."""
    s = -gamma * ell**2 / math.pi**2
    qmax = math.ceil(math.sqrt(max(s, 5.0))) + 2
    best = None
    for p in range(1, qmax + 1):
        for q in range(p + 1, qmax + 1):
            v = p * p + q * q
            if best is None or abs(v - s) < abs(best - s):
                best = v
    g_star = -math.pi**2 * best / ell**2
    return g_star, abs(gamma - g_star)


@dataclass(frozen=True)
class ScanRow:
    gamma: float
    constant: float
    resonant: bool
    status: str
    nearest_critical: float
    distance: float


def _scan_row(gamma, ell, N, T, int_tol):
    params = make_params(gamma, ell)
    info = resonance_check(params, int_tol)
    if not info.resonant:
        status = "controllable"
    elif info.defect <= EXACT_RESONANCE_TOL:
        status = "resonant"
    else:
        status = "ill-conditioned"
    g_star, dist = nearest_critical_gamma(gamma, ell)
    return ScanRow(float(gamma), observability_constant(params, N, T), info.resonant, status, g_star, dist)


def max_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        return max(1, int(raw))
    return min(4, os.cpu_count() or 1)


def resonance_scan(gamma_grid, ell: float, N: int, T: float, int_tol: float = DEFAULT_INT_TOL,
                   workers: int | None = None) -> list:
    grid = [float(g) for g in gamma_grid]
    if not grid:
        raise ValueError("empty gamma grid")
    workers = max_workers() if workers is None else workers
    if workers <= 1 or len(grid) == 1:
        return [_scan_row(g, ell, N, T, int_tol) for g in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda g: _scan_row(g, ell, N, T, int_tol), grid))
