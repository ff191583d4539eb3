"""Null-control synthesis by the moment method.

Mode n vanishes at time T exactly when

    int_0^T exp(-i lambda_n s) f(s) ds = d_n = -y_n(0) / (sigma Phi_n'(0)),

sigma being the validated control gain from :mod:`.evolution`. Looking for f
in span{exp(i lambda_m t)} turns these moment conditions into G beta = d with
the Gram matrix of the exponentials; the solution is the minimum-norm control
in that span. At a resonant pair the two rows of G coincide and only the
visible combination (proportional to (p, q)) can be steered.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import NotResonant, ResonantParameters, SingularGram
from .evolution import control_gain, controlled_evolve, rk4_oracle, rk4_steps
from .hilbert import CoeffState, norm_theta, theta_weights
from .observability import GramData, gram_matrix
from .signal import ControlSignal
from .spectrum import DEFAULT_INT_TOL, MediumParams, mode_arrays, resonance_check

SINGULAR_RCOND = 1e-12
ORACLE_TOL = 1e-6
MAX_ORACLE_STEPS = 60_000_000

__all__ = [
    "ControlReport",
    "ControlSignal",
    "diagnose_resonant",
    "moment_rhs",
    "null_control",
    "solve_moment",
]


@dataclass(eq=False)
class ControlReport:
    residual_modal: np.ndarray
    residual_theta: float
    gram_cond: float
    control_energy: float
    verified_by_oracle: bool
    oracle_defect: Optional[float] = None
    moment_defect: float = 0.0
    tail_norm: float = 0.0
    invisible_residual: float = 0.0
    initial_norm: float = 0.0
    n_controlled: int = 0
    final_state: Optional[CoeffState] = field(default=None, repr=False)
    signal: Optional[ControlSignal] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        modes = self.final_state.modes if self.final_state is not None else ()
        return {
            "residual_modal": [
                {"n": int(m.n), "abs": float(r)} for m, r in zip(modes, self.residual_modal)
            ],
            "max_residual_modal": float(np.max(self.residual_modal, initial=0.0)),
            "residual_theta": float(self.residual_theta),
            "gram_cond": float(self.gram_cond),
            "control_energy": float(self.control_energy),
            "verified_by_oracle": bool(self.verified_by_oracle),
            "oracle_defect": None if self.oracle_defect is None else float(self.oracle_defect),
            "moment_defect": float(self.moment_defect),
            "tail_norm": float(self.tail_norm),
            "invisible_residual": float(self.invisible_residual),
            "initial_norm": float(self.initial_norm),
            "n_controlled": int(self.n_controlled),
        }


def moment_rhs(y0: CoeffState, modes=None) -> np.ndarray:
    """Targets d_n for the moment equations, aligned with ``y0.modes``."""
    arr = mode_arrays(modes if modes is not None else y0.modes)
    return -y0.coeffs / (control_gain() * arr.trace0)


def _is_singular(G) -> tuple:
    ev = np.linalg.eigvalsh(G)
    return ev[0] <= SINGULAR_RCOND * max(ev[-1], 0.0), ev


def solve_moment(gram: GramData, d, reg: float = 0.0) -> np.ndarray:
    """Solve (G + reg I) beta = d; raises SingularGram for singular G with reg = 0."""
    d = np.asarray(d, dtype=complex)
    G = gram.G
    if d.shape != (G.shape[0],):
        raise ValueError(f"right-hand side of length {d.shape} for a {G.shape} Gram matrix")
    if reg < 0:
        raise ValueError("reg must be >= 0")
    if not np.any(d):
        return np.zeros_like(d)
    if reg == 0.0:
        singular, ev = _is_singular(G)
        if singular:
            x, *_ = np.linalg.lstsq(G, d, rcond=None)
            incompat = float(np.linalg.norm(G @ x - d) / np.linalg.norm(d))
            raise SingularGram(
                f"Gram matrix is singular (lambda_min/lambda_max = {ev[0] / ev[-1]:.3e}); "
                f"relative incompatibility of the moments {incompat:.3e}",
                incompatibility=incompat,
            )
    A = G + reg * np.eye(G.shape[0])
    beta = sla.solve(A, d, assume_a="her")
    # one refinement step keeps the moment residual at rounding level for moderate conditioning
    beta = beta + sla.solve(A, d - A @ beta, assume_a="her")
    return beta


def _trajectory_amplitudes(y0: CoeffState, f: ControlSignal, samples: int = 257) -> np.ndarray:
    """max_t |y_n(t)| on a coarse grid, from the closed-form partial moments."""
    arr = y0.arrays
    t = np.linspace(0.0, f.T, samples)
    w = f.lambdas[None, :] - arr.lam[:, None]
    amp = np.abs(y0.coeffs).copy()
    for tj in t[1:]:
        x = 0.5 * w * tj
        part = (tj * np.sinc(x / np.pi) * np.exp(1j * x)) @ f.betas
        amp = np.maximum(amp, np.abs(y0.coeffs + control_gain() * arr.trace0 * part))
    return amp


def oracle_steps(y0: CoeffState, f: ControlSignal, tol: float) -> int:
    arr = y0.arrays
    amp = _trajectory_amplitudes(y0, f)
    steps = max(rk4_steps(lam, f.T, tol, a) for lam, a in zip(arr.lam, amp))
    return min(steps, MAX_ORACLE_STEPS)


def verify_with_oracle(y0: CoeffState, f: ControlSignal, yT: CoeffState, tol: float = ORACLE_TOL):
    """Run RK4 on the same problem; returns (agrees, max abs deviation)."""
    steps = oracle_steps(y0, f, 0.1 * tol)
    y_rk = rk4_oracle(y0, f, f.T, steps)
    dev = float(np.max(np.abs(y_rk.coeffs - yT.coeffs), initial=0.0))
    return dev <= tol * max(1.0, math.sqrt(float(np.sum(np.abs(y0.coeffs) ** 2)))), dev


def _controlled_mask(y0: CoeffState, N: int) -> np.ndarray:
    return y0.arrays.n <= N


def _report(y0, f, yT, mask, gram, d_used, lam_used, verify, extra_invisible=0.0):
    w = theta_weights(yT.modes, -0.25)
    sub = yT.with_coeffs(np.where(mask, yT.coeffs, 0.0))
    mom = f.moments(lam_used) if len(lam_used) else np.zeros(0)
    scale = max(1.0, float(np.max(np.abs(d_used), initial=0.0)))
    verified, dev = (False, None)
    if verify:
        verified, dev = verify_with_oracle(y0, f, yT)
    return ControlReport(
        residual_modal=np.abs(yT.coeffs[mask]),
        residual_theta=norm_theta(sub, w),
        gram_cond=gram.cond_proxy,
        control_energy=f.l2_norm(),
        verified_by_oracle=verified,
        oracle_defect=dev,
        moment_defect=float(np.max(np.abs(mom - d_used), initial=0.0)) / scale,
        tail_norm=float(np.linalg.norm(y0.coeffs[~mask])),
        invisible_residual=extra_invisible,
        initial_norm=float(np.linalg.norm(y0.coeffs)),
        n_controlled=int(mask.sum()),
        final_state=yT,
        signal=f,
    )


def null_control(params: MediumParams, y0: CoeffState, T: float, N: int, reg: float = 0.0,
                 int_tol: float = DEFAULT_INT_TOL, verify: bool = True):
    """Minimum-norm control steering modes 1..N of ``y0`` to zero at time T.

    Modes of ``y0`` above N are left uncontrolled; their norm is reported as
    ``tail_norm``. Returns ``(ControlSignal, ControlReport)``.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    info = resonance_check(params, int_tol)
    if info.resonant:
        raise ResonantParameters(
            f"gamma={params.gamma} lies on the critical set (pairs {list(info.pairs)}); use diagnose_resonant"
        )
    mask = _controlled_mask(y0, N)
    lam = y0.arrays.lam[mask]
    gram = gram_matrix(lam, T)
    d = moment_rhs(y0)[mask]
    beta = solve_moment(gram, d, reg)
    f = ControlSignal(lam, beta, T)
    yT = controlled_evolve(y0, f, T, params)
    return f, _report(y0, f, yT, mask, gram, d, lam, verify)


def diagnose_resonant(params: MediumParams, y0: CoeffState, T: float, N: int,
                      int_tol: float = DEFAULT_INT_TOL, verify: bool = False) -> ControlReport:
    """Best control on the observable quotient; reports what cannot be removed.

    For every resonant pair (p, q) with q <= N the component of y0 along
    (q, -p)/sqrt(p^2+q^2) is projected out, the remaining moment problem is
    solved on distinct frequencies, and the full y0 is propagated. The
    invisible component survives with unchanged modulus.
    """
    info = resonance_check(params, int_tol)
    if not info.resonant:
        raise NotResonant(f"gamma={params.gamma} is not on the critical set")
    mask = _controlled_mask(y0, N)
    arr = y0.arrays
    pos = {int(n): i for i, n in enumerate(arr.n)}
    visible = y0.coeffs.copy()
    drop = np.zeros(len(y0), dtype=bool)
    invisible = np.zeros(len(y0), dtype=complex)
    for p, q in info.pairs:
        if q > N or p not in pos or q not in pos:
            continue
        i, j = pos[p], pos[q]
        r = math.hypot(p, q)
        w_i, w_j = q / r, -p / r
        a = w_i * y0.coeffs[i] + w_j * y0.coeffs[j]
        visible[i] -= a * w_i
        visible[j] -= a * w_j
        invisible[i], invisible[j] = a * w_i, a * w_j
        drop[j] = True
    keep = mask & ~drop
    lam = arr.lam[keep]
    gram = gram_matrix(lam, T)
    d = moment_rhs(y0.with_coeffs(visible))[keep]
    beta = solve_moment(gram, d, 0.0)
    f = ControlSignal(lam, beta, T)
    yT = controlled_evolve(y0, f, T, params)
    inv_state = y0.with_coeffs(np.where(mask, invisible, 0.0))
    inv_norm = norm_theta(inv_state, theta_weights(y0.modes, -0.25))
    return _report(y0, f, yT, mask, gram, d, lam, verify, extra_invisible=inv_norm)
