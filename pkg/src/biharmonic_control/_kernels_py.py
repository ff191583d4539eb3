"""Pure numpy versions of the compiled kernels in _kernels.pyx."""
import numpy as np

BACKEND = "python"

_CHUNK = 1 << 16


def expsum(lam, amp, t):
    lam = np.asarray(lam, dtype=float)
    amp = np.asarray(amp, dtype=complex)
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape[0], dtype=complex)
    for s in range(0, t.shape[0], _CHUNK):
        out[s:s + _CHUNK] = np.exp(1j * np.outer(t[s:s + _CHUNK], lam)) @ amp
    return out


def _sinc(x):
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)


def cross_gram(a, b, T):
    x = 0.5 * T * (np.asarray(b, dtype=float)[None, :] - np.asarray(a, dtype=float)[:, None])
    return T * _sinc(x) * np.exp(1j * x)


def rk4_step_coefficients(lam, h):
    """(R, P0, Pm, P1) with y+ = R y + P0 b(t) + Pm b(t+h/2) + P1 b(t+h).

    This is the classical four-stage scheme applied to y' = i lam y + b(t),
    with the stages eliminated.
    """
    z = 1j * h * np.asarray(lam, dtype=float)
    z2 = z * z
    R = 1 + z + z2 / 2 + z2 * z / 6 + z2 * z2 / 24
    P0 = (h / 6) * (1 + z + z2 / 2 + z2 * z / 4)
    Pm = (h / 6) * (4 + 2 * z + z2 / 2)
    return R, P0, Pm, h / 6


def rk4_drive(lam, gain, y0, clam, camp, T, steps):
    lam = np.asarray(lam, dtype=float)
    clam = np.asarray(clam, dtype=float)
    camp = np.asarray(camp, dtype=complex)
    G = 1j * np.asarray(gain, dtype=float)
    y = np.array(y0, dtype=complex)
    h = T / steps
    R, P0, Pm, P1 = rk4_step_coefficients(lam, h)
    for k0 in range(0, steps, _CHUNK):
        K = min(_CHUNK, steps - k0)
        # control on the half-step grid t_k0 + j h/2, j = 0..2K
        ph = np.exp(1j * clam * (k0 * h))
        rot = np.exp(0.5j * h * clam)
        steps_ph = np.cumprod(np.broadcast_to(rot, (2 * K, clam.size)), axis=0)
        f = np.concatenate([[ph @ camp], (steps_ph * ph) @ camp])
        g = (P0 * f[0:2 * K:2, None] + Pm * f[1:2 * K:2, None] + P1 * f[2:2 * K + 1:2, None]) * G
        # y_K = R^K y + sum_j R^(K-1-j) g_j
        powers = np.cumprod(np.broadcast_to(R, (K, lam.size)), axis=0)
        y = powers[-1] * y + np.sum(g[:-1][::-1] * powers[:-1], axis=0) + g[-1]
    return y
