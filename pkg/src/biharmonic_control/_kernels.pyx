# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay numerically interchangeable with _kernels_py."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, fabs

cnp.import_array()

BACKEND = "cython"

cdef int RESYNC = 256


cdef inline double complex _cis(double x) nogil:
    return cos(x) + 1j * sin(x)


def expsum(const double[::1] lam, const double complex[::1] amp, const double[::1] t):
    cdef Py_ssize_t nt = t.shape[0], nm = lam.shape[0], j, m
    out = np.zeros(nt, dtype=np.complex128)
    cdef double[:, ::1] o = out.view(np.float64).reshape(nt, 2)
    cdef double[::1] ar = np.ascontiguousarray(np.real(amp))
    cdef double[::1] ai = np.ascontiguousarray(np.imag(amp))
    cdef double re, im, c, s, x
    with nogil:
        for j in range(nt):
            re = 0.0
            im = 0.0
            for m in range(nm):
                x = lam[m] * t[j]
                c = cos(x)
                s = sin(x)
                re = re + ar[m] * c - ai[m] * s
                im = im + ar[m] * s + ai[m] * c
            o[j, 0] = re
            o[j, 1] = im
    return out


def cross_gram(const double[::1] a, const double[::1] b, double T):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], n, m
    out = np.empty((na, nb), dtype=np.complex128)
    cdef double[:, :, ::1] o = out.view(np.float64).reshape(na, nb, 2)
    cdef double x, s, sx
    with nogil:
        for n in range(na):
            for m in range(nb):
                x = 0.5 * (b[m] - a[n]) * T
                sx = sin(x)
                if fabs(x) < 1e-4:
                    s = T * (1.0 - x * x / 6.0)
                else:
                    s = T * sx / x
                o[n, m, 0] = s * cos(x)
                o[n, m, 1] = s * sx
    return out


def rk4_drive(const double[::1] lam, const double[::1] gain, const double complex[::1] y0,
              const double[::1] clam, const double complex[::1] camp, double T, long steps):
    cdef Py_ssize_t n_modes = lam.shape[0], nc = clam.shape[0], n, m
    cdef long k
    cdef double h = T / steps
    cdef double complex z, z2
    y = np.array(y0, dtype=np.complex128)
    cdef double complex[::1] yv = y
    R = np.empty(n_modes, dtype=np.complex128)
    P0 = np.empty(n_modes, dtype=np.complex128)
    Pm = np.empty(n_modes, dtype=np.complex128)
    G = np.empty(n_modes, dtype=np.complex128)
    cdef double complex[::1] Rv = R, P0v = P0, Pmv = Pm, Gv = G
    for n in range(n_modes):
        z = 1j * h * lam[n]
        z2 = z * z
        Rv[n] = 1 + z + z2 / 2 + z2 * z / 6 + z2 * z2 / 24
        P0v[n] = (h / 6) * (1 + z + z2 / 2 + z2 * z / 4)
        Pmv[n] = (h / 6) * (4 + 2 * z + z2 / 2)
        Gv[n] = 1j * gain[n]
    ph = np.empty(nc, dtype=np.complex128)
    half = np.empty(nc, dtype=np.complex128)
    cdef double complex[::1] phv = ph, hv = half
    for m in range(nc):
        hv[m] = _cis(0.5 * h * clam[m])
    cdef double complex f0, fm, f1, b0, bm, b1
    cdef double t
    with nogil:
        for k in range(steps):
            t = k * h
            if k % RESYNC == 0:
                f0 = 0
                for m in range(nc):
                    phv[m] = _cis(clam[m] * t)
                    f0 = f0 + camp[m] * phv[m]
            else:
                f0 = f1
            fm = 0
            for m in range(nc):
                phv[m] = phv[m] * hv[m]
                fm = fm + camp[m] * phv[m]
            f1 = 0
            for m in range(nc):
                phv[m] = phv[m] * hv[m]
                f1 = f1 + camp[m] * phv[m]
            for n in range(n_modes):
                b0 = Gv[n] * f0
                bm = Gv[n] * fm
                b1 = Gv[n] * f1
                yv[n] = Rv[n] * yv[n] + P0v[n] * b0 + Pmv[n] * bm + (h / 6) * b1
    return y
