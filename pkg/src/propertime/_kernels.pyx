# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Both functions mirror ``_kernels_py`` (to rounding); the GIL is released around the
loops so that thread pools can evaluate independent calls concurrently.
"""
import numpy as np
from libc.math cimport cos, sin, fabs as abs, fmax as max


def cosine_transform(const double[::1] lambdas, const double[:, ::1] angles,
                     const double[:, ::1] amplitudes):
    """out[i, j] = sum_k amplitudes[j, k] * cos(lambdas[i] * angles[j, k])."""
    cdef Py_ssize_t n_lam = lambdas.shape[0]
    cdef Py_ssize_t n_pts = angles.shape[0]
    cdef Py_ssize_t n_k = angles.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, lam
    out = np.zeros((n_lam, n_pts), dtype=np.float64)
    cdef double[:, ::1] res = out
    with nogil:
        for i in range(n_lam):
            lam = lambdas[i]
            for j in range(n_pts):
                acc = 0.0
                for k in range(n_k):
                    acc = acc + amplitudes[j, k] * cos(lam * angles[j, k])
                res[i, j] = acc
    return out


cdef bint _uniform(const double[::1] f, double *step):
    cdef Py_ssize_t n = f.shape[0], a
    cdef double d, scale = 0.0
    if n < 3:
        return False
    d = (f[n - 1] - f[0]) / (n - 1)
    for a in range(n):
        scale = max(scale, abs(f[a]))
    for a in range(n):
        if abs(f[a] - (f[0] + a * d)) > 1e-13 * scale:
            return False
    step[0] = d
    return True


DEF RESYNC = 64


def fourier_sum(const double[::1] freqs, const double[::1] nodes,
                const double complex[:, ::1] coeffs_t):
    """out[a, b] = sum_j coeffs_t[j, b] * exp(1j * freqs[a] * nodes[j]).

    Takes the coefficients transposed, ``(n_nodes, n_b)``, so the innermost
    loop runs over contiguous memory.  For evenly spaced ``freqs`` the phase
    is advanced by a complex rotation and recomputed exactly every RESYNC
    frequencies, which keeps the drift near 1e-14.
    """
    cdef Py_ssize_t n_a = freqs.shape[0]
    cdef Py_ssize_t n_j = nodes.shape[0]
    cdef Py_ssize_t n_b = coeffs_t.shape[1]
    cdef Py_ssize_t a, a0, a1, b, j
    cdef double arg, c, s, cr, ci, df = 0.0, rc, rs, t
    out = np.zeros((n_a, n_b), dtype=np.complex128)
    cdef double[:, :, ::1] res = out.view(np.float64).reshape(n_a, n_b, 2)
    cdef bint uniform = _uniform(freqs, &df)
    with nogil:
        if uniform:
            for a0 in range(0, n_a, RESYNC):
                a1 = min(a0 + RESYNC, n_a)
                for j in range(n_j):
                    arg = freqs[a0] * nodes[j]
                    c = cos(arg)
                    s = sin(arg)
                    rc = cos(df * nodes[j])
                    rs = sin(df * nodes[j])
                    for a in range(a0, a1):
                        for b in range(n_b):
                            cr = coeffs_t[j, b].real
                            ci = coeffs_t[j, b].imag
                            res[a, b, 0] += cr * c - ci * s
                            res[a, b, 1] += cr * s + ci * c
                        t = c * rc - s * rs
                        s = s * rc + c * rs
                        c = t
        else:
            for a in range(n_a):
                for j in range(n_j):
                    arg = freqs[a] * nodes[j]
                    c = cos(arg)
                    s = sin(arg)
                    for b in range(n_b):
                        cr = coeffs_t[j, b].real
                        ci = coeffs_t[j, b].imag
                        res[a, b, 0] += cr * c - ci * s
                        res[a, b, 1] += cr * s + ci * c
    return out
