# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin, fabs, M_PI

cnp.import_array()

cdef double EULER_GAMMA = 0.5772156649015329
cdef double SERIES_CUTOFF = 8.0


cdef double complex _h0(double z) noexcept nogil:
    cdef double q, term, j0, s, harmonic, y0, a, mag, prev, amp, ph
    cdef double complex w, power, t, total
    cdef int m, k
    if z <= SERIES_CUTOFF:
        q = 0.25 * z * z
        term = 1.0
        j0 = 1.0
        s = 0.0
        harmonic = 0.0
        for m in range(1, 80):
            term = term * (-q / (m * m))
            harmonic += 1.0 / m
            j0 += term
            s -= term * harmonic
            if fabs(term) * harmonic < 1e-18:
                break
        y0 = (2.0 / M_PI) * ((log(0.5 * z) + EULER_GAMMA) * j0 + s)
        return j0 + 1j * y0
    w = 1j / z
    total = 1.0
    prev = 1.0
    a = 1.0
    power = 1.0
    for k in range(1, 60):
        a *= -((2 * k - 1) * (2 * k - 1)) / (8.0 * k)
        power = power * w
        t = a * power
        mag = sqrt(t.real * t.real + t.imag * t.imag)
        if mag > prev:
            break
        total = total + t
        prev = mag
        if mag < 1e-17:
            break
    amp = sqrt(2.0 / (M_PI * z))
    ph = z - 0.25 * M_PI
    return amp * (cos(ph) + 1j * sin(ph)) * total


def hankel1_0(z):
    cdef cnp.ndarray[double, ndim=1] zf = np.ascontiguousarray(z, dtype=np.float64).ravel()
    cdef Py_ssize_t n = zf.shape[0], i
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double[::1] zv = zf
    with nogil:
        for i in range(n):
            o[i] = _h0(zv[i])
    return out.reshape(np.shape(z))


def assemble_system(const double complex[:, ::1] table, const Py_ssize_t[::1] i1,
                    const Py_ssize_t[::1] i2, const double complex[::1] weights,
                    Py_ssize_t offset):
    cdef Py_ssize_t n = i1.shape[0], p, q, a, b
    out = np.empty((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    with nogil:
        for p in range(n):
            a = i1[p] + offset
            b = i2[p] + offset
            for q in range(n):
                o[p, q] = -table[a - i1[q], b - i2[q]] * weights[q]
            o[p, p] = o[p, p] + 1.0
    return out
