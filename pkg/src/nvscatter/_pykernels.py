"""Pure-numpy implementations of the hot kernels (fallback backend)."""

import math

import numpy as np

EULER_GAMMA = 0.5772156649015329
SERIES_CUTOFF = 8.0


def hankel1_0(z):
    """H0^(1)(z) for real z > 0, elementwise.

    Ascending series for z <= 8 and the optimally truncated Hankel
    asymptotic series above. Relative accuracy ~1e-15 in the series range,
    ~2e-8 just above the crossover, improving like exp(-2z).
    """
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape, dtype=complex)
    small = z <= SERIES_CUTOFF
    if np.any(small):
        out[small] = _series(z[small])
    if np.any(~small):
        out[~small] = _asymptotic(z[~small])
    return out


def _series(z):
    q = 0.25 * z * z
    term = np.ones_like(z)
    j0 = np.ones_like(z)
    s = np.zeros_like(z)
    harmonic = 0.0
    for m in range(1, 80):
        term = term * (-q / (m * m))
        harmonic += 1.0 / m
        j0 = j0 + term
        s = s - term * harmonic
        if np.max(np.abs(term)) * harmonic < 1e-18:
            break
    y0 = (2.0 / math.pi) * ((np.log(0.5 * z) + EULER_GAMMA) * j0 + s)
    return j0 + 1j * y0


def _asymptotic(z):
    w = 1j / z
    total = np.ones(z.shape, dtype=complex)
    prev = np.ones(z.shape)
    active = np.ones(z.shape, dtype=bool)
    a = 1.0
    power = np.ones(z.shape, dtype=complex)
    for k in range(1, 60):
        a *= -((2 * k - 1) ** 2) / (8.0 * k)
        power = power * w
        t = a * power
        mag = np.abs(t)
        # stop each entry at its smallest term
        active &= mag <= prev
        total = np.where(active, total + t, total)
        prev = np.where(active, mag, prev)
        active &= mag >= 1e-17
        if not np.any(active):
            break
    return np.sqrt(2.0 / (math.pi * z)) * np.exp(1j * (z - 0.25 * math.pi)) * total


def assemble_system(table, i1, i2, weights, offset):
    """Dense ``A[p, q] = delta_pq - table[i1p - i1q + off, i2p - i2q + off] * w[q]``."""
    n = len(i1)
    out = np.empty((n, n), dtype=complex)
    rows = max(1, min(n, 2_000_000 // max(n, 1)))
    for start in range(0, n, rows):
        stop = min(n, start + rows)
        d1 = i1[start:stop, None] - i1[None, :] + offset
        d2 = i2[start:stop, None] - i2[None, :] + offset
        out[start:stop] = -table[d1, d2] * weights[None, :]
    out[np.arange(n), np.arange(n)] += 1.0
    return out
