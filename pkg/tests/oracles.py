"""Reference computations that do not go through ``cyclestab``.

Everything here is plain numpy/math so the tests can cross-check the
package against an implementation path it does not share.
"""
import math

import numpy as np

SQ2 = math.sqrt(2.0)
SQ3 = math.sqrt(3.0)

# Example 1 coefficients as printed in the introduction of the source text
EX1_A = (
    complex(2 - SQ2, SQ2),
    complex(3 * (SQ2 - 1), -3 * (SQ2 - 1)),
    complex(-2 * (SQ2 - 1), -2 * (3 - 2 * SQ2)),
    complex(0.0, 3 - 2 * SQ2),
)
EX1_ZETA = complex(1 - SQ2 / 2, SQ2 / 2)
EX2_A = (SQ3 - 1, 2 - SQ3)
EX2_ZETA = 1 - SQ3


def chi_descending(a, mu, T=1):
    """``z**((n-1)T+1) - mu p(z)**T`` in numpy's descending order."""
    a = np.asarray(a, dtype=complex)
    n = a.size
    p = a.copy()  # descending: a_1 z^{n-1} + ... + a_n
    pT = np.array([1.0 + 0j])
    for _ in range(T):
        pT = np.polymul(pT, p)
    N = (n - 1) * T + 1
    lead = np.zeros(N + 1, dtype=complex)
    lead[0] = 1.0
    return np.polysub(lead, mu * pT)


def quartic_expansion(zeta):
    """``(z - zeta)**4`` expanded term by term, descending."""
    return np.array([1, -4 * zeta, 6 * zeta**2, -4 * zeta**3, zeta**4], dtype=complex)


def max_root_modulus(desc):
    return float(np.max(np.abs(np.roots(desc))))


def series_power(h, alpha, K):
    """First ``K`` Taylor coefficients of ``h(z)**alpha`` (``h[0] != 0``)
    by the J.C.P. Miller recurrence."""
    h = np.asarray(h, dtype=float)
    g = np.zeros(K)
    g[0] = h[0] ** alpha
    for k in range(1, K):
        s = 0.0
        for j in range(1, min(k, h.size - 1) + 1):
            s += ((alpha + 1) * j - k) * h[j] * g[k - j]
        g[k] = s / (k * h[0])
    return g


def koebe_series(T, K):
    """Coefficients of z^(kT+1) in ``2**(2/T) z (1 - z**T)**(-2/T)``, k < K."""
    h = np.zeros(T + 1)
    h[0], h[T] = 1.0, -1.0
    g = series_power(h, -2.0 / T, K * T)
    return 2.0 ** (2.0 / T) * g[::T][:K]


def koebe_gamma(T, k):
    s = 2.0 / T
    return 2.0**s * math.exp(math.lgamma(k + s) - math.lgamma(s) - math.lgamma(k + 1))


def plain_orbit(c, z0, steps):
    z = [complex(z0)]
    for _ in range(steps):
        z.append(z[-1] * z[-1] + c)
    return z


def stabilized_orbit(c, a, z0, steps, T=1):
    """Direct transcription of the delayed-feedback recurrence for
    ``z**2 + c`` with plain-iteration seeding."""
    n = len(a)
    seed = (n - 1) * T + 1
    z = [complex(z0)]
    for m in range(1, steps + 1):
        if m < seed:
            z.append(z[-1] ** 2 + c)
        else:
            z.append(sum(a[k] * (z[m - 1 - k * T] ** 2 + c) for k in range(n)))
        if abs(z[-1]) > 1e6:
            break
    return z


def suffridge_q(n):
    """Suffridge polynomial scaled to ``q(1) = 1``, ascending with q_0 = 0."""
    k = np.arange(1, n + 1)
    P = (1 - (k - 1) / n) * np.sin(k * np.pi / (n + 1)) / np.sin(np.pi / (n + 1))
    return np.concatenate([[0.0], P / P.sum()])


def harmonic(n):
    return sum(1.0 / k for k in range(1, n + 1))
