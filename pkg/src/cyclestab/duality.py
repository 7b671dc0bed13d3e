"""Characteristic polynomials of a delayed-feedback design and the p/q
duality between root location and range omission.

An averaging set ``a = (a_1, ..., a_n)`` acting on a cycle of length ``T``
gives the recurrence ``z_m = sum_k a_k f(z_{m-1-(k-1)T})``.  Linearised at
the cycle with multiplier ``mu`` it is governed by

    chi(z) = z**((n-1)T + 1) - mu * p(z)**T,   p(z) = a_n + ... + a_1 z**(n-1)

(note the reversed order in ``p``).  Reversing ``chi`` turns "all roots in
the unit disk" into "q(z) = z p*(z)**T omits 1/mu on the closed disk", and
``q_root(z) = z p*(z**T)`` carries the same information with sparse
spectrum ``T*Z + 1``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .poly import (
    DISAGREEMENT_MARGIN,
    STRICTNESS,
    NumericalDisagreement,
    Poly,
    SchurVerdict,
    n_inverse,
    schur_test,
    t_root_transform,
)

SUM_TOLERANCE = 1e-12
OMISSION_TOLERANCE = 1e-8
WINDING_SAMPLES = 4096
MAX_CERTIFY_INTERVALS = 1 << 18


class DesignError(ValueError):
    pass


@dataclass(frozen=True)
class AveragingSet:
    """Coefficients ``a_1..a_n`` (``sum == 1``, ``a_1 != 0``) and cycle length ``T``."""

    a: tuple
    T: int = 1

    def __post_init__(self):
        a = tuple(complex(x) for x in np.atleast_1d(self.a))
        object.__setattr__(self, "a", a)
        if len(a) < 1:
            raise DesignError("an averaging set needs at least one coefficient")
        if int(self.T) != self.T or self.T < 1:
            raise DesignError(f"cycle length must be a positive integer, got {self.T!r}")
        if a[0] == 0:
            raise DesignError("a_1 must be nonzero")
        s = sum(a)
        if abs(s - 1.0) > SUM_TOLERANCE * max(1.0, float(np.sum(np.abs(a)))):
            raise DesignError(f"coefficients must sum to 1, got {s!r}")

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def is_real(self) -> bool:
        return all(x.imag == 0 for x in self.a)

    def p(self) -> Poly:
        """``p(z) = a_n + a_{n-1} z + ... + a_1 z**(n-1)``."""
        return Poly(self.a[::-1])

    @classmethod
    def normalized(cls, a, T: int = 1) -> "AveragingSet":
        """Scale arbitrary coefficients so they sum to one."""
        a = np.asarray(a, dtype=complex)
        return cls(tuple(a / a.sum()), T)


@dataclass(frozen=True)
class DualityBundle:
    p: Poly
    p_star: Poly
    q: Poly
    q_root: Poly


@dataclass(frozen=True)
class OmissionVerdict:
    omitted: bool
    min_boundary_distance: float
    winding_zero_count: int
    samples_used: int
    indeterminate: bool = False
    certified_clearance: float = 0.0


@dataclass(frozen=True)
class StabilityReport:
    """Schur verdict for ``chi`` plus the q-side omission verdicts."""

    mu: complex
    T: int
    stable: bool
    schur: SchurVerdict
    branches: tuple = field(default=())
    q_verdict: OmissionVerdict | None = None
    agree: bool = True

    @property
    def margin(self) -> float:
        return self.schur.margin

    @property
    def omission_margin(self) -> float:
        ds = [b.min_boundary_distance for b in self.branches]
        if self.q_verdict is not None:
            ds.append(self.q_verdict.min_boundary_distance)
        return min(ds) if ds else float("nan")


def build_chi(design: AveragingSet, mu: complex) -> Poly:
    """``z**((n-1)T+1) - mu * p(z)**T``."""
    if mu == 0:
        raise DesignError("mu = 0 is degenerate")
    n, T = design.n, design.T
    return Poly.monomial((n - 1) * T + 1) - complex(mu) * design.p() ** T


def build_duality(design: AveragingSet) -> DualityBundle:
    p = design.p()
    p_star = n_inverse(p, design.n - 1)
    q = Poly([0.0, 1.0]) * p_star ** design.T
    q_root = t_root_transform(p_star, design.T)
    return DualityBundle(p, p_star, q, q_root)


def _boundary_values(coeffs, w, theta):
    z = np.exp(1j * theta)
    acc = np.full(z.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc - w


def _circle_values(coeffs, w, n):
    # q at the n-th roots of unity, by FFT of the aliased coefficients
    folded = np.zeros(n, dtype=complex)
    np.add.at(folded, np.arange(coeffs.size) % n, coeffs)
    return n * np.fft.ifft(folded) - w


def _winding(values) -> int:
    steps = np.angle(np.roll(values, -1) / values)
    return int(round(float(np.sum(steps)) / (2 * np.pi)))


def omission_test(
    q: Poly,
    w: complex,
    tol: float = OMISSION_TOLERANCE,
    samples: int = WINDING_SAMPLES,
) -> OmissionVerdict:
    """Decide whether ``w`` lies outside ``q`` of the closed unit disk.

    The zero count of ``q - w`` inside the disk is the winding number of the
    boundary image around ``w``.  When every arc between ``samples`` points
    is certified clear of ``w`` the sampled winding number is exact;
    otherwise it is resampled on ``samples * 2**j`` points until two
    consecutive doublings agree.  Clearance from the boundary image is
    certified arc by arc from the value and slope at the arc center and the
    bound ``sum k**2 |q_k|`` on the second derivative, bisecting only the
    arcs where that bound is inconclusive.
    """
    c = q.coeffs
    if abs(c[0]) > 1e-14 * max(1.0, float(np.sum(np.abs(c)))):
        raise ValueError("omission_test expects q(0) = 0")
    w = complex(w)
    k = np.arange(c.size)
    dc = 1j * k * c
    L2 = float(np.sum(k * k * np.abs(c)))

    def lower(d, s, h):
        return d - s * h - 0.5 * L2 * h * h

    # fast path: if every sample arc clears w, no step between neighbouring
    # samples turns by pi or more and the sampled winding number is exact
    vals = _circle_values(c, w, samples)
    dist = np.abs(vals)
    slopes = np.abs(_circle_values(dc, 0.0, samples))
    clearance = float(np.min(lower(dist, slopes, np.pi / samples)))
    if clearance > tol:
        wind = _winding(vals)
        return OmissionVerdict(wind == 0, float(dist.min()), wind, 2 * samples, False, clearance)
    n = samples
    history = []
    while True:
        theta = 2 * np.pi * np.arange(n) / n
        vals = _circle_values(c, w, n)
        dist = np.abs(vals)
        if np.any(dist == 0):
            wind = 0
        else:
            wind = _winding(vals)
        history.append(wind)
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            break
        if n >= samples * 64:
            break
        n *= 2
    used = n
    settled = len(history) >= 3 and history[-1] == history[-2] == history[-3]
    # |f(t) - f(t_c)| <= |f'(t_c)| h + L2 h**2 / 2 on an arc of half-width h
    min_dist = float(dist.min())
    centers, dists = theta, dist
    slopes = np.abs(_circle_values(dc, 0.0, n))
    half = np.pi / n
    indeterminate = not settled
    clearance = float(np.min(lower(dists, slopes, half)))
    # bisect the arcs whose lower bound does not clear the tolerance
    while clearance <= tol:
        if min_dist <= tol or half < 1e-15:
            indeterminate = True
            break
        weak = lower(dists, slopes, half) <= tol
        centers = centers[weak]
        if centers.size * 2 > MAX_CERTIFY_INTERVALS:
            indeterminate = True
            break
        half /= 2
        centers = np.concatenate([centers - half, centers + half])
        dists = np.abs(_boundary_values(c, w, centers))
        slopes = np.abs(_boundary_values(dc, 0.0, centers))
        used += centers.size
        min_dist = min(min_dist, float(dists.min()))
        clearance = float(np.min(lower(dists, slopes, half)))
    omitted = wind == 0 and not indeterminate and min_dist > tol
    return OmissionVerdict(omitted, min_dist, wind, used, indeterminate, clearance)


def inverse_roots(mu: complex, T: int) -> np.ndarray:
    """All ``T`` values of ``mu**(-1/T)``."""
    r = abs(mu) ** (-1.0 / T)
    ang = (-cmath.phase(mu) + 2 * np.pi * np.arange(T)) / T
    return r * np.exp(1j * ang)


def in_stability_domain(
    design: AveragingSet,
    mu: complex,
    strictness: float = STRICTNESS,
    omission_tol: float = OMISSION_TOLERANCE,
    samples: int = WINDING_SAMPLES,
    check_duality: bool = True,
) -> StabilityReport:
    """Is ``mu`` in the stabilization domain of ``design``?

    The Schur test of ``chi`` gives the verdict.  With ``check_duality`` the
    q-side is decided as well: every branch of ``mu**(-1/T)`` must be
    omitted by ``q_root`` and ``1/mu`` by ``q``.  A disagreement where both
    margins exceed ``1e-6`` raises :class:`NumericalDisagreement`.
    """
    if mu == 0:
        raise DesignError("mu = 0 is degenerate")
    mu = complex(mu)
    sv = schur_test(build_chi(design, mu), strictness)
    if not check_duality:
        return StabilityReport(mu, design.T, sv.stable, sv)
    bundle = build_duality(design)
    branches = tuple(
        omission_test(bundle.q_root, w, omission_tol, samples)
        for w in inverse_roots(mu, design.T)
    )
    qv = omission_test(bundle.q, 1.0 / mu, omission_tol, samples)
    verdicts = [b.omitted for b in branches] + [qv.omitted]
    q_side = all(verdicts)
    agree = q_side == sv.stable and len(set(verdicts)) == 1
    if not agree:
        q_margin = min(v.min_boundary_distance for v in (*branches, qv))
        if abs(sv.margin) > DISAGREEMENT_MARGIN and q_margin > DISAGREEMENT_MARGIN:
            raise NumericalDisagreement(
                f"mu={mu!r}: Schur stable={sv.stable} (margin {sv.margin:.3e}) but "
                f"omission verdicts {verdicts} (clearance {q_margin:.3e})"
            )
    return StabilityReport(mu, design.T, sv.stable, sv, branches, qv, agree)
