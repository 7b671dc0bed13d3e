"""Geometry of the universal domains ``S_n``, multiplier-set models and the
degree lower bounds that any stabilizing design must respect.

``S_n = u_n(Δ)`` with ``u_n(z) = 1 - (1 - z)**n``: a multiplier is
stabilizable with ``n`` coefficients (``T = 1``) exactly when one of the
``n``-th roots of ``1 - mu``, subtracted from 1, lands in the open disk.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .poly import CLUSTER_RADIUS, Poly, find_roots

MEMBERSHIP_TOLERANCE = 1e-9
PROBES_BOUNDARY = 64
PROBES_INTERIOR = 16

KINDS = ("point", "real_segment", "horocycle_disk", "sector", "unit_disk_complement_point")


@dataclass(frozen=True)
class MultiplierSet:
    """A bounded set ``M`` of multipliers to be stabilized simultaneously.

    Parameters
    ----------
    kind : str
        One of ``KINDS``.
    mu_M : float
        ``sup |z|`` over ``M``.  Filled in from ``mu`` for point kinds.
    theta : float
        Sector gap, ``M = {|z| <= mu_M, |arg z| >= theta}``.
    mu : complex
        The multiplier of a point target.
    """

    kind: str
    mu_M: float = 0.0
    theta: float = 0.0
    mu: complex = 0j

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unsupported multiplier set kind {self.kind!r}")
        if self.kind in ("point", "unit_disk_complement_point"):
            mu = complex(self.mu)
            if mu == 0:
                raise ValueError("point target mu must be nonzero")
            if self.kind == "unit_disk_complement_point" and abs(mu) < 1:
                raise ValueError("unit_disk_complement_point needs |mu| >= 1")
            object.__setattr__(self, "mu", mu)
            object.__setattr__(self, "mu_M", abs(mu))
            return
        if not self.mu_M >= 1:
            raise ValueError(f"mu_M must be >= 1, got {self.mu_M!r}")
        if self.kind == "sector" and not 0 < self.theta <= math.pi:
            raise ValueError(f"sector gap theta must lie in (0, pi], got {self.theta!r}")

    @classmethod
    def point(cls, mu: complex) -> "MultiplierSet":
        return cls("point", mu=mu)

    @classmethod
    def real_segment(cls, mu_M: float) -> "MultiplierSet":
        return cls("real_segment", mu_M=float(mu_M))

    @classmethod
    def horocycle(cls, mu_M: float) -> "MultiplierSet":
        return cls("horocycle_disk", mu_M=float(mu_M))

    @classmethod
    def sector(cls, mu_M: float, theta: float) -> "MultiplierSet":
        return cls("sector", mu_M=float(mu_M), theta=float(theta))

    @property
    def is_point(self) -> bool:
        return self.kind in ("point", "unit_disk_complement_point")

    def contains(self, z: complex, tol: float = 1e-12) -> bool:
        z = complex(z)
        if self.is_point:
            return abs(z - self.mu) <= tol
        if self.kind == "real_segment":
            return abs(z.imag) <= tol and -self.mu_M - tol <= z.real <= -1 + tol
        if self.kind == "horocycle_disk":
            return abs(z + self.mu_M / 2) <= self.mu_M / 2 + tol
        return abs(z) <= self.mu_M + tol and abs(np.angle(z)) >= self.theta - tol

    def probes(self, boundary: int = PROBES_BOUNDARY, interior: int = PROBES_INTERIOR) -> np.ndarray:
        """Deterministic probe multipliers: ``boundary`` points on the edge
        of ``M ∩ {|z| >= 1}`` and ``interior`` points inside it."""
        if self.is_point:
            return np.array([self.mu])
        R = self.mu_M
        if self.kind == "real_segment":
            edge = -np.linspace(1.0, R, boundary)
            inner = -(1.0 + (R - 1.0) * (np.arange(interior) + 0.5) / interior)
            return np.concatenate([edge, inner]).astype(complex)
        if self.kind == "horocycle_disk":
            c = -R / 2
            t = 2 * np.pi * (np.arange(boundary) + 0.5) / boundary
            edge = c + (R / 2) * np.exp(1j * t)
            # the arc through the origin is cut off by the unit circle
            near = np.abs(edge) < 1
            if near.any():
                edge = edge[~near]
                arc = _unit_arc_in_disk(c, R / 2, int(near.sum()))
                edge = np.concatenate([edge, arc])
            k = np.arange(interior)
            rr = (R / 2) * np.sqrt((k + 0.5) / interior)
            inner = c + rr * np.exp(2.399963229728653j * k)
            inner = inner[np.abs(inner) >= 1]
            return np.concatenate([edge, inner])
        th = self.theta
        nb = boundary // 4
        outer = R * np.exp(1j * np.linspace(th, 2 * np.pi - th, nb))
        inner_arc = np.exp(1j * np.linspace(th, 2 * np.pi - th, nb))
        r = np.linspace(1.0, R, nb)
        rays = np.concatenate([r * np.exp(1j * th), r * np.exp(-1j * th)])
        k = np.arange(interior)
        rad = 1 + (R - 1) * (k + 0.5) / interior
        ang = th + (2 * np.pi - 2 * th) * ((k * 0.618033988749895) % 1.0)
        inner = rad * np.exp(1j * ang)
        return np.concatenate([outer, inner_arc, rays, inner])


def _unit_arc_in_disk(c: float, r: float, count: int) -> np.ndarray:
    # arc of |z| = 1 lying inside the disk |z - c| <= r (c < 0)
    half = math.acos(min(1.0, max(-1.0, (1 + c * c - r * r) / (2 * abs(c)))))
    t = np.linspace(math.pi - half, math.pi + half, max(count, 2))
    return np.exp(1j * t)


@dataclass(frozen=True)
class DomainGeometry:
    """Dual data of a multiplier set for cycle length ``T``.

    ``lambda_Omega`` is the distance from the origin to the complement of
    ``Omega = C \\ M*`` (restricted, for T > 1, to the T-th root picture), so
    that ``mu_M * lambda_Omega**T == 1``.
    """

    m_star: str
    lambda_Omega: float
    T: int

    def relation_residual(self, mu_M: float) -> float:
        return abs(mu_M * self.lambda_Omega ** self.T - 1.0)


def geometry(M: MultiplierSet, T: int = 1) -> DomainGeometry:
    R = M.mu_M
    if M.is_point:
        desc = f"{{1/mu}} = {{{1 / M.mu!r}}}"
    elif M.kind == "real_segment":
        desc = f"real segment [-1, {-1 / R!r}]"
    elif M.kind == "horocycle_disk":
        desc = f"half-plane Re w <= {-1 / R!r}"
    else:
        desc = f"{{|w| >= {1 / R!r}, |arg w| >= {M.theta!r}}}"
    return DomainGeometry(desc, R ** (-1.0 / T), T)


@dataclass(frozen=True)
class Membership:
    verdict: str  # "inside" | "boundary" | "outside"
    witness: complex | None
    zetas: tuple

    @property
    def inside(self) -> bool:
        return self.verdict == "inside"


def _pick_witness(zetas: np.ndarray) -> complex:
    # minimal |zeta|; ties (conjugate-like pairs) broken towards larger Im
    mods = np.abs(zetas)
    m = mods.min()
    cand = zetas[mods <= m + 1e-12 * max(1.0, m)]
    return complex(cand[np.argmax(cand.imag)])


def s_n_member(mu: complex, n: int, tol: float = MEMBERSHIP_TOLERANCE) -> Membership:
    """Classify ``mu`` against ``S_n = u_n(Δ)``.

    Returns the verdict and the witness ``zeta`` of smallest modulus with
    ``u_n(zeta) = mu``; the witness feeds :func:`designers.simplest_design`.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    mu = complex(mu)
    if mu == 1:
        return Membership("outside", None, ())
    base = 1 - mu
    r = abs(base) ** (1.0 / n)
    w = r * np.exp(1j * (np.angle(base) + 2 * np.pi * np.arange(n)) / n)
    zetas = 1 - w
    witness = _pick_witness(zetas)
    m = abs(witness)
    if m < 1 - tol:
        verdict = "inside"
    elif m <= 1 + tol:
        verdict = "boundary"
    else:
        verdict = "outside"
    return Membership(verdict, witness, tuple(complex(z) for z in zetas))


def u_n(z, n: int):
    return 1 - (1 - np.asarray(z)) ** n


@dataclass(frozen=True)
class BoundaryCurve:
    phi: np.ndarray
    points: np.ndarray
    n: int

    @property
    def samples(self):
        return list(zip(self.phi.tolist(), self.points.tolist()))

    def write_csv(self, path_or_file) -> None:
        if hasattr(path_or_file, "write"):
            _write_curve(path_or_file, self)
        else:
            with open(path_or_file, "w", newline="") as fh:
                _write_curve(fh, self)


def _write_curve(fh, curve: BoundaryCurve) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["phi", "re", "im"])
    for f, z in zip(curve.phi, curve.points):
        w.writerow([f"{f:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])


def s_n_boundary(n: int, resolution: int = 512) -> BoundaryCurve:
    """Sample ``1 - 2**n cos(phi/n)**n e^{i phi}`` on ``[-pi, pi]``."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    phi = np.linspace(-np.pi, np.pi, int(resolution))
    z = 1 - (2.0 ** n) * np.cos(phi / n) ** n * np.exp(1j * phi)
    return BoundaryCurve(phi, z, int(n))


@dataclass(frozen=True)
class DegreeBound:
    """Lower bound on the number of coefficients ``n``.

    ``certified`` is false for order-of-magnitude advisories; ``infeasible``
    marks ``mu = 1``, which no design reaches; ``real_impossible`` marks real
    ``mu >= 1``, which no design with real coefficients reaches.
    """

    value: float
    formula: str
    certified: bool = True
    infeasible: bool = False
    advisory: str = ""
    real_impossible: bool = False

    def admits(self, n: int) -> bool:
        return not self.infeasible and n >= self.value - 1e-12


def _per_order(bound: float, T: int) -> float:
    # a bound on deg q = (n-1)T + 1 expressed as a bound on n
    return bound if T == 1 else 1 + (bound - 1) / T


def degree_lower_bound(M: MultiplierSet, T: int = 1) -> DegreeBound:
    """Necessary number of coefficients to stabilize every ``mu`` in ``M``
    on cycles of length ``T``.

    point        ``deg q >= log2(|mu| + 1)`` (binomial coefficient bound)
    real_segment ``n >= sqrt(mu_M) / (4T)`` (T-slit Koebe majorant), and for
                 ``T = 1`` additionally ``n >= sqrt(mu_M) / 2``
    horocycle    ``deg q >= mu_M / 8`` (half-plane majorant)
    sector       ``deg q >= sqrt(mu_M) / (3 sqrt 3)``; the exponential order
                 is reported as an advisory only

    For ``T > 1`` the point, horocycle and sector bounds constrain the
    degree ``(n-1)T + 1`` of ``q``; they are translated back to ``n``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    R = M.mu_M
    if M.is_point:
        mu = M.mu
        b = math.log2(abs(mu) + 1)
        real_hit = mu.imag == 0 and mu.real >= 1
        f = "log2(|mu|+1)" if T == 1 else "1+(log2(|mu|+1)-1)/T"
        return DegreeBound(_per_order(b, T), f, True, mu == 1, real_impossible=real_hit)
    if M.kind == "real_segment":
        slit = math.sqrt(R) / (4 * T)
        if T == 1:
            return DegreeBound(max(slit, math.sqrt(R) / 2), "sqrt(mu_M)/2")
        return DegreeBound(slit, "sqrt(mu_M)/(4T)")
    if M.kind == "horocycle_disk":
        b = R / 8
        f = "mu_M/8" if T == 1 else "1+(mu_M/8-1)/T"
        return DegreeBound(_per_order(b, T), f)
    b = math.sqrt(R) / (3 * math.sqrt(3))
    f = "sqrt(mu_M)/(3sqrt3)" if T == 1 else "1+(sqrt(mu_M)/(3sqrt3)-1)/T"
    return DegreeBound(
        _per_order(b, T), f, True, False,
        advisory=f"expected order c(theta)*exp(mu_M) ~ {math.exp(R):.3g} (uncertified)",
    )


def koebe_t(T: int, k: int) -> float:
    """Coefficient of ``z**(kT+1)`` in ``2**(2/T) z / (1 - z**T)**(2/T)``."""
    if T < 1 or k < 0:
        raise ValueError("need T >= 1 and k >= 0")
    s = 2.0 / T
    c = 2.0 ** s
    for j in range(1, k + 1):
        c *= (j - 1 + s) / j
    return c


def koebe_growth_constant(T: int) -> float:
    """``C_T`` with ``koebe_t(T, k) <= C_T k**(2/T - 1)`` for all ``k >= 1``.

    ``T = 1``: ``c_k = 4(k+1) <= 8k``.  ``T >= 2``: Gautschi's inequality
    ``Gamma(k+s)/Gamma(k+1) < k**(s-1)`` for ``0 < s <= 1`` gives
    ``C_T = 2**s / Gamma(s)`` with ``s = 2/T``.
    """
    if T == 1:
        return 8.0
    s = 2.0 / T
    return 2.0 ** s / math.gamma(s)


def coefficient_bound_check(q: Poly, w: complex, verify: bool = True) -> bool:
    """Check ``|q_k| <= binom(n, k) |w|`` for a ``q`` omitting ``w`` on the
    open disk.

    With ``verify`` the precondition is confirmed from the roots of
    ``q - w``: none may lie inside ``|z| < 1 - CLUSTER_RADIUS``.  The open
    disk matters: the extremal ``q = w - w(1 - z)**n`` takes the value ``w``
    at ``z = 1``.
    """
    c = q.trim().coeffs
    n = c.size - 1
    if n < 1:
        raise ValueError("q must be non-constant")
    if abs(c[0]) > 1e-14 * max(1.0, float(np.abs(c).sum())):
        raise ValueError("q(0) must vanish")
    if verify:
        roots = find_roots(q - complex(w)).roots
        if np.min(np.abs(roots)) < 1 - CLUSTER_RADIUS:
            raise ValueError(f"q takes the value w = {w!r} inside the disk")
    aw = abs(w)
    return all(
        abs(c[k]) <= math.comb(n, k) * aw * (1 + 1e-12) + 1e-15 for k in range(1, n + 1)
    )


def area_of_image(q: Poly) -> float:
    """``pi * sum k |q_k|**2``; the image area with multiplicity."""
    c = q.coeffs
    if c.size and c[0] != 0:
        raise ValueError("q(0) must vanish")
    k = np.arange(c.size)
    return float(math.pi * np.sum(k * np.abs(c) ** 2))


def caratheodory_check(q: Poly, lam: float = 0.5, samples: int = 4096) -> bool:
    """If ``Re q > -lam`` on the circle then ``|q_k| <= 2 lam`` for all k.

    Returns True when the premise fails (nothing to check) or the
    coefficient bound holds.
    """
    th = 2 * np.pi * np.arange(samples) / samples
    if q(np.exp(1j * th)).real.min() <= -lam:
        return True
    return bool(np.all(np.abs(q.coeffs[1:]) <= 2 * lam * (1 + 1e-12)))
