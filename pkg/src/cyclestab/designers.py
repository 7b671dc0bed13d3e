"""Constructive averaging sets.

Each designer returns a :class:`DesignResult` whose ``verified`` flag means
the design passed :func:`duality.in_stability_domain` (Schur and omission
sides) on every probe multiplier of its target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import PROBES_BOUNDARY, PROBES_INTERIOR, MultiplierSet, degree_lower_bound, s_n_member
from .duality import (
    OMISSION_TOLERANCE,
    WINDING_SAMPLES,
    AveragingSet,
    DesignError,
    in_stability_domain,
)
from .poly import STRICTNESS, Poly

METHODS = ("simplest", "suffridge", "alexander", "iterated_starlike", "fejer", "auto")
DEFAULT_MAX_ORDER = 256
# Suffridge designs are certified on (-1/lambda, -1]; the open end needs a gap
SUFFRIDGE_GAP = 1e-3


class DesignNotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class VerifyOptions:
    strictness: float = STRICTNESS
    omission_tol: float = OMISSION_TOLERANCE
    samples: int = WINDING_SAMPLES
    boundary_probes: int = PROBES_BOUNDARY
    interior_probes: int = PROBES_INTERIOR


DEFAULT_OPTIONS = VerifyOptions()


@dataclass(frozen=True)
class DesignRequest:
    target: MultiplierSet
    T: int = 1
    method: str = "auto"
    max_order: int = DEFAULT_MAX_ORDER
    options: VerifyOptions = DEFAULT_OPTIONS

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.T < 1 or self.max_order < 1:
            raise ValueError("need T >= 1 and max_order >= 1")


@dataclass
class DesignResult:
    design: AveragingSet
    verified: bool
    probes: np.ndarray
    margin: float
    method_used: str
    target: MultiplierSet | None = None
    probes_passed: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.design.n

    @property
    def T(self) -> int:
        return self.design.T

    def q(self) -> Poly:
        """``sum a_k z**k``, the T = 1 range polynomial."""
        return Poly((0.0,) + self.design.a)


def verify(design: AveragingSet, target: MultiplierSet | None, probes=None,
           opts: VerifyOptions = DEFAULT_OPTIONS):
    """Run every probe through both stability methods.

    A probe passes when the Schur verdict is stable and the omission side
    agrees.  Returns ``(verified, margin, probes, passed)``; an empty probe
    set is never verified.
    """
    if probes is None:
        if target is None:
            probes = np.array([], complex)
        else:
            probes = target.probes(opts.boundary_probes, opts.interior_probes)
    probes = np.asarray(probes, dtype=complex)
    margin = math.inf
    passed = 0
    for mu in probes:
        rep = in_stability_domain(design, mu, opts.strictness, opts.omission_tol, opts.samples)
        margin = min(margin, rep.margin)
        passed += bool(rep.stable and rep.agree)
    if probes.size == 0:
        return False, math.nan, probes, 0
    return passed == probes.size and margin > 0, margin, probes, passed


def _result(design, method, target, opts=DEFAULT_OPTIONS, **extras) -> DesignResult:
    ok, margin, pr, passed = verify(design, target, None, opts)
    return DesignResult(design, ok, pr, margin, method, target, passed, extras)


def simplest_coefficients(mu: complex, zeta: complex, n: int) -> np.ndarray:
    """``a_k = -binom(n, k) (-zeta)**k / mu``; then ``chi = (z - zeta)**n``."""
    k = np.arange(1, n + 1)
    binom = np.array([math.comb(n, int(j)) for j in k], dtype=float)
    return -binom * (-complex(zeta)) ** k / complex(mu)


def simplest_design(mu: complex, n: int, opts: VerifyOptions = DEFAULT_OPTIONS) -> DesignResult:
    """The design collapsing ``chi`` to ``(z - zeta)**n`` for the witness
    ``zeta`` of :func:`domains.s_n_member`."""
    mu = complex(mu)
    if mu == 0 or mu == 1:
        raise DesignError(f"no simplest design for mu = {mu!r}")
    mem = s_n_member(mu, n)
    if not mem.inside:
        raise DesignError(f"mu = {mu!r} is {mem.verdict} S_{n}")
    a = simplest_coefficients(mu, mem.witness, n)
    # the witness satisfies u_n(zeta) = mu only to rounding; renormalize
    a = a / a.sum()
    design = AveragingSet(tuple(a), 1)
    return _result(design, "simplest", MultiplierSet.point(mu), opts, zeta=mem.witness)


def suffridge_lambda(n: int) -> float:
    return math.tan(math.pi / (2 * (n + 1))) ** 2


def suffridge_coefficients(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    s = np.sin(np.pi / (n + 1))
    P = (1 - (k - 1) / n) * np.sin(k * np.pi / (n + 1)) / s
    return 2 * n * (1 - np.cos(np.pi / (n + 1))) / (n + 1) * P


def suffridge_design(
    n: int, target: MultiplierSet | None = None, opts: VerifyOptions = DEFAULT_OPTIONS
) -> DesignResult:
    """Suffridge polynomial normalized to ``q(1) = 1``.

    ``q(-1) = -lambda(n)`` with ``lambda(n) = tan(pi/(2(n+1)))**2``; the
    design stabilizes real multipliers in ``(-1/lambda(n), -1]``.  Without
    an explicit target it is verified on that segment shortened by
    ``SUFFRIDGE_GAP``; for ``n = 1`` the segment is empty and nothing is
    verified.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = suffridge_coefficients(n)
    a = a / a.sum()
    lam = suffridge_lambda(n)
    if target is None and (1 - SUFFRIDGE_GAP) / lam >= 1:
        target = MultiplierSet.real_segment((1 - SUFFRIDGE_GAP) / lam)
    return _result(AveragingSet(tuple(a), 1), "suffridge", target, opts, lam=lam)


def alexander_design(
    n: int, target: MultiplierSet | None = None, opts: VerifyOptions = DEFAULT_OPTIONS
) -> DesignResult:
    """``a_k = 1/(l(n) k)`` with ``l(n)`` the n-th harmonic number."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=float)
    ln = float(np.sum(1.0 / k))
    a = 1.0 / (ln * k)
    return _result(AveragingSet(tuple(a), 1), "alexander", target, opts, l=ln)


def fejer_design(
    n: int, target: MultiplierSet | None = None, opts: VerifyOptions = DEFAULT_OPTIONS
) -> DesignResult:
    """Normalized Fejér mean of ``z/(1-z)``: ``a_k = (2/n)(1 - k/(n+1))``.

    The Fejér kernel is nonnegative, so ``Re q >= -1/n`` on the disk and
    every multiplier of the horocycle disk of size ``mu_M < n`` is
    stabilized.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=float)
    a = (2.0 / n) * (1 - k / (n + 1))
    a = a / a.sum()
    return _result(AveragingSet(tuple(a), 1), "fejer", target, opts, half_plane=-1.0 / n)


def starlike_q1(T: int) -> Poly:
    c = np.zeros(T + 2)
    c[1] = (T + 1) / (T + 2)
    c[T + 1] = 1 / (T + 2)
    return Poly(c)


def slit_ray_max(T: int, m: int) -> float:
    """Exact ``max |q|`` over the slit rays for the m-fold composition.

    On the ray through ``e^{i pi/T}`` one has ``q1(r e^{i pi/T}) =
    h(r) e^{i pi/T}`` with ``h(r) = r (T + 1 - r**T)/(T + 2)`` increasing on
    ``[0, 1]``, so the maximum is ``h`` iterated ``m`` times at ``r = 1``.
    """
    r = 1.0
    for _ in range(m):
        r = r * (T + 1 - r ** T) / (T + 2)
    return r


def starlike_order(T: int, m: int) -> int:
    return ((T + 1) ** m - 1) // T + 1


def iterated_starlike_design(
    T: int,
    m: int,
    target: MultiplierSet | None = None,
    max_order: int | None = None,
    opts: VerifyOptions = DEFAULT_OPTIONS,
) -> DesignResult:
    """``q = q1∘...∘q1`` (m times), ``q1(z) = ((T+1) z + z**(T+1))/(T+2)``.

    ``q`` has degree ``N = (T+1)**m`` and spectrum in ``T*Z + 1``; its
    coefficients at ``z**((k-1)T+1)`` are the design ``a_k``.
    """
    if T < 2:
        raise ValueError("the iterated starlike construction needs T >= 2")
    if m < 1:
        raise ValueError("m must be >= 1")
    n = starlike_order(T, m)
    if max_order is not None and n > max_order:
        raise DesignError(f"order {n} exceeds max_order {max_order}")
    q1 = starlike_q1(T)
    q = q1
    for _ in range(m - 1):
        q = q.compose(q1)
    a = q.coeffs.real[1::T]
    design = AveragingSet(tuple(a / a.sum()), T)
    N = (T + 1) ** m
    gamma = 1.0 / ((T + 1) * math.log2(T + 1))
    return _result(
        design, "iterated_starlike", target, opts,
        m=m, N=N, gamma=gamma,
        slit_bound=((T + 1) / (T + 2)) ** m,
        power_bound=2 * N ** (-gamma),
        ray_max=slit_ray_max(T, m),
        q=q,
    )


def _grow(n: int) -> int:
    return max(n + 1, int(n * 1.25))


def _search(make, start: int, max_order: int, what: str) -> DesignResult:
    n = max(1, start)
    last = None
    while n <= max_order:
        res = make(n)
        if res.verified:
            return res
        last = res
        n = _grow(n)
    detail = f" (last tried n={last.n}, margin {last.margin:.3e})" if last else ""
    raise DesignNotFound(f"no verified {what} design within max_order={max_order}{detail}")


def _auto_method(M: MultiplierSet, T: int) -> str:
    if M.is_point:
        if T == 1:
            return "simplest"
        if M.mu.imag == 0 and M.mu.real <= -1:
            return "iterated_starlike"
        raise DesignNotFound("with T > 1 only real point targets mu <= -1 have a catalog method")
    if T == 1:
        return {"real_segment": "suffridge", "horocycle_disk": "fejer", "sector": "alexander"}[M.kind]
    if M.kind == "real_segment":
        return "iterated_starlike"
    raise DesignNotFound(f"no catalog method for {M.kind} targets with T > 1")


def auto_design(req: DesignRequest) -> DesignResult:
    """Pick the catalog method for the target and search the smallest order
    that verifies on the target's probe grid."""
    M, T, opts = req.target, req.T, req.options
    method = req.method if req.method != "auto" else _auto_method(M, T)
    cap = req.max_order
    if method != "iterated_starlike" and T != 1:
        raise DesignNotFound(f"method {method!r} only designs for T = 1")
    if method == "simplest":
        if not M.is_point:
            raise DesignNotFound("simplest designs target a single multiplier")
        if M.mu == 1:
            raise DesignNotFound("mu = 1 lies in no S_n")
        for n in range(1, cap + 1):
            if s_n_member(M.mu, n).inside:
                res = simplest_design(M.mu, n, opts)
                if res.verified:
                    return res
        raise DesignNotFound(f"mu = {M.mu!r} not in S_n for n <= {cap}")
    if method == "iterated_starlike":
        lam = M.mu_M ** (-1.0 / T)
        m = 1
        while slit_ray_max(T, m) >= lam:
            m += 1
        while starlike_order(T, m) <= cap:
            res = iterated_starlike_design(T, m, M, opts=opts)
            if res.verified:
                return res
            m += 1
        raise DesignNotFound(f"no verified iterated_starlike design within max_order={cap}")
    start = math.ceil(degree_lower_bound(M, 1).value)
    if method == "suffridge":
        if M.kind == "real_segment":
            n = 1
            while 1 / suffridge_lambda(n) <= M.mu_M:
                n += 1
            start = max(start, n)
        return _search(lambda n: suffridge_design(n, M, opts), start, cap, method)
    if method == "fejer":
        if M.kind == "horocycle_disk":
            start = max(start, math.floor(M.mu_M) + 1)
        return _search(lambda n: fejer_design(n, M, opts), start, cap, method)
    return _search(lambda n: alexander_design(n, M, opts), start, cap, method)
