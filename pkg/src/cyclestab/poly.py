"""Complex polynomials in ascending coefficient order, root finding and the
Schur stability test.

A :class:`Poly` keeps every structurally stored coefficient, including
trailing zeros.  This matters for the n-inverse: reversing ``z`` as a
polynomial of nominal degree 4 gives ``z**3`` with a zero leading slot, and
that slot must survive until someone asks for the true degree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

EPS = np.finfo(float).eps

STRICTNESS = 1e-9
CLUSTER_RADIUS = 1e-6
ROOT_TOLERANCE = 1e-10
ABERTH_MAX_ITER = 500
DISAGREEMENT_MARGIN = 1e-6
# beyond this a rounding-level perturbation smears an m-fold root too far to tell
MAX_NOISE_MULTIPLICITY = 12
RECONSTRUCTION_TOLERANCE = 1e-7


class RootFindingError(RuntimeError):
    """Raised when neither Aberth iteration nor the companion fallback
    produces roots with an acceptable residual."""


class NumericalDisagreement(RuntimeError):
    """Two independent decision procedures disagree on a case whose margin
    is too large to blame on rounding."""


class Poly:
    """Polynomial ``sum(coeffs[k] * z**k)`` with complex coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.array(np.atleast_1d(coeffs), dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficient sequence must be one-dimensional and non-empty")
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "Poly":
        out = np.zeros(k + 1, dtype=complex)
        out[k] = c
        return cls(out)

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0) -> "Poly":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(c)

    @property
    def degree(self) -> int:
        """Structural degree: index of the last stored coefficient."""
        return self.coeffs.size - 1

    @property
    def true_degree(self) -> int:
        """Index of the last nonzero coefficient, -1 for the zero polynomial."""
        nz = np.flatnonzero(self.coeffs)
        return int(nz[-1]) if nz.size else -1

    def is_zero(self) -> bool:
        return self.true_degree < 0

    def trim(self) -> "Poly":
        d = self.true_degree
        return Poly(self.coeffs[: max(d, 0) + 1])

    def padded(self, n: int) -> "Poly":
        """Same polynomial stored with nominal degree ``n``."""
        if self.true_degree > n:
            raise ValueError(f"degree {self.true_degree} exceeds {n}")
        out = np.zeros(n + 1, dtype=complex)
        m = min(n + 1, self.coeffs.size)
        out[:m] = self.coeffs[:m]
        return Poly(out)

    def __call__(self, z):
        return horner(self.coeffs, z)

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly([0.0])
        k = np.arange(1, self.coeffs.size)
        return Poly(self.coeffs[1:] * k)

    def compose(self, inner: "Poly") -> "Poly":
        """``self(inner(z))`` by Horner's scheme on polynomials."""
        acc = Poly([self.coeffs[-1]])
        for c in self.coeffs[-2::-1]:
            acc = acc * inner + c
        return acc

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n, dtype=complex)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly([other])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Poly):
            return Poly(np.convolve(self.coeffs, other.coeffs))
        return Poly(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly(self.coeffs / scalar)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly([1.0])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(np.all(self.coeffs == other.coeffs))

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def allclose(self, other: "Poly", atol: float = 1e-12) -> bool:
        n = max(self.coeffs.size, other.coeffs.size) - 1
        return bool(np.allclose(self.padded(n).coeffs, other.padded(n).coeffs, rtol=0, atol=atol))

    def __repr__(self):
        return f"Poly({np.array2string(self.coeffs, precision=6, separator=', ')})"


def horner(coeffs, z):
    """Evaluate an ascending coefficient array at ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    acc = np.full(z.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc if acc.ndim else complex(acc)


def eval(p: Poly, z):  # noqa: A001 - name fixed by the public API
    return horner(p.coeffs, z)


def n_inverse(p: Poly, n: int) -> Poly:
    """Multiplicative n-inverse ``z**n * p(1/z)``: coefficient reversal at
    nominal degree ``n``.  The result may carry a zero leading coefficient."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if p.true_degree > n:
        raise ValueError(f"degree {p.true_degree} exceeds n = {n}")
    return Poly(p.padded(n).coeffs[::-1])


def t_root_transform(r: Poly, T: int) -> Poly:
    """Return ``z * r(z**T)``; the result has spectrum in ``T*Z + 1``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    out = np.zeros(T * r.degree + 2, dtype=complex)
    out[1::T] = r.coeffs
    return Poly(out)


# ---------------------------------------------------------------- root finding


@dataclass(frozen=True)
class RootSet:
    """Roots with multiplicity, plus the residual certificate.

    ``residual`` is the largest ``|p(z)| / max(1, |z|)**n`` over the
    returned roots, divided by ``1 + |lead|``.  Inside the closed unit disk
    this is just ``|p(z)| / (1 + |lead|)``; outside it is the same quantity
    for the reversed polynomial at ``1/z``.
    """

    roots: np.ndarray
    clusters: tuple = field(default=())  # (center, multiplicity) pairs
    residual: float = 0.0
    method: str = "aberth"
    iterations: int = 0

    def __len__(self):
        return len(self.roots)


def _eval_with_bound(c, z):
    """Horner value, derivative, and running absolute sum for ``c`` at ``z``."""
    p = np.full(z.shape, c[-1], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    az = np.abs(z)
    s = np.full(z.shape, abs(c[-1]))
    for a in c[-2::-1]:
        dp = dp * z + p
        p = p * z + a
        s = s * az + abs(a)
    return p, dp, s


def _newton_ratio(c, z):
    """Newton correction ``p/p'`` and a convergence flag per root.

    Roots outside the unit disk are handled through the reversed polynomial
    at ``1/z`` so large moduli never overflow.
    """
    n = c.size - 1
    ratio = np.empty(z.shape, dtype=complex)
    done = np.empty(z.shape, dtype=bool)
    inside = np.abs(z) <= 1.0
    if inside.any():
        zi = z[inside]
        p, dp, s = _eval_with_bound(c, zi)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio[inside] = p / dp
        done[inside] = np.abs(p) <= 4 * n * EPS * s
    out = ~inside
    if out.any():
        zo = z[out]
        y = 1.0 / zo
        pr, dpr, s = _eval_with_bound(c[::-1], y)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio[out] = zo / (n - y * dpr / pr)
        done[out] = np.abs(pr) <= 4 * n * EPS * s
    bad = ~np.isfinite(ratio)
    ratio[bad] = 0.0
    return ratio, done


def _initial_guesses(c):
    """Start points on circles read off the Newton polygon of ``log|c_k|``."""
    n = c.size - 1
    k = np.flatnonzero(c)
    y = np.log(np.abs(c[k]))
    hull: list[int] = []
    for i in range(k.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (k[b] - k[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (k[i] - k[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    z = np.empty(n, dtype=complex)
    pos = 0
    for a, b in zip(hull[:-1], hull[1:]):
        m = int(k[b] - k[a])
        r = np.exp((y[a] - y[b]) / m)
        j = np.arange(m)
        # irrational offset and a radial wobble break real/palindromic symmetry
        z[pos:pos + m] = r * (1.0 + 0.01 * np.sin(3.7 * (j + pos))) * np.exp(
            1j * (2 * np.pi * j / m + 0.4 + 1.3 * pos)
        )
        pos += m
    return z


def _aberth(c, max_iter=ABERTH_MAX_ITER):
    z = _initial_guesses(c)
    for it in range(1, max_iter + 1):
        ratio, done = _newton_ratio(c, z)
        if done.all():
            return z, it, True
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = np.sum(1.0 / diff, axis=1)
        w = ratio / (1.0 - ratio * s)
        w[done] = 0.0
        w[~np.isfinite(w)] = 0.0
        z = z - w
        if np.all(np.abs(w) <= 4 * EPS * np.maximum(np.abs(z), 1.0)):
            _, done = _newton_ratio(c, z)
            return z, it, bool(done.all())
    return z, max_iter, False


def _normalized_residual(c, z):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape)
    inside = np.abs(z) <= 1.0
    if inside.any():
        out[inside] = np.abs(horner(c, z[inside]))
    if (~inside).any():
        out[~inside] = np.abs(horner(c[::-1], 1.0 / z[~inside]))
    return out


@lru_cache(maxsize=64)
def _binomial_table(n: int) -> np.ndarray:
    # table[j, i] = C(i, j)
    t = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            t[j, i] = comb(i, j)
    return t


def _taylor_at(c, x):
    """Taylor coefficients of the polynomial about ``x``."""
    c = np.asarray(c, dtype=complex)
    n = c.size
    k = np.arange(n)
    shift = k[None, :] - k[:, None]
    powers = np.zeros((n, n), dtype=complex)
    mask = shift >= 0
    powers[mask] = complex(x) ** shift[mask]
    return (_binomial_table(n) * powers) @ c


def _link_groups(roots, scale):
    """Connected components of the graph joining roots closer than
    ``scale * max(1, |z|)``."""
    n = roots.size
    link = scale * np.maximum(1.0, np.abs(roots))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    d = np.abs(roots[:, None] - roots[None, :])
    close = d <= np.maximum(link[:, None], link[None, :])
    for i, j in zip(*np.nonzero(np.triu(close, 1))):
        parent[find(int(i))] = find(int(j))
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [roots[idx] for idx in groups.values()]


def _resolve_group(c, members, scale, out, clusters):
    accepted = _accept_cluster(c, members)
    if accepted is not None:
        out.extend([accepted] * members.size)
        clusters.append((complex(accepted), members.size))
        return
    if scale > CLUSTER_RADIUS:
        # a stray neighbour may have been chained in; re-link more tightly
        for sub in _link_groups(members, scale / 2):
            _resolve_group(c, sub, scale / 2, out, clusters)
        return
    for r in members:
        out.append(r)
        clusters.append((complex(r), 1))


def _cluster(c, roots):
    """Merge numerically multiple roots onto their centroid.

    Neighbours are linked loosely; a linked group of size m is accepted as an
    m-fold root when its spread is within CLUSTER_RADIUS or within the
    spread rounding alone would produce around a true m-fold root.  Rejected
    groups are split by halving the link radius.
    """
    roots = np.array(roots, dtype=complex)
    if roots.size < 2:
        return roots, tuple((complex(r), 1) for r in roots)
    out: list = []
    clusters: list = []
    for members in _link_groups(roots, 5e-2):
        _resolve_group(c, members, 5e-2, out, clusters)
    order = np.lexsort((np.imag(out), np.real(out)))
    out = np.asarray(out, dtype=complex)[order]
    clusters.sort(key=lambda t: (t[0].real, t[0].imag))
    return out, tuple(clusters)


def _polish_multiple(c, x0, m, reach):
    """Newton on the (m-1)-th derivative, where an m-fold root is simple."""
    k = m - 1
    d = np.array([comb(i, k) for i in range(k, len(c))]) * np.asarray(c[k:], dtype=complex)
    dd = d[1:] * np.arange(1, d.size)
    x = x0
    for _ in range(30):
        fx, dfx = horner(d, x), horner(dd, x) if dd.size else 0.0
        if dfx == 0:
            break
        step = fx / dfx
        x = x - step
        if abs(step) <= 2 * EPS * max(1.0, abs(x)):
            break
    return x if abs(x - x0) <= reach else x0


def _accept_cluster(c, members):
    m = members.size
    if m == 1:
        return members[0]
    center = complex(np.mean(members))
    spread = float(np.max(np.abs(members - center)))
    scale = float(np.sum(np.abs(c) * max(1.0, abs(center)) ** np.arange(c.size)))
    if spread > CLUSTER_RADIUS and m > MAX_NOISE_MULTIPLICITY:
        return None
    if spread > CLUSTER_RADIUS:
        # cheap rejection of plain neighbours before the costly polish
        t0 = _taylor_at(c, center)
        if abs(t0[m]) == 0.0 or spread > 1e3 * (1e3 * EPS * scale / abs(t0[m])) ** (1.0 / m):
            return None
    center = _polish_multiple(c, center, m, max(spread, CLUSTER_RADIUS))
    if spread <= CLUSTER_RADIUS:
        return center
    t = _taylor_at(c, center)
    if abs(t[m]) == 0.0:
        return None
    noise = (1e3 * EPS * scale / abs(t[m])) ** (1.0 / m)
    # low Taylor coefficients must be at noise level for an m-fold root
    low = np.abs(t[:m]) * noise ** (-np.arange(m, dtype=float))
    if spread <= 10 * noise and np.all(low <= 10 * abs(t[m])):
        return center
    return None


def _reconstruction_error(c, roots) -> float:
    rebuilt = np.poly(roots)[::-1] * c[-1]
    return float(np.max(np.abs(rebuilt - c)) / np.sum(np.abs(c)))


def find_roots(p: Poly, tol: float = ROOT_TOLERANCE) -> RootSet:
    """All roots of ``p`` with multiplicity.

    Aberth-Ehrlich iteration started on Newton-polygon circles.  If it has
    not converged after 500 sweeps, or the roots do not rebuild the
    coefficients, the companion-matrix eigenvalues are used instead and
    ``method`` says so.
    """
    c = p.trim().coeffs
    n = c.size - 1
    if p.is_zero():
        raise ValueError("the zero polynomial has no finite root set")
    if n < 1:
        raise ValueError("constant polynomial has no roots")
    lead = c[-1]
    nz = int(np.flatnonzero(c)[0])
    zeros = np.zeros(nz, dtype=complex)
    core = c[nz:]
    m = core.size - 1
    method, iterations = "aberth", 0
    if m == 0:
        found = np.zeros(0, dtype=complex)
    elif m == 1:
        found = np.array([-core[0] / core[1]])
    else:
        found, iterations, ok = _aberth(core)
        # two approximations can settle in one flat cluster region while a
        # root elsewhere goes missing; rebuilding the coefficients exposes it
        mismatch = _reconstruction_error(core, found)
        if not ok or mismatch > RECONSTRUCTION_TOLERANCE:
            comp = np.zeros((m, m), dtype=complex)
            comp[1:, :-1] = np.eye(m - 1)
            comp[:, -1] = -core[:-1] / core[-1]
            alt = np.linalg.eigvals(comp)
            if not ok or _reconstruction_error(core, alt) < mismatch:
                method, found = "companion", alt
    roots = np.concatenate([zeros, found])
    roots, clusters = _cluster(c, roots)
    residual = float(np.max(_normalized_residual(c, roots)) / (1.0 + abs(lead)))
    scale = 1.0 + float(np.sum(np.abs(c)))
    if residual * (1.0 + abs(lead)) > tol * scale:
        raise RootFindingError(
            f"{method} roots of degree-{n} polynomial have residual {residual:.3e}"
        )
    return RootSet(roots, clusters, residual, method, iterations)


# ---------------------------------------------------------------- Schur test


@dataclass(frozen=True)
class SchurVerdict:
    stable: bool
    max_modulus: float
    margin: float
    method: str = "roots"
    schur_cohn_stable: bool | None = None
    agree: bool = True


def schur_cohn_stable(p: Poly, radius: float = 1.0) -> bool:
    """True iff every root of ``p`` has modulus ``< radius``.

    Classical Schur-Cohn reduction: with ``p#`` the conjugate reciprocal,
    ``(conj(a_n) p - a_0 p#) / z`` keeps the count of roots in the disk
    whenever ``|a_0| < |a_n|``.
    """
    a = p.trim().coeffs
    if a.size < 2:
        if p.is_zero():
            raise ValueError("zero polynomial")
        return True
    a = a * radius ** np.arange(a.size)
    while a.size > 1:
        a = a / np.max(np.abs(a))
        a0, an = a[0], a[-1]
        if abs(a0) >= abs(an):
            return False
        b = np.conj(an) * a - a0 * np.conj(a[::-1])
        a = b[1:]
    return True


def schur_test(p: Poly, strictness: float = STRICTNESS) -> SchurVerdict:
    """Schur stability with a strictness margin, decided two ways.

    The root moduli give the verdict and ``max_modulus``; the Schur-Cohn
    recursion on ``p((1 - strictness) z)`` must agree unless the margin is
    below ``1e-6``.
    """
    if p.true_degree < 1:
        raise ValueError("schur_test needs a polynomial of degree >= 1")
    rs = find_roots(p)
    max_mod = float(np.max(np.abs(rs.roots)))
    stable = max_mod < 1.0 - strictness
    sc = schur_cohn_stable(p, 1.0 - strictness)
    agree = sc == stable
    margin = 1.0 - max_mod
    if not agree and abs(margin) > DISAGREEMENT_MARGIN:
        raise NumericalDisagreement(
            f"Schur-Cohn says {sc}, roots say {stable} at max modulus {max_mod!r}"
        )
    return SchurVerdict(stable, max_mod, margin, "roots", sc, agree)


def binomial_poly(n: int, shift: complex) -> Poly:
    """``(z - shift)**n`` expanded exactly by the binomial theorem."""
    return Poly([comb(n, k) * (-shift) ** (n - k) for k in range(n + 1)])
