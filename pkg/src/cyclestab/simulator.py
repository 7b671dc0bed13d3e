"""Plain and delayed-feedback orbits of one-dimensional polynomial maps,
cycle detection, and empirical contraction rates."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .duality import AveragingSet, build_chi
from .poly import Poly, find_roots

ESCAPE_RADIUS = 1e6
CONVERGENCE_TOLERANCE = 1e-8
CYCLE_TOLERANCE = 1e-8
MIN_FIT_SAMPLES = 30
# distances this close to rounding level no longer decay geometrically
DISTANCE_FLOOR = 1e-13
MAX_CYCLE_LENGTH = 5


class SimulationError(RuntimeError):
    pass


class InsufficientTail(SimulationError):
    pass


@dataclass(frozen=True)
class MapSpec:
    """``quadratic_c``: ``z**2 + c``; ``logistic``: ``lam x (1 - x)``;
    ``polynomial``: ascending coefficients in ``coeffs``."""

    kind: str
    parameter: complex = 0j
    coeffs: tuple = ()

    def __post_init__(self):
        if self.kind not in ("quadratic_c", "logistic", "polynomial"):
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind == "polynomial" and Poly(self.coeffs).true_degree < 2:
            raise ValueError("polynomial maps need degree >= 2")

    def poly(self) -> Poly:
        if self.kind == "quadratic_c":
            return Poly([self.parameter, 0.0, 1.0])
        if self.kind == "logistic":
            lam = complex(self.parameter)
            return Poly([0.0, lam, -lam])
        return Poly(self.coeffs).trim()

    def __call__(self, z):
        if self.kind == "quadratic_c":
            return z * z + self.parameter
        if self.kind == "logistic":
            return self.parameter * z * (1 - z)
        return self.poly()(z)

    def derivative(self, z):
        if self.kind == "quadratic_c":
            return 2 * z
        if self.kind == "logistic":
            return self.parameter * (1 - 2 * z)
        return self.poly().derivative()(z)


@dataclass(frozen=True)
class CycleInfo:
    points: tuple
    period: int
    multiplier: complex

    @property
    def repelling(self) -> bool:
        return abs(self.multiplier) > 1


@dataclass
class TrajectoryRecord:
    points: np.ndarray
    distances: np.ndarray
    converged: bool
    empirical_rate: float
    predicted_rate: float
    escaped: bool = False
    steps_to_converge: int | None = None
    cycle: CycleInfo | None = None
    fit_window: tuple = ()
    extras: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "escaped": self.escaped,
            "steps": int(self.points.size - 1),
            "steps_to_converge": self.steps_to_converge,
            "empirical_rate": self.empirical_rate,
            "predicted_rate": self.predicted_rate,
            "final_distance": float(self.distances[-1]) if self.distances.size else None,
        }

    def write_csv(self, path_or_file) -> None:
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "re", "im", "distance"])
        dist = self.distances if self.distances.size else np.full(self.points.size, np.nan)
        for k, (z, d) in enumerate(zip(self.points, dist)):
            w.writerow([k, f"{z.real:.17g}", f"{z.imag:.17g}", f"{d:.17g}"])


def _iterate(f, z, times):
    for _ in range(times):
        z = f(z)
    return z


def _polish_periodic(f, z, T, iters=60):
    # Newton on f^T(z) - z with the chain-rule derivative
    best, best_res = z, math.inf
    for _ in range(iters):
        w, d = z, 1.0 + 0j
        for _ in range(T):
            d *= f.derivative(w)
            w = f(w)
        res = abs(w - z)
        if res < best_res:
            best, best_res = z, res
        if res == 0 or d == 1:
            break
        z = z - (w - z) / (d - 1)
    return best


def find_cycles(fmap: MapSpec, T: int, tol: float = CYCLE_TOLERANCE) -> list:
    """All cycles whose minimal period divides ``T``, from the roots of
    ``f^T(z) - z``; sorted by period, then by first point."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if T > MAX_CYCLE_LENGTH:
        raise ValueError(f"T = {T} exceeds the supported maximum {MAX_CYCLE_LENGTH}")
    p = fmap.poly()
    g = p
    for _ in range(T - 1):
        g = p.compose(g)
    g = g - Poly([0.0, 1.0])
    roots = [_polish_periodic(fmap, complex(r), T) for r in find_roots(g).roots]
    cycles: list[CycleInfo] = []
    seen: list[complex] = []

    def near(a, b):
        return abs(a - b) <= tol * max(1.0, abs(a))

    for s in roots:
        if any(near(s, q) for q in seen):
            continue
        period = T
        for d in range(1, T):
            if T % d == 0 and near(_iterate(fmap, s, d), s):
                period = d
                break
        orbit = [s]
        for _ in range(period - 1):
            orbit.append(fmap(orbit[-1]))
        seen.extend(orbit)
        k = min(range(period), key=lambda i: (round(orbit[i].real, 12), round(orbit[i].imag, 12)))
        orbit = orbit[k:] + orbit[:k]
        mult = complex(np.prod([fmap.derivative(z) for z in orbit]))
        cycles.append(CycleInfo(tuple(complex(z) for z in orbit), period, mult))
    cycles.sort(key=lambda c: (c.period, c.points[0].real, c.points[0].imag))
    return cycles


def nearest_cycle(fmap: MapSpec, T: int, z0: complex, period: int | None = None) -> CycleInfo:
    """The cycle of minimal period ``period`` (default ``T``) closest to ``z0``."""
    want = T if period is None else period
    cands = [c for c in find_cycles(fmap, T) if c.period == want]
    if not cands:
        raise SimulationError(f"no cycle of period {want} found")
    return min(cands, key=lambda c: min(abs(z0 - s) for s in c.points))


def _distances(points, cycle):
    if cycle is None:
        return np.zeros(0)
    pts = np.asarray(cycle.points)
    return np.min(np.abs(points[:, None] - pts[None, :]), axis=1)


def _convergence(dist, T, tol):
    window = 10 * T
    below = dist < tol
    if dist.size == 0 or not below[-1]:
        return False, None
    # first index after which the distance stays below tol
    above = np.flatnonzero(~below)
    start = int(above[-1]) + 1 if above.size else 0
    if dist.size - start < window:
        return False, None
    return True, start


def _fit_rate(dist, scale):
    """Geometric decay rate over the final third of the decay segment.

    The segment ends where distances reach rounding level; the window holds
    at least ``MIN_FIT_SAMPLES`` samples.
    """
    floor = DISTANCE_FLOOR * max(1.0, scale)
    hit = np.flatnonzero(dist <= floor)
    end = int(hit[0]) if hit.size else dist.size
    seg = end
    width = max(seg // 3, MIN_FIT_SAMPLES)
    if seg < MIN_FIT_SAMPLES or np.any(dist[end - width:end] <= 0):
        return math.nan, ()
    k = np.arange(end - width, end)
    slope = np.polyfit(k, np.log(dist[end - width:end]), 1)[0]
    return float(math.exp(slope)), (end - width, end)


def _record(points, cycle, escaped, predicted, tol, T):
    dist = _distances(points, cycle)
    if escaped or cycle is None:
        return TrajectoryRecord(points, dist, False, math.nan, predicted, escaped, None, cycle)
    ok, start = _convergence(dist, T, tol)
    scale = max(abs(s) for s in cycle.points)
    rate, window = _fit_rate(dist, scale) if ok else (math.nan, ())
    return TrajectoryRecord(points, dist, ok, rate, predicted, False, start, cycle, window)


def run_plain(
    fmap: MapSpec,
    z0: complex,
    steps: int,
    cycle: CycleInfo | None = None,
    escape_radius: float = ESCAPE_RADIUS,
    tol: float = CONVERGENCE_TOLERANCE,
) -> TrajectoryRecord:
    """The uncontrolled orbit ``z0, f(z0), ...``; stops early on escape."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    pts = [complex(z0)]
    escaped = False
    for _ in range(steps):
        z = fmap(pts[-1])
        pts.append(complex(z))
        if not (abs(z) <= escape_radius):
            escaped = True
            break
    predicted = abs(cycle.multiplier) ** (1.0 / cycle.period) if cycle is not None else math.nan
    T = cycle.period if cycle is not None else 1
    return _record(np.array(pts), cycle, escaped, predicted, tol, T)


def run_stabilized(
    fmap: MapSpec,
    design: AveragingSet,
    cycle: CycleInfo,
    z0: complex,
    steps: int,
    escape_radius: float = ESCAPE_RADIUS,
    tol: float = CONVERGENCE_TOLERANCE,
) -> TrajectoryRecord:
    """``z_m = sum_k a_k f(z_{m-1-(k-1)T})`` seeded by plain iteration.

    The first ``(n-1)T + 1`` states are ``z0, f(z0), ...``; ``steps`` counts
    all states after ``z0``.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    T = design.T
    if cycle.period != T:
        raise SimulationError(f"design period {T} != cycle period {cycle.period}")
    a = design.a
    n = design.n
    seed = (n - 1) * T + 1
    pts = [complex(z0)]
    escaped = False
    fz: list[complex] = []
    for m in range(1, steps + 1):
        fz.append(fmap(pts[m - 1]))
        if m < seed:
            z = fz[m - 1]
        else:
            z = a[0] * fz[m - 1]
            for k in range(1, n):
                z = z + a[k] * fz[m - 1 - k * T]
        pts.append(complex(z))
        if not (abs(z) <= escape_radius):
            escaped = True
            break
    if cycle.multiplier == 0:
        predicted = 0.0  # chi = z**N: superattracting
    else:
        predicted = float(np.max(np.abs(find_roots(build_chi(design, cycle.multiplier)).roots)))
    return _record(np.array(pts), cycle, escaped, predicted, tol, T)


def rate_check(record: TrajectoryRecord, rel: float = 0.2) -> bool:
    """``|empirical - predicted| <= rel * predicted`` for a converged record."""
    if not record.converged:
        raise SimulationError("rate_check needs a converged trajectory")
    if not math.isfinite(record.empirical_rate):
        raise InsufficientTail(
            f"fewer than {MIN_FIT_SAMPLES} samples before the distance reaches rounding level"
        )
    return abs(record.empirical_rate - record.predicted_rate) <= rel * record.predicted_rate
