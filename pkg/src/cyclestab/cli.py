"""``cyclestab`` command line.

Exit codes: 0 ok, 2 nothing found (design or cycle), 3 cross-check
failure between the Schur and omission methods, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .config import Config, ConfigError, load_config
from .designers import METHODS, DesignNotFound, DesignRequest, DesignResult, auto_design
from .domains import MultiplierSet, degree_lower_bound, s_n_boundary
from .duality import AveragingSet, DesignError, StabilityReport, in_stability_domain
from .poly import NumericalDisagreement
from .simulator import MapSpec, SimulationError, find_cycles, nearest_cycle, run_plain, run_stabilized

EXIT_OK = 0
EXIT_NOT_FOUND = 2
EXIT_DISAGREEMENT = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- formats


def parse_complex(text: str) -> complex:
    """``re+imi`` syntax, e.g. ``2-1.5i``; ``j`` is accepted too."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse number {text!r}") from None


def parse_target(text: str) -> MultiplierSet:
    kind, _, arg = text.partition(":")
    try:
        if kind == "point":
            return MultiplierSet.point(parse_complex(arg))
        if kind == "segment":
            return MultiplierSet.real_segment(_float(arg))
        if kind == "horocycle":
            return MultiplierSet.horocycle(_float(arg))
        if kind == "sector":
            mu_m, _, theta = arg.partition(",")
            return MultiplierSet.sector(_float(mu_m), _float(theta))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"malformed target {text!r}; use point:Z, segment:M, horocycle:M or sector:M,THETA")


def parse_map(text: str) -> MapSpec:
    kind, _, arg = text.partition(":")
    if kind in ("quadratic", "quadratic_c"):
        return MapSpec("quadratic_c", parse_complex(arg))
    if kind == "logistic":
        return MapSpec("logistic", parse_complex(arg))
    if kind in ("poly", "polynomial"):
        coeffs = tuple(parse_complex(c) for c in arg.split(","))
        try:
            return MapSpec("polynomial", coeffs=coeffs)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    raise UsageError(f"malformed map {text!r}; use quadratic:C, logistic:L or poly:c0,c1,...")


def _num(x) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits and complex as ``[re, im]``."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return f"[{_num(obj.real)}, {_num(obj.imag)}]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def target_to_dict(M: MultiplierSet | None):
    if M is None:
        return None
    out = {"kind": M.kind, "mu_M": M.mu_M}
    if M.kind == "sector":
        out["theta"] = M.theta
    if M.is_point:
        out["mu"] = M.mu
    return out


def target_from_dict(d) -> MultiplierSet | None:
    if d is None:
        return None
    mu = complex(*d["mu"]) if "mu" in d else 0j
    return MultiplierSet(d["kind"], float(d.get("mu_M", 0.0)), float(d.get("theta", 0.0)), mu)


def design_to_dict(res: DesignResult) -> dict:
    d = res.design
    return {
        "method": res.method_used,
        "T": d.T,
        "n": d.n,
        "a": list(d.a),
        "p_ascending": list(d.a[::-1]),
        "target": target_to_dict(res.target),
        "verified": res.verified,
        "margin": res.margin,
        "probes_passed": res.probes_passed,
        "probes_total": int(len(res.probes)),
    }


def design_from_dict(d: dict) -> AveragingSet:
    try:
        a = tuple(complex(re, im) for re, im in d["a"])
        return AveragingSet(a, int(d.get("T", 1)))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid design JSON: {exc}") from None


def report_to_dict(rep: StabilityReport) -> dict:
    def omission(v):
        return {
            "omitted": v.omitted,
            "min_boundary_distance": v.min_boundary_distance,
            "winding_zero_count": v.winding_zero_count,
            "indeterminate": v.indeterminate,
            "samples_used": v.samples_used,
        }

    return {
        "mu": rep.mu,
        "T": rep.T,
        "stable": rep.stable,
        "agree": rep.agree,
        "schur": {
            "stable": rep.schur.stable,
            "max_modulus": rep.schur.max_modulus,
            "margin": rep.schur.margin,
            "schur_cohn_stable": rep.schur.schur_cohn_stable,
        },
        "omission": {
            "branches": [omission(b) for b in rep.branches],
            "q": omission(rep.q_verdict) if rep.q_verdict is not None else None,
            "margin": rep.omission_margin,
        },
    }


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text + "\n")
        return
    try:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None


def _read_design(path: str) -> AveragingSet:
    try:
        with open(path) as fh:
            return design_from_dict(json.load(fh))
    except OSError as exc:
        raise UsageError(f"cannot read design {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"design {path} is not JSON: {exc}") from None


# ---------------------------------------------------------------- commands


def cmd_design(args, cfg: Config) -> int:
    M = parse_target(args.target)
    req = DesignRequest(M, args.T, args.method, cfg.max_order, cfg.verify_options())
    try:
        res = auto_design(req)
    except (DesignNotFound, DesignError) as exc:
        print(f"cyclestab: no design: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    out = design_to_dict(res)
    out["lower_bound"] = degree_lower_bound(M, args.T).value
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_check(args, cfg: Config) -> int:
    design = _read_design(args.design)
    if args.T is not None and args.T != design.T:
        design = AveragingSet(design.a, args.T)
    mu = parse_complex(args.mu)
    if mu == 0:
        raise UsageError("mu must be nonzero")
    try:
        rep = in_stability_domain(
            design, mu, cfg.strictness, cfg.omission_tolerance, cfg.winding_samples
        )
    except NumericalDisagreement as exc:
        print(f"cyclestab: methods disagree: {exc}", file=sys.stderr)
        return EXIT_DISAGREEMENT
    _emit(dumps(report_to_dict(rep)), args.out)
    return EXIT_OK


def cmd_boundary(args, cfg: Config) -> int:
    if args.n < 1:
        raise UsageError("n must be >= 1")
    res = args.resolution or cfg.boundary_resolution
    if res < 16:
        raise UsageError("resolution must be at least 16")
    curve = s_n_boundary(args.n, res)
    if args.out in (None, "-"):
        curve.write_csv(sys.stdout)
    else:
        try:
            curve.write_csv(args.out)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from None
    return EXIT_OK


def cmd_simulate(args, cfg: Config) -> int:
    fmap = parse_map(args.map)
    z0 = parse_complex(args.z0)
    design = _read_design(args.design) if args.design else None
    T = design.T if design is not None else args.T
    try:
        cycle = nearest_cycle(fmap, T, z0)
    except (SimulationError, ValueError) as exc:
        print(f"cyclestab: {exc}", file=sys.stderr)
        return EXIT_NOT_FOUND
    if args.plain or design is None:
        rec = run_plain(fmap, z0, args.steps, cycle, cfg.escape_radius, cfg.convergence_tolerance)
    else:
        rec = run_stabilized(
            fmap, design, cycle, z0, args.steps, cfg.escape_radius, cfg.convergence_tolerance
        )
    if args.csv:
        try:
            rec.write_csv(args.csv)
        except OSError as exc:
            raise UsageError(f"cannot write {args.csv}: {exc}") from None
    summary = {"cycle": list(cycle.points), "multiplier": cycle.multiplier, "plain": bool(args.plain)}
    summary.update(rec.summary())
    _emit(dumps(summary), args.out)
    return EXIT_OK


def cmd_find_cycles(args, cfg: Config) -> int:
    fmap = parse_map(args.map)
    try:
        cycles = find_cycles(fmap, args.T)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = [
        {"period": c.period, "points": list(c.points), "multiplier": c.multiplier, "repelling": c.repelling}
        for c in cycles
    ]
    _emit(dumps(out), args.out)
    return EXIT_OK


def cmd_bounds(args, cfg: Config) -> int:
    M = parse_target(args.target)
    b = degree_lower_bound(M, args.T)
    out = {
        "target": target_to_dict(M),
        "T": args.T,
        "lower_bound": b.value,
        "formula": b.formula,
        "certified": b.certified,
        "infeasible": b.infeasible,
        "real_impossible": b.real_impossible,
        "advisory": b.advisory,
    }
    _emit(dumps(out), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cyclestab", description="Delayed-feedback stabilization of repelling cycles.")
    ap.add_argument("--config", help="key=value config file (default: $CYCLESTAB_CONFIG)")
    ap.add_argument("--strictness", type=float)
    ap.add_argument("--omission-tolerance", type=float)
    ap.add_argument("--convergence-tolerance", type=float)
    ap.add_argument("--winding-samples", type=int)
    ap.add_argument("--max-order", type=int)
    ap.add_argument("--escape-radius", type=float)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("design", help="find a verified averaging set for a multiplier target")
    p.add_argument("--target", required=True, help="point:Z | segment:M | horocycle:M | sector:M,THETA")
    p.add_argument("--T", type=_positive_int, default=1, help="cycle length")
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("check", help="decide stability of a design at a multiplier")
    p.add_argument("--design", required=True, help="design JSON written by `design`")
    p.add_argument("--mu", required=True)
    p.add_argument("--T", type=_positive_int, help="override the design's cycle length")
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("boundary", help="sample the boundary curve of S_n as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--resolution", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("simulate", help="run a plain or stabilized orbit")
    p.add_argument("--map", required=True, help="quadratic:C | logistic:L | poly:c0,c1,...")
    p.add_argument("--design", help="design JSON; omit for a plain orbit")
    p.add_argument("--z0", required=True)
    p.add_argument("--steps", type=_positive_int, default=500)
    p.add_argument("--T", type=_positive_int, default=1, help="cycle length when no design is given")
    p.add_argument("--plain", action="store_true", help="ignore the design and iterate f")
    p.add_argument("--csv", help="trajectory CSV path")
    p.add_argument("--out", help="summary JSON path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("find-cycles", help="list cycles whose period divides T")
    p.add_argument("--map", required=True)
    p.add_argument("--T", type=_positive_int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_find_cycles)

    p = sub.add_parser("bounds", help="necessary number of coefficients for a target")
    p.add_argument("--target", required=True)
    p.add_argument("--T", type=_positive_int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).updated(
            strictness=args.strictness,
            omission_tolerance=args.omission_tolerance,
            convergence_tolerance=args.convergence_tolerance,
            winding_samples=args.winding_samples,
            max_order=args.max_order,
            escape_radius=args.escape_radius,
        )
        return args.func(args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"cyclestab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
