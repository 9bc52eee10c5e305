"""Command-line front end.

Exit codes: 0 when the command succeeds or the checked property holds, 2
when the property is verified to be false (the report says why), 1 on bad
input.  Reports are JSON with sorted keys and carry a schema version.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import jsonio
from .adversary import AdversaryParams, find_missing_edge
from .antichains import (MalformedEdgeError, NotAntichainError, NotMonotoneError, boundary_prob,
                         lym_check, sperner_check)
from .bang import BangError, bang_solve, bang_verify
from .cube_core import (DimensionError, GuardExceeded, NotCoveringError, NotSkewError,
                        count_unsliced_edges, cover_to_slicing, find_unsliced_edge, format_rational,
                        search_slicing_family)
from .decompose import DecompositionError, DecompositionParams, decompose, result_violations
from .product_measure import MeasureError, anticoncentration_check, sample_chain

EXIT_OK, EXIT_ERROR, EXIT_FALSE = 0, 1, 2


def _q(x) -> str | float:
    return format_rational(x) if isinstance(x, Fraction) else float(x)


def _emit(args, command: str, payload: dict, **extra) -> None:
    text = jsonio.dump_json(jsonio.report(command, payload, **extra))
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _verdict(value, bound, holds: bool) -> dict:
    return {"value": _q(value), "value_float": float(value), "bound": float(bound), "verdict": bool(holds)}


def _antichain_sets(path) -> list[list[int]]:
    d = jsonio.load_json(path)
    sets = d.get("sets") if isinstance(d, dict) else d
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise jsonio.InputError("antichain: expected {\"sets\": [[indices], ...]}")
    return sets


def cmd_verify(args) -> int:
    H = jsonio.family_from_json(jsonio.load_json(args.family))
    e = find_unsliced_edge(H, args.guard)
    payload = {"n": H.n, "planes": len(H), "slices_all_edges": e is None}
    if e is not None:
        payload["witness"] = jsonio.edge_to_json(e)
        payload["unsliced_edges"] = count_unsliced_edges(H, args.guard)
    _emit(args, "verify", payload)
    return EXIT_OK if e is None else EXIT_FALSE


def cmd_find_unsliced(args) -> int:
    H = jsonio.family_from_json(jsonio.load_json(args.family))
    e = find_unsliced_edge(H, args.guard)
    _emit(args, "find-unsliced", {"edge": None if e is None else jsonio.edge_to_json(e)})
    return EXIT_OK if e is not None else EXIT_FALSE


def cmd_cover_to_slice(args) -> int:
    H = jsonio.family_from_json(jsonio.load_json(args.family))
    try:
        S = cover_to_slicing(H, args.guard)
    except NotCoveringError as exc:
        _emit(args, "cover-to-slice", {"covering": False, "reason": str(exc)})
        return EXIT_FALSE
    ok = find_unsliced_edge(S, args.guard) is None
    _emit(args, "cover-to-slice", {"covering": True, "family": jsonio.family_to_json(S),
                                   "slices_all_edges": ok})
    return EXIT_OK if ok else EXIT_FALSE


def cmd_bang_solve(args) -> int:
    inst = jsonio.bang_from_json(jsonio.load_json(args.instance))
    sol = bang_solve(inst)
    m, ok = bang_verify(inst, sol.epsilon)
    worst = min(m) if m else None
    payload = {"epsilon": list(sol.epsilon), "margins": [format_rational(c) for c in m],
               "flips": len(sol.flips), "theta": format_rational(inst.theta),
               "min_margin": None if worst is None else format_rational(worst),
               "verdict": bool(ok)}
    _emit(args, "bang-solve", payload)
    return EXIT_OK if ok else EXIT_FALSE


def cmd_sample_chain(args) -> int:
    P = jsonio.measure_from_json(jsonio.load_json(args.measure))
    rng = np.random.default_rng(args.seed)
    chains = [list(sample_chain(P, rng).order) for _ in range(args.count)]
    _emit(args, "sample-chain", {"n": P.n, "chains": chains}, seed=args.seed)
    return EXIT_OK


def cmd_check_lym(args) -> int:
    P = jsonio.measure_from_json(jsonio.load_json(args.measure))
    sets = _antichain_sets(args.antichain)
    _check_sets(sets, P.n)
    r = lym_check(sets, P)
    _emit(args, "check-lym", _verdict(r.total, 1, r.holds))
    return EXIT_OK if r.holds else EXIT_FALSE


def cmd_check_sperner(args) -> int:
    P = jsonio.measure_from_json(jsonio.load_json(args.measure))
    sets = _antichain_sets(args.antichain)
    _check_sets(sets, P.n)
    r = sperner_check(sets, P)
    payload = _verdict(r.measure, r.max_level_prob, r.holds)
    payload["bound"] = _q(r.max_level_prob)
    _emit(args, "check-sperner", payload)
    return EXIT_OK if r.holds else EXIT_FALSE


def _check_sets(sets, n: int) -> None:
    for s in sets:
        if any(isinstance(a, bool) or not isinstance(a, int) or not 0 <= a < n for a in s):
            raise DimensionError(f"set {s} is not a subset of [0, {n})")


def cmd_check_anticoncentration(args) -> int:
    P = jsonio.measure_from_json(jsonio.load_json(args.measure))
    r = anticoncentration_check(P)
    payload = _verdict(r.max_level_prob, r.bound, r.holds)
    payload["sigma"] = r.sigma
    _emit(args, "check-anticoncentration", payload)
    return EXIT_OK if r.holds else EXIT_FALSE


def _parse_u(text: str, n: int) -> list[int]:
    text = text.strip()
    if text.startswith("["):
        try:
            u = json.loads(text)
        except ValueError as exc:
            raise jsonio.InputError(f"cannot parse orientation {text!r}") from exc
    else:
        u = [int(c) for c in text if c in "01"]
        if len(u) != len(text):
            raise jsonio.InputError(f"orientation must be a 0/1 string, got {text!r}")
    if len(u) != n or any(c not in (0, 1) for c in u):
        raise DimensionError(f"orientation must be a 0/1 vector of length {n}")
    return u


def cmd_check_monotone(args) -> int:
    f = jsonio.function_from_json(jsonio.load_json(args.function))
    P = jsonio.measure_from_json(jsonio.load_json(args.measure))
    if f.n != P.n:
        raise DimensionError(f"function has n={f.n}, measure has n={P.n}")
    u = _parse_u(args.u, f.n) if args.u is not None else [0] * f.n
    r = boundary_prob(f, P, u, weighting=args.weighting)
    payload = _verdict(r.prob, r.bound, r.holds)
    payload.update({"u": u, "weighting": args.weighting})
    _emit(args, "check-monotone", payload)
    return EXIT_OK if r.holds else EXIT_FALSE


def _decomposition_params(args) -> DecompositionParams:
    base = DecompositionParams.desk() if args.desk else DecompositionParams()
    kw = base.to_json()
    for key in ("mass_exponent", "column_exponent", "mass_threshold", "column_bound", "S"):
        val = getattr(args, key, None)
        if val is not None:
            kw[key] = val
    return DecompositionParams(**kw)


def cmd_decompose(args) -> int:
    V = jsonio.matrix_from_json(jsonio.load_json(args.matrix))
    if V.ndim != 2 or V.shape[1] == 0:
        raise DimensionError("matrix must have at least one column")
    params = _decomposition_params(args)
    r = decompose(V, params)
    bad = result_violations(V, r, params)
    payload = {"params": params.to_json(), "result": r.to_json(), "violations": bad,
               "verdict": not bad}
    _emit(args, "decompose", payload)
    return EXIT_OK if not bad else EXIT_FALSE


def cmd_find_missing_edge(args) -> int:
    H = jsonio.family_from_json(jsonio.load_json(args.family))
    theta = None if args.theta == "auto" else float(jsonio.parse_rational(args.theta, "theta"))
    params = AdversaryParams(theta=theta, edge_attempts=args.attempts,
                             x2_attempts=args.x2_attempts,
                             decomposition=_decomposition_params(args))
    tr = find_missing_edge(H, params, np.random.default_rng(args.seed))
    trace = tr.to_json()
    if args.trace:
        jsonio.dump_json(jsonio.report("find-missing-edge-trace", trace, seed=args.seed), args.trace)
    payload = {"params": params.to_json(), "outcome": trace["outcome"],
               "first_failure": trace["first_failure"]}
    _emit(args, "find-missing-edge", payload, seed=args.seed)
    return EXIT_OK if tr.success else EXIT_FALSE


def cmd_search_family(args) -> int:
    rng = np.random.default_rng(args.seed)
    r = search_slicing_family(args.n, args.k, args.budget, rng, guard=args.guard)
    payload = {"success": r.success, "unsliced_edges": r.unsliced, "iterations": r.iterations,
               "family": jsonio.family_to_json(r.family)}
    _emit(args, "search-family", payload, seed=args.seed)
    return EXIT_OK if r.success else EXIT_FALSE


def cmd_suite(args) -> int:
    from .suite import run_suite
    only = None
    if args.only:
        try:
            only = [int(c) for c in args.only.split(",")]
        except ValueError as exc:
            raise jsonio.InputError(f"--only expects comma-separated numbers, got {args.only!r}") from exc
    report, timings = run_suite(args.seed, only, max(1, args.workers))
    _emit(args, "suite", report)
    for c in report["criteria"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['id']:>2} {c['name']} ({timings[str(c['id'])]:.1f}s)", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FALSE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cubeslice", description="Hyperplane slicings of the hypercube.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.set_defaults(fn=fn)
        return sp

    def guard(sp):
        sp.add_argument("--guard", type=int, default=None,
                        help="largest n to enumerate (default from CUBESLICE_EDGE_GUARD)")

    def decomp(sp):
        sp.add_argument("--desk", action="store_true", help="use the exaggerated small-n parameters")
        sp.add_argument("--mass-exponent", dest="mass_exponent", type=float)
        sp.add_argument("--column-exponent", dest="column_exponent", type=float)
        sp.add_argument("--mass-threshold", dest="mass_threshold", type=float)
        sp.add_argument("--column-bound", dest="column_bound", type=float)
        sp.add_argument("--S", dest="S", type=int)

    sp = add("verify", cmd_verify, "check that a family slices every edge")
    sp.add_argument("--family", required=True)
    guard(sp)
    sp = add("find-unsliced", cmd_find_unsliced, "first edge no plane slices")
    sp.add_argument("--family", required=True)
    guard(sp)
    sp = add("cover-to-slice", cmd_cover_to_slice, "turn a skew vertex cover into a slicing family")
    sp.add_argument("--family", required=True)
    guard(sp)
    sp = add("bang-solve", cmd_bang_solve, "sign vector with all margins at least theta")
    sp.add_argument("--instance", required=True)
    sp = add("sample-chain", cmd_sample_chain, "sample maximal chains respecting a product measure")
    sp.add_argument("--measure", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1)
    for name, fn, text in (("check-sperner", cmd_check_sperner, "measure of an antichain vs the top level"),
                           ("check-lym", cmd_check_lym, "sum of conditional level probabilities")):
        sp = add(name, fn, text)
        sp.add_argument("--measure", required=True)
        sp.add_argument("--antichain", required=True)
    sp = add("check-anticoncentration", cmd_check_anticoncentration, "largest level vs sqrt(pi)/sigma")
    sp.add_argument("--measure", required=True)
    sp = add("check-monotone", cmd_check_monotone, "boundary probability of a u-monotone function")
    sp.add_argument("--function", required=True)
    sp.add_argument("--measure", required=True)
    sp.add_argument("--u", help="orientation as a 0/1 string or JSON list (default all zeros)")
    sp.add_argument("--weighting", choices=("squared", "variance"), default="squared")
    sp = add("decompose", cmd_decompose, "split a matrix into light columns and many-scale rows")
    sp.add_argument("--matrix", required=True)
    decomp(sp)
    sp = add("find-missing-edge", cmd_find_missing_edge, "randomized search for an unsliced edge")
    sp.add_argument("--family", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--theta", default="auto")
    sp.add_argument("--attempts", type=int, default=256)
    sp.add_argument("--x2-attempts", dest="x2_attempts", type=int, default=64)
    sp.add_argument("--trace")
    decomp(sp)
    sp = add("search-family", cmd_search_family, "local search for a small slicing family")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--budget", type=int, default=20000)
    sp.add_argument("--seed", type=int, default=0)
    guard(sp)
    sp = add("suite", cmd_suite, "run the acceptance battery")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--only", help="comma-separated check numbers")
    sp.add_argument("--workers", type=int, default=1)
    return p


_ERRORS = (
    (jsonio.InputError, "malformed input"),
    (DimensionError, "dimension mismatch"),
    (GuardExceeded, "guard exceeded"),
    (NotSkewError, "not skew"),
    (NotAntichainError, "not an antichain"),
    (NotMonotoneError, "not monotone"),
    (MalformedEdgeError, "malformed edge family"),
    (BangError, "invalid instance"),
    (MeasureError, "invalid measure"),
    (DecompositionError, "decomposition guard"),
    (ZeroDivisionError, "invalid rational"),
    (ValueError, "invalid input"),
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except tuple(e for e, _ in _ERRORS) as exc:
        label = next(lbl for e, lbl in _ERRORS if isinstance(exc, e))
        print(f"error: {label}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
