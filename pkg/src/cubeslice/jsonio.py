"""JSON encodings for families, instances, measures and edge families.

Rationals travel as strings (``"3"``, ``"-1/2"``, ``"0.25"``) so nothing is
lost to binary floating point on the way in or out.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .antichains import BooleanFunction, OrientedEdgeFamily
from .bang import BangInstance
from .cube_core import CubeEdge, DimensionError, Hyperplane, HyperplaneFamily, as_rational, format_rational
from .product_measure import ProductMeasure

SCHEMA_VERSION = 1


class InputError(ValueError):
    """Malformed or inconsistent JSON input."""


def parse_rational(x, what: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise InputError(f"{what}: expected a number or rational string, got {x!r}")
    try:
        return as_rational(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"{what}: cannot parse {x!r} as a rational") from exc


def _require(d, key: str, what: str):
    if not isinstance(d, dict):
        raise InputError(f"{what}: expected a JSON object")
    if key not in d:
        raise InputError(f"{what}: missing key {key!r}")
    return d[key]


def load_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def dump_json(obj, path=None) -> str:
    """Deterministic text: sorted keys, fixed separators, trailing newline."""
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def family_from_json(d) -> HyperplaneFamily:
    n = _require(d, "n", "family")
    planes = _require(d, "planes", "family")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InputError(f"family: n must be a positive integer, got {n!r}")
    if not isinstance(planes, list):
        raise InputError("family: planes must be a list")
    out = []
    for t, p in enumerate(planes):
        normal = _require(p, "normal", f"plane {t}")
        if not isinstance(normal, list):
            raise InputError(f"plane {t}: normal must be a list")
        if len(normal) != n:
            raise DimensionError(f"plane {t} has {len(normal)} coordinates, family has n={n}")
        mu = p.get("mu", "0")
        out.append(Hyperplane([parse_rational(c, f"plane {t} normal") for c in normal],
                              parse_rational(mu, f"plane {t} mu")))
    return HyperplaneFamily(out, n)


def family_to_json(H: HyperplaneFamily) -> dict:
    return {"n": H.n, "planes": [{"normal": [format_rational(c) for c in h.normal],
                                  "mu": format_rational(h.threshold)} for h in H.planes]}


def edge_to_json(e: CubeEdge) -> dict:
    return {"base": list(e.base), "direction": e.direction}


def bang_from_json(d) -> BangInstance:
    M = _require(d, "M", "bang instance")
    gamma = _require(d, "gamma", "bang instance")
    theta = _require(d, "theta", "bang instance")
    if not isinstance(M, list) or not all(isinstance(r, list) for r in M):
        raise InputError("bang instance: M must be a list of rows")
    if not isinstance(gamma, list):
        raise InputError("bang instance: gamma must be a list")
    if len(M) != len(gamma) or any(len(r) != len(gamma) for r in M):
        raise DimensionError(f"M must be {len(gamma)}x{len(gamma)} to match gamma")
    return BangInstance([[parse_rational(c, "M") for c in r] for r in M],
                        [parse_rational(c, "gamma") for c in gamma], parse_rational(theta, "theta"))


def measure_from_json(d) -> ProductMeasure:
    p = _require(d, "p", "measure")
    if not isinstance(p, list) or not p:
        raise InputError("measure: p must be a nonempty list")
    return ProductMeasure([parse_rational(c, "measure p") for c in p])


def measure_to_json(P: ProductMeasure) -> dict:
    return {"p": [format_rational(c) if P.exact else repr(c) for c in P.p]}


def matrix_from_json(d) -> np.ndarray:
    rows = _require(d, "rows", "matrix")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InputError("matrix: rows must be a list of lists")
    if rows and len({len(r) for r in rows}) != 1:
        raise DimensionError("matrix rows have different lengths")
    try:
        return np.array([[float(parse_rational(c, "matrix")) for c in r] for r in rows], dtype=np.float64)
    except OverflowError as exc:
        raise InputError("matrix entry out of floating point range") from exc


def edge_family_from_json(d) -> OrientedEdgeFamily:
    try:
        return OrientedEdgeFamily.from_json(d)
    except (KeyError, TypeError) as exc:
        raise InputError(f"edge family: {exc}") from exc


def function_from_json(d) -> BooleanFunction:
    n = _require(d, "n", "function")
    table = _require(d, "table", "function")
    if isinstance(n, bool) or not isinstance(n, int) or n < 0:
        raise InputError("function: n must be a nonnegative integer")
    if not isinstance(table, str):
        raise InputError("function: table must be a hex string")
    try:
        return BooleanFunction.from_hex(n, table)
    except ValueError as exc:
        raise InputError(f"function: {exc}") from exc


def report(command: str, payload: dict, **extra) -> dict:
    out = {"schema": SCHEMA_VERSION, "command": command}
    out.update(extra)
    out.update(payload)
    return out
