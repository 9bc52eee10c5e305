"""Antichains of vertices and oriented edges, edge samplers, monotone functions.

Throughout this module a point of ``{0,1}^n`` (equivalently a subset of
``[n]``) is an int bitmask with bit ``j`` set iff ``z_j = 1``.  The bridge to
the ``{-1,+1}`` cube of :mod:`cubeslice.cube_core` is ``1 <-> +1``,
``0 <-> -1``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .cube_core import EDGE_GUARD, GuardExceeded, Hyperplane, NotSkewError, sliced_masks, vertex_margins
from .product_measure import ProductMeasure, level_distribution

BOUNDARY_GUARD = 16


class NotAntichainError(ValueError):
    pass


class NotMonotoneError(ValueError):
    pass


class MalformedEdgeError(ValueError):
    pass


def to_mask(s) -> int:
    if isinstance(s, (int, np.integer)):
        return int(s)
    m = 0
    for j in s:
        m |= 1 << int(j)
    return m


def from_mask(m: int) -> frozenset:
    return frozenset(j for j in range(m.bit_length()) if (m >> j) & 1)


def _popcount(m: int) -> int:
    return bin(m).count("1")


def _masks(A) -> list[int]:
    out = sorted({to_mask(s) for s in A})
    return out


# ---------------------------------------------------------------------------
# vertex antichains


def is_antichain(A: Iterable) -> bool:
    masks = _masks(A)
    for i, a in enumerate(masks):
        for b in masks[i + 1:]:
            if a & b == a or a & b == b:
                return False
    return True


def enumerate_antichains(n: int) -> list[tuple[int, ...]]:
    """All antichains of ``{0,1}^n`` (including the empty one), as mask tuples."""
    elems = list(range(1 << n))
    out: list[tuple[int, ...]] = []

    def comparable(a, b):
        c = a & b
        return c == a or c == b

    def rec(i, chosen):
        if i == len(elems):
            out.append(tuple(chosen))
            return
        rec(i + 1, chosen)
        e = elems[i]
        if all(not comparable(e, c) for c in chosen):
            chosen.append(e)
            rec(i + 1, chosen)
            chosen.pop()

    rec(0, [])
    return out


@dataclass(frozen=True)
class LYMResult:
    total: object
    holds: bool


@dataclass(frozen=True)
class SpernerResult:
    measure: object
    max_level_prob: object
    holds: bool


def _require_antichain(A) -> list[int]:
    masks = _masks(A)
    if not is_antichain(masks):
        raise NotAntichainError("family has a strict inclusion")
    return masks


@functools.lru_cache(maxsize=64)
def _measure_tables(P: ProductMeasure):
    """Point probabilities by mask and level probabilities, cached per measure."""
    return point_probs(P), level_distribution(P)


def lym_check(A: Iterable, P: ProductMeasure) -> LYMResult:
    """``sum_l Pr[z in A | |z| = l]`` and whether it is at most 1."""
    masks = _require_antichain(A)
    if P.n <= BOUNDARY_GUARD:
        pts, lv = _measure_tables(P)
        total = sum((pts[a] / lv[_popcount(a)] for a in masks), 0 * P.p[0])
    else:
        lv = level_distribution(P)
        total = sum((P.point_prob(from_mask(a)) / lv[_popcount(a)] for a in masks), 0 * P.p[0])
    return LYMResult(total, total <= 1)


def sperner_check(A: Iterable, P: ProductMeasure) -> SpernerResult:
    masks = _require_antichain(A)
    if P.n <= BOUNDARY_GUARD:
        pts, lv = _measure_tables(P)
        measure = sum((pts[a] for a in masks), 0 * P.p[0])
    else:
        lv = level_distribution(P)
        measure = sum((P.point_prob(from_mask(a)) for a in masks), 0 * P.p[0])
    mx = max(lv)
    return SpernerResult(measure, mx, measure <= mx)


# ---------------------------------------------------------------------------
# oriented edge families


@dataclass(frozen=True)
class OrientedEdgeFamily:
    """Edges of ``{0,1}^n`` together with an origin ``u``.

    Each edge is stored canonically as ``(lo, j)``: ``lo`` is the endpoint with
    bit ``j`` clear.  ``near(edge)`` gives the endpoint closer to ``u``.
    """

    n: int
    u: tuple[int, ...]
    edges: frozenset

    def __init__(self, n: int, u: Sequence[int], edges: Iterable[tuple[int, int]] = ()):
        u = tuple(int(c) for c in u)
        if len(u) != n or any(c not in (0, 1) for c in u):
            raise MalformedEdgeError(f"origin must be a 0/1 vector of length {n}")
        canon = set()
        for x, j in edges:
            x, j = to_mask(x), int(j)
            if not 0 <= j < n or x >> n:
                raise MalformedEdgeError(f"edge ({x}, {j}) outside the {n}-cube")
            canon.add((x & ~(1 << j), j))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "edges", frozenset(canon))

    @classmethod
    def from_pairs(cls, n: int, u: Sequence[int], pairs: Iterable[tuple]) -> "OrientedEdgeFamily":
        """Build from ``(a, b)`` pairs with ``b`` one step farther from ``u`` than ``a``."""
        umask = to_mask(j for j, c in enumerate(u) if c)
        edges = []
        for a, b in pairs:
            a, b = to_mask(a), to_mask(b)
            d = a ^ b
            if d == 0 or d & (d - 1):
                raise MalformedEdgeError(f"endpoints {a}, {b} differ in != 1 coordinate")
            if (b ^ umask) & ~(a ^ umask) != d:
                raise MalformedEdgeError(f"edge ({a}, {b}) is not oriented away from u")
            edges.append((a, d.bit_length() - 1))
        return cls(n, u, edges)

    @property
    def umask(self) -> int:
        return to_mask(j for j, c in enumerate(self.u) if c)

    def near(self, edge: tuple[int, int]) -> int:
        lo, j = edge
        return lo | (1 << j) if self.u[j] else lo

    def shifted(self) -> list[tuple[int, int]]:
        """Edges as ``(a', b')`` after translating the origin to 0, sorted."""
        um = self.umask
        out = []
        for lo, j in self.edges:
            a = self.near((lo, j)) ^ um
            out.append((a, a | (1 << j)))
        return sorted(out)

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, edge) -> bool:
        x, j = edge
        return (to_mask(x) & ~(1 << j), int(j)) in self.edges

    def to_json(self) -> dict:
        items = sorted(self.edges, key=lambda e: (e[1], e[0]))
        return {
            "n": self.n,
            "u": list(self.u),
            "edges": [{"a": sorted(from_mask(self.near(e))), "dir": e[1]} for e in items],
        }

    @classmethod
    def from_json(cls, data: dict) -> "OrientedEdgeFamily":
        u = data["u"]
        n = int(data.get("n", len(u)))
        umask = to_mask(j for j, c in enumerate(u) if c)
        edges = []
        for e in data["edges"]:
            a, j = to_mask(e["a"]), int(e["dir"])
            if ((a ^ umask) >> j) & 1:
                raise MalformedEdgeError(f"endpoint a={sorted(e['a'])} is the far end of direction {j}")
            edges.append((a, j))
        return cls(n, u, edges)


def is_u_edge_antichain(A: OrientedEdgeFamily, chunk: int = 2048) -> bool:
    """No two distinct edges lie on a common ``u``-chain.

    After shifting, edges ``(a, b)`` and ``(c, d)`` share a chain iff
    ``b <= c`` or ``d <= a`` as sets.
    """
    pairs = A.shifted()
    if len(pairs) < 2:
        return True
    a = np.array([p[0] for p in pairs], dtype=np.int64)
    b = np.array([p[1] for p in pairs], dtype=np.int64)
    for start in range(0, len(pairs), chunk):
        bb = b[start:start + chunk, None]
        # b_i subset of a_j for any i != j (b_i <= a_j excludes i == j automatically)
        if np.any((bb & ~a[None, :]) == 0):
            return False
    return True


def _cube_to_mask_table(n: int) -> np.ndarray:
    """Map cube_core vertex index (coordinate j at bit n-1-j) to a bitmask."""
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        out |= ((idx >> (n - 1 - j)) & 1) << j
    return out


def origin_of(h: Hyperplane) -> tuple[int, ...]:
    if not h.is_skew:
        raise NotSkewError("orientation is only defined for skew hyperplanes")
    return tuple(1 if c > 0 else 0 for c in h.normal)


def sliced_edge_family(h: Hyperplane, guard: int | None = None) -> OrientedEdgeFamily:
    """Edges sliced by a skew hyperplane, oriented by ``u_j = [v_j > 0]``."""
    u = origin_of(h)
    n = h.n
    if n > (EDGE_GUARD if guard is None else guard):
        raise GuardExceeded(f"n={n} exceeds enumeration guard")
    table = _cube_to_mask_table(n)
    edges = []
    for j, mask in enumerate(sliced_masks(h)):
        b = n - 1 - j
        pos = np.flatnonzero(mask)
        hi, lo = np.divmod(pos, 1 << b)
        base = (hi << (b + 1)) | lo
        for x in table[base]:
            edges.append((int(x), j))
    return OrientedEdgeFamily(n, u, edges)


# ---------------------------------------------------------------------------
# Boolean functions


@dataclass(frozen=True)
class BooleanFunction:
    """Truth table of ``f : {0,1}^n -> {0,1}`` indexed by bitmask."""

    n: int
    table: np.ndarray

    def __init__(self, n: int, table):
        t = np.asarray(table, dtype=bool).reshape(-1)
        if t.size != 1 << n:
            raise ValueError(f"truth table has {t.size} entries, expected {1 << n}")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "table", t)

    def __call__(self, x) -> int:
        return int(self.table[to_mask(x)])

    def __eq__(self, other):
        return isinstance(other, BooleanFunction) and self.n == other.n and bool(
            np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    def to_hex(self) -> str:
        v = 0
        for i in np.flatnonzero(self.table):
            v |= 1 << int(i)
        width = max(1, (1 << self.n) // 4)
        return format(v, f"0{width}x")

    @classmethod
    def from_hex(cls, n: int, text: str) -> "BooleanFunction":
        v = int(text, 16)
        if v >> (1 << n):
            raise ValueError("hex truth table has bits beyond 2^n")
        return cls(n, [(v >> i) & 1 for i in range(1 << n)])

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[int], int]) -> "BooleanFunction":
        return cls(n, [bool(fn(x)) for x in range(1 << n)])

    @classmethod
    def constant(cls, n: int, value: int) -> "BooleanFunction":
        return cls(n, np.full(1 << n, bool(value)))

    @classmethod
    def majority(cls, n: int) -> "BooleanFunction":
        return cls.from_callable(n, lambda x: 2 * _popcount(x) > n)

    @classmethod
    def dictator(cls, n: int, j: int) -> "BooleanFunction":
        return cls.from_callable(n, lambda x: (x >> j) & 1)


def threshold_function(h: Hyperplane) -> BooleanFunction:
    """Indicator of the open negative side ``<x, v> < mu``.

    This side grows as one moves away from ``u_j = [v_j > 0]``, so the
    function is ``u``-monotone and flips on every edge the plane slices.
    """
    n = h.n
    m = vertex_margins(h)
    table = np.zeros(1 << n, dtype=bool)
    table[_cube_to_mask_table(n)] = m < 0
    return BooleanFunction(n, table)


def is_monotone_table(table: np.ndarray, n: int) -> bool:
    for j in range(n):
        r = table.reshape(-1, 2, 1 << j)
        if np.any(r[:, 0, :] & ~r[:, 1, :]):
            return False
    return True


def shift_table(f: BooleanFunction, u: Sequence[int]) -> np.ndarray:
    """Table of ``z -> f(z + u)``."""
    um = to_mask(j for j, c in enumerate(u) if c)
    return f.table[np.arange(1 << f.n) ^ um]


def is_u_monotone(f: BooleanFunction, u: Sequence[int]) -> bool:
    if len(u) != f.n:
        raise ValueError("orientation length does not match f")
    return is_monotone_table(shift_table(f, u), f.n)


def monotone_functions(n: int) -> list[BooleanFunction]:
    """All monotone functions on ``{0,1}^n``, one per antichain of minimal points."""
    N = 1 << n
    out = []
    for ac in enumerate_antichains(n):
        t = np.zeros(N, dtype=bool)
        xs = np.arange(N)
        for a in ac:
            t |= (xs & a) == a
        out.append(BooleanFunction(n, t))
    return out


# ---------------------------------------------------------------------------
# edge samplers


def j_star(P: ProductMeasure) -> list[int]:
    """Coordinates with ``p_j (1 - p_j) >= sigma_P^2 / (2n)``."""
    thr = P.sigma2 / (2 * P.n)
    return [j for j, v in enumerate(P.p) if v * (1 - v) >= thr]


def _finish(x: np.ndarray, j: np.ndarray, size):
    if size is None:
        return x[0], int(j[0])
    return x, j


def baker_edge_sampler(P: ProductMeasure, rng: np.random.Generator, size: int | None = None):
    """``x ~ P`` and a uniform flip direction inside ``J_*``.

    Returns ``(x, j)`` with ``x`` a 0/1 array; the other endpoint is ``x`` with
    coordinate ``j`` flipped.  No orientation enters the sampler.
    """
    J = np.array(j_star(P), dtype=np.int64)
    m = 1 if size is None else size
    x = P.sample(rng, m)
    j = J[rng.integers(0, len(J), size=m)]
    return _finish(x, j, size)


def monotone_direction_weights(P: ProductMeasure, weighting: str = "squared") -> list:
    """Normalized flip-direction weights.

    ``"squared"``: proportional to ``(p_j (1 - p_j))^2``.
    ``"variance"``: proportional to ``p_j (1 - p_j)``, i.e. ``sigma_j^2 / sigma_P^2``
    with ``sigma_j`` the standard deviation of ``z_j``.
    """
    var = [v * (1 - v) for v in P.p]
    if weighting == "squared":
        raw = [s * s for s in var]
    elif weighting == "variance":
        raw = var
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    total = sum(raw, 0 * raw[0])
    return [r / total for r in raw]


def monotone_edge_sampler(P: ProductMeasure, rng: np.random.Generator, size: int | None = None,
                          weighting: str = "squared"):
    """``x ~ P`` and a direction drawn from :func:`monotone_direction_weights`."""
    w = np.array([float(c) for c in monotone_direction_weights(P, weighting)])
    cum = np.cumsum(w)
    m = 1 if size is None else size
    x = P.sample(rng, m)
    r = rng.random(m) * cum[-1]
    j = np.minimum(np.searchsorted(cum, r, side="right"), P.n - 1)
    return _finish(x, j.astype(np.int64), size)


def _rows_to_masks(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x).astype(np.int64)
    weights = np.int64(1) << np.arange(x.shape[1], dtype=np.int64)
    return x @ weights


@dataclass(frozen=True)
class HitEstimate:
    estimate: float
    half_width: float
    hits: int
    trials: int


def edge_antichain_hit_estimate(sampler: Callable, A: OrientedEdgeFamily, trials: int,
                                rng: np.random.Generator) -> HitEstimate:
    """Monte Carlo frequency of sampled edges in ``A`` with a 95% half-width.

    ``sampler(rng, size)`` must return ``(x, j)`` arrays as the samplers above do.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    x, j = sampler(rng, trials)
    if np.atleast_2d(x).shape[1] != A.n:
        raise ValueError("sampler dimension does not match the edge family")
    lo = _rows_to_masks(x) & ~(np.int64(1) << j)
    if A.edges:
        keys = np.array(sorted(e[0] * 64 + e[1] for e in A.edges), dtype=np.int64)
        hits = int(np.isin(lo * 64 + j, keys).sum())
    else:
        hits = 0
    p = hits / trials
    hw = 1.96 * math.sqrt(p * (1 - p) / trials)
    return HitEstimate(p, hw, hits, trials)


# ---------------------------------------------------------------------------
# exact boundary probability and biased Fourier coefficients


def point_probs(P: ProductMeasure) -> list:
    """``P(x)`` for every bitmask ``x``, built by doubling."""
    probs = [Fraction(1) if P.exact else 1.0]
    for v in P.p:
        probs = [pr * (1 - v) for pr in probs] + [pr * v for pr in probs]
    return probs


@dataclass(frozen=True)
class BoundaryResult:
    prob: object
    bound: float
    holds: bool


def boundary_prob(f: BooleanFunction, P: ProductMeasure, u: Sequence[int],
                  weighting: str = "squared", guard: int = BOUNDARY_GUARD) -> BoundaryResult:
    """Exact ``Pr[f(x) != f(y)]`` under :func:`monotone_edge_sampler`, against ``1/sigma_P``."""
    if f.n != P.n:
        raise ValueError("function and measure dimensions differ")
    if f.n > guard:
        raise GuardExceeded(f"n={f.n} exceeds boundary guard {guard}")
    if not is_u_monotone(f, u):
        raise NotMonotoneError("f is not u-monotone")
    probs = point_probs(P)
    w = monotone_direction_weights(P, weighting)
    t = f.table
    idx = np.arange(1 << f.n)
    total = 0 * w[0]
    for j in range(f.n):
        diff = np.flatnonzero(t != t[idx ^ (1 << j)])
        if diff.size:
            total += w[j] * sum((probs[int(x)] for x in diff), 0 * w[0])
    s2 = P.sigma2
    if P.exact:
        holds = total * total * s2 <= 1
    else:
        holds = total <= 1 / math.sqrt(s2)
    return BoundaryResult(total, 1 / math.sqrt(s2), bool(holds))


def _float_probs(Q: ProductMeasure) -> np.ndarray:
    pr = np.ones(1)
    for v in Q.p:
        v = float(v)
        pr = np.concatenate([pr * (1 - v), pr * v])
    return pr


def biased_fourier_degree1(F: BooleanFunction, Q: ProductMeasure, j: int) -> float:
    """``E_Q[F(z) (z_j - m_j) / s_j]`` with ``m_j = Pr[z_j = 1]``, ``s_j`` its std."""
    pr = _float_probs(Q)
    m = float(Q.p[j])
    s = math.sqrt(m * (1 - m))
    zj = (np.arange(1 << F.n) >> j) & 1
    return float(np.sum(pr * F.table * (zj - m)) / s)


def degree1_via_derivative(F: BooleanFunction, Q: ProductMeasure, j: int) -> float:
    """``s_j E[F(z^{j->1}) - F(z^{j->0})]``; equals the degree-1 coefficient."""
    m = float(Q.p[j])
    s = math.sqrt(m * (1 - m))
    r = F.table.reshape(-1, 2, 1 << j).astype(np.float64)
    deriv = (r[:, 1, :] - r[:, 0, :]).reshape(-1)
    rest = [v for i, v in enumerate(Q.p) if i != j]
    if rest:
        pr = _float_probs(ProductMeasure([float(v) for v in rest]))
    else:
        pr = np.ones(1)
    return float(s * np.dot(pr, deriv))


def biased_fourier_coefficients(F: BooleanFunction, Q: ProductMeasure) -> np.ndarray:
    """All ``2^n`` coefficients ``F^(S)``, indexed by the mask of ``S``."""
    n = F.n
    pr = _float_probs(Q)
    xs = np.arange(1 << n)
    out = np.empty(1 << n)
    cols = []
    for j in range(n):
        m = float(Q.p[j])
        cols.append((((xs >> j) & 1) - m) / math.sqrt(m * (1 - m)))
    for S in range(1 << n):
        chi = np.ones(1 << n)
        for j in range(n):
            if (S >> j) & 1:
                chi = chi * cols[j]
        out[S] = np.sum(pr * F.table * chi)
    return out
