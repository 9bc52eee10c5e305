"""Exact hypercube machinery: hyperplanes, edges, slicing and covering.

Vertices live in ``{-1, +1}^n``.  All predicates are evaluated in exact
rational arithmetic: every hyperplane is rescaled by the lcm of its
denominators so that vertex margins become integers, which keeps the
strict-inequality semantics of slicing sound.

Edges are identified by a base vertex and a 0-based flip coordinate.  The
enumeration order used by the brute-force oracles is lexicographic on
``(base, direction)`` with ``-1 < +1`` on every coordinate, and the base is
always the endpoint carrying ``-1`` in the flip coordinate.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction
Vertex = tuple[int, ...]


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.environ.get(name, default))
    except ValueError:
        return default


EDGE_GUARD = _env_int("CUBESLICE_EDGE_GUARD", 22)
VERTEX_GUARD = _env_int("CUBESLICE_VERTEX_GUARD", 20)

# margins above this magnitude leave int64 and fall back to object arrays
_INT64_SAFE = 2**62


class DimensionError(ValueError):
    pass


class GuardExceeded(ValueError):
    """Raised when an enumeration would exceed the configured size guard."""


class NotSkewError(ValueError):
    pass


class NotCoveringError(ValueError):
    pass


def as_rational(value) -> Fraction:
    """Convert ints, Fractions, decimal strings and ``"p/q"`` strings exactly.

    Floats are converted through their decimal ``repr`` so that ``0.1``
    becomes ``1/10`` rather than the nearest binary fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Hyperplane:
    """The hyperplane ``{z : <z, normal> = threshold}``."""

    normal: tuple[Fraction, ...]
    threshold: Fraction

    def __init__(self, normal: Iterable, threshold=0):
        normal = tuple(as_rational(c) for c in normal)
        if len(normal) < 1:
            raise DimensionError("hyperplane normal must have length >= 1")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "threshold", as_rational(threshold))

    @property
    def n(self) -> int:
        return len(self.normal)

    @property
    def is_skew(self) -> bool:
        return all(c != 0 for c in self.normal)

    def margin(self, x: Sequence[int]) -> Fraction:
        """``<x, v> - mu`` as an exact rational."""
        if len(x) != self.n:
            raise DimensionError(f"vertex has length {len(x)}, plane has n={self.n}")
        return sum((c * xi for c, xi in zip(self.normal, x)), Fraction(0)) - self.threshold

    @property
    def scale(self) -> int:
        """Least positive ``L`` making ``L*v`` and ``L*mu`` integral."""
        L = 1
        for c in self.normal + (self.threshold,):
            L = L * c.denominator // math.gcd(L, c.denominator)
        return L

    def integer_form(self) -> tuple[list[int], int]:
        """Return ``(a, b)`` with integer ``a = L*v``, ``b = L*mu``."""
        L = self.scale
        return [int(c * L) for c in self.normal], int(self.threshold * L)


@dataclass(frozen=True)
class CubeEdge:
    base: Vertex
    direction: int

    def __post_init__(self):
        base = tuple(int(c) for c in self.base)
        if any(c not in (-1, 1) for c in base):
            raise ValueError(f"vertex coordinates must be +-1, got {self.base}")
        if not 0 <= self.direction < len(base):
            raise DimensionError(f"direction {self.direction} out of range for n={len(base)}")
        object.__setattr__(self, "base", base)

    @property
    def n(self) -> int:
        return len(self.base)

    @property
    def other(self) -> Vertex:
        y = list(self.base)
        y[self.direction] = -y[self.direction]
        return tuple(y)

    def endpoints(self) -> tuple[Vertex, Vertex]:
        return self.base, self.other

    def canonical(self) -> "CubeEdge":
        """Same edge with base carrying -1 in the flip coordinate."""
        if self.base[self.direction] == -1:
            return self
        return CubeEdge(self.other, self.direction)


@dataclass(frozen=True)
class HyperplaneFamily:
    planes: tuple[Hyperplane, ...]
    n: int

    def __init__(self, planes: Iterable[Hyperplane], n: int | None = None):
        planes = tuple(planes)
        if n is None:
            if not planes:
                raise DimensionError("an empty family needs an explicit dimension")
            n = planes[0].n
        for h in planes:
            if h.n != n:
                raise DimensionError(f"plane of dimension {h.n} in a family of dimension {n}")
        if n < 1:
            raise DimensionError("dimension must be >= 1")
        object.__setattr__(self, "planes", planes)
        object.__setattr__(self, "n", int(n))

    def __len__(self) -> int:
        return len(self.planes)

    def __iter__(self):
        return iter(self.planes)

    @property
    def is_skew(self) -> bool:
        return all(h.is_skew for h in self.planes)

    @classmethod
    def axis(cls, n: int) -> "HyperplaneFamily":
        """The ``n`` coordinate planes ``x_j = 0``; they slice every edge."""
        planes = []
        for j in range(n):
            v = [0] * n
            v[j] = 1
            planes.append(Hyperplane(v, 0))
        return cls(planes, n)


def slices(h: Hyperplane, e: CubeEdge) -> bool:
    """True iff the endpoint margins of ``e`` have strictly opposite signs."""
    if h.n != e.n:
        raise DimensionError(f"plane has n={h.n}, edge has n={e.n}")
    x, y = e.endpoints()
    return h.margin(x) * h.margin(y) < 0


def covers(h: Hyperplane, x: Sequence[int]) -> bool:
    return h.margin(x) == 0


# ---------------------------------------------------------------------------
# vectorized exact enumeration
#
# Vertex index i encodes coordinate j as bit (n-1-j): set bit means +1.  With
# that layout integer order on indices is lexicographic order on vertices.


def index_to_vertex(i: int, n: int) -> Vertex:
    return tuple(1 if (i >> (n - 1 - j)) & 1 else -1 for j in range(n))


def vertex_to_index(x: Sequence[int]) -> int:
    i = 0
    for c in x:
        i = (i << 1) | (1 if c > 0 else 0)
    return i


def _check_guard(n: int, guard: int | None, default: int) -> None:
    limit = default if guard is None else guard
    if n > limit:
        raise GuardExceeded(f"n={n} exceeds enumeration guard {limit}")


def vertex_margins(h: Hyperplane) -> np.ndarray:
    """Integer-scaled margins of all ``2^n`` vertices, indexed as above.

    The scaling factor is positive, so signs and zero tests are exact.
    """
    a, b = h.integer_form()
    bound = sum(abs(c) for c in a) + abs(b)
    dtype = np.int64 if bound < _INT64_SAFE else object
    arr = np.array([-sum(a) - b], dtype=dtype)
    for c in reversed(a):
        arr = np.concatenate([arr, arr + 2 * c])
    return arr


def _sign(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        return np.array([(v > 0) - (v < 0) for v in arr], dtype=np.int8)
    return np.sign(arr).astype(np.int8)


def _direction_pairs(arr: np.ndarray, n: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Views ``(lo, hi)`` of ``arr`` over edges in direction ``j``.

    ``lo`` holds base endpoints (coordinate j = -1) in increasing index order.
    """
    b = n - 1 - j
    r = arr.reshape(1 << j, 2, 1 << b)
    return r[:, 0, :].reshape(-1), r[:, 1, :].reshape(-1)


def _base_index(pos: int, n: int, j: int) -> int:
    b = n - 1 - j
    hi, lo = divmod(pos, 1 << b)
    return (hi << (b + 1)) | lo


def sliced_masks(h: Hyperplane) -> list[np.ndarray]:
    """Per-direction boolean arrays: ``masks[j][p]`` for the p-th base in direction j."""
    s = _sign(vertex_margins(h))
    out = []
    for j in range(h.n):
        lo, hi = _direction_pairs(s, h.n, j)
        out.append((lo * hi) < 0)
    return out


def unsliced_masks(H: HyperplaneFamily, guard: int | None = None) -> list[np.ndarray]:
    n = H.n
    _check_guard(n, guard, EDGE_GUARD)
    alive = [np.ones(1 << (n - 1), dtype=bool) for _ in range(n)]
    for h in H:
        for j, m in enumerate(sliced_masks(h)):
            alive[j] &= ~m
    return alive


def find_unsliced_edge(H: HyperplaneFamily, guard: int | None = None) -> CubeEdge | None:
    """Brute-force search for an edge sliced by no plane of ``H``.

    Returns the first such edge in ``(base, direction)`` lexicographic order,
    or None when ``H`` slices all ``n 2^(n-1)`` edges.
    """
    n = H.n
    best: tuple[int, int] | None = None
    for j, alive in enumerate(unsliced_masks(H, guard)):
        hits = np.flatnonzero(alive)
        if hits.size:
            cand = (_base_index(int(hits[0]), n, j), j)
            if best is None or cand < best:
                best = cand
    if best is None:
        return None
    return CubeEdge(index_to_vertex(best[0], n), best[1])


def count_unsliced_edges(H: HyperplaneFamily, guard: int | None = None) -> int:
    return int(sum(int(m.sum()) for m in unsliced_masks(H, guard)))


def slices_all_edges(H: HyperplaneFamily, guard: int | None = None) -> bool:
    return find_unsliced_edge(H, guard) is None


def sliced_fraction(h: Hyperplane, guard: int | None = None) -> Fraction:
    """Exact fraction of the ``n 2^(n-1)`` edges sliced by ``h``."""
    _check_guard(h.n, guard, EDGE_GUARD)
    count = sum(int(m.sum()) for m in sliced_masks(h))
    return Fraction(count, h.n * (1 << (h.n - 1)))


def covers_all(H: HyperplaneFamily, guard: int | None = None) -> bool:
    _check_guard(H.n, guard, VERTEX_GUARD)
    covered = np.zeros(1 << H.n, dtype=bool)
    for h in H:
        covered |= vertex_margins(h) == 0
    return bool(covered.all())


def min_nonzero_margin(H: HyperplaneFamily, guard: int | None = None) -> Fraction | None:
    """Smallest nonzero ``|<x, v_i> - mu_i|`` over all vertices and planes."""
    _check_guard(H.n, guard, VERTEX_GUARD)
    best: Fraction | None = None
    for h in H:
        m = np.abs(vertex_margins(h))
        nz = m[m != 0]
        if nz.size:
            cand = Fraction(int(nz.min()), h.scale)
            if best is None or cand < best:
                best = cand
    return best


def cover_to_slicing(H: HyperplaneFamily, guard: int | None = None) -> HyperplaneFamily:
    """Turn a skew vertex cover into a slicing family of twice the size.

    Each plane ``(v, mu)`` is replaced by ``(v, mu - beta)`` and
    ``(v, mu + beta)``, with ``beta`` half the smallest nonzero vertex margin.
    Any edge has a covered endpoint; by skewness its other endpoint sits at
    distance at least ``2 beta`` from that plane, so one of the shifted copies
    separates them.
    """
    if not H.is_skew:
        raise NotSkewError("cover_to_slicing requires every plane to be skew")
    if not covers_all(H, guard):
        raise NotCoveringError("family does not cover every vertex")
    m = min_nonzero_margin(H, guard)
    beta = Fraction(1) if m is None else m / 2
    out = []
    for h in H:
        out.append(Hyperplane(h.normal, h.threshold - beta))
        out.append(Hyperplane(h.normal, h.threshold + beta))
    return HyperplaneFamily(out, H.n)


def cover_beta(H: HyperplaneFamily, guard: int | None = None) -> Fraction:
    m = min_nonzero_margin(H, guard)
    return Fraction(1) if m is None else m / 2


# ---------------------------------------------------------------------------
# heuristic search for small slicing families


@dataclass
class SearchResult:
    success: bool
    family: HyperplaneFamily
    unsliced: int
    iterations: int


def _random_integer_family(n, k, rng, scale):
    planes = []
    for _ in range(k):
        v = rng.integers(1, scale + 1, size=n) * rng.choice([-1, 1], size=n)
        mu = Fraction(int(rng.integers(-scale * n, scale * n + 1)), 2)
        planes.append(Hyperplane([int(c) for c in v], mu))
    return planes


def search_slicing_family(n: int, k: int, budget: int, rng: np.random.Generator,
                          scale: int = 6, restarts: int = 8,
                          guard: int | None = None) -> SearchResult:
    """Randomized local search for ``k`` planes slicing every edge of ``{+-1}^n``.

    Normals are integer vectors and thresholds half-integers, so every
    candidate is exact.  A move perturbs one coordinate of one normal or one
    threshold; moves that do not increase the number of unsliced edges are
    accepted, worse ones with a small annealed probability.  The budget is
    the total number of evaluated moves across restarts.
    """
    _check_guard(n, guard, EDGE_GUARD)
    best_planes = None
    best_cost = None
    used = 0
    per_restart = max(1, budget // max(1, restarts))
    while used < budget:
        planes = _random_integer_family(n, k, rng, scale)
        cost = count_unsliced_edges(HyperplaneFamily(planes, n), guard)
        steps = min(per_restart, budget - used)
        for step in range(steps):
            used += 1
            if cost == 0:
                break
            i = int(rng.integers(k))
            h = planes[i]
            normal = list(h.normal)
            mu = h.threshold
            if rng.random() < 0.25:
                mu += Fraction(int(rng.choice([-1, 1])), 2)
            else:
                j = int(rng.integers(n))
                normal[j] += int(rng.choice([-1, 1]))
            cand = list(planes)
            cand[i] = Hyperplane(normal, mu)
            c = count_unsliced_edges(HyperplaneFamily(cand, n), guard)
            temp = max(1e-3, 1.0 - step / steps)
            if c <= cost or rng.random() < math.exp(-(c - cost) / temp):
                planes, cost = cand, c
        if best_cost is None or cost < best_cost:
            best_planes, best_cost = planes, cost
        if best_cost == 0:
            break
    family = HyperplaneFamily(best_planes, n)
    return SearchResult(best_cost == 0, family, int(best_cost), used)
