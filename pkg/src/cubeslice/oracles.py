"""Slow reference implementations used to cross-check the fast routines.

Each function here works straight from a definition with Python integers
and Fractions and loops over the whole cube; nothing is shared with the
vectorized code beyond the input types.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Sequence

from .antichains import BooleanFunction, OrientedEdgeFamily
from .cube_core import HyperplaneFamily
from .product_measure import ProductMeasure


def _plane_rows(H: HyperplaneFamily):
    return [(list(h.normal), h.threshold) for h in H.planes]


def first_unsliced_edge(H: HyperplaneFamily):
    """First ``(base, j)`` in lexicographic order (``-1 < +1``, base carries -1 at ``j``)
    whose endpoints no plane strictly separates, or None."""
    rows = _plane_rows(H)
    n = H.n
    for x in itertools.product((-1, 1), repeat=n):
        margins = [sum((c * xi for c, xi in zip(v, x)), Fraction(0)) - mu for v, mu in rows]
        for j in range(n):
            if x[j] != -1:
                continue
            ok = True
            for (v, _), m in zip(rows, margins):
                if m * (m + 2 * v[j]) < 0:
                    ok = False
                    break
            if ok:
                return x, j
    return None


def sliced_edges_sign_pattern(H: HyperplaneFamily) -> int:
    """Number of edges sliced by at least one plane."""
    rows = _plane_rows(H)
    n = H.n
    count = 0
    for x in itertools.product((-1, 1), repeat=n):
        for j in range(n):
            if x[j] != -1:
                continue
            y = list(x)
            y[j] = 1
            for v, mu in rows:
                mx = sum((c * a for c, a in zip(v, x)), Fraction(0)) - mu
                my = sum((c * a for c, a in zip(v, y)), Fraction(0)) - mu
                if mx * my < 0:
                    count += 1
                    break
    return count


def _prod(vals, one):
    out = one
    for v in vals:
        out *= v
    return out


def h_by_definition(P: ProductMeasure, s: Iterable[int], j: int):
    """``sum over |t| = |s|, j not in t`` of ``prod q_t / |(s + j) - t|``."""
    s = frozenset(s)
    q = P.q
    one = Fraction(1) if P.exact else 1.0
    big = s | {j}
    total = 0 * one
    others = [a for a in range(P.n) if a != j]
    for t in itertools.combinations(others, len(s)):
        total += _prod((q[a] for a in t), one) / len(big - set(t))
    return total


def elem_sym_by_definition(q: Sequence, level: int):
    one = Fraction(1) if q and isinstance(q[0], Fraction) else 1
    return sum((_prod((q[a] for a in t), one) for t in itertools.combinations(range(len(q)), level)),
               0 * one)


def point_prob(P: ProductMeasure, s) -> Fraction:
    s = set(s)
    out = Fraction(1) if P.exact else 1.0
    for j, v in enumerate(P.p):
        out *= v if j in s else 1 - v
    return out


def level_probs(P: ProductMeasure) -> list:
    out = [0 * P.p[0] for _ in range(P.n + 1)]
    for bits in itertools.product((0, 1), repeat=P.n):
        s = [j for j, b in enumerate(bits) if b]
        out[len(s)] += point_prob(P, s)
    return out


def conditional_prob(P: ProductMeasure, s) -> Fraction:
    return point_prob(P, s) / level_probs(P)[len(set(s))]


def is_antichain_pairwise(sets: Iterable[Iterable[int]]) -> bool:
    fam = [frozenset(s) for s in sets]
    return not any(a < b for a in fam for b in fam)


def lym_sum(sets, P: ProductMeasure):
    lv = level_probs(P)
    return sum((point_prob(P, s) / lv[len(set(s))] for s in sets), Fraction(0) if P.exact else 0.0)


def measure_of(sets, P: ProductMeasure):
    return sum((point_prob(P, s) for s in sets), Fraction(0) if P.exact else 0.0)


def u_chains(n: int, u: Sequence[int]):
    """Every maximal chain from ``u`` to its antipode as a list of ``(lo_mask, j)`` edges."""
    umask = sum(1 << j for j, c in enumerate(u) if c)
    for order in itertools.permutations(range(n)):
        x = umask
        edges = []
        for j in order:
            y = x ^ (1 << j)
            edges.append((min(x, y), j))
            x = y
        yield edges


def edge_antichain_by_chains(A: OrientedEdgeFamily) -> bool:
    """No ``u``-chain passes through two edges of ``A``."""
    for chain in u_chains(A.n, A.u):
        if sum(1 for e in chain if e in A.edges) > 1:
            return False
    return True


def boundary_by_definition(f: BooleanFunction, P: ProductMeasure, weights: Sequence) -> Fraction:
    """``sum_x P(x) sum_j w_j [f(x) != f(x + e_j)]`` over bitmask points."""
    n = f.n
    total = 0 * weights[0]
    for x in range(1 << n):
        px = point_prob(P, [j for j in range(n) if (x >> j) & 1])
        for j in range(n):
            if f.table[x] != f.table[x ^ (1 << j)]:
                total += px * weights[j]
    return total


def bang_brute_force(M, gamma, theta) -> list[tuple[int, ...]]:
    """Every sign vector with ``|theta (M eps)_i - gamma_i| >= theta`` for all i."""
    k = len(gamma)
    out = []
    for eps in itertools.product((1, -1), repeat=k):
        good = True
        for i in range(k):
            me = sum((M[i][j] * eps[j] for j in range(k)), Fraction(0))
            if abs(theta * me - gamma[i]) < theta:
                good = False
                break
        if good:
            out.append(eps)
    return out
