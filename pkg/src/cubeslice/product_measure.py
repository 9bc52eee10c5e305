"""Product measures on ``{0,1}^n`` and a measure-respecting maximal chain sampler.

Subsets of ``[n]`` are frozensets of 0-based indices.  With odds ratios
``q_j = p_j / (1 - p_j)``, level ``l`` has probability ``prod(1-p) g_l(q)``
where ``g_l`` is the elementary symmetric polynomial, and conditioned on the
level a set ``s`` has probability ``prod_{a in s} q_a / g_l(q)``.

A chain is grown from the empty set; from ``s`` (size ``l``) the step adds
``j`` with probability ``q_j h(s, j) / g_{l+1}(q)`` where

    h(s, j) = sum_{|t| = l, j not in t} prod_{a in t} q_a / |(s + {j}) - t|.

Splitting ``t`` by its overlap ``a = |t & s|`` gives the polynomial form

    h(s, j) = sum_a g_a(q|s) g_{l-a}(q|rest) / (l - a + 1),

``rest`` being the complement of ``s + {j}``.  Every level of the resulting
chain is distributed like the conditioned measure.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .cube_core import as_rational

EXACT_LIMIT = 24

# 40-digit rational enclosure of pi
PI_LOWER = Fraction(31415926535897932384626433832795028841, 10**37)
PI_UPPER = PI_LOWER + Fraction(1, 10**37)


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class ProductMeasure:
    """Independent coordinates with ``Pr[z_j = 1] = p_j`` in the open interval (0, 1).

    Entries are kept as Fractions when every input is rational (ints,
    Fractions, strings) and as floats otherwise.
    """

    p: tuple

    def __init__(self, p: Iterable):
        vals = list(p)
        if not vals:
            raise MeasureError("a product measure needs at least one coordinate")
        if any(isinstance(v, (float, np.floating)) for v in vals):
            conv = tuple(float(v) for v in vals)
        else:
            conv = tuple(as_rational(v) for v in vals)
        for j, v in enumerate(conv):
            if not 0 < v < 1:
                raise MeasureError(f"p[{j}] = {v} is not in (0, 1)")
        object.__setattr__(self, "p", conv)

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def exact(self) -> bool:
        return isinstance(self.p[0], Fraction)

    @property
    def q(self) -> tuple:
        return tuple(v / (1 - v) for v in self.p)

    @property
    def sigma2(self):
        """Variance of the Hamming weight, ``sum_j p_j (1 - p_j)``."""
        zero = Fraction(0) if self.exact else 0.0
        return sum((v * (1 - v) for v in self.p), zero)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def as_float(self) -> "ProductMeasure":
        return self if not self.exact else ProductMeasure([float(v) for v in self.p])

    def point_prob(self, s: Iterable[int]):
        s = set(s)
        one = Fraction(1) if self.exact else 1.0
        out = one
        for j, v in enumerate(self.p):
            out *= v if j in s else 1 - v
        return out

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draw points as 0/1 arrays (shape ``(n,)`` or ``(size, n)``)."""
        p = np.array([float(v) for v in self.p])
        shape = (self.n,) if size is None else (size, self.n)
        return (rng.random(shape) < p).astype(np.uint8)


def random_rational_measure(n: int, rng: np.random.Generator, max_den: int = 12) -> ProductMeasure:
    ps = []
    for _ in range(n):
        den = int(rng.integers(2, max_den + 1))
        num = int(rng.integers(1, den))
        ps.append(Fraction(num, den))
    return ProductMeasure(ps)


def elem_sym_all(q: Sequence, top: int | None = None) -> list:
    """``[g_0(q), ..., g_top(q)]`` by the one-pass dynamic program."""
    n = len(q)
    top = n if top is None else top
    one = Fraction(1) if (n and isinstance(q[0], Fraction)) else 1
    g = [one] + [0 * one] * top
    for i, x in enumerate(q):
        for m in range(min(i + 1, top), 0, -1):
            g[m] += x * g[m - 1]
    return g


def elem_sym(q: Sequence, level: int):
    """Elementary symmetric polynomial ``g_level(q)``; ``g_0 = 1``."""
    if not 0 <= level <= len(q):
        raise MeasureError(f"level {level} out of range for n={len(q)}")
    return elem_sym_all(q, level)[level]


def level_distribution(P: ProductMeasure) -> list:
    """``Pr[|z| = l]`` for ``l = 0..n``."""
    if P.exact:
        base = Fraction(1)
        for v in P.p:
            base *= 1 - v
        return [base * g for g in elem_sym_all(P.q)]
    # direct product of (1-p) + p x avoids large odds ratios in floating point
    coef = np.array([1.0])
    for v in P.p:
        coef = np.convolve(coef, [1 - v, v])
    return [float(c) for c in coef]


def max_level_prob(P: ProductMeasure):
    return max(level_distribution(P))


def conditional_point_prob(P: ProductMeasure, s: Iterable[int]):
    """``Pr[z = s | |z| = |s|]``."""
    s = sorted(set(s))
    q = P.q
    num = Fraction(1) if P.exact else 1.0
    for a in s:
        num *= q[a]
    return num / elem_sym(q, len(s))


def _check_subset(P: ProductMeasure, s) -> frozenset:
    s = frozenset(int(a) for a in s)
    if any(not 0 <= a < P.n for a in s):
        raise MeasureError(f"subset {sorted(s)} not inside [0, {P.n})")
    return s


def h_coeff(P: ProductMeasure, s: Iterable[int], j: int):
    """The chain-step coefficient ``h(s, j)`` via the overlap split."""
    s = _check_subset(P, s)
    if j in s:
        raise MeasureError(f"j={j} must not lie in s")
    if not 0 <= j < P.n:
        raise MeasureError(f"j={j} out of range")
    l = len(s)
    q = P.q
    inside = elem_sym_all([q[a] for a in sorted(s)], l)
    rest = elem_sym_all([q[a] for a in range(P.n) if a not in s and a != j], l)
    unit = Fraction(1) if P.exact else 1.0
    total = 0 * unit
    for a in range(l + 1):
        m = l - a
        if m < len(rest):
            total += inside[a] * rest[m] * (unit / (m + 1))
    return total


def _exact_step_weights(P: ProductMeasure, s: frozenset) -> dict[int, Fraction]:
    l = len(s)
    q = P.q
    comp = [a for a in range(P.n) if a not in s]
    inside = elem_sym_all([q[a] for a in sorted(s)], l)
    E = elem_sym_all([q[a] for a in comp], l)
    g_next = elem_sym(q, l + 1)
    out = {}
    for j in comp:
        # symmetric functions of the complement with j deleted
        Ej = [Fraction(1)]
        for m in range(1, l + 1):
            Ej.append(E[m] - q[j] * Ej[m - 1])
        h = sum((inside[a] * Ej[l - a] / (l - a + 1) for a in range(l + 1)), Fraction(0))
        out[j] = q[j] * h / g_next
    return out


def _log_elem_sym(logq: np.ndarray, top: int) -> np.ndarray:
    out = np.full(top + 1, -np.inf)
    out[0] = 0.0
    for i, x in enumerate(logq):
        hi = min(i + 1, top)
        out[1:hi + 1] = np.logaddexp(out[1:hi + 1], x + out[0:hi])
    return out


def _float_step_weights(P: ProductMeasure, s: frozenset) -> dict[int, float]:
    l = len(s)
    p = np.array([float(v) for v in P.p])
    logq = np.log(p) - np.log1p(-p)
    comp = np.array([a for a in range(P.n) if a not in s], dtype=int)
    inside = _log_elem_sym(logq[sorted(s)], l)
    # row r: symmetric functions of comp with comp[r] removed
    m = len(comp)
    rows = np.full((m, l + 1), -np.inf)
    rows[:, 0] = 0.0
    for i, a in enumerate(comp):
        upd = np.logaddexp(rows[:, 1:], logq[a] + rows[:, :-1])
        keep = np.arange(m) == i
        rows[:, 1:] = np.where(keep[:, None], rows[:, 1:], upd)
    a_idx = np.arange(l + 1)
    terms = inside[None, :] + rows[:, l - a_idx] - np.log(l - a_idx + 1)[None, :]
    with np.errstate(invalid="ignore"):
        logh = np.logaddexp.reduce(terms, axis=1)
    logw = logq[comp] + logh
    logw -= np.logaddexp.reduce(logw)
    w = np.exp(logw)
    return {int(j): float(x) for j, x in zip(comp, w)}


def chain_step_weights(P: ProductMeasure, s: Iterable[int]) -> dict[int, object]:
    """Transition probabilities ``s -> s + {j}`` for every ``j`` outside ``s``.

    Exact Fractions for rational measures with ``n <= EXACT_LIMIT``; otherwise
    normalized log-space floats (for sampling only).
    """
    s = _check_subset(P, s)
    if len(s) >= P.n:
        raise MeasureError("cannot extend the full set")
    if P.exact and P.n <= EXACT_LIMIT:
        return _exact_step_weights(P, s)
    return _float_step_weights(P, s)


@functools.lru_cache(maxsize=1 << 14)
def _step_table(P: ProductMeasure, s: frozenset) -> tuple[tuple[int, ...], np.ndarray]:
    """Sorted candidates and cumulative float weights for one chain step."""
    weights = chain_step_weights(P, s)
    keys = tuple(sorted(weights))
    return keys, np.cumsum([float(weights[k]) for k in keys])


def chain_step(P: ProductMeasure, s: Iterable[int], rng: np.random.Generator) -> frozenset:
    s = _check_subset(P, s)
    if len(s) >= P.n:
        raise MeasureError("cannot extend the full set")
    keys, cum = _step_table(P, s)
    r = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, r, side="right"))
    return s | {keys[min(idx, len(keys) - 1)]}


@dataclass(frozen=True)
class MaximalChain:
    sets: tuple[frozenset, ...]

    @property
    def order(self) -> tuple[int, ...]:
        """Element added at each step."""
        return tuple(next(iter(b - a)) for a, b in zip(self.sets, self.sets[1:]))

    def is_valid(self, n: int) -> bool:
        if len(self.sets) != n + 1 or self.sets[0] != frozenset():
            return False
        if self.sets[-1] != frozenset(range(n)):
            return False
        return all(len(c) == l and (l == 0 or self.sets[l - 1] < c)
                   for l, c in enumerate(self.sets))


def sample_chain(P: ProductMeasure, rng: np.random.Generator, debug: bool = False) -> MaximalChain:
    if debug:
        res = anticoncentration_check(P)
        assert res.holds, res
    sets = [frozenset()]
    for _ in range(P.n):
        sets.append(chain_step(P, sets[-1], rng))
    return MaximalChain(tuple(sets))


def chain_transition(P: ProductMeasure, dist: dict[frozenset, object]) -> dict[frozenset, object]:
    """Push a distribution on level-``l`` sets one step up the chain."""
    out: dict[frozenset, object] = {}
    for s, pr in dist.items():
        for j, w in chain_step_weights(P, s).items():
            t = s | {j}
            out[t] = out.get(t, 0) + pr * w
    return out


@dataclass(frozen=True)
class AnticoncentrationResult:
    max_level_prob: object
    sigma: float
    bound: float
    holds: bool


def anticoncentration_check(P: ProductMeasure) -> AnticoncentrationResult:
    """Compare ``max_l Pr[|z| = l]`` against ``sqrt(pi) / sigma_P``.

    For rational measures the comparison is exact: the claim is equivalent to
    ``max^2 sigma^2 <= pi``, decided against a 40-digit rational enclosure
    of pi.
    """
    mx = max_level_prob(P)
    s2 = P.sigma2
    sigma = math.sqrt(s2)
    bound = math.sqrt(math.pi) / sigma
    if P.exact:
        lhs = mx * mx * s2
        if lhs <= PI_LOWER:
            holds = True
        elif lhs >= PI_UPPER:
            holds = False
        else:
            raise ArithmeticError("comparison against pi not decided at 40 digits")
    else:
        holds = mx <= bound
    return AnticoncentrationResult(mx, sigma, bound, holds)
