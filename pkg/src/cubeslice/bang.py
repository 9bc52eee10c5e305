"""Sign vectors for the plank-style lemma on symmetric unit-diagonal matrices.

Given a symmetric ``k x k`` matrix ``M`` with ones on the diagonal, a vector
``gamma`` and ``theta >= 0``, we look for ``eps`` in ``{+-1}^k`` with

    |theta (M eps)_i - gamma_i| >= theta   for every i.

The solver is a local search on ``G(eps) = theta eps^T M eps - 2 <gamma, eps>``.
Flipping coordinate ``i`` changes ``G`` by ``4 (theta - eps_i (theta (M eps)_i
- gamma_i))``, so at a flip-local maximum every ``eps_i (theta (M eps)_i -
gamma_i)`` is at least ``theta``, which is the required bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cube_core import as_rational


class BangError(ValueError):
    pass


@dataclass(frozen=True)
class BangInstance:
    M: tuple[tuple[Fraction, ...], ...]
    gamma: tuple[Fraction, ...]
    theta: Fraction

    def __init__(self, M, gamma, theta):
        M = tuple(tuple(as_rational(c) for c in row) for row in M)
        gamma = tuple(as_rational(c) for c in gamma)
        theta = as_rational(theta)
        k = len(gamma)
        if len(M) != k or any(len(row) != k for row in M):
            raise BangError(f"M must be {k}x{k} to match gamma")
        for i in range(k):
            if M[i][i] != 1:
                raise BangError(f"M[{i}][{i}] = {M[i][i]}, expected 1")
            for j in range(i):
                if M[i][j] != M[j][i]:
                    raise BangError(f"M is not symmetric at ({i}, {j})")
        if theta < 0:
            raise BangError("theta must be nonnegative")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "theta", theta)

    @property
    def k(self) -> int:
        return len(self.gamma)

    def M_times(self, eps: Sequence[int]) -> list[Fraction]:
        return [sum((m * e for m, e in zip(row, eps)), Fraction(0)) for row in self.M]

    def potential(self, eps: Sequence[int]) -> Fraction:
        Me = self.M_times(eps)
        quad = sum((e * x for e, x in zip(eps, Me)), Fraction(0))
        lin = sum((g * e for g, e in zip(self.gamma, eps)), Fraction(0))
        return self.theta * quad - 2 * lin


@dataclass
class BangSolution:
    epsilon: tuple[int, ...]
    margins: tuple[Fraction, ...]
    potentials: list[Fraction] = field(default_factory=list)
    flips: list[int] = field(default_factory=list)


def _check_signs(inst: BangInstance, eps: Sequence[int]) -> tuple[int, ...]:
    eps = tuple(int(e) for e in eps)
    if len(eps) != inst.k:
        raise BangError(f"epsilon has length {len(eps)}, instance has k={inst.k}")
    if any(e not in (-1, 1) for e in eps):
        raise BangError("epsilon entries must be +-1")
    return eps


def margins(inst: BangInstance, eps: Sequence[int]) -> tuple[Fraction, ...]:
    eps = _check_signs(inst, eps)
    Me = inst.M_times(eps)
    return tuple(abs(inst.theta * x - g) for x, g in zip(Me, inst.gamma))


def bang_verify(inst: BangInstance, eps: Sequence[int]) -> tuple[tuple[Fraction, ...], bool]:
    """Exact margins ``|theta (M eps)_i - gamma_i|`` and whether all are ``>= theta``."""
    m = margins(inst, eps)
    return m, all(x >= inst.theta for x in m)


def bang_solve(inst: BangInstance, start: Sequence[int] | None = None) -> BangSolution:
    """Steepest-ascent flips on ``G`` until no flip increases it.

    Ties between equally good flips go to the lowest index; the default start
    is the all-ones vector.  ``G`` strictly increases on a finite set, so the
    loop terminates.
    """
    k, theta, gamma, M = inst.k, inst.theta, inst.gamma, inst.M
    eps = list(_check_signs(inst, start)) if start is not None else [1] * k
    Me = inst.M_times(eps)
    G = inst.potential(eps)
    potentials = [G]
    flips = []
    while True:
        best_i, best_gain = -1, Fraction(0)
        for i in range(k):
            gain = 4 * (theta - eps[i] * (theta * Me[i] - gamma[i]))
            if gain > best_gain:
                best_i, best_gain = i, gain
        if best_i < 0:
            break
        i = best_i
        old = eps[i]
        eps[i] = -old
        for r in range(k):
            Me[r] -= 2 * old * M[r][i]
        G += best_gain
        potentials.append(G)
        flips.append(i)
    eps_t = tuple(eps)
    m = tuple(abs(theta * x - g) for x, g in zip(Me, gamma))
    return BangSolution(eps_t, m, potentials, flips)


def flip_certificate(inst: BangInstance, eps: Sequence[int]) -> list[Fraction]:
    """``eps_i (theta (M eps)_i - gamma_i)`` for every i; all ``>= theta`` at a local max."""
    eps = _check_signs(inst, eps)
    Me = inst.M_times(eps)
    return [e * (inst.theta * x - g) for e, x, g in zip(eps, Me, inst.gamma)]


def _integer_scaled(inst: BangInstance):
    L = 1
    for c in itertools.chain(itertools.chain.from_iterable(inst.M), inst.gamma, (inst.theta,)):
        L = L * c.denominator // math.gcd(L, c.denominator)
    A = [[int(c * L) for c in row] for row in inst.M]
    g = [int(c * L) for c in inst.gamma]
    return L, A, g, int(inst.theta * L)


def exhaustive_search(inst: BangInstance) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Enumerate all ``2^k`` sign vectors exactly.

    Returns ``(signs, ok, G)`` where ``ok[r]`` says whether row ``r`` of
    ``signs`` satisfies every margin bound and ``G`` is the potential scaled
    by ``L^2`` (``L`` the common denominator), so argmax is preserved.
    """
    k = inst.k
    L, A, g, T = _integer_scaled(inst)
    signs = np.array(list(itertools.product((1, -1), repeat=k)), dtype=np.int64).reshape(1 << k, k)
    big = max([abs(c) for row in A for c in row] + [abs(c) for c in g] + [T, L, 1])
    dtype = np.int64 if (k * big + 1) ** 3 < 2**62 else object
    S = signs.astype(dtype)
    AE = S @ np.array(A, dtype=dtype).reshape(k, k).T
    lhs = np.abs(T * AE - L * np.array(g, dtype=dtype))
    ok = (lhs >= T * L).all(axis=1) if k else np.ones(1, dtype=bool)
    G = T * (S * AE).sum(axis=1) - 2 * L * (S @ np.array(g, dtype=dtype))
    return signs, ok, G


def exhaustive_witnesses(inst: BangInstance) -> list[tuple[int, ...]]:
    """Every sign vector satisfying the margin bound."""
    signs, ok, _ = exhaustive_search(inst)
    return [tuple(int(c) for c in row) for row in signs[ok]]
