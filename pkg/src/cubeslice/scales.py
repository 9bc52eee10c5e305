"""Scale partitions of vectors and the Paley-Zygmund constant.

A vector has ``S`` scales when its coordinates split into blocks whose
Euclidean norms drop by a factor of at least ``4 C0^2`` from each block to
the next; the norm of the last block is the smallest scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

C0 = 10
RATIO = 4 * C0 * C0


class PartitionError(ValueError):
    pass


def c0_constant() -> int:
    return C0


def paley_zygmund_slack(c0: float) -> float:
    """``(1 - c0^-2)^2 / 7 - c0^-2 - 1/c0``; nonnegative iff ``c0`` works.

    Second moment ``E Z^2 <= 7`` with Paley-Zygmund gives the lower tail,
    Markov gives the upper one.
    """
    inv2 = 1.0 / (c0 * c0)
    return (1 - inv2) ** 2 / 7 - inv2 - 1.0 / c0


def minimal_integer_c0(limit: int = 1000) -> int:
    for c in range(2, limit):
        if paley_zygmund_slack(c) >= 0:
            return c
    raise RuntimeError("no admissible constant below limit")


@dataclass(frozen=True)
class ScalePartition:
    blocks: tuple[tuple[int, ...], ...]
    norms: tuple[float, ...]

    @property
    def S(self) -> int:
        return len(self.blocks)

    @property
    def smallest_scale(self) -> float:
        return self.norms[-1]

    delta = smallest_scale

    def to_json(self, v: Sequence | None = None) -> dict:
        out = {"blocks": [list(b) for b in self.blocks], "delta": repr(self.smallest_scale)}
        if v is not None and all(isinstance(c, (int, Fraction)) for c in v):
            sq = _sq_norm(v, self.blocks[-1])
            out["delta_squared"] = str(sq)
        return out


def _sq_norm(v: Sequence, block: Sequence[int]):
    exact = all(isinstance(v[i], (int, Fraction)) for i in block)
    zero = Fraction(0) if exact else 0.0
    return sum((v[i] * v[i] for i in block), zero)


def _check_blocks(v: Sequence, blocks) -> list[list[int]]:
    blocks = [list(int(i) for i in b) for b in blocks]
    seen = sorted(i for b in blocks for i in b)
    if seen != list(range(len(v))):
        raise PartitionError("blocks must cover every coordinate exactly once")
    if not blocks:
        raise PartitionError("partition has no blocks")
    return blocks


def verify_scale_partition(v: Sequence, blocks, ratio: float = RATIO, rtol: float = 0.0) -> bool:
    """Check ``|v^(s)|^2 >= ratio^2 |v^(s+1)|^2`` for consecutive blocks.

    Exact for rational input.  ``rtol`` relaxes the comparison for floating
    point vectors by a relative ``(1 - rtol)`` factor on the left side.
    """
    blocks = _check_blocks(v, blocks)
    sq = [_sq_norm(v, b) for b in blocks]
    r2 = ratio * ratio
    for a, b in zip(sq, sq[1:]):
        lhs = a if rtol == 0 else a * (1 + rtol)
        if lhs < r2 * b:
            return False
    return True


def _partition(v, blocks) -> ScalePartition:
    norms = tuple(math.sqrt(float(_sq_norm(v, b))) for b in blocks)
    return ScalePartition(tuple(tuple(b) for b in blocks), norms)


def greedy_scales(v: Sequence, ratio: float = RATIO) -> ScalePartition:
    """Greedy block split after sorting coordinates by decreasing magnitude.

    A block is closed as soon as the squared norm of everything after it is at
    most ``1/ratio^2`` of the block's squared norm.  Trailing zero coordinates
    join the last nonzero block.  The result always verifies; its block count
    is a lower bound on the best possible.
    """
    if all(c == 0 for c in v):
        raise PartitionError("the zero vector has no scales")
    order = sorted(range(len(v)), key=lambda i: (-abs(v[i]), i))
    nonzero = [i for i in order if v[i] != 0]
    zeros = [i for i in order if v[i] == 0]
    sq = [v[i] * v[i] for i in nonzero]
    tail = [0] * (len(sq) + 1)
    for i in range(len(sq) - 1, -1, -1):
        tail[i] = tail[i + 1] + sq[i]
    r2 = ratio * ratio
    blocks: list[list[int]] = []
    cur: list[int] = []
    cur_sq = 0
    for pos, i in enumerate(nonzero):
        cur.append(i)
        cur_sq += sq[pos]
        if tail[pos + 1] * r2 <= cur_sq:
            blocks.append(cur)
            cur, cur_sq = [], 0
    if cur:
        blocks.append(cur)
    blocks[-1].extend(zeros)
    blocks = [sorted(b) for b in blocks]
    return _partition(v, blocks)


def partition_of(v: Sequence, blocks) -> ScalePartition:
    return _partition(v, _check_blocks(v, blocks))


@dataclass(frozen=True)
class TailEstimate:
    estimate: float
    half_width: float
    trials: int


def _uniform_signs(rng, trials, n):
    return rng.integers(0, 2, size=(trials, n), dtype=np.int8) * 2 - 1


def many_scales_tail_estimate(v: Sequence, partition: ScalePartition, a: float, b: float,
                              trials: int, rng: np.random.Generator,
                              chunk: int = 65536) -> TailEstimate:
    """Monte Carlo ``Pr[|<x, v> - a| < b delta]`` for uniform ``x`` in ``{+-1}^n``."""
    if b < 2:
        raise ValueError("b must be at least 2")
    if trials <= 0:
        raise ValueError("trials must be positive")
    vv = np.array([float(c) for c in v])
    cut = b * partition.smallest_scale
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        x = _uniform_signs(rng, m, len(vv))
        hits += int(np.count_nonzero(np.abs(x @ vv - a) < cut))
        done += m
    p = hits / trials
    return TailEstimate(p, 1.96 * math.sqrt(p * (1 - p) / trials), trials)


def paley_zygmund_frequency(u: Sequence, trials: int, rng: np.random.Generator,
                            c0: float = C0, chunk: int = 65536) -> TailEstimate:
    """Monte Carlo ``Pr[1/c0 <= |<x, u>| <= c0]`` for a unit vector ``u``."""
    uu = np.array([float(c) for c in u])
    uu = uu / np.linalg.norm(uu)
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        s = np.abs(_uniform_signs(rng, m, len(uu)) @ uu)
        hits += int(np.count_nonzero((s >= 1 / c0) & (s <= c0)))
        done += m
    p = hits / trials
    return TailEstimate(p, 1.96 * math.sqrt(p * (1 - p) / trials), trials)


def geometric_vector(blocks: int, ratio: float = 2 * RATIO) -> list[float]:
    """``v_j = ratio^-j`` for ``j = 1..blocks``."""
    return [ratio ** -(j + 1) for j in range(blocks)]
