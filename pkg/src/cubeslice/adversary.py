"""Randomized search for an edge left unsliced by a skew hyperplane family.

Stages, in the order they run:

1. normalize every plane to a unit normal and decompose the normal matrix
   into retained columns (light, rows renormalized into ``V'``) and removed
   columns;
2. fix the removed coordinates ``x''`` so every removed row stays far from
   its threshold whatever the retained coordinates do;
3. pick signs ``eps`` by local search so that ``u = theta V'^T eps`` keeps
   each retained row at distance ``theta`` from its shifted threshold;
4. walk ``u`` inside the cube, orthogonally to the retained rows, until all
   but a few coordinates sit at +-1;
5. sample the leftover fractional coordinates from the product measure that
   has mean ``w`` and draw a flip direction among them.

Every candidate edge is checked exactly against the original rational
planes, so a returned edge is always unsliced.  Floating point only steers
the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .antichains import monotone_edge_sampler
from .bang import BangInstance, bang_solve, bang_verify
from .cube_core import CubeEdge, DimensionError, HyperplaneFamily, NotSkewError, slices
from .decompose import DecompositionParams, DecompositionResult, decompose
from .product_measure import ProductMeasure

ROUND_TOL = 1e-9
PRESERVE_TOL = 1e-10


class RoundingError(ArithmeticError):
    pass


@dataclass(frozen=True)
class AdversaryParams:
    """``theta=None`` means ``n^-theta_exponent`` capped so that ``|u|_inf <= 1``."""

    theta: float | None = None
    theta_exponent: float = 0.0115
    x2_attempts: int = 64
    edge_attempts: int = 256
    weighting: str = "squared"
    decomposition: DecompositionParams = field(default_factory=DecompositionParams)
    # rerun with nothing removed when the decomposition leaves no usable split
    fallback: bool = True

    def __post_init__(self):
        if self.theta is not None and not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.x2_attempts < 1 or self.edge_attempts < 1:
            raise ValueError("attempt counts must be at least 1")

    def to_json(self) -> dict:
        return {"theta": self.theta, "theta_exponent": self.theta_exponent,
                "x2_attempts": self.x2_attempts, "edge_attempts": self.edge_attempts,
                "weighting": self.weighting, "decomposition": self.decomposition.to_json(),
                "fallback": self.fallback}


@dataclass(frozen=True)
class Failure:
    stage: str
    reason: str
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"stage": self.stage, "reason": self.reason, "details": self.details}


@dataclass
class PipelineTrace:
    n: int
    decomposition: DecompositionResult | None = None
    x2: list[int] | None = None
    x2_attempts: int = 0
    theta: float | None = None
    epsilon: list[int] | None = None
    bang_margins: list[float] | None = None
    u: list[float] | None = None
    w: list[float] | None = None
    rounding_steps: int = 0
    fractional: list[int] | None = None
    sigma_P2: float | None = None
    sigma_i2: list[float] | None = None
    deviation: list[float] | None = None
    bernstein: list[float] | None = None
    edge_attempts: int = 0
    slice_counts: list[int] | None = None
    outcome: CubeEdge | Failure | None = None
    retry_policy: str = "fresh fractional vertex and direction per attempt"
    first_failure: Failure | None = None

    @property
    def success(self) -> bool:
        return isinstance(self.outcome, CubeEdge)

    def to_json(self) -> dict:
        out = {k: getattr(self, k) for k in
               ("n", "x2", "x2_attempts", "theta", "epsilon", "bang_margins", "u", "w",
                "rounding_steps", "fractional", "sigma_P2", "sigma_i2", "deviation",
                "bernstein", "edge_attempts", "slice_counts", "retry_policy")}
        out["decomposition"] = None if self.decomposition is None else {
            "k_prime": self.decomposition.k_prime, "n_prime": self.decomposition.n_prime,
            "row_order": self.decomposition.row_order, "col_order": self.decomposition.col_order,
            "drops": self.decomposition.drops, "exhausted": self.decomposition.exhausted}
        if isinstance(self.outcome, CubeEdge):
            out["outcome"] = {"edge": {"base": list(self.outcome.base),
                                       "direction": self.outcome.direction}}
        elif isinstance(self.outcome, Failure):
            out["outcome"] = {"failure": self.outcome.to_json()}
        else:
            out["outcome"] = None
        out["first_failure"] = None if self.first_failure is None else self.first_failure.to_json()
        return out


def bernstein_bound(sigma2: float, t: float) -> float:
    """``exp(-t^2 / (2 sigma2 + 2 t))``, the tail bound for sums of mean-zero terms bounded by 2."""
    if not t > 0:
        raise ValueError("t must be positive")
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    return math.exp(-t * t / (2 * sigma2 + 2 * t))


def normalized_planes(H: HyperplaneFamily) -> tuple[np.ndarray, np.ndarray]:
    """Unit normals and matching thresholds as floats."""
    V = np.array([[float(c) for c in h.normal] for h in H.planes], dtype=np.float64).reshape(len(H), H.n)
    mu = np.array([float(h.threshold) for h in H.planes], dtype=np.float64)
    norms = np.linalg.norm(V, axis=1)
    return V / norms[:, None], mu / norms


@dataclass(frozen=True)
class X2Result:
    x2: np.ndarray | None
    attempts: int
    violations: int


def find_x2(Vn: np.ndarray, mu: np.ndarray, result: DecompositionResult, attempts: int,
            rng: np.random.Generator) -> X2Result:
    """Uniform ``x''`` on the removed columns, accepted when every removed row clears
    ``|v'|_1 + |v'|_inf`` (its worst swing over all retained coordinates)."""
    keep = result.retained_cols
    gone = result.col_order[result.n_prime:]
    rows = result.removed_rows
    if not gone:
        attempts = 1
    X = np.where(rng.random((attempts, len(gone))) < 0.5, -1.0, 1.0)
    if not rows:
        return X2Result(X[0].astype(np.int64), 1, 0)
    Vr = Vn[np.ix_(rows, gone)]
    Vk = Vn[np.ix_(rows, keep)]
    bound = np.abs(Vk).sum(axis=1) + (np.abs(Vk).max(axis=1) if keep else 0.0)
    ok = np.abs(X @ Vr.T - mu[rows]) > bound
    good = np.flatnonzero(ok.all(axis=1))
    if good.size:
        a = int(good[0])
        return X2Result(X[a].astype(np.int64), a + 1, 0)
    return X2Result(None, attempts, int((~ok).sum(axis=1).min()))


def _rational_gram(Vp: np.ndarray) -> list[list[Fraction]]:
    G = Vp @ Vp.T
    k = G.shape[0]
    M = [[Fraction(1) if i == j else (Fraction(float(G[i, j])) + Fraction(float(G[j, i]))) / 2
          for j in range(k)] for i in range(k)]
    return M


@dataclass(frozen=True)
class BangStep:
    epsilon: tuple[int, ...]
    u: np.ndarray
    margins: tuple[Fraction, ...]
    ok: bool


def bang_step(Vp: np.ndarray, gamma: Sequence[float], theta: float) -> BangStep:
    """Sign vector for ``M = V' V'^T`` and the shifted thresholds, with ``u = theta V'^T eps``.

    ``M`` is taken exactly from the floating point Gram matrix, symmetrized,
    with its diagonal set to one (the rows of ``V'`` are unit up to rounding).
    """
    Vp = np.asarray(Vp, dtype=np.float64)
    if Vp.shape[0] == 0:
        raise ValueError("bang_step needs at least one retained row")
    inst = BangInstance(_rational_gram(Vp), [Fraction(float(g)) for g in gamma], Fraction(float(theta)))
    sol = bang_solve(inst)
    m, ok = bang_verify(inst, sol.epsilon)
    u = float(theta) * (Vp.T @ np.array(sol.epsilon, dtype=np.float64))
    return BangStep(sol.epsilon, u, m, ok)


def _nullspace_direction(A: np.ndarray, tol: float) -> np.ndarray | None:
    m = A.shape[1]
    if A.shape[0] == 0:
        a = np.zeros(m)
        a[0] = 1.0
        return a
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    rank = int(np.count_nonzero(s > tol * max(1.0, s[0]))) if s.size else 0
    if rank >= m:
        return None
    return Vt[rank]


def round_to_face(u: Sequence[float], Vp: np.ndarray, tol: float = ROUND_TOL) -> tuple[np.ndarray, int]:
    """Move ``u`` along directions orthogonal to the rows of ``V'`` (and to the
    coordinates already at +-1) until no such direction remains.

    Returns ``(w, steps)``.  Coordinates within ``tol`` of +-1 are snapped.
    At most ``k'`` coordinates of ``w`` stay strictly inside (-1, 1).
    """
    w = np.array(u, dtype=np.float64)
    Vp = np.asarray(Vp, dtype=np.float64).reshape(-1, w.size)
    if np.any(np.abs(w) > 1 + tol):
        raise RoundingError("u lies outside the cube")
    w0 = w.copy()
    fixed = np.abs(w) >= 1 - tol
    w[fixed] = np.sign(w[fixed])
    steps = 0
    while not fixed.all():
        free = np.flatnonzero(~fixed)
        a = _nullspace_direction(Vp[:, free], tol)
        if a is None:
            break
        wf = w[free]
        with np.errstate(divide="ignore", invalid="ignore"):
            reach = np.where(a > tol, (1 - wf) / a, np.where(a < -tol, (-1 - wf) / a, np.inf))
        pick = int(np.argmin(reach))
        if not np.isfinite(reach[pick]):
            raise RoundingError("nullspace direction has no usable coordinate")
        w[free] = wf + reach[pick] * a
        w[free[pick]] = 1.0 if a[pick] > 0 else -1.0
        newly = np.abs(w) >= 1 - tol
        w[newly] = np.sign(w[newly])
        fixed |= newly
        steps += 1
    drift = np.abs(Vp @ w - Vp @ w0)
    if drift.size and drift.max() > PRESERVE_TOL:
        raise RoundingError(f"inner products drifted by {drift.max():.3g}")
    if np.any(np.abs(w) > 1):
        raise RoundingError("w left the cube")
    if np.count_nonzero(fixed) < w.size - Vp.shape[0]:
        raise RoundingError("fewer than n' - k' coordinates reached +-1")
    return w, steps


def sample_fractional_vertex(w: Sequence[float], rng: np.random.Generator,
                             size: int | None = None) -> np.ndarray:
    """``x' = w + delta`` with ``Pr[x'_j = 1] = (1 + w_j) / 2``, so ``E x' = w``."""
    w = np.asarray(w, dtype=np.float64)
    shape = w.shape if size is None else (size,) + w.shape
    return np.where(rng.random(shape) < (1 + w) / 2, 1, -1).astype(np.int64)


def _auto_theta(n: int, Vp: np.ndarray, exponent: float) -> float:
    theta = n ** -exponent
    if Vp.size:
        l1 = float(np.abs(Vp).sum(axis=0).max())
        if l1 > 0:
            theta = min(theta, 1.0 / l1)
    return theta


def _integer_planes(H: HyperplaneFamily):
    forms = [h.integer_form() for h in H.planes]
    A = np.array([a for a, _ in forms], dtype=object).reshape(len(forms), H.n)
    b = np.array([b for _, b in forms], dtype=object)
    return A, b


def _sliced_by(A, b, x: np.ndarray, d: int) -> np.ndarray:
    """Which planes strictly separate ``x`` from ``x`` flipped at ``d`` (exact integers)."""
    mx = A.dot(x.astype(object)) - b
    my = mx - 2 * int(x[d]) * A[:, d]
    return mx * my < 0


def _confirm(H: HyperplaneFamily, e: CubeEdge) -> bool:
    return not any(slices(h, e) for h in H.planes)


def find_missing_edge(H: HyperplaneFamily, params: AdversaryParams | None = None,
                      rng: np.random.Generator | None = None) -> PipelineTrace:
    """Run the whole pipeline; ``trace.outcome`` is an exactly unsliced edge or a Failure.

    If the configured decomposition removes every column, or no ``x''``
    clears the removed rows, and ``params.fallback`` is set, the pipeline
    reruns once with no columns removed; ``trace.first_failure`` keeps the
    original reason.
    """
    params = params or AdversaryParams()
    rng = rng if rng is not None else np.random.default_rng()
    if not isinstance(H, HyperplaneFamily):
        raise TypeError("expected a HyperplaneFamily")
    if not H.is_skew:
        raise NotSkewError("every normal must have all coordinates nonzero")
    trace = _pipeline(H, params, params.decomposition, rng)
    out = trace.outcome
    if params.fallback and isinstance(out, Failure) and out.stage in ("decompose", "x2"):
        # column masses never exceed the row count, so nothing is removed
        bound = float(len(H) + 1)
        keep_all = DecompositionParams(mass_threshold=bound, column_bound=bound, S=1,
                                       c0=params.decomposition.c0)
        trace = _pipeline(H, params, keep_all, rng)
        trace.first_failure = out
    return trace


def _pipeline(H: HyperplaneFamily, params: AdversaryParams, dparams: DecompositionParams,
              rng: np.random.Generator) -> PipelineTrace:
    n = H.n
    trace = PipelineTrace(n=n)
    Vn, mu = normalized_planes(H)
    if Vn.shape != (len(H), n):
        raise DimensionError("normal matrix has the wrong shape")
    A, b = _integer_planes(H)

    res = decompose(Vn, dparams)
    trace.decomposition = res
    keep = res.retained_cols
    gone = res.col_order[res.n_prime:]
    rows = res.retained_rows

    x2r = find_x2(Vn, mu, res, params.x2_attempts, rng)
    trace.x2_attempts = x2r.attempts
    if x2r.x2 is None:
        trace.outcome = Failure("x2", "no sample cleared every removed row",
                                {"fewest_violations": x2r.violations})
        return trace
    x2 = x2r.x2
    trace.x2 = [int(c) for c in x2]
    if not keep:
        trace.outcome = Failure("decompose", "no retained columns to build an edge from")
        return trace

    Vp = res.V_prime
    rho = np.linalg.norm(Vn[np.ix_(rows, keep)], axis=1) if rows else np.zeros(0)
    gamma = (mu[rows] - (Vn[np.ix_(rows, gone)] @ x2 if gone else 0.0)) / rho if rows else np.zeros(0)

    if rows:
        theta = params.theta if params.theta is not None else _auto_theta(n, Vp, params.theta_exponent)
        trace.theta = theta
        step = bang_step(Vp, gamma, theta)
        trace.epsilon = list(step.epsilon)
        trace.bang_margins = [float(m) for m in step.margins]
        if not step.ok:
            trace.outcome = Failure("bang", "local search ended below the margin bound")
            return trace
        u = step.u
        col_l1 = np.abs(Vp).sum(axis=0)
        if np.abs(u).max() > theta * col_l1.max() * (1 + 1e-12):
            raise ArithmeticError("u exceeds the triangle-inequality bound")
    else:
        u = np.zeros(len(keep))
    trace.u = [float(c) for c in u]
    if np.abs(u).max(initial=0.0) > 1:
        trace.outcome = Failure("bang", "u lies outside the cube; lower theta",
                                {"u_inf": float(np.abs(u).max())})
        return trace

    try:
        w, nsteps = round_to_face(u, Vp)
    except RoundingError as exc:
        trace.outcome = Failure("round", str(exc))
        return trace
    trace.w = [float(c) for c in w]
    trace.rounding_steps = nsteps
    frac = np.flatnonzero(np.abs(w) < 1)
    trace.fractional = [int(j) for j in frac]

    if rows:
        s2 = ((1 - w * w)[None, :] * Vp * Vp).sum(axis=1)
        dev = np.abs(Vp @ w - gamma) - np.abs(Vp).max(axis=1)
        trace.sigma_i2 = [float(c) for c in s2]
        trace.deviation = [float(c) for c in dev]
        trace.bernstein = [min(1.0, 2 * bernstein_bound(float(s), float(t))) if t > 0 else 1.0
                           for s, t in zip(s2, dev)]

    x = np.zeros(n, dtype=np.int64)
    if gone:
        x[gone] = x2
    keep_arr = np.array(keep, dtype=np.int64)
    counts = np.zeros(len(H), dtype=np.int64)

    if frac.size == 0:
        x[keep_arr] = w.astype(np.int64)
        for t, d in enumerate(keep):
            trace.edge_attempts = t + 1
            hit = _sliced_by(A, b, x, d)
            counts += hit.astype(np.int64)
            if not hit.any():
                e = CubeEdge(tuple(int(c) for c in x), int(d))
                assert _confirm(H, e)
                trace.slice_counts = counts.tolist()
                trace.outcome = e
                return trace
        trace.slice_counts = counts.tolist()
        trace.outcome = Failure("edge", "every direction at the rounded vertex is sliced")
        return trace

    P = ProductMeasure([float((1 + w[j]) / 2) for j in frac])
    trace.sigma_P2 = float(((1 - w[frac] ** 2) / 4).sum())
    xt, jt = monotone_edge_sampler(P, rng, size=params.edge_attempts, weighting=params.weighting)
    base = w.astype(np.int64)
    for t in range(params.edge_attempts):
        xp = base.copy()
        xp[frac] = 2 * xt[t].astype(np.int64) - 1
        x[keep_arr] = xp
        d = int(keep_arr[frac[jt[t]]])
        trace.edge_attempts = t + 1
        hit = _sliced_by(A, b, x, d)
        counts += hit.astype(np.int64)
        if not hit.any():
            e = CubeEdge(tuple(int(c) for c in x), d)
            assert _confirm(H, e)
            trace.slice_counts = counts.tolist()
            trace.outcome = e
            return trace
    trace.slice_counts = counts.tolist()
    trace.outcome = Failure("edge", "every sampled edge was sliced",
                            {"attempts": params.edge_attempts})
    return trace
