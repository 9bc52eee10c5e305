"""Split a matrix of skew unit rows into light columns and many-scale rows.

Heavy columns are moved out one at a time.  Row norms are renormalized
lazily: only when the mass a row keeps inside the retained block falls below
``tau`` does the row record a drop and get rescaled to unit mass.  Each drop
peels off a block holding more than ``1 - tau`` of the mass against less than
``tau`` left behind, so with ``sqrt((1 - tau)/tau) = 4 C0^2`` every drop adds a
scale.  A row dropped more than ``S`` times leaves the retained block, and
its drop history is its scale certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scales import C0, verify_scale_partition

NORM_TOL = 1e-12
# tolerance on the scale-ratio comparison of floating point certificates
CERT_RTOL = 1e-9


class DecompositionError(RuntimeError):
    pass


def tau_for(c0: float = C0) -> float:
    """Solve ``sqrt((1 - tau) / tau) = 4 c0^2``."""
    r = 4 * c0 * c0
    return 1.0 / (1.0 + r * r)


@dataclass(frozen=True)
class DecompositionParams:
    """Thresholds as powers of ``n`` unless given explicitly.

    Defaults follow the asymptotic analysis: heavy columns carry mass at
    least ``n^-0.488``, retained columns end with mass below ``n^-0.487``,
    and rows may drop ``S = floor(n^0.001)`` times (so ``S = 1`` at any
    practical size).
    """

    mass_exponent: float = 0.488
    column_exponent: float = 0.487
    drop_exponent: float = 0.001
    mass_threshold: float | None = None
    column_bound: float | None = None
    S: int | None = None
    c0: float = C0

    def resolve(self, n: int) -> "Resolved":
        thr = self.mass_threshold if self.mass_threshold is not None else n ** -self.mass_exponent
        bound = self.column_bound if self.column_bound is not None else n ** -self.column_exponent
        S = self.S if self.S is not None else max(1, math.floor(n ** self.drop_exponent))
        tau = tau_for(self.c0)
        if thr <= 0 or bound <= 0 or S < 1 or not 0 < tau < 1:
            raise ValueError("invalid decomposition parameters")
        return Resolved(thr, bound, int(S), tau, 4 * self.c0 * self.c0)

    @classmethod
    def desk(cls) -> "DecompositionParams":
        """Exaggerated thresholds so that removals and drops happen at small n."""
        return cls(mass_exponent=0.35, column_exponent=0.3, S=2)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in
                ("mass_exponent", "column_exponent", "drop_exponent", "mass_threshold",
                 "column_bound", "S", "c0")}


@dataclass(frozen=True)
class Resolved:
    mass_threshold: float
    column_bound: float
    S: int
    tau: float
    ratio: float


@dataclass
class DecompositionResult:
    row_order: list[int]
    col_order: list[int]
    k_prime: int
    n_prime: int
    V_prime: np.ndarray
    scale_certificates: dict[int, list[list[int]]]
    drops: list[int]
    removed_columns: list[int] = field(default_factory=list)
    steps: list[dict] = field(default_factory=list)

    @property
    def retained_rows(self) -> list[int]:
        return self.row_order[: self.k_prime]

    @property
    def removed_rows(self) -> list[int]:
        return self.row_order[self.k_prime:]

    @property
    def retained_cols(self) -> list[int]:
        return self.col_order[: self.n_prime]

    @property
    def all_rows_removed(self) -> bool:
        return self.k_prime == 0

    @property
    def exhausted(self) -> bool:
        """Every column was removed; removed rows may end with an empty residual."""
        return self.n_prime == 0

    def to_json(self) -> dict:
        return {
            "row_order": self.row_order,
            "col_order": self.col_order,
            "k_prime": self.k_prime,
            "n_prime": self.n_prime,
            "all_rows_removed": self.all_rows_removed,
            "exhausted": self.exhausted,
            "V_prime": self.V_prime.tolist(),
            "drops": self.drops,
            "scale_certificates": {str(i): b for i, b in sorted(self.scale_certificates.items())},
            "removed_columns": self.removed_columns,
            "steps": self.steps,
        }


def _unit_rows(V) -> np.ndarray:
    V = np.array(V, dtype=np.float64)
    if V.ndim != 2:
        raise ValueError("V must be a 2-d matrix; pass shape (0, n) for no rows")
    norms = np.linalg.norm(V, axis=1)
    if np.any(norms == 0):
        raise ValueError("rows of V must be nonzero")
    return V / norms[:, None]


def decompose(V, params: DecompositionParams | None = None) -> DecompositionResult:
    """Run the column-removal loop on the rows of ``V`` (normalized first).

    A column is removed when its mass under the lazy row normalization
    reaches the mass threshold, or when its mass under full renormalization
    reaches the column bound; the first criterion takes priority and the
    heaviest column goes first, ties to the lowest index.
    """
    params = params or DecompositionParams()
    V = _unit_rows(V)
    k, n = V.shape
    R = params.resolve(n)

    active_rows = list(range(k))
    removed_rows: list[int] = []
    col_alive = np.ones(n, dtype=bool)
    removed_cols: list[int] = []
    scale = np.ones(k)
    drops = [0] * k
    pending: list[list[int]] = [[] for _ in range(k)]
    history: list[list[list[int]]] = [[] for _ in range(k)]
    certificates: dict[int, list[list[int]]] = {}
    steps: list[dict] = []
    sq = V * V

    iterations = 0
    while active_rows and col_alive.any():
        cols = np.flatnonzero(col_alive)
        W = sq[np.ix_(active_rows, cols)] * (scale[active_rows] ** 2)[:, None]
        lazy = W.sum(axis=0)
        rowmass = W.sum(axis=1)
        full = (W / rowmass[:, None]).sum(axis=0)
        if np.any(lazy >= R.mass_threshold):
            pick = int(np.argmax(np.where(lazy >= R.mass_threshold, lazy, -1.0)))
            reason = "mass"
        elif np.any(full >= R.column_bound):
            pick = int(np.argmax(np.where(full >= R.column_bound, full, -1.0)))
            reason = "renormalized"
        else:
            break
        iterations += 1
        if iterations > n:
            raise DecompositionError("column removal exceeded n iterations")
        j = int(cols[pick])
        col_alive[j] = False
        removed_cols.append(j)
        step = {"column": j, "mass": float(lazy[pick]), "reason": reason, "drops": [], "removed_rows": []}
        for i in list(active_rows):
            pending[i].append(j)
            kept = float(sq[i, col_alive].sum())
            if kept * scale[i] ** 2 < R.tau:
                drops[i] += 1
                history[i].append(pending[i])
                pending[i] = []
                step["drops"].append(i)
                if kept > 0:
                    scale[i] = 1.0 / math.sqrt(kept)
                if drops[i] > R.S or kept == 0:
                    active_rows.remove(i)
                    removed_rows.append(i)
                    step["removed_rows"].append(i)
                    used = {c for b in history[i] for c in b}
                    residual = [c for c in range(n) if c not in used]
                    certificates[i] = [sorted(b) for b in history[i]] + [residual]
        steps.append(step)

    retained_cols = [int(c) for c in np.flatnonzero(col_alive)]
    Vp = V[np.ix_(active_rows, retained_cols)] if active_rows else np.zeros((0, len(retained_cols)))
    if Vp.size:
        Vp = Vp / np.linalg.norm(Vp, axis=1)[:, None]
    return DecompositionResult(
        row_order=active_rows + removed_rows,
        col_order=retained_cols + removed_cols,
        k_prime=len(active_rows),
        n_prime=len(retained_cols),
        V_prime=Vp,
        scale_certificates=certificates,
        drops=drops,
        removed_columns=removed_cols,
        steps=steps,
    )


def result_violations(V, result: DecompositionResult,
                      params: DecompositionParams | None = None) -> list[str]:
    """Re-derive every claimed property of ``result`` from ``V``; list what fails."""
    params = params or DecompositionParams()
    V = _unit_rows(V)
    k, n = V.shape
    R = params.resolve(n)
    bad = []
    if sorted(result.row_order) != list(range(k)):
        bad.append("row_order is not a permutation")
    if sorted(result.col_order) != list(range(n)):
        bad.append("col_order is not a permutation")
    if not (0 <= result.k_prime <= k and 0 <= result.n_prime <= n):
        bad.append("split points out of range")
    if bad:
        return bad
    rows = result.row_order[: result.k_prime]
    cols = result.col_order[: result.n_prime]
    Vp = np.asarray(result.V_prime, dtype=np.float64)
    if Vp.shape != (len(rows), len(cols)):
        return bad + [f"V_prime has shape {Vp.shape}, expected {(len(rows), len(cols))}"]
    if rows and cols:
        sub = V[np.ix_(rows, cols)]
        norms = np.linalg.norm(sub, axis=1)
        if np.any(norms == 0):
            bad.append("a retained row vanishes on the retained columns")
        else:
            if np.max(np.abs(Vp - sub / norms[:, None])) > NORM_TOL:
                bad.append("V_prime is not the renormalized restriction of V")
        if np.max(np.abs(np.linalg.norm(Vp, axis=1) - 1)) > NORM_TOL:
            bad.append("V_prime rows are not unit norm")
        mass = (Vp * Vp).sum(axis=0)
        if np.any(mass >= R.column_bound):
            bad.append(f"column mass {mass.max():.3g} >= bound {R.column_bound:.3g}")
        l1 = np.abs(Vp).sum(axis=0)
        if np.any(l1 >= math.sqrt(k * R.column_bound)):
            bad.append("column l1 norm exceeds sqrt(k * bound)")
    elif rows and not cols:
        bad.append("rows retained with no retained columns")
    retained = set(cols)
    for i in result.row_order[result.k_prime:]:
        cert = result.scale_certificates.get(i)
        if cert is None:
            bad.append(f"removed row {i} has no certificate")
            continue
        if len(cert) < R.S:
            bad.append(f"row {i}: certificate has {len(cert)} < S={R.S} blocks")
        try:
            ok = verify_scale_partition(V[i], cert, ratio=R.ratio, rtol=CERT_RTOL)
        except ValueError as exc:
            bad.append(f"row {i}: malformed certificate ({exc})")
            continue
        if not ok:
            bad.append(f"row {i}: scale ratios fail")
        if not retained <= set(cert[-1]):
            bad.append(f"row {i}: smallest scale misses retained columns")
    return bad


def check_result(V, result: DecompositionResult, params: DecompositionParams | None = None) -> bool:
    return not result_violations(V, result, params)


def light_column_margin(result: DecompositionResult) -> dict:
    """Size of the retained block against the ``n/2`` target of the asymptotic analysis."""
    n = len(result.col_order)
    return {"n": n, "n_prime": result.n_prime, "removed_columns": n - result.n_prime,
            "half_n_met": result.n_prime >= n / 2}
