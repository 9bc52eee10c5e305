"""Seeded acceptance battery.

Every check draws from its own generator, derived from the master seed and
the check's number, so checks can run in any order or in parallel and the
report is reproducible byte for byte.  Reports carry counts and verdicts
only; wall-clock timings are returned separately.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import oracles
from .adversary import AdversaryParams, find_missing_edge
from .antichains import (BooleanFunction, OrientedEdgeFamily, biased_fourier_degree1,
                         boundary_prob, degree1_via_derivative, enumerate_antichains,
                         from_mask, is_u_edge_antichain, is_u_monotone, lym_check,
                         monotone_direction_weights, monotone_functions, sliced_edge_family,
                         sperner_check)
from .bang import BangInstance, bang_solve, bang_verify, exhaustive_search, flip_certificate
from .cube_core import (Hyperplane, HyperplaneFamily, covers_all, cover_to_slicing,
                        find_unsliced_edge, slices)
from .decompose import (DecompositionError, DecompositionParams, check_result, decompose,
                        result_violations)
from .product_measure import (ProductMeasure, anticoncentration_check, chain_step_weights,
                              chain_transition, conditional_point_prob, elem_sym, h_coeff,
                              random_rational_measure)


def check_rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(number)])


def _rat(rng, lo: int, hi: int, max_den: int = 9) -> Fraction:
    den = int(rng.integers(1, max_den + 1))
    return Fraction(int(rng.integers(lo * den, hi * den + 1)), den)


def _nonzero_rat(rng, bound: int = 5, max_den: int = 9) -> Fraction:
    while True:
        x = _rat(rng, -bound, bound, max_den)
        if x != 0:
            return x


def random_skew_plane(rng, n: int) -> Hyperplane:
    v = [_nonzero_rat(rng) for _ in range(n)]
    spread = sum(abs(c) for c in v)
    mu = Fraction(int(rng.integers(-8, 9)), 8) * spread / 2
    return Hyperplane(v, mu)


def near_axis_plane(rng, n: int, j: int) -> Hyperplane:
    """``x_j + eps <r, x> = 0`` with ``eps |r|_1 < 1``: slices every edge in direction ``j``."""
    v = [Fraction(int(rng.choice([-1, 1])), 4 * n * int(rng.integers(1, 4))) for _ in range(n)]
    v[j] = Fraction(1)
    return Hyperplane(v, 0)


def random_family(rng, n: int, k: int) -> HyperplaneFamily:
    return HyperplaneFamily([random_skew_plane(rng, n) for _ in range(k)], n)


# ---------------------------------------------------------------------------
# 1: slicing verifier against the per-edge recheck

def check_slicing_verifier(seed: int, families: int = 500) -> dict:
    rng = check_rng(seed, 1)
    disagree = slicing = with_gap = 0
    for t in range(families):
        n = int(rng.integers(1, 11))
        if t % 3 == 0 and n <= 8:
            js = list(range(n))
            if rng.random() < 0.5 and n > 1:
                js.pop(int(rng.integers(n)))
            H = HyperplaneFamily([near_axis_plane(rng, n, j) for j in js], n)
        else:
            H = random_family(rng, n, int(rng.integers(1, 9)))
        fast = find_unsliced_edge(H)
        slow = oracles.first_unsliced_edge(H)
        fast_t = None if fast is None else (fast.base, fast.direction)
        if fast_t != slow:
            disagree += 1
        if fast is None:
            slicing += 1
        else:
            with_gap += 1
            if any(slices(h, fast) for h in H):
                disagree += 1
    axis_ok = all(find_unsliced_edge(HyperplaneFamily.axis(n)) is None and
                  oracles.first_unsliced_edge(HyperplaneFamily.axis(n)) is None for n in range(1, 11))
    return {"families": families, "disagreements": disagree, "slicing_families": slicing,
            "families_with_unsliced_edge": with_gap, "axis_families_verify": axis_ok,
            "passed": disagree == 0 and axis_ok}


# ---------------------------------------------------------------------------
# 2: covers to slicings

def random_skew_cover(rng, n: int) -> HyperplaneFamily:
    """Add planes through uncovered vertices until every vertex is covered."""
    planes = []
    verts = list(itertools.product((-1, 1), repeat=n))
    covered = [False] * len(verts)
    while not all(covered):
        x = verts[next(i for i, c in enumerate(covered) if not c)]
        if rng.random() < 0.3:
            v = [Fraction(int(rng.choice([-1, 1]))) for _ in range(n)]
        else:
            v = [_nonzero_rat(rng, 3, 3) for _ in range(n)]
        mu = sum((c * a for c, a in zip(v, x)), Fraction(0))
        planes.append(Hyperplane(v, mu))
        for i, y in enumerate(verts):
            if not covered[i] and sum((c * a for c, a in zip(v, y)), Fraction(0)) == mu:
                covered[i] = True
    return HyperplaneFamily(planes, n)


def check_cover_to_slicing(seed: int, families: int = 100) -> dict:
    rng = check_rng(seed, 2)
    failures = 0
    sizes = []
    for _ in range(families):
        n = int(rng.integers(1, 7))
        H = random_skew_cover(rng, n)
        if not covers_all(H):
            failures += 1
            continue
        S = cover_to_slicing(H)
        sizes.append(len(H))
        if len(S) != 2 * len(H) or find_unsliced_edge(S) is not None:
            failures += 1
        elif oracles.first_unsliced_edge(S) is not None:
            failures += 1
    return {"families": families, "failures": failures, "max_cover_size": max(sizes, default=0),
            "passed": failures == 0}


# ---------------------------------------------------------------------------
# 3: Bang's lemma

def random_bang_instance(rng, k: int) -> BangInstance:
    M = [[Fraction(0)] * k for _ in range(k)]
    gram = rng.random() < 0.5
    if gram:
        # rounded Gram matrix of random unit vectors, rescaled to unit diagonal
        X = rng.standard_normal((k, max(1, k // 2 + int(rng.integers(0, 3)))))
        X /= np.linalg.norm(X, axis=1)[:, None]
        G = X @ X.T
    for i in range(k):
        M[i][i] = Fraction(1)
        for j in range(i):
            c = Fraction(round(float(G[i, j]) * 64), 64) if gram else _rat(rng, -1, 1, 6)
            M[i][j] = M[j][i] = c
    theta = _rat(rng, 0, 2, 8)
    gamma = [_rat(rng, -k, k, 8) for _ in range(k)]
    return BangInstance(M, gamma, theta)


def check_bang(seed: int, instances: int = 1000) -> dict:
    rng = check_rng(seed, 3)
    failures = mismatches = 0
    flips = []
    for t in range(instances):
        k = int(rng.integers(1, 11))
        inst = random_bang_instance(rng, k)
        sol = bang_solve(inst)
        _, ok = bang_verify(inst, sol.epsilon)
        cert = flip_certificate(inst, sol.epsilon)
        ok = ok and all(c >= inst.theta for c in cert)
        signs, good, _ = exhaustive_search(inst)
        witnesses = {tuple(int(c) for c in r) for r in signs[good]}
        if not ok or sol.epsilon not in witnesses:
            failures += 1
        if k <= 5:
            brute = set(oracles.bang_brute_force(inst.M, inst.gamma, inst.theta))
            if brute != witnesses:
                mismatches += 1
        flips.append(len(sol.flips))
    return {"instances": instances, "failures": failures, "exhaustive_mismatches": mismatches,
            "max_flips": max(flips), "passed": failures == 0 and mismatches == 0}


# ---------------------------------------------------------------------------
# 4: chain construction identities

def _subsets(n: int):
    for m in range(1 << n):
        yield frozenset(j for j in range(n) if (m >> j) & 1)


def check_chain_identities(seed: int, measures: int = 50, max_n: int = 8, marginal_n: int = 7) -> dict:
    rng = check_rng(seed, 4)
    up_fail = down_fail = def_fail = marg_fail = 0
    checked = 0
    for t in range(measures):
        n = int(rng.integers(1, max_n + 1))
        P = random_rational_measure(n, rng)
        q = P.q
        for s in _subsets(n):
            l = len(s)
            if l < n:
                hs = {j: h_coeff(P, s, j) for j in range(n) if j not in s}
                if sum((q[j] * h for j, h in hs.items()), Fraction(0)) != elem_sym(q, l + 1):
                    up_fail += 1
                if n <= 6 and t % 5 == 0:
                    for j, h in hs.items():
                        if h != oracles.h_by_definition(P, s, j):
                            def_fail += 1
            if l >= 1:
                tot = sum((h_coeff(P, s - {j}, j) for j in s), Fraction(0))
                if tot != elem_sym(q, l - 1):
                    down_fail += 1
            checked += 1
        if n <= marginal_n:
            dist = {frozenset(): Fraction(1)}
            for l in range(n):
                dist = chain_transition(P, dist)
                for s, pr in dist.items():
                    if pr != conditional_point_prob(P, s):
                        marg_fail += 1
                if sum(dist.values()) != 1 or len(dist) != math.comb(n, l + 1):
                    marg_fail += 1
        # exact weights at each step sum to one
        for s in list(_subsets(n))[:-1]:
            if len(s) < n and sum(chain_step_weights(P, s).values()) != 1:
                up_fail += 1
    return {"measures": measures, "subsets_checked": checked, "upward_failures": up_fail,
            "downward_failures": down_fail, "definition_mismatches": def_fail,
            "marginal_failures": marg_fail,
            "passed": up_fail == down_fail == def_fail == marg_fail == 0}


# ---------------------------------------------------------------------------
# 5: Sperner and LYM for product measures

def check_sperner_lym(seed: int, measures: int = 20, include_n5: bool = True) -> dict:
    rng = check_rng(seed, 5)
    out = {}
    ok = True
    for n in ((4, 5) if include_n5 else (4,)):
        acs = enumerate_antichains(n)
        nonempty = [a for a in acs if a]
        fails = 0
        for _ in range(measures):
            P = random_rational_measure(n, rng)
            for a in nonempty:
                if not lym_check(a, P).holds or not sperner_check(a, P).holds:
                    fails += 1
        U = ProductMeasure([Fraction(1, 2)] * n)
        equal = all(lym_check([m for m in range(1 << n) if bin(m).count("1") == l], U).total == 1
                    for l in range(n + 1))
        out[f"n{n}"] = {"antichains": len(acs), "nonempty": len(nonempty), "failures": fails,
                        "lym_equality_on_levels": equal}
        ok = ok and fails == 0 and equal
    out["expected_counts"] = {"n4": 168, "n5": 7581}
    counts_ok = out["n4"]["antichains"] == 168 and (not include_n5 or out["n5"]["antichains"] == 7581)
    out["passed"] = ok and counts_ok
    return out


# ---------------------------------------------------------------------------
# 6: anti-concentration of the level distribution

def check_anticoncentration(seed: int, measures: int = 1000, max_n: int = 16) -> dict:
    rng = check_rng(seed, 6)
    fails = disagree = 0
    worst = 0.0
    for _ in range(measures):
        n = int(rng.integers(1, max_n + 1))
        P = random_rational_measure(n, rng, max_den=int(rng.integers(2, 40)))
        ex = anticoncentration_check(P)
        fl = anticoncentration_check(P.as_float())
        if not ex.holds:
            fails += 1
        if ex.holds != fl.holds or abs(float(ex.max_level_prob) - fl.max_level_prob) > 1e-12:
            disagree += 1
        worst = max(worst, float(ex.max_level_prob) * ex.sigma / math.sqrt(math.pi))
    return {"measures": measures, "failures": fails, "exact_float_disagreements": disagree,
            "worst_ratio_to_bound": round(worst, 12), "passed": fails == 0 and disagree == 0}


# ---------------------------------------------------------------------------
# 7: boundary of oriented monotone functions and the degree-1 identity

def check_monotone_boundary(seed: int, measures: int = 20, fourier_functions: int = 10_000,
                            weighting: str = "squared") -> dict:
    rng = check_rng(seed, 7)
    n = 4
    funcs = monotone_functions(n)
    fails = oracle_mismatch = 0
    worst = 0.0
    for t in range(measures):
        P = random_rational_measure(n, rng)
        w = monotone_direction_weights(P, weighting)
        for fi, F in enumerate(funcs):
            u = [int(c) for c in rng.integers(0, 2, n)]
            um = sum(1 << j for j, c in enumerate(u) if c)
            f = BooleanFunction(n, F.table[np.arange(1 << n) ^ um])
            if not is_u_monotone(f, u):
                fails += 1
                continue
            r = boundary_prob(f, P, u, weighting=weighting)
            if not r.holds:
                fails += 1
            worst = max(worst, float(r.prob) * math.sqrt(float(P.sigma2)))
            if fi % 8 == 0 and oracles.boundary_by_definition(f, P, w) != r.prob:
                oracle_mismatch += 1
    max_dev = 0.0
    for _ in range(fourier_functions):
        m = int(rng.integers(1, 9))
        F = BooleanFunction(m, rng.integers(0, 2, 1 << m).astype(bool))
        Q = ProductMeasure([float(c) for c in rng.uniform(0.02, 0.98, m)])
        j = int(rng.integers(m))
        max_dev = max(max_dev, abs(biased_fourier_degree1(F, Q, j) - degree1_via_derivative(F, Q, j)))
    fourier_ok = max_dev <= 1e-12
    return {"monotone_functions": len(funcs), "measures": measures, "weighting": weighting,
            "failures": fails, "oracle_mismatches": oracle_mismatch,
            "worst_ratio_to_bound": round(worst, 12), "fourier_functions": fourier_functions,
            "fourier_max_deviation_below_1e-12": fourier_ok,
            "passed": fails == 0 and oracle_mismatch == 0 and fourier_ok and len(funcs) == 168}


# ---------------------------------------------------------------------------
# 8: sliced edges form antichains; predicate against chain enumeration

def check_edge_antichains(seed: int, planes: int = 200, max_n: int = 10, exhaustive_n: int = 4) -> dict:
    rng = check_rng(seed, 8)
    fails = chain_mismatch = 0
    for _ in range(planes):
        n = int(rng.integers(1, max_n + 1))
        A = sliced_edge_family(random_skew_plane(rng, n))
        if not is_u_edge_antichain(A):
            fails += 1
        if n <= 6 and is_u_edge_antichain(A) != oracles.edge_antichain_by_chains(A):
            chain_mismatch += 1
    pairs = 0
    for n in range(1, exhaustive_n + 1):
        edges = [(x, j) for j in range(n) for x in range(1 << n) if not (x >> j) & 1]
        for um in range(1 << n):
            u = [(um >> j) & 1 for j in range(n)]
            for e1, e2 in itertools.combinations_with_replacement(edges, 2):
                fam = OrientedEdgeFamily(n, u, {e1, e2})
                pairs += 1
                if is_u_edge_antichain(fam) != oracles.edge_antichain_by_chains(fam):
                    chain_mismatch += 1
    return {"planes": planes, "failures": fails, "edge_pairs_compared": pairs,
            "chain_mismatches": chain_mismatch, "passed": fails == 0 and chain_mismatch == 0}


# ---------------------------------------------------------------------------
# 9: matrix decomposition

def random_matrix(rng) -> np.ndarray:
    """Rows of three kinds: Gaussian, log-uniform magnitudes, and planted blocks
    whose norms fall by a factor 1000 from one block to the next."""
    n = int(rng.integers(2, 257))
    kmax = max(1, int(n ** 0.51))
    k = int(rng.integers(1, min(16, kmax) + 1))
    kind = int(rng.integers(3))
    if kind == 0:
        V = rng.standard_normal((k, n))
    elif kind == 1:
        V = rng.standard_normal((k, n)) * np.exp(rng.uniform(-14, 0, (k, n)))
    else:
        V = rng.standard_normal((k, n)) * 1e-9
        for i in range(k):
            cols = rng.permutation(n)
            blocks = np.array_split(cols[: int(rng.integers(1, n + 1))], int(rng.integers(1, 6)))
            for b, c in enumerate(blocks):
                V[i, c] += rng.choice([-1, 1], len(c)) * 1e-3 ** b
    V[V == 0] = 1e-300
    return V


def check_decomposition(seed: int, matrices: int = 500) -> dict:
    rng = check_rng(seed, 9)
    out = {}
    ok = True
    mats = [random_matrix(rng) for _ in range(matrices)]
    for name, params in (("paper", DecompositionParams()), ("desk", DecompositionParams.desk())):
        fails = guard = exhausted = removed_rows = drops = half = 0
        first = None
        for V in mats:
            try:
                r = decompose(V, params)
            except DecompositionError:
                guard += 1
                continue
            bad = result_violations(V, r, params)
            if bad:
                fails += 1
                first = first or bad[0]
            exhausted += r.exhausted
            removed_rows += len(r.removed_rows)
            drops += sum(r.drops)
            half += r.n_prime >= V.shape[1] / 2
        out[name] = {"failures": fails, "guard_trips": guard, "exhausted": exhausted,
                     "removed_rows": removed_rows, "drops": drops, "half_columns_kept": half,
                     "first_violation": first}
        ok = ok and fails == 0 and guard == 0
    out["matrices"] = matrices
    out["passed"] = ok
    return out


# ---------------------------------------------------------------------------
# 10: missing-edge pipeline soundness

def adversary_family(rng) -> HyperplaneFamily:
    n = int(rng.integers(2, 15))
    k = int(rng.integers(1, 5))
    planes = []
    for _ in range(k):
        v = [int(c) or 1 for c in rng.integers(-9, 10, n)]
        mu = Fraction(int(rng.integers(-2 * n, 2 * n + 1)), 2)
        planes.append(Hyperplane(v, mu))
    return HyperplaneFamily(planes, n)


def check_adversary(seed: int, seeds: int = 100) -> dict:
    unsound = edges = failures = misses = fallbacks = 0
    stages: dict[str, int] = {}
    for s in range(seeds):
        rng = check_rng(seed, 1000 + s)
        H = adversary_family(rng)
        tr = find_missing_edge(H, AdversaryParams(), rng)
        fallbacks += tr.first_failure is not None
        if tr.success:
            edges += 1
            if any(slices(h, tr.outcome) for h in H):
                unsound += 1
        else:
            failures += 1
            stages[tr.outcome.stage] = stages.get(tr.outcome.stage, 0) + 1
            if find_unsliced_edge(H) is not None:
                misses += 1
    return {"seeds": seeds, "edges": edges, "unsound": unsound, "failures": failures,
            "failure_stages": dict(sorted(stages.items())), "completeness_misses": misses,
            "fallback_runs": fallbacks, "passed": unsound == 0}


CHECKS = {
    1: ("slicing verifier vs per-edge oracle", check_slicing_verifier),
    2: ("cover to slicing", check_cover_to_slicing),
    3: ("sign vectors for the plank bound", check_bang),
    4: ("chain construction identities", check_chain_identities),
    5: ("Sperner and LYM for product measures", check_sperner_lym),
    6: ("anti-concentration of levels", check_anticoncentration),
    7: ("monotone boundary bound and degree-1 identity", check_monotone_boundary),
    8: ("sliced edges are antichains", check_edge_antichains),
    9: ("matrix decomposition", check_decomposition),
    10: ("missing-edge pipeline soundness", check_adversary),
}


def _run_one(args):
    number, seed = args
    t0 = time.perf_counter()
    result = CHECKS[number][1](seed)
    return number, result, time.perf_counter() - t0


def run_suite(seed: int = 42, only=None, workers: int = 1) -> tuple[dict, dict]:
    """Run the battery; returns ``(report, timings)``."""
    numbers = sorted(CHECKS) if only is None else sorted(set(only))
    jobs = [(k, seed) for k in numbers]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    criteria = []
    timings = {}
    for number, result, dt in results:
        criteria.append({"id": number, "name": CHECKS[number][0], **result})
        timings[str(number)] = dt
    report = {"seed": seed, "criteria": criteria, "passed": all(c["passed"] for c in criteria)}
    return report, timings
