import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from cubeslice import oracles
from cubeslice.product_measure import (PI_LOWER, PI_UPPER, MaximalChain, MeasureError, ProductMeasure,
                                       anticoncentration_check, chain_step, chain_step_weights,
                                       chain_transition, conditional_point_prob, elem_sym, h_coeff,
                                       level_distribution, max_level_prob, random_rational_measure,
                                       sample_chain)

from .strategies import measures

F = Fraction


def subsets(n, size=None):
    sizes = range(n + 1) if size is None else [size]
    for l in sizes:
        for t in itertools.combinations(range(n), l):
            yield frozenset(t)


def test_measure_validation():
    with pytest.raises(MeasureError):
        ProductMeasure([F(1, 2), 1])
    with pytest.raises(MeasureError):
        ProductMeasure([0.0])
    with pytest.raises(MeasureError):
        ProductMeasure([])
    P = ProductMeasure(["1/3", F(1, 2)])
    assert P.exact
    assert P.q == (F(1, 2), F(1))
    assert P.sigma2 == F(2, 9) + F(1, 4)


# elementary symmetric polynomials


def test_elem_sym_examples():
    assert elem_sym([1, 1, 1], 2) == 3
    assert elem_sym([F(1), F(2), F(3)], 2) == 11
    assert elem_sym([F(5), F(7)], 0) == 1
    with pytest.raises(MeasureError):
        elem_sym([1, 2], 3)


@given(st.lists(st.fractions(min_value=F(1, 10), max_value=10, max_denominator=10), max_size=8),
       st.data())
def test_elem_sym_matches_definition(q, data):
    l = data.draw(st.integers(0, len(q)))
    q = [F(x) for x in q]
    assert elem_sym(q, l) == oracles.elem_sym_by_definition(q, l)


# level distribution


def test_level_distribution_uniform():
    assert level_distribution(ProductMeasure([F(1, 2)] * 2)) == [F(1, 4), F(1, 2), F(1, 4)]


def test_level_distribution_biased():
    assert level_distribution(ProductMeasure([F(1, 3), F(1, 2)])) == [F(1, 3), F(1, 2), F(1, 6)]


@given(measures(max_n=16))
def test_level_distribution_sums_to_one(P):
    assert sum(level_distribution(P)) == 1


@given(measures(max_n=8))
def test_level_distribution_matches_enumeration(P):
    assert level_distribution(P) == oracles.level_probs(P)


def test_level_distribution_float_path():
    P = ProductMeasure([0.3, 0.9, 0.01])
    exact = level_distribution(ProductMeasure([F(3, 10), F(9, 10), F(1, 100)]))
    assert np.allclose(level_distribution(P), [float(x) for x in exact], rtol=1e-12)


# conditional point probabilities


def test_conditional_uniform():
    P = ProductMeasure([F(1, 2)] * 5)
    for s in subsets(5, 2):
        assert conditional_point_prob(P, s) == F(1, 10)


def test_conditional_example():
    # 0-based index 1 is the second coordinate
    assert conditional_point_prob(ProductMeasure([F(1, 3), F(1, 2)]), {1}) == F(2, 3)


@given(measures(max_n=7))
def test_conditional_normalized_and_matches_definition(P):
    for l in range(P.n + 1):
        vals = [conditional_point_prob(P, s) for s in subsets(P.n, l)]
        assert sum(vals) == 1
    for s in itertools.islice(subsets(P.n), 20):
        assert conditional_point_prob(P, s) == oracles.conditional_prob(P, s)


# chain coefficients


def test_h_level_zero():
    P = ProductMeasure([F(1, 3), F(2, 5), F(1, 7)])
    for j in range(3):
        assert h_coeff(P, set(), j) == 1


def test_h_uniform_example():
    # s = {first}, j = second; t = {first} contributes 1, t = {third} contributes 1/2
    assert h_coeff(ProductMeasure([F(1, 2)] * 3), {0}, 1) == F(3, 2)


def test_h_rejects_j_in_s():
    with pytest.raises(MeasureError):
        h_coeff(ProductMeasure([F(1, 2)] * 3), {0}, 0)


@given(measures(max_n=7))
def test_h_matches_definition(P):
    for s in subsets(P.n):
        for j in range(P.n):
            if j not in s:
                assert h_coeff(P, s, j) == oracles.h_by_definition(P, s, j)


@given(measures(max_n=8))
def test_forward_and_backward_identities(P):
    q = P.q
    for s in subsets(P.n):
        l = len(s)
        if l < P.n:
            fwd = sum(q[j] * h_coeff(P, s, j) for j in range(P.n) if j not in s)
            assert fwd == elem_sym(q, l + 1)
            assert isinstance(fwd, Fraction)
            w = chain_step_weights(P, s)
            assert sum(w.values()) == 1
            for j, x in w.items():
                assert x == q[j] * h_coeff(P, s, j) / elem_sym(q, l + 1)
        if l >= 1:
            bwd = sum(h_coeff(P, s - {j}, j) for j in s)
            assert bwd == elem_sym(q, l - 1)


def test_uniform_step_is_uniform():
    P = ProductMeasure([F(1, 2)] * 5)
    assert chain_step_weights(P, {1, 3}) == {0: F(1, 3), 2: F(1, 3), 4: F(1, 3)}


def test_step_rejects_full_set(rng):
    P = ProductMeasure([F(1, 2)] * 2)
    with pytest.raises(MeasureError):
        chain_step(P, {0, 1}, rng)


@given(measures(max_n=7))
def test_exact_chain_marginals(P):
    dist = {frozenset(): F(1)}
    for l in range(1, P.n + 1):
        dist = chain_transition(P, dist)
        assert set(dist) == set(subsets(P.n, l))
        for s, pr in dist.items():
            assert pr == conditional_point_prob(P, s)


def test_uniform_chains_equally_likely():
    P = ProductMeasure([F(1, 2)] * 3)
    for order in itertools.permutations(range(3)):
        pr = F(1)
        s = frozenset()
        for j in order:
            pr *= chain_step_weights(P, s)[j]
            s = s | {j}
        assert pr == F(1, 6)


def test_float_step_weights_agree_with_exact():
    P = ProductMeasure([F(1, 3), F(1, 2), F(3, 4), F(1, 5), F(2, 3)])
    Pf = P.as_float()
    for s in subsets(5):
        if len(s) < 5:
            e = chain_step_weights(P, s)
            f = chain_step_weights(Pf, s)
            assert set(e) == set(f)
            for j in e:
                assert f[j] == pytest.approx(float(e[j]), rel=1e-9)


def test_sampled_chains_are_valid_and_seeded():
    P = ProductMeasure([F(1, 3), F(1, 2), F(3, 4)])
    a = [sample_chain(P, np.random.default_rng(5)) for _ in range(3)]
    b = [sample_chain(P, np.random.default_rng(5)) for _ in range(3)]
    assert a == b
    assert all(isinstance(c, MaximalChain) and c.is_valid(3) for c in a)
    c = sample_chain(P, np.random.default_rng(5), debug=True)
    assert c == a[0]


def test_empirical_level_marginals():
    rng = np.random.default_rng(11)
    P = random_rational_measure(6, rng)
    trials = 100_000
    counts = [dict() for _ in range(7)]
    for _ in range(trials):
        for l, s in enumerate(sample_chain(P, rng).sets):
            counts[l][s] = counts[l].get(s, 0) + 1
    for l in range(7):
        tv = 0.5 * sum(abs(counts[l].get(s, 0) / trials - float(conditional_point_prob(P, s)))
                       for s in subsets(6, l))
        assert tv <= 0.02


def test_large_n_sampling_uses_floats():
    P = ProductMeasure([F(1, 3)] * 30)
    w = chain_step_weights(P, {0, 1})
    assert all(isinstance(x, float) for x in w.values())
    assert sum(w.values()) == pytest.approx(1, rel=1e-12)
    assert sample_chain(P, np.random.default_rng(0)).is_valid(30)


# anti-concentration


def test_pi_enclosure():
    pi50 = F("3.14159265358979323846264338327950288419716939937510")
    assert PI_LOWER < pi50 < PI_UPPER
    assert PI_UPPER - PI_LOWER == F(1, 10**37)


def test_gaussian_integral_constant():
    # the bound's constant is the integral of exp(-sigma^2 t^2) times sigma
    for sigma in (0.5, 1.0, 3.0):
        val, _ = integrate.quad(lambda t: math.exp(-(sigma * t) ** 2), -np.inf, np.inf)
        assert val * sigma == pytest.approx(math.sqrt(math.pi), rel=1e-10)


def test_anticoncentration_uniform_n4():
    r = anticoncentration_check(ProductMeasure([F(1, 2)] * 4))
    assert r.max_level_prob == F(3, 8)
    assert r.sigma == 1
    assert r.bound == pytest.approx(math.sqrt(math.pi))
    assert r.holds


def test_anticoncentration_n1():
    r = anticoncentration_check(ProductMeasure([F(1, 2)]))
    assert r.max_level_prob == F(1, 2)
    assert r.sigma == 0.5
    assert r.bound == pytest.approx(3.5449, abs=1e-4)
    assert r.holds


@given(measures(max_n=16, max_den=20))
def test_anticoncentration_always_holds(P):
    r = anticoncentration_check(P)
    assert r.holds
    assert r.max_level_prob == max_level_prob(P)
    assert float(r.max_level_prob) <= r.bound


def test_anticoncentration_float_measure():
    r = anticoncentration_check(ProductMeasure([0.01] * 10 + [0.5]))
    assert r.holds
