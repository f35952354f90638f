import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_wpp, discrete_ot_wpp
from kacsim.errors import DomainError
from kacsim.initial import InitialDatum
from kacsim.limit_laws import OULimitLaw
from kacsim.metrics import (
    EmpiricalMeasure, QuantileFunction, step_quantile, wasserstein_empirical, wasserstein_pp_empirical,
    wasserstein_pp_vs_quantile, wasserstein_vs_quantile,
)
from kacsim.mixture import normal_quantile

samples = st.lists(st.integers(-5000, 5000).map(lambda k: k / 1000), min_size=1, max_size=8)
orders = st.sampled_from([1.0, 1.5, 2.0, 3.0])


def test_empirical_examples():
    assert wasserstein_empirical([0.3, -1, 2], [2, 0.3, -1]) == 0.0
    assert wasserstein_empirical([0, 1], [0, 2]) == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert wasserstein_empirical([0], [-1, 1]) == 1.0
    assert wasserstein_pp_empirical([0], [-1, 1]) == discrete_ot_wpp([0], [1], [-1, 1], [0.5, 0.5], 2)


def test_vs_quantile_examples():
    rad = step_quantile([-1.0, 1.0])
    assert wasserstein_vs_quantile([-1, 1], rad) == 0.0
    assert wasserstein_vs_quantile([0, 0], rad) == 1.0
    assert wasserstein_vs_quantile([0], normal_quantile()) == pytest.approx(1.0, rel=1e-12)
    # Same value through quadrature when the closed form is withheld.
    q = normal_quantile()
    q.sq_segment = None
    assert wasserstein_vs_quantile([0], q) == pytest.approx(1.0, rel=1e-7)


def test_p_below_one_is_rejected():
    with pytest.raises(DomainError):
        wasserstein_empirical([0], [1], p=0.5)
    with pytest.raises(DomainError):
        wasserstein_vs_quantile([0], normal_quantile(), p=0.9)
    with pytest.raises(DomainError):
        EmpiricalMeasure([])


@pytest.mark.parametrize("p", [1.0, 2.0, 1.5])
def test_sorted_matching_equals_brute_force(p):
    rng = np.random.default_rng(int(p * 10))
    for _ in range(200):
        n = int(rng.integers(1, 7))
        x = rng.integers(-2, 3, n).astype(float)
        y = rng.integers(-2, 3, n).astype(float)
        assert wasserstein_pp_empirical(x, y, p) == brute_force_wpp(list(x), list(y), p)


@settings(max_examples=500, deadline=None)
@given(samples, samples, samples, orders)
def test_metric_axioms(x, y, z, p):
    dxy = wasserstein_empirical(x, y, p)
    assert dxy == pytest.approx(wasserstein_empirical(y, x, p), rel=1e-12, abs=1e-12)
    assert wasserstein_empirical(x, x, p) == 0.0
    assert wasserstein_empirical(x, x + x, p) == 0.0
    if len(x) == len(y):
        assert (dxy == 0) == (sorted(x) == sorted(y))
    assert dxy <= wasserstein_empirical(x, z, p) + wasserstein_empirical(z, y, p) + 1e-9


@settings(max_examples=300, deadline=None)
@given(samples, samples, st.floats(-4, 4).filter(lambda a: abs(a) > 1e-3), orders)
def test_scaling(x, y, a, p):
    base = wasserstein_empirical(x, y, p)
    scaled = wasserstein_empirical(np.multiply(a, x), np.multiply(a, y), p)
    assert scaled == pytest.approx(abs(a) * base, rel=1e-9, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(samples, samples)
def test_w1_below_w2(x, y):
    assert wasserstein_empirical(x, y, 1.0) <= wasserstein_empirical(x, y, 2.0) + 1e-12


@settings(max_examples=100, deadline=None)
@given(samples, samples, orders)
def test_step_quantile_consistency(x, y, p):
    got = wasserstein_pp_vs_quantile(x, step_quantile(y), p, tail_cut=0.0)
    want = wasserstein_pp_empirical(x, y, p)
    assert got == pytest.approx(want, rel=1e-8, abs=1e-12)


def test_unequal_sizes_match_discrete_transport():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.normal(size=int(rng.integers(1, 6)))
        y = rng.normal(size=int(rng.integers(1, 6)))
        want = discrete_ot_wpp(list(x), [1 / x.size] * x.size, list(y), [1 / y.size] * y.size, 2)
        assert wasserstein_pp_empirical(x, y) == pytest.approx(float(want), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("t", [0.01, 0.3, 2.0])
def test_closed_form_w2_matches_quadrature(t):
    law = OULimitLaw(InitialDatum.discrete([-1.0, 0.5, 2.0], [0.2, 0.5, 0.3]), t)
    x = law.sample(np.random.default_rng(1), 300)
    closed = wasserstein_pp_vs_quantile(x, law.quantile_function())
    q = law.quantile_function()
    q.sq_segment = None
    quad = wasserstein_pp_vs_quantile(x, q)
    assert closed == pytest.approx(quad, rel=1e-7)
    assert wasserstein_pp_vs_quantile(x, law.quantile_function(), p=1.5) > 0


def test_quantile_function_without_extras_integrates_in_alpha():
    q = QuantileFunction(lambda a: np.asarray(a) * 2.0)
    # x = {0}: int_0^1 (2a)^2 da = 4/3.
    assert wasserstein_pp_vs_quantile([0.0], q, tail_cut=0.0) == pytest.approx(4 / 3, rel=1e-10)
