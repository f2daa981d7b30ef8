import math

import numpy as np
import pytest

from gibbs_tv.counting import (
    CounterConfig,
    approx_count,
    conditional_count,
    counts_exactly,
    empirical_second_moment,
    num_levels,
    ratio_estimate,
    _level_model,
)
from gibbs_tv.errors import InputError, MustPreprocessError
from gibbs_tv.exact import distribution, exact_partition
from gibbs_tv.graph import Graph, path_graph, random_graph
from gibbs_tv.models import HardcoreModel, IsingModel
from gibbs_tv.sampling import SamplerConfig

EXACT_SAMPLER = SamplerConfig(exact_fallback_cap=20)


def test_trivial_models_counted_exactly(rng):
    zero = HardcoreModel(path_graph(3), np.zeros(3))
    assert approx_count(zero, 0.1, rng=rng) == 0.0
    free = IsingModel(Graph(3), {}, np.zeros(3))
    est = approx_count(free, 0.1, CounterConfig(boost_repeats=1), rng, EXACT_SAMPLER)
    assert math.exp(est) == pytest.approx(8.0, rel=1e-12)


def test_exact_shortcut():
    model = HardcoreModel(path_graph(4), np.full(4, 0.9))
    cfg = CounterConfig(exact_fallback_cap=10)
    assert counts_exactly(model, cfg)
    got = approx_count(model, 0.3, cfg, np.random.default_rng(0))
    assert got == exact_partition(model)


def test_approx_count_p3(rng):
    model = HardcoreModel(path_graph(3), np.ones(3))
    cfg = CounterConfig(boost_repeats=3)
    hits = 0
    for child in rng.spawn(20):
        z = math.exp(approx_count(model, 0.1, cfg, child, EXACT_SAMPLER))
        hits += 4.5 <= z <= 5.5
    assert hits >= 18


def test_approx_count_rejects_bad_input(rng):
    model = IsingModel(Graph(1), {}, [math.inf])
    with pytest.raises(MustPreprocessError):
        approx_count(model, 0.1, rng=rng)
    with pytest.raises(InputError):
        approx_count(HardcoreModel(Graph(1), [1.0]), 1.5, rng=rng)


def test_conditional_count(rng):
    edge = HardcoreModel(Graph(2, [(0, 1)]), [1.0, 1.0])
    cfg = CounterConfig(boost_repeats=1)
    est = conditional_count(edge, {0: 1}, 0.1, cfg, rng, EXACT_SAMPLER)
    assert math.exp(est) == pytest.approx(1.0, rel=1e-9)
    # fully pinned: exact log-weight, no sampling at all
    full = conditional_count(edge, {0: 1, 1: -1}, 0.1, cfg, rng, EXACT_SAMPLER)
    assert full == pytest.approx(0.0)
    # infeasible: deterministic -inf
    assert conditional_count(edge, {0: 1, 1: 1}, 0.1, cfg, rng) == -math.inf
    # empty pinning matches plain counting
    got = conditional_count(edge, {}, 0.1, CounterConfig(exact_fallback_cap=5),
                            rng, EXACT_SAMPLER)
    assert got == exact_partition(edge)


def test_telescoping_identity_exact_expectations(rng):
    """Product of exact per-level reverse-ratio expectations telescopes to Z."""
    for model in [
        HardcoreModel(random_graph(6, 0.4, rng), rng.uniform(0.2, 1.5, 6)),
        IsingModel(
            random_graph(5, 0.4, rng),
            {},
            rng.uniform(-0.8, 0.8, 5),
        ),
    ]:
        cfg = CounterConfig()
        ell = num_levels(model, cfg)
        log_base = 0.0 if model.kind == "hardcore" else model.n * math.log(2)
        log_z = log_base
        for i in range(1, ell + 1):
            level = _level_model(model, i / ell)
            prev = _level_model(model, (i - 1) / ell)
            dist = distribution(level)
            lw_prev = prev.log_weight_batch(dist.configs)
            lw_cur = level.log_weight_batch(dist.configs)
            ratios = np.where(
                np.isneginf(lw_prev), 0.0, np.exp(lw_prev - lw_cur)
            )
            expectation = float(np.exp(dist.log_probs) @ ratios)
            log_z -= math.log(expectation)
        assert log_z == pytest.approx(exact_partition(model), abs=1e-10)


def test_ratio_estimate_identical_pair_is_exactly_one(rng):
    model = HardcoreModel(path_graph(3), np.ones(3))
    run = ratio_estimate(model, model, 0.5, CounterConfig(samples_per_level=2),
                         rng, EXACT_SAMPLER)
    assert run.value == 1.0
    moments, flagged = empirical_second_moment(run)
    assert np.all(moments == 1.0) and flagged == []


def test_ratio_estimate_single_vertex(rng):
    a = HardcoreModel(Graph(1), [1.0])
    b = HardcoreModel(Graph(1), [1.01])
    run = ratio_estimate(a, b, 0.01, CounterConfig(), rng, EXACT_SAMPLER)
    assert run.value == pytest.approx(2.01 / 2.0, rel=0.01)


def test_ratio_estimate_p3(rng):
    mu = HardcoreModel(path_graph(3), np.ones(3))
    nu = HardcoreModel(path_graph(3), np.full(3, 1.05))
    truth = math.exp(exact_partition(nu) - exact_partition(mu))
    run = ratio_estimate(mu, nu, 0.05, CounterConfig(), rng, EXACT_SAMPLER)
    assert run.value == pytest.approx(truth, rel=0.05)


def test_ratio_estimate_second_moment_closed_form(rng):
    # force a single level; W is 1 or 1.01 with probability 1/2 each
    a = HardcoreModel(Graph(1), [1.0])
    b = HardcoreModel(Graph(1), [1.01])
    cfg = CounterConfig(levels_multiplier=1e-6, samples_per_level=30.0)
    run = ratio_estimate(a, b, 0.02, cfg, rng, EXACT_SAMPLER)
    assert run.levels == 1
    expected = (0.5 * 1.0 + 0.5 * 1.01**2) / (0.5 * 1.0 + 0.5 * 1.01) ** 2
    moments, _ = empirical_second_moment(run)
    assert moments[0] == pytest.approx(expected, abs=5e-6)


def test_ratio_estimate_levels_scale_with_distance():
    mu = HardcoreModel(path_graph(4), np.full(4, 0.5))
    nu_near = HardcoreModel(path_graph(4), np.full(4, 0.5 + 1e-6))
    nu_far = HardcoreModel(path_graph(4), np.full(4, 1.5))
    rng = np.random.default_rng(0)
    cfg = CounterConfig(samples_per_level=1.0)
    near = ratio_estimate(mu, nu_near, 0.5, cfg, rng, EXACT_SAMPLER)
    far = ratio_estimate(mu, nu_far, 0.5, cfg, rng, EXACT_SAMPLER)
    assert far.levels > near.levels


def test_ratio_estimate_ising_fallback(rng):
    g = Graph(2, [(0, 1)])
    mu = IsingModel(g, {(0, 1): 0.3}, [0.1, 0.0])
    nu = IsingModel(g, {(0, 1): 0.3}, [0.2, 0.0])
    truth = math.exp(exact_partition(nu) - exact_partition(mu))
    run = ratio_estimate(mu, nu, 0.1, CounterConfig(boost_repeats=3), rng, EXACT_SAMPLER)
    assert run.value == pytest.approx(truth, rel=0.1)
    with pytest.raises(InputError):
        empirical_second_moment(run)


def test_ratio_estimate_zero_mismatch_rejected(rng):
    g = Graph(2, [(0, 1)])
    mu = HardcoreModel(g, [0.0, 1.0])
    nu = HardcoreModel(g, [1.0, 1.0])
    with pytest.raises(MustPreprocessError):
        ratio_estimate(mu, nu, 0.1, rng=rng)


def test_second_moments_stay_small_for_large_distance(rng):
    """With the level count scaling as 1 + n*d_par, no per-level second
    moment exceeds the flag threshold even for a wide interpolation."""
    from gibbs_tv.counting import DEFAULT_MOMENT_THRESHOLD

    g = random_graph(6, 0.4, np.random.default_rng(1))
    mu = HardcoreModel(g, np.full(6, 0.5))
    nu = HardcoreModel(g, np.full(6, 1.0))  # d_par = 0.5
    run = ratio_estimate(mu, nu, 0.2, CounterConfig(), rng, EXACT_SAMPLER)
    assert run.levels >= math.ceil(4 * (1 + 6 * 0.5))
    moments, flagged = empirical_second_moment(run, DEFAULT_MOMENT_THRESHOLD)
    assert flagged == []
    assert np.all(moments < DEFAULT_MOMENT_THRESHOLD)


def test_conditional_count_empty_pin_matches_plain():
    """Identical seeds: the empty pinning takes the same code path and
    returns the same estimate as plain counting."""
    model = HardcoreModel(path_graph(4), np.full(4, 0.8))
    cfg = CounterConfig(boost_repeats=2)
    a = conditional_count(model, {}, 0.2, cfg, np.random.default_rng(3), EXACT_SAMPLER)
    b = approx_count(model, 0.2, cfg, np.random.default_rng(3), EXACT_SAMPLER)
    assert a == b
