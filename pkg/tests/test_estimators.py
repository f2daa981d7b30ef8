import math
import warnings

import numpy as np
import pytest

from gibbs_tv.counting import CounterConfig
from gibbs_tv.errors import GateError, InfeasiblePinningError, InputError, TooLargeError
from gibbs_tv.estimators import (
    EstimatorBudget,
    additive_tv,
    advanced_relative_tv,
    basic_relative_tv,
    dispatch_tv,
    eta_truncation_bound,
    f_hat,
    marginal_additive_tv,
    meta_condition_params,
    partition_big_small,
    tilde_ratio_R,
    truncated_conditional,
)
from gibbs_tv.exact import (
    exact_conditional_partition,
    exact_marginal_tv,
    exact_partition,
    exact_tv,
)
from gibbs_tv.graph import Graph, cycle_graph, path_graph, random_graph
from gibbs_tv.models import HardcoreModel, IsingModel, marginal_lower_bound
from gibbs_tv.sampling import SamplerConfig
from gibbs_tv.suites import ADVANCED_KAPPA, ADVANCED_THETA


def adv_budget(**kw):
    defaults = dict(
        sampler=SamplerConfig(exact_fallback_cap=20),
        counter=CounterConfig(exact_fallback_cap=20),
        kappa_override=ADVANCED_KAPPA,
        theta_override=ADVANCED_THETA,
        override_gates=True,
    )
    defaults.update(kw)
    return EstimatorBudget(**defaults)


def test_additive_identical_pair(exact_budget, rng):
    m = HardcoreModel(path_graph(3), np.ones(3))
    rep = additive_tv(m, m, 0.1, exact_budget, rng)
    assert rep.error_kind == "additive"
    assert rep.estimate <= 0.1
    assert rep.samples_used == math.ceil(64 / 0.01)


def test_additive_single_vertex_coverage(exact_budget, rng):
    a = HardcoreModel(Graph(1), [1.0])
    b = HardcoreModel(Graph(1), [3.0])
    hits = 0
    for child in rng.spawn(30):
        est = additive_tv(a, b, 0.05, exact_budget, child).estimate
        hits += 0.20 <= est <= 0.30
    assert hits >= 20  # promise is 2/3


def test_additive_ising_four_cycle(exact_budget, rng):
    g = cycle_graph(4)
    j = {e: 0.25 for e in g.edges}
    mu = IsingModel(g, j, [0.0] * 4)
    nu = IsingModel(g, j, [0.5, 0.0, 0.0, 0.0])
    truth = exact_tv(mu, nu)
    hits = 0
    for child in rng.spawn(30):
        est = additive_tv(mu, nu, 0.05, exact_budget, child).estimate
        hits += abs(est - truth) <= 0.05
    assert hits >= 20


def test_marginal_additive(exact_budget, rng):
    g = path_graph(3)
    mu = HardcoreModel(g, [1.0, 1.0, 1.0])
    nu = HardcoreModel(g, [1.0, 2.0, 1.0])
    assert marginal_additive_tv(mu, nu, [], 0.1, exact_budget, rng).estimate == 0.0
    truth = exact_marginal_tv(mu, nu, [1])
    hits = 0
    for child in rng.spawn(20):
        est = marginal_additive_tv(mu, nu, [1], 0.05, exact_budget, child).estimate
        hits += abs(est - truth) <= 0.05
    assert hits >= 14
    # subset = V statistically matches the full additive estimator
    full = marginal_additive_tv(mu, nu, range(3), 0.1, exact_budget, rng).estimate
    assert abs(full - exact_tv(mu, nu)) <= 0.1


def test_meta_condition_params_formulas():
    g = random_graph(10, 0.3, np.random.default_rng(1))
    mu = HardcoreModel(g, np.full(10, 0.5))
    nu = HardcoreModel(g, np.full(10, 0.5))
    params = meta_condition_params(mu, nu, b=1.0 / 3.0, c_tv_par=1.0 / 27.0)
    assert params.holds and params.L == 2.0
    assert params.K == pytest.approx(3240.0)

    g2 = cycle_graph(4)  # n = 4, m = 4
    j = {e: 0.1 for e in g2.edges}
    a = IsingModel(g2, j, [0.0] * 4)
    params = meta_condition_params(a, a, b=0.5, c_tv_par=1.0 / 8.0)
    assert params.K == pytest.approx(256.0)

    far = HardcoreModel(g, np.full(10, 1.4))
    gate = meta_condition_params(mu, far, b=1.0 / 3.0, c_tv_par=1.0 / 27.0)
    assert not gate.holds and "exceeds" in gate.reason


def test_basic_relative(exact_budget, rng):
    a = HardcoreModel(Graph(1), [1.0])
    b = HardcoreModel(Graph(1), [1.01])
    bud = EstimatorBudget(
        sampler=SamplerConfig(exact_fallback_cap=20),
        counter=CounterConfig(exact_fallback_cap=20),
        T_override=20000,
    )
    b_pair = min(marginal_lower_bound(a).b, marginal_lower_bound(b).b)
    params = meta_condition_params(a, b, b_pair)
    truth = exact_tv(a, b)
    assert truth == pytest.approx(0.01 / 4.02, rel=1e-9)
    hits = 0
    for child in rng.spawn(30):
        est = basic_relative_tv(a, b, 0.2, params, bud, child).estimate
        hits += abs(est - truth) <= 0.2 * truth
    assert hits >= 20

    # identical pair: E-bar is exactly zero
    params_same = meta_condition_params(a, a, marginal_lower_bound(a).b)
    assert basic_relative_tv(a, a, 0.2, params_same, bud, rng).estimate == 0.0

    bad = meta_condition_params(a, HardcoreModel(Graph(1), [3.0]), b_pair)
    with pytest.raises(GateError):
        basic_relative_tv(a, HardcoreModel(Graph(1), [3.0]), 0.2, bad, bud, rng)


def test_basic_relative_refuses_astronomic_draw_counts(rng):
    g = random_graph(6, 0.4, np.random.default_rng(0))
    mu = HardcoreModel(g, np.full(6, 0.4))
    nu = HardcoreModel(g, np.full(6, 0.4 + 1e-6))
    params = meta_condition_params(mu, nu, 0.01)
    with pytest.raises(TooLargeError):
        basic_relative_tv(mu, nu, 0.25, params, EstimatorBudget(), rng)


def test_partition_big_small():
    g = path_graph(4)
    kappa = ADVANCED_KAPPA
    lam_hi = np.full(4, 0.3)
    mu = HardcoreModel(g, lam_hi)
    nu = HardcoreModel(g, lam_hi + 1e-6)
    part = partition_big_small(mu, nu, 0.25, adv_budget())
    assert part.small == () and set(part.big) == set(range(4))

    lam_lo = np.full(4, kappa / 10)
    mu2 = HardcoreModel(g, lam_lo)
    nu2 = HardcoreModel(g, lam_lo + 1e-8)
    part2 = partition_big_small(mu2, nu2, 0.25, adv_budget())
    assert part2.big == () and set(part2.small) == set(range(4))

    mixed = np.array([0.3, kappa / 10, 0.4, kappa / 2])
    mu3 = HardcoreModel(g, mixed)
    nu3 = HardcoreModel(g, mixed + 1e-8)
    part3 = partition_big_small(mu3, nu3, 0.25, adv_budget())
    assert set(part3.big) == {0, 2} and set(part3.small) == {1, 3}

    with pytest.raises(GateError):  # distance above the override threshold
        partition_big_small(mu, HardcoreModel(g, lam_hi + 1.0), 0.25, adv_budget())
    from gibbs_tv.graph import complete_graph

    k4 = complete_graph(4)
    beyond = HardcoreModel(k4, np.full(4, 5.0))  # above lambda_c(3) = 4
    with pytest.raises(GateError):
        partition_big_small(beyond, beyond, 0.25, adv_budget())


def _mixed_pair():
    g = Graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 4)])
    lam = np.array([0.3, 0.002, 0.25, 0.001, 0.35, 0.0005])
    lam2 = lam + np.array([2e-5, -1e-5, 0.0, 1e-5, -2e-5, 1e-5])
    return HardcoreModel(g, lam), HardcoreModel(g, np.clip(lam2, 1e-9, None))


def test_truncated_conditional():
    mu, nu = _mixed_pair()
    part = partition_big_small(mu, nu, 0.25, adv_budget())
    x = {v: -1 for v in part.big}
    tc0 = truncated_conditional(mu, nu, part, x, 0)
    assert tc0.z_mu == 1.0 and tc0.z_nu == 1.0 and tc0.sets == ((),)

    tc_full = truncated_conditional(mu, nu, part, x, len(part.small))
    log_z = exact_conditional_partition(mu, {v: -1 for v in part.big})
    # conditional partition of the small side: divide out nothing (all big -1)
    assert math.log(tc_full.z_mu) == pytest.approx(log_z, abs=1e-10)

    x_plus = dict(x)
    x_plus[part.big[0]] = 1
    tc = truncated_conditional(mu, nu, part, x_plus, 4)
    blocked = set(int(u) for u in mu.graph.neighbors(part.big[0]))
    assert all(v not in blocked for v in tc.s_x)

    bad = dict(x)
    for v in part.big[:2]:
        bad[v] = 1
    if mu.graph.has_edge(part.big[0], part.big[1]):
        with pytest.raises(InfeasiblePinningError):
            truncated_conditional(mu, nu, part, bad, 2)
    with pytest.raises(InputError):
        truncated_conditional(mu, nu, part, {0: 1}, 2)


def test_f_hat_identical_pair_vanishes():
    mu, _ = _mixed_pair()
    part = partition_big_small(mu, mu, 0.25, adv_budget())
    x = {v: -1 for v in part.big}
    assert f_hat(mu, mu, part, 4, 1.0, x) == 0.0


def test_f_hat_empty_small_side():
    g = Graph(2, [(0, 1)])
    mu = HardcoreModel(g, [0.3, 0.4])
    nu = HardcoreModel(g, [0.3 + 1e-8, 0.4])
    part = partition_big_small(mu, nu, 0.25, adv_budget())
    assert part.small == ()
    x = {0: 1, 1: -1}
    r = 1.0
    ratio = nu.lam[0] / mu.lam[0]
    expected = 0.5 * abs(ratio / r - 1.0)
    assert f_hat(mu, nu, part, 4, r, x) == pytest.approx(expected, rel=1e-12)


def test_eta_truncation_bound():
    assert eta_truncation_bound(0.123, 0, 10) == pytest.approx(2e8)
    assert eta_truncation_bound(1e-3, 4, 10) == pytest.approx(32.0)
    assert eta_truncation_bound(0.0, 1, 5) == 0.0


def test_tilde_ratio_identical_pair(rng):
    mu, _ = _mixed_pair()
    part = partition_big_small(mu, mu, 0.25, adv_budget())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = tilde_ratio_R(mu, mu, part, 4, 0.25, adv_budget(T_override=500), rng)
    assert r == 1.0


def test_tilde_ratio_all_big(rng):
    g = path_graph(4)
    mu = HardcoreModel(g, np.full(4, 0.3))
    nu = HardcoreModel(g, np.full(4, 0.3 + 1e-5))
    part = partition_big_small(mu, nu, 0.25, adv_budget())
    assert part.small == ()
    truth = math.exp(exact_partition(nu) - exact_partition(mu))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = tilde_ratio_R(mu, nu, part, 4, 0.25, adv_budget(T_override=40000), rng)
    assert r == pytest.approx(truth, abs=3e-5)


def test_tilde_ratio_gate_errors(rng):
    mu, nu = _mixed_pair()
    part = partition_big_small(mu, nu, 0.25, adv_budget())
    strict = adv_budget(override_gates=False)
    with pytest.raises(GateError):
        tilde_ratio_R(mu, nu, part, 4, 0.25, strict, rng)


def test_advanced_identical_pair(rng):
    mu, _ = _mixed_pair()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = advanced_relative_tv(mu, mu, 0.25, adv_budget(T_override=2000), rng)
    assert rep.estimate == 0.0 and rep.branch == "advanced"


def test_advanced_close_edge_pair(rng):
    g = Graph(2, [(0, 1)])
    mu = HardcoreModel(g, [0.5, 0.5])
    nu = HardcoreModel(g, [0.5001, 0.5])
    truth = exact_tv(mu, nu)
    budget = adv_budget(theta_override=1e-3, T_override=60000)
    hits = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for child in rng.spawn(20):
            est = advanced_relative_tv(mu, nu, 0.25, budget, child).estimate
            hits += abs(est - truth) <= 0.25 * truth
    assert hits >= 14


def test_advanced_beats_degenerate_basic(rng):
    """Fields far below one sample's resolution: W-estimator sees only empty
    sets and returns 0; the truncated estimator stays relatively accurate."""
    g = random_graph(6, 0.35, np.random.default_rng(8))
    lam = np.full(6, 1e-6)
    mu = HardcoreModel(g, lam)
    nu = HardcoreModel(g, lam + 1e-8)
    truth = exact_tv(mu, nu)
    assert truth > 0

    b = min(marginal_lower_bound(mu).b, marginal_lower_bound(nu).b)
    params = meta_condition_params(mu, nu, b)
    bud = EstimatorBudget(
        sampler=SamplerConfig(exact_fallback_cap=20),
        counter=CounterConfig(exact_fallback_cap=20),
        T_override=3000,
    )
    assert basic_relative_tv(mu, nu, 0.25, params, bud, rng).estimate == 0.0

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = advanced_relative_tv(mu, nu, 0.25, adv_budget(T_override=3000), rng)
    assert rep.estimate == pytest.approx(truth, rel=0.25)


def test_dispatch_branches(rng, exact_budget):
    g = Graph(2, [(0, 1)])
    j = {(0, 1): 0.4}
    case1 = dispatch_tv(
        IsingModel(g, j, [math.inf, 0.0]),
        IsingModel(g, j, [-math.inf, 0.0]),
        0.2, exact_budget, rng,
    )
    assert case1.branch == "preprocess-resolved" and case1.estimate == 1.0

    m = HardcoreModel(path_graph(3), np.ones(3))
    small = dispatch_tv(m, HardcoreModel(path_graph(3), [1, 2, 1]), 0.2,
                        exact_budget, rng)
    assert small.branch == "exact"

    same = dispatch_tv(m, m, 0.2, EstimatorBudget(exact_cap=0), rng)
    assert same.branch == "identical" and same.estimate == 0.0

    # forced exact cap 0 routes a large-distance pair to the gated additive;
    # the paper-shaped draw count at accuracy theta*C*eps is astronomical, so
    # the desk-scale run overrides it
    bud = EstimatorBudget(
        sampler=SamplerConfig(exact_fallback_cap=20),
        counter=CounterConfig(exact_fallback_cap=20),
        exact_cap=0,
        epsilon=0.5,
        T_override=20000,
    )
    far = dispatch_tv(m, HardcoreModel(path_graph(3), [1.0, 1.8, 1.0]), 0.5, bud, rng)
    assert far.branch == "additive-gated" and far.error_kind == "relative"
    assert far.d_par == pytest.approx(0.8)
    assert far.theta is not None and far.d_par >= far.theta

    # tiny distance in the uniqueness regime routes to the advanced estimator
    mu_adv = HardcoreModel(path_graph(3), [0.3, 0.3, 0.3])
    nu_adv = HardcoreModel(path_graph(3), [0.3 + 1e-9, 0.3, 0.3])
    bud_adv = EstimatorBudget(
        sampler=SamplerConfig(exact_fallback_cap=20),
        counter=CounterConfig(exact_fallback_cap=20),
        exact_cap=0,
        theta_override=1e-8,
        kappa_override=ADVANCED_KAPPA,
        override_gates=True,
        T_override=500,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        adv = dispatch_tv(mu_adv, nu_adv, 0.25, bud_adv, rng)
    assert adv.branch == "advanced"

    gap = dispatch_tv(
        IsingModel(g, j, [math.inf, 0.0]), IsingModel(g, j, [0.0, 0.0]),
        0.3, exact_budget, rng,
    )
    assert gap.branch == "preprocess-big-gap" and gap.error_kind == "relative"
    truth = exact_tv(
        IsingModel(g, j, [math.inf, 0.0]), IsingModel(g, j, [0.0, 0.0])
    )
    assert abs(gap.estimate - truth) <= gap.b * 0.3 + 0.05


def test_dispatch_empty_graph(rng):
    empty = HardcoreModel(Graph(0), [])
    rep = dispatch_tv(empty, empty, 0.3, EstimatorBudget(), rng)
    assert rep.estimate == 0.0 and rep.branch == "empty"


def test_dispatch_median_repeats(rng, exact_budget):
    a = HardcoreModel(Graph(1), [1.0])
    b = HardcoreModel(Graph(1), [3.0])
    bud = EstimatorBudget(
        sampler=SamplerConfig(exact_fallback_cap=20),
        counter=CounterConfig(exact_fallback_cap=20),
        exact_cap=0,
        mode="additive",
        median_repeats=5,
    )
    rep = dispatch_tv(a, b, 0.1, bud, rng)
    assert rep.branch == "additive-forced"
    assert abs(rep.estimate - 0.25) < 0.1
    assert rep.samples_used == 5 * math.ceil(64 / 0.01)


def test_budget_validation():
    with pytest.raises(InputError):
        EstimatorBudget(epsilon=1.5)
    with pytest.raises(InputError):
        EstimatorBudget(mode="nope")
    with pytest.raises(InputError):
        EstimatorBudget(t=-1)


def test_sample_count_shapes():
    """Configured budgets scale with the polynomial shapes, not wall clock."""
    g = random_graph(10, 0.3, np.random.default_rng(2))
    mu = HardcoreModel(g, np.full(10, 0.5))
    params = meta_condition_params(mu, mu, b=0.25, c_tv_par=0.25**3)
    # T for the basic estimator: 1e4 L^2 K^2 / eps^2
    expect = math.ceil(1e4 * 4 * params.K**2 / 0.25**2)
    assert expect == math.ceil(1e4 * params.L**2 * params.K**2 / 0.25**2)
    # advanced-path draw count: (n^3 + n/kappa)/eps^2, via the same formula
    n, kappa, eps = 10, 1e-3, 0.5
    assert math.ceil((n**3 + n / kappa) / eps**2) == math.ceil(
        (1000 + 10000) / 0.25
    )
    from gibbs_tv.sampling import Sampler

    s = Sampler(mu)
    s1 = s.steps_for(0.1)
    assert s1 == max(10, math.ceil(20.0 * 10 * math.log(10 / 0.1)))


def test_truncation_sandwich(rng):
    """0 <= f - f_t everywhere; the truncation-bound coefficient caps the gap
    whenever the gate preconditions hold."""
    from gibbs_tv.suites import big_small_pair, exact_big_small

    for _ in range(20):
        crng = np.random.default_rng(int(rng.integers(0, 2**31)))
        mu, nu, part, theta = big_small_pair(crng, n_max=8)
        d = exact_tv(mu, nu)
        n = mu.n
        records = exact_big_small(mu, nu, part)
        for plus, rec in records.items():
            for t in (0, 1, 2):
                keep = rec["sizes"] <= t
                f_t = 0.5 * float(
                    np.sum(np.abs(rec["g"] * rec["p_nu"][keep] - rec["p_mu"][keep]))
                )
                gap = rec["f"] - f_t
                assert gap >= -1e-14
                # gates hold by construction of big_small_pair
                assert theta / part.kappa < 1.0 / (10 * n)
                assert theta + part.kappa < 1.0 / (10 * n)
                assert gap <= eta_truncation_bound(part.kappa, t, n) * d + 1e-14


def test_tilde_ratio_single_vertex_accuracy(rng):
    a = HardcoreModel(Graph(1), [1.0])
    b = HardcoreModel(Graph(1), [1.001])
    bud = adv_budget(theta_override=1e-2, T_override=200000)
    part = partition_big_small(a, b, 0.25, bud)
    assert part.small == ()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        vals = [
            tilde_ratio_R(a, b, part, 4, 0.25, bud, child)
            for child in rng.spawn(5)
        ]
    for v in vals:
        assert abs(v - 2.001 / 2.0) <= 1e-4


def test_dispatch_advanced_at_n30(rng):
    """Gate arithmetic on a 30-vertex pair with tiny parameter distance."""
    from gibbs_tv.graph import path_graph as pg

    g = pg(30)
    lam = np.full(30, 0.3)
    lam2 = lam.copy()
    lam2[7] += 1e-9
    mu, nu = HardcoreModel(g, lam), HardcoreModel(g, lam2)
    bud = EstimatorBudget(
        theta_override=1e-8,
        kappa_override=ADVANCED_KAPPA,
        override_gates=True,
        T_override=100,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = dispatch_tv(mu, nu, 0.25, bud, rng)
    assert rep.branch == "advanced"
    assert rep.estimate >= 0.0


def test_estimates_stay_in_range(rng, exact_budget):
    """Every reported estimate lies in [0, 1 + additive slack]."""
    from gibbs_tv.suites import random_soft_pair

    for _ in range(10):
        crng = np.random.default_rng(int(rng.integers(0, 2**31)))
        mu, nu = random_soft_pair(crng, n_max=6)
        rep = dispatch_tv(mu, nu, 0.2, exact_budget, crng)
        assert 0.0 <= rep.estimate <= 1.0 + 1e-12
        add = additive_tv(mu, nu, 0.3, exact_budget, crng)
        assert 0.0 <= add.estimate <= 1.0


def test_additive_with_glauber_sampler(rng):
    """Same estimator driven by the chain sampler: mixing error stays inside
    the additive budget on a small pair."""
    g = path_graph(5)
    mu = HardcoreModel(g, np.full(5, 0.8))
    nu = HardcoreModel(g, np.array([0.8, 1.3, 0.8, 0.6, 0.8]))
    truth = exact_tv(mu, nu)
    budget = EstimatorBudget(
        sampler=SamplerConfig(),  # no exact fallback: real Glauber chains
        counter=CounterConfig(exact_fallback_cap=20),
    )
    eps = 0.15
    hits = sum(
        abs(additive_tv(mu, nu, eps, budget, child).estimate - truth) <= eps
        for child in rng.spawn(10)
    )
    assert hits >= 7


def test_paper_strict_rejects_overrides(rng):
    """paper_strict evaluates gates with the literal constants and ignores
    every override."""
    g = Graph(2, [(0, 1)])
    mu = HardcoreModel(g, [0.5, 0.5])
    nu = HardcoreModel(g, [0.5001, 0.5])
    strict = EstimatorBudget(
        paper_strict=True,
        theta_override=1.0,     # ignored
        kappa_override=1.0,     # ignored
        override_gates=True,  # ignored
    )
    # paper theta = 1e-10 eps^(1/4) / n^(5/2) is far below d_par = 1e-4
    with pytest.raises(GateError):
        partition_big_small(mu, nu, 0.25, strict)

    # a genuinely below-threshold pair passes the gate but hits the
    # paper-shaped draw count (T_override is ignored as well)
    nu2 = HardcoreModel(g, [0.5 + 1e-16, 0.5])
    strict2 = EstimatorBudget(paper_strict=True, T_override=10)
    with pytest.raises((GateError, TooLargeError)):
        advanced_relative_tv(mu, nu2, 0.25, strict2, rng)


def test_advanced_with_glauber_sampler(rng):
    """The truncated estimator fed by real chains stays within tolerance."""
    mu, nu = _mixed_pair()
    truth = exact_tv(mu, nu)
    budget = EstimatorBudget(
        sampler=SamplerConfig(),  # Glauber chains, no enumeration fallback
        counter=CounterConfig(exact_fallback_cap=20),
        kappa_override=ADVANCED_KAPPA,
        theta_override=ADVANCED_THETA,
        override_gates=True,
        T_override=4000,
    )
    hits = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for child in rng.spawn(6):
            est = advanced_relative_tv(mu, nu, 0.3, budget, child).estimate
            hits += abs(est - truth) <= 0.3 * truth
    assert hits >= 4
