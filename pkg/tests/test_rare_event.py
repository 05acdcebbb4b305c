import itertools
import math

import numpy as np
import pytest
from scipy import stats

from capredecode.analysis import lw
from capredecode.errors import InvariantViolation
from capredecode.evaluation import direct_mc, fails
from capredecode.rare_event import (ChainConfig, FailingChainState, construct_failing_error,
                                    effective_sample_size, gap_count, gapped_string,
                                    likelihood_ratio, metropolis_step, ratio_estimate, run_chain,
                                    splitting_ladder)

from conftest import lattice


def test_gapped_strings():
    assert gapped_string(5, None) == [0, 1, 2, 3, 4]
    assert gapped_string(5, 0) == [0, 1, 3, 4]
    assert gapped_string(8, 2) == [0, 1, 2, 4, 5, 6, 7]
    assert gap_count(3, 1) == 0


@pytest.mark.parametrize("r", [None, 0, 1, 2])
@pytest.mark.parametrize("d", range(4, 24, 2))
def test_construction_has_least_weight_and_fails(d, r):
    lat = lattice(d)
    err = construct_failing_error(lat, r)
    assert err.sum() == lw(d, r)
    assert fails(lat, err, r)


def test_construction_examples():
    assert construct_failing_error(lattice(10), 0).sum() == 4
    assert construct_failing_error(lattice(6), 0).sum() == 3
    assert construct_failing_error(lattice(16), 0).sum() == 6


def test_no_single_fault_fails_mwpm_d4(lat4):
    e = np.zeros(lat4.n_edges, dtype=bool)
    for i in range(lat4.n_edges):
        e[i] = True
        assert not fails(lat4, e, None)
        e[i] = False


def test_metropolis_rejects_unfailing_moves(lat6):
    err = construct_failing_error(lat6, None)
    state = FailingChainState.start(lat6, err, None)
    rng = np.random.default_rng(0)
    for _ in range(300):
        before = state.error.copy()
        accepted = metropolis_step(lat6, state, 0.1, None, rng)
        assert fails(lat6, state.error, None)
        assert accepted or np.array_equal(before, state.error)
        assert state.weight == state.error.sum()


def test_metropolis_accepts_failing_removals(lat6):
    # a failing string plus one distant fault: removing the extra fault keeps failing
    err = construct_failing_error(lat6, None)
    extra = lat6.time_edge(3, 3, 3)
    assert not err[extra]
    err[extra] = True

    class Fixed:
        def __init__(self, e):
            self.e = e

        def integers(self, n):
            return self.e

        def random(self):
            return 0.999999

    state = FailingChainState.start(lat6, err, None)
    assert metropolis_step(lat6, state, 0.01, None, Fixed(extra))
    assert state.weight == lw(6, None)


def test_start_rejects_non_failing(lat6):
    with pytest.raises(InvariantViolation):
        FailingChainState.start(lat6, np.zeros(lat6.n_edges, dtype=bool), None)


def _failing_component_d4(max_weight):
    """Failing configurations of weight <= max_weight reachable by single
    toggles from the construction, found by exhaustive enumeration."""
    lat = lattice(4)
    N = lat.n_edges
    e = np.zeros(N, dtype=bool)
    failing = set()
    for w in range(1, max_weight + 1):
        for combo in itertools.combinations(range(N), w):
            e[list(combo)] = True
            if fails(lat, e, None):
                failing.add(frozenset(combo))
            e[list(combo)] = False
    start = frozenset(np.flatnonzero(construct_failing_error(lat, None)).tolist())
    seen, todo = {start}, [start]
    while todo:
        c = todo.pop()
        for i in range(N):
            nxt = c ^ {i}
            if nxt in failing and nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


@pytest.fixture(scope="module")
def component_d4():
    return _failing_component_d4(3)


def test_chain_matches_exhaustive_distribution(component_d4):
    lat = lattice(4)
    p = 0.1
    counts = {w: sum(1 for c in component_d4 if len(c) == w) for w in (2, 3)}
    weights = {w: counts[w] * p ** w * (1 - p) ** (lat.n_edges - w) for w in counts}
    z = sum(weights.values())
    cfg = ChainConfig(samples=3000, burn_in=5, thin=0.5, max_weight=3)
    start = FailingChainState.start(lat, construct_failing_error(lat, None), None)
    run = run_chain(lat, None, p, start, cfg, np.random.default_rng(0), keep_samples=True)
    ess = effective_sample_size(run.weights)
    obs = np.array([np.sum(run.weights == 2), np.sum(run.weights == 3)], dtype=float)
    exp = np.array([weights[2], weights[3]]) / z * len(run.weights)
    # scale the statistic to the effective sample size
    chi2 = float(((obs - exp) ** 2 / exp).sum()) * ess / len(run.weights)
    assert stats.chi2.sf(chi2, 1) > 1e-3
    # within weight 2 the visits are spread evenly over the component
    w2 = [frozenset(np.flatnonzero(s).tolist()) for s in run.samples if s.sum() == 2]
    assert all(c in component_d4 for c in w2)
    seen = {c for c in w2}
    assert len(seen) > 0.5 * counts[2]


def test_ratio_estimator_identities():
    w = np.array([3, 4, 5, 4])
    assert ratio_estimate(w, 100, 0.02, 0.02).estimate == 1.0
    est = ratio_estimate([7], 50, 0.02, 0.01)
    direct = (0.01 / 0.02) ** 7 * ((1 - 0.01) / (1 - 0.02)) ** 43
    assert est.estimate == pytest.approx(direct, rel=1e-12)
    assert likelihood_ratio([7], 50, 0.02, 0.01)[0] == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        ratio_estimate([], 10, 0.1, 0.05)
    with pytest.raises(ValueError):
        ratio_estimate([1], 10, 0.6, 0.05)


def test_effective_sample_size():
    rng = np.random.default_rng(0)
    iid = rng.normal(size=4000)
    assert effective_sample_size(iid) > 2500
    walk = np.cumsum(rng.normal(size=4000))
    assert effective_sample_size(walk) < 200


def test_single_rung_ladder_is_the_anchor(lat4):
    anchor = direct_mc(lat4, 0.02, 0, min_failures=20, seed=3)
    res = splitting_ladder(lat4, 0, [0.02], anchor=anchor)
    assert len(res.rungs) == 1 and res.rungs[0].f == anchor.f


def test_ladder_is_monotone_and_matches_direct_mc():
    lat = lattice(8)
    res = splitting_ladder(lat, 0, [0.02, 0.015, 0.01], ChainConfig(samples=300), seed=1,
                           anchor_failures=50)
    fs = [r.f for r in res.rungs]
    assert all(a > b for a, b in zip(fs, fs[1:]))
    mc = direct_mc(lat, 0.01, 0, min_failures=30, seed=2)
    se = math.hypot(mc.stderr, res.f_at(0.01) * res.rungs[-1].log_se)
    assert abs(mc.f - res.f_at(0.01)) < 3 * se


def test_ladder_inserts_rungs_for_large_ratios(lat4):
    res = splitting_ladder(lat4, 0, [0.02, 0.001], ChainConfig(samples=100), seed=0,
                           anchor_failures=20)
    assert len(res.rungs) > 2
    for rung in res.rungs[1:]:
        assert abs(math.log(rung.ratio.estimate)) <= 3.0
    with pytest.raises(ValueError):
        splitting_ladder(lat4, 0, [0.01, 0.02])


def test_ladder_inserts_rungs_for_noisy_ratios(lat4):
    anchor = direct_mc(lat4, 0.02, 0, min_failures=20, seed=3)
    cfg = ChainConfig(samples=100)
    loose = splitting_ladder(lat4, 0, [0.02, 0.01], cfg, seed=0, anchor=anchor, max_rung_se=math.inf)
    tight = splitting_ladder(lat4, 0, [0.02, 0.01], cfg, seed=0, anchor=anchor,
                             max_rung_se=loose.rungs[1].ratio.rel_err / 2)
    assert len(loose.rungs) == 2
    assert len(tight.rungs) > 2
    for rung in tight.rungs[1:]:
        assert rung.ratio.rel_err <= loose.rungs[1].ratio.rel_err / 2
