import numpy as np
import pytest
from hypothesis import given, strategies as st

from capredecode.errors import InvariantViolation
from capredecode.evaluation import (decode, defect_counts, defect_density, direct_mc, fails,
                                    logical_failure, run_trial)
from capredecode.noise import edges_to_config, trial_rng
from capredecode.rare_event import construct_failing_error

from conftest import lattice


def _exact_raw_density(p):
    """Defects per fault location without pre-decoding: each vertex sees six
    independent edges and is a defect when an odd number of them fail."""
    return (1 - (1 - 2 * p) ** 6) / 2 / 3


def _z_plaquette(lat, x, y):
    q = np.zeros(lat.n_qubits, dtype=bool)
    for a in (0, 1):
        for b in (0, 1):
            q[((y + b) % lat.d) * lat.d + (x + a) % lat.d] = True
    return q


def test_zero_rate_trial(lat6):
    rec = run_trial(lat6, 0.0, 0, trial_rng(0, 0))
    assert rec.defects_raw == 0 and rec.defects_after_predecode == 0
    assert not rec.failed and rec.matcher_time_ns == 0


def test_single_fault_handled_by_predecoder(lat6):
    err = edges_to_config(lat6, [lat6.space_edge(2, 1, 3)])
    rec = decode(lat6, err, 0)
    assert rec.defects_raw == 2 and rec.defects_after_predecode == 0 and not rec.failed
    rec = decode(lat6, err, None)
    assert rec.defects_after_predecode == 2 and not rec.failed


def test_constructed_error_fails_at_d10():
    lat = lattice(10)
    err = construct_failing_error(lat, 0)
    assert decode(lat, err, 0).failed
    assert fails(lat, err, 0)


def test_logical_failure_examples(lat6):
    assert logical_failure(lat6, np.zeros(36, dtype=bool)) == (False, False)
    row = np.zeros(36, dtype=bool)
    row[2 * 6: 3 * 6] = True  # qubits (0..5, 2)
    assert logical_failure(lat6, row) == (True, False)
    col = np.zeros(36, dtype=bool)
    col[np.arange(6) * 6 + 4] = True
    assert logical_failure(lat6, col) == (False, True)
    assert logical_failure(lat6, row ^ col) == (True, True)


def test_stabilizer_products_do_not_fail(lat6):
    rng = np.random.default_rng(0)
    cells = [(x, y) for x in range(6) for y in range(6) if (x + y) % 2]
    for _ in range(1000):
        q = np.zeros(36, dtype=bool)
        for k in rng.choice(len(cells), size=int(rng.integers(1, 12)), replace=False):
            q ^= _z_plaquette(lat6, *cells[k])
        assert logical_failure(lat6, q) == (False, False)


def test_logical_failure_rejects_open_strings(lat6):
    q = np.zeros(36, dtype=bool)
    q[0] = True
    with pytest.raises(InvariantViolation):
        logical_failure(lat6, q)


def test_direct_mc_zero_rate(lat4):
    st_ = direct_mc(lat4, 0.0, 0, min_failures=1, max_trials=200)
    assert st_.f == 0.0 and st_.trials == 200 and st_.stopped_on == "max_trials"
    assert st_.upper_bound == pytest.approx(3 / 200)


def test_direct_mc_is_partition_independent(lat4):
    a = direct_mc(lat4, 0.03, 0, min_failures=15, seed=4, workers=1, block=64)
    b = direct_mc(lat4, 0.03, 0, min_failures=15, seed=4, workers=1, block=7)
    c = direct_mc(lat4, 0.03, 0, min_failures=15, seed=4, workers=2, block=16)
    assert (a.trials, a.failures, a.failures_x) == (b.trials, b.failures, b.failures_x)
    assert (a.trials, a.failures, a.failures_x) == (c.trials, c.failures, c.failures_x)
    assert np.array_equal(a.after.counts, c.after.counts)
    assert a.failures == 15 and a.stopped_on == "failures"


def test_above_threshold_f_grows_with_d():
    f4 = direct_mc(lattice(4), 0.05, 0, min_failures=100, seed=1).f
    f8 = direct_mc(lattice(8), 0.05, 0, min_failures=100, seed=1).f
    assert f8 > f4


def test_failure_stats_fields(lat6):
    st_ = direct_mc(lat6, 0.02, None, min_failures=5, seed=2)
    assert 0 <= st_.f <= 1 and st_.failures <= st_.trials
    assert st_.failures == 5
    assert st_.failures_x + st_.failures_y >= st_.failures
    assert sum(st_.raw.histogram.values()) == st_.trials
    assert all(m % 2 == 0 for m in st_.raw.histogram)
    assert st_.stderr == pytest.approx(np.sqrt(st_.f * (1 - st_.f) / st_.trials))


@given(st.integers(0, 2**32 - 1), st.sampled_from([None, 0, 1, 2]))
def test_trial_invariants(seed, r):
    lat = lattice(6)
    rec = run_trial(lat, 0.04, r, np.random.default_rng(seed))
    assert rec.defects_raw % 2 == 0 and rec.defects_after_predecode % 2 == 0
    assert rec.model16_bits == 16 * rec.defects_after_predecode
    if r is None:
        assert rec.defects_after_predecode == rec.defects_raw


def test_defect_counts_even(lat6):
    raw, after = defect_counts(lat6, 0.02, 1, 300, seed=3)
    assert np.all(raw % 2 == 0) and np.all(after % 2 == 0)


def test_raw_density_matches_exact_formula():
    p = 0.01
    fit = defect_density([lattice(6), lattice(8)], p, None, 2000, seed=0)
    assert fit.rho_hat == pytest.approx(_exact_raw_density(p), rel=0.03)
    assert fit.rho_per_vertex == pytest.approx(3 * fit.rho_hat)
    with pytest.raises(ValueError):
        defect_density([lattice(6)], p, None, 10)


def test_predecoded_fraction_of_defects():
    lat = lattice(10)
    p = 0.005
    raw, after = defect_counts(lat, p, 0, 2000, seed=1)
    ratio = after.mean() / raw.mean()
    model = p * 57 / 2
    assert model / 2 <= ratio <= model * 2
