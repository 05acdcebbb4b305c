"""One test per acceptance criterion (split where a criterion has parts).

Each part records its verdict; the terminal summary prints one PASS/FAIL
line per criterion. Parts known to be unattainable are marked ``xfail``
with ``strict=True``, so they still run at full tolerance and the suite
turns red if one of them starts passing unnoticed.
"""

import itertools
import json
import math
import struct
from pathlib import Path

import numpy as np
import pytest

from capredecode import analysis, codec
from capredecode.analysis import lw
from capredecode.errors import MalformedMessage
from capredecode.evaluation import defect_counts, defect_density, direct_mc, fails
from capredecode.lattice import CodeLattice
from capredecode.matching import DefectGraph, brute_force_match, mwpm, timed_mwpm
from capredecode.noise import sample_error, syndrome_of
from capredecode.predecoder import (counted_isolation_volume, isolation_volume,
                                    min_distance_for_radius, predecode, residual_after)
from capredecode.rare_event import ChainConfig, construct_failing_error, splitting_ladder

from conftest import lattice, record
from oracles import bfs, vertices

SEED = 20240101
DATA = Path(__file__).parent / "data"


# 1 -----------------------------------------------------------------------------

def test_c01_matching_equals_brute_force():
    rng = np.random.default_rng(SEED)
    mismatches = 0
    for d in (4, 6, 8):
        lat = lattice(d)
        for i in range(1000):
            n = 10 if i % 2 == 0 else 2 * int(rng.integers(1, 5))
            g = DefectGraph(lat, np.sort(rng.choice(lat.V, size=n, replace=False)))
            mismatches += mwpm(g).total_weight != brute_force_match(g).total_weight
    assert record(1, "mwpm vs brute force, 3000 instances", mismatches == 0,
                  f"{mismatches} mismatches")


# 2 -----------------------------------------------------------------------------

def test_c02_distance_equals_bfs():
    bad = 0
    for d in (4, 6, 8):
        lat = lattice(d)
        D = lat.distance_matrix(np.arange(lat.V))
        for v in vertices(d):
            ref = bfs(d, v)
            a = lat.vertex_address(v)
            bad += sum(int(D[a, lat.vertex_address(w)] != k) for w, k in ref.items())
    assert record(2, "closed form vs BFS, all pairs d=4,6,8", bad == 0, f"{bad} disagreements")


# 3 -----------------------------------------------------------------------------

def test_c03_predecoder_consistency():
    combos = list(itertools.product((0.01, 0.05, 0.2), (4, 6, 8), (0, 1, 2)))
    per = -(-100_000 // len(combos))
    violations = trials = 0
    for k, (p, d, r) in enumerate(combos):
        lat = lattice(d)
        rng = np.random.default_rng([SEED, k])
        for _ in range(per):
            err = sample_error(lat, p, rng)
            out = predecode(lat, syndrome_of(lat, err), r)
            violations += not np.array_equal(syndrome_of(lat, residual_after(lat, err, out)),
                                             out.modified_syndrome)
            trials += 1
    assert record(3, f"syndrome consistency over {trials} trials", violations == 0,
                  f"{violations} violations")


# 4 -----------------------------------------------------------------------------

def test_c04_isolation_volumes():
    got = {}
    for r in (0, 1, 2, 3):
        lat = lattice(min_distance_for_radius(r))
        c = lat.half
        e_time = lat.time_edge(c, c, c)
        got[r] = counted_isolation_volume(lat, e_time, r)
    ok_cal = got[0] == 57 and got[2] == 163
    ok_closed = all(got[r] == isolation_volume(r) for r in (1, 2, 3))
    record(4, "enumerated V0, V2 (time-like fault)", ok_cal, f"V0={got[0]}, V2={got[2]}")
    record(4, "closed form vs enumeration r=1,2,3", ok_closed,
           ", ".join(f"r={r}: {got[r]} vs {isolation_volume(r)}" for r in (1, 2, 3)))
    assert ok_cal and ok_closed


# 5 -----------------------------------------------------------------------------

DENSITY_LATTICES = (12, 16, 20)
DENSITY_TRIALS = 10_000


def _fit(p, r):
    lats = [lattice(d) for d in DENSITY_LATTICES]
    return defect_density(lats, p, r, DENSITY_TRIALS, seed=SEED).rho_hat


@pytest.mark.parametrize("p", [
    5e-3, 1e-2,
    pytest.param(2e-2, marks=pytest.mark.xfail(
        strict=True, reason="exact raw density is (1-(1-2p)^6)/6, 9.5% below 2p at p=0.02")),
])
def test_c05_raw_density(p):
    rho = _fit(p, None)
    ok = abs(rho / (2 * p) - 1) <= 0.05
    record(5, f"no pre-decoding p={p}", ok, f"rho={rho:.4g}, 2p={2 * p:.4g}, ratio={rho / (2 * p):.3f}")
    assert ok


# pV_r in {0.1, 0.3}, chosen inside the stated validity window
PRE_POINTS = [(r, frac / isolation_volume(r)) for r in (0, 1, 2) for frac in (0.1, 0.3)]
# exact p^2 coefficient for r=1 is 102, not 2 V_1 = 114; with O(pV) depletion the
# ratio at pV = 0.3 lands near 0.76
PRE_POINTS[3] = pytest.param(*PRE_POINTS[3], marks=pytest.mark.xfail(
    strict=True, reason="r=1 leading coefficient is 10% below the model, depletion adds 15%"))


@pytest.mark.parametrize("r, p", PRE_POINTS)
def test_c05_predecoded_density(r, p):
    rho = _fit(p, r)
    model = analysis.density_model(p, r).rho
    ok = abs(rho / model - 1) <= 0.20
    record(5, f"r={r} p={p:.3g}", ok, f"rho={rho:.4g}, model={model:.4g}, ratio={rho / model:.3f}")
    assert ok


# 6 -----------------------------------------------------------------------------

def test_c06_threshold():
    grid = (0.01, 0.015, 0.02, 0.025, 0.03)
    curves = {}
    for d in (4, 6, 8, 10):
        lat = lattice(d)
        curves[d] = [(p, direct_mc(lat, p, 0, min_failures=200, seed=SEED + d).f) for p in grid]
    xs = analysis.curve_crossings(curves)
    est = analysis.threshold_estimate(curves)
    ok = est is not None and 0.015 <= est <= 0.025
    record(6, "crossing of f(d) curves, d=4..10, r=0", ok,
           f"estimate={est}, crossings={[round(x, 4) for x in xs]}")
    assert ok


# 7 -----------------------------------------------------------------------------

def test_c07_least_weight_structure():
    bad = []
    for d in range(4, 18, 2):
        lat = lattice(d)
        for r in (0, 1, 2):
            err = construct_failing_error(lat, r)
            if err.sum() != lw(d, r) or not fails(lat, err, r):
                bad.append((d, r, int(err.sum())))
    lat = lattice(4)
    e = np.zeros(lat.n_edges, dtype=bool)
    low = 0
    for i in range(lat.n_edges):
        e[i] = True
        low += fails(lat, e, None)
        e[i] = False
    record(7, "constructions d=4..16, r=0,1,2", not bad, f"mismatches={bad}")
    record(7, "no weight-1 failure, MWPM only, d=4", low == 0, f"{low} failing")
    assert not bad and low == 0


# 8 -----------------------------------------------------------------------------

def test_c08_splitting_matches_direct_mc():
    lat = lattice(6)
    res = splitting_ladder(lat, 0, [0.02, 0.01], ChainConfig(), seed=SEED)
    ratio = res.rungs[-1].ratio
    assert ratio.p_to == 0.01
    hi = direct_mc(lat, 0.02, 0, min_failures=400, seed=SEED + 1)
    lo = direct_mc(lat, 0.01, 0, min_failures=400, seed=SEED + 2)
    direct = lo.f / hi.f
    se_direct = direct * math.hypot(lo.stderr / lo.f, hi.stderr / hi.f)
    se = math.hypot(ratio.stderr, se_direct)
    z = abs(ratio.estimate - direct) / se
    ok = z <= 3
    record(8, "ladder ratio f(0.01)/f(0.02) at d=6 vs direct MC", ok,
           f"ladder={ratio.estimate:.4f}+-{ratio.stderr:.4f}, direct={direct:.4f}+-{se_direct:.4f}, z={z:.2f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="local k between 3e-3 and 1e-2 is near 0.5 for d <= 10; "
                                       "direct MC slopes agree with the ladder")
def test_c08_reduced_ladder_k():
    ladder = [0.02, 0.01, 0.007, 0.005, 0.003]
    pts = []
    for d in (4, 6, 8, 10):
        res = splitting_ladder(lattice(d), 0, ladder, ChainConfig(), seed=SEED)
        pts += [(d, rung.p, rung.f) for rung in res.rungs]
    fit = analysis.fit_scaling(pts, p_window=(3e-3, 1e-2))
    ok = 0.28 <= fit.k <= 0.45
    record(8, "reduced ladder k, d=4..10, p in [3e-3, 1e-2]", ok, f"k={fit.k:.3f}, p_th={fit.p_th:.4f}")
    assert ok


# 9 -----------------------------------------------------------------------------

@pytest.mark.parametrize("scheme, p", [
    (None, 5e-3),
    pytest.param(None, 2e-2, marks=pytest.mark.xfail(
        strict=True, reason="raw counts are under-dispersed: adjacent faults cancel defects")),
    pytest.param(0, 5e-3, marks=pytest.mark.xfail(
        strict=True, reason="pre-decoded counts are over-dispersed: loop clusters leave four defects")),
    (0, 2e-2),
])
def test_c09_poisson_histogram(scheme, p):
    _, after = defect_counts(lattice(12), p, scheme, 10_000, seed=SEED)
    chi = analysis.poisson_chi_square(after)
    half = after // 2
    ok = chi.passes(1e-3)
    record(9, f"chi-square {'mwpm' if scheme is None else 'pre0'} p={p}", ok,
           f"chi2={chi.statistic:.1f}, dof={chi.dof}, p_value={chi.p_value:.3g}, "
           f"var/mean={half.var() / half.mean():.3f}")
    assert ok


def test_c09_mmax():
    ratio = analysis.poisson_mmax(1.0, 1000.0, 1e-15) / 1000.0
    ok = ratio < 1.4
    record(9, "M_max / rho V at rho V = 1000, f = 1e-15", ok, f"{ratio:.3f}")
    assert ok


# 10 ----------------------------------------------------------------------------

def _times(lat, p, r, trials, seed):
    out = []
    for i in range(trials):
        s = syndrome_of(lat, sample_error(lat, p, np.random.default_rng([seed, i])))
        if r is not None:
            s = predecode(lat, s, r).modified_syndrome
        g = DefectGraph.from_syndrome(lat, s)
        out.append((p, lat.V, g.size, timed_mwpm(g)[1]))
    return out


def test_c10_runtime_exponent():
    recs = []
    for d in (10, 12, 14, 16, 18, 20):
        recs += _times(lattice(d), 0.02, None, 10, SEED + d)
    fit = analysis.runtime_fit(recs)[0.02]
    ok = 1.6 <= fit.exponent <= 2.4 and not fit.flagged
    record(10, "RT exponent vs V, p=0.02, no pre-decoding", ok,
           f"exponent={fit.exponent:.3f}, min mean |W|={fit.mean_w.min():.0f}, A={fit.A:.3g} ns")
    assert ok


def test_c10_speedup():
    lat = lattice(30)
    rows = []
    for p in (5e-3, 1e-2, 2e-2):
        raw = _times(lat, p, None, 20, SEED)
        pre = _times(lat, p, 0, 20, SEED)
        measured = np.mean([t for *_, t in raw]) / np.mean([t for *_, t in pre])
        rows.append((p, measured, analysis.speedup_model(p, 0)))
    ok_speed = rows[0][1] >= 20
    ok_model = all(1 / 3 <= m / model <= 3 for _, m, model in rows)
    record(10, "speedup at p=5e-3, d=30", ok_speed, f"{rows[0][1]:.1f}x")
    record(10, "measured vs (pV0/2)^-2 model within 3x", ok_model,
           ", ".join(f"p={p}: {m:.1f}x vs {model:.1f}x" for p, m, model in rows))
    assert ok_speed and ok_model


# 11 ----------------------------------------------------------------------------

def test_c11_overhead():
    ps = np.geomspace(1e-4, 1e-2, 41)
    ratios = [analysis.qubit_ratio(p, 1e-15, 0) for p in ps]
    ok_ratio = max(ratios) <= 1.5
    gaps = {d: [abs(analysis.effective_mwpm_distance(d, 10.0 ** -k, 0) - d) for k in (3, 10, 30, 100, 300)]
            for d in (4, 6, 8)}
    ok_eff = all(all(a > b for a, b in zip(g, g[1:])) and g[-1] < 0.01 * d for d, g in gaps.items())
    record(11, "qubit ratio pre0 vs MWPM, p in [1e-4, 1e-2]", ok_ratio, f"max={max(ratios):.3f}")
    record(11, "effective distance -> d for d<9 as p -> 0", ok_eff,
           ", ".join(f"d={d}: |d'-d| at 1e-300 = {g[-1]:.4f}" for d, g in gaps.items()))
    assert ok_ratio and ok_eff


# 12 ----------------------------------------------------------------------------

def test_c12_codec():
    golden = json.loads((DATA / "golden.json").read_text())
    exact = True
    for name, spec in golden.items():
        lat = lattice(spec["d"])
        raw = (DATA / name).read_bytes()
        s = codec.decompress(lat, codec.read_synz(DATA / name))
        exact &= raw.hex() == spec["hex"]
        exact &= codec.compress(lat, s).to_bytes() == raw
        exact &= np.flatnonzero(s).tolist() == spec["addresses"]
    rng = np.random.default_rng(SEED)
    lat = lattice(6)
    untyped = accepted_bad = 0
    for i in range(20_000):
        s = syndrome_of(lat, sample_error(lat, 0.05, rng))
        buf = bytearray(codec.compress(lat, s).to_bytes())
        mode = i % 4
        if mode == 0 and len(buf):
            buf[int(rng.integers(len(buf)))] = int(rng.integers(256))
        elif mode == 1:
            buf = buf[: int(rng.integers(len(buf) + 1))]
        elif mode == 2:
            buf += bytes(rng.integers(256, size=int(rng.integers(1, 9)), dtype=np.uint8))
        else:
            buf = bytearray(rng.integers(256, size=int(rng.integers(0, 40)), dtype=np.uint8))
        try:
            out = codec.decompress(lat, bytes(buf))
        except MalformedMessage:
            continue
        except Exception:
            untyped += 1
            continue
        # accepted messages must be canonical encodings of what they decode to
        accepted_bad += codec.compress(lat, out).to_bytes() != bytes(buf)
    record(12, "golden fixtures byte-exact", exact, f"{len(golden)} files")
    record(12, "fuzzed messages rejected with typed errors", untyped == 0 and accepted_bad == 0,
           f"untyped={untyped}, non-canonical accepted={accepted_bad}")
    assert exact and untyped == 0 and accepted_bad == 0
    assert struct.calcsize("<BHHI") == codec.HEADER.size
