"""Two-stage decoding pipeline, logical-failure check and direct Monte Carlo.

One trial: sample faults, extract the syndrome history, pre-decode (unless
the radius is infinite), ship the remaining defects through the wire codec,
match them exactly, then check that error plus both corrections has an empty
syndrome and whether it winds around the torus.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import codec
from .errors import InvariantViolation
from .lattice import CodeLattice
from .matching import DefectGraph, matching_edges, timed_mwpm
from .noise import qubit_parity, sample_error, syndrome_of, trial_rng
from .predecoder import PredecoderParams, predecode

BLOCK = 64
DEFAULT_MIN_FAILURES = 10
DEFAULT_MAX_TRIALS = 10**7
WORKERS_ENV = "CAPREDECODE_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class TrialRecord:
    failure_x: bool
    failure_y: bool
    defects_raw: int
    defects_after_predecode: int
    matcher_time_ns: int
    ideal_bits: int
    model16_bits: int
    seed: int | None = None
    index: int | None = None

    @property
    def failed(self) -> bool:
        return self.failure_x or self.failure_y


def logical_failure(lattice: CodeLattice, qubit_flips: np.ndarray) -> tuple[bool, bool]:
    """Winding parities (x, y) of a residual Z operator with empty syndrome."""
    q = np.asarray(qubit_flips, dtype=bool)
    if q.shape != (lattice.n_qubits,):
        raise ValueError(f"qubit vector has shape {q.shape}, expected ({lattice.n_qubits},)")
    # the first n_qubits space edges are the qubits at round 0
    ends = lattice.edge_ends[: lattice.n_qubits][q].ravel()
    if np.any(np.bincount(ends, minlength=lattice.n_stab) & 1):
        raise InvariantViolation("residual operator has a non-empty syndrome")
    fx = bool(np.count_nonzero(q & lattice.cut_x_mask) & 1)
    fy = bool(np.count_nonzero(q & lattice.cut_y_mask) & 1)
    return fx, fy


def decode(lattice: CodeLattice, error: np.ndarray, params=None, wire: bool = True) -> TrialRecord:
    """Run the full scheme on a given fault configuration.

    ``wire=False`` skips the codec round trip and bandwidth accounting; the
    failure verdict is the same.
    """
    params = PredecoderParams.parse(params)
    error = np.asarray(error, dtype=bool)
    s = syndrome_of(lattice, error)
    raw = int(np.count_nonzero(s))
    residual = error.copy()
    if params.enabled:
        out = predecode(lattice, s, params)
        remaining = out.modified_syndrome
        residual ^= out.matched_edges
    else:
        remaining = s
    if wire:
        msg = codec.compress(lattice, remaining)
        received = codec.decompress(lattice, msg.to_bytes())
        if not np.array_equal(received, remaining):
            raise InvariantViolation("codec round trip changed the syndrome")
    else:
        msg, received = None, remaining
    graph = DefectGraph.from_syndrome(lattice, received)
    matching, elapsed = timed_mwpm(graph)
    if len(matching):
        residual ^= matching_edges(lattice, matching)
    if np.any(syndrome_of(lattice, residual)):
        raise InvariantViolation("combined correction leaves defects behind")
    fx, fy = logical_failure(lattice, qubit_parity(lattice, residual))
    bw = codec.bandwidth_report(lattice, msg) if wire else None
    return TrialRecord(
        failure_x=fx,
        failure_y=fy,
        defects_raw=raw,
        defects_after_predecode=graph.size,
        matcher_time_ns=elapsed,
        ideal_bits=bw.ideal_bits if bw else 0,
        model16_bits=bw.model16_bits if bw else 0,
    )


def fails(lattice: CodeLattice, error: np.ndarray, params=None) -> bool:
    """Failure verdict of the full scheme (wire format skipped)."""
    return decode(lattice, error, params, wire=False).failed


def run_trial(lattice: CodeLattice, p: float, params, rng: np.random.Generator,
              seed: int | None = None, index: int | None = None) -> TrialRecord:
    rec = decode(lattice, sample_error(lattice, p, rng), params)
    rec.seed = seed
    rec.index = index
    return rec


# -- direct Monte Carlo -----------------------------------------------------

@dataclass
class DefectStats:
    trials: int
    volume: int  # fault locations
    counts: np.ndarray = field(repr=False)

    @property
    def mean(self) -> float:
        return float(np.mean(self.counts)) if self.trials else 0.0

    @property
    def density(self) -> float:
        """Mean defects per fault location."""
        return self.mean / self.volume

    @property
    def histogram(self) -> dict[int, int]:
        vals, cnt = np.unique(self.counts, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}


@dataclass
class FailureStats:
    d: int
    p: float
    r: int | None
    trials: int
    failures: int
    failures_x: int
    failures_y: int
    stopped_on: str  # "failures" or "max_trials"
    raw: DefectStats | None = field(default=None, repr=False)
    after: DefectStats | None = field(default=None, repr=False)
    matcher_time_ns: np.ndarray | None = field(default=None, repr=False)

    @property
    def f(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def stderr(self) -> float:
        if not self.trials:
            return 0.0
        f = self.f
        return math.sqrt(f * (1.0 - f) / self.trials)

    @property
    def upper_bound(self) -> float | None:
        """95% upper bound when no failure was seen (rule of three), else None."""
        if self.failures == 0 and self.trials:
            return 3.0 / self.trials
        return None

    @property
    def log_f(self) -> float:
        return math.log(self.f) if self.failures else float("-inf")


def _run_block(d: int, p: float, r, seed: int, start: int, stop: int) -> np.ndarray:
    lattice = CodeLattice(d)
    params = PredecoderParams(r)
    out = np.zeros((stop - start, 5), dtype=np.int64)
    for k, i in enumerate(range(start, stop)):
        rec = run_trial(lattice, p, params, trial_rng(seed, i))
        out[k] = (rec.failure_x, rec.failure_y, rec.defects_raw,
                  rec.defects_after_predecode, rec.matcher_time_ns)
    return out


def direct_mc(lattice: CodeLattice, p: float, params=None, min_failures: int = DEFAULT_MIN_FAILURES,
              max_trials: int = DEFAULT_MAX_TRIALS, seed: int = 0, workers: int | None = None,
              block: int = BLOCK) -> FailureStats:
    """Run trials until ``min_failures`` either-axis failures or ``max_trials``.

    Trial ``i`` always uses the stream ``(seed, i)`` and the run is cut at
    the exact trial that produced the last required failure, so the result
    does not depend on ``workers`` or ``block``.
    """
    if min_failures < 1 or max_trials < 1:
        raise ValueError("stop criteria must be positive")
    params = PredecoderParams.parse(params)
    workers = default_workers() if workers is None else max(1, int(workers))
    rows: list[np.ndarray] = []
    nfail = 0
    start = 0
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        while start < max_trials and nfail < min_failures:
            spans = []
            for _ in range(workers):
                if start >= max_trials:
                    break
                stop = min(start + block, max_trials)
                spans.append((start, stop))
                start = stop
            args = [(lattice.d, p, params.r, seed, a, b) for a, b in spans]
            if pool is None:
                blocks = [_run_block(*a) for a in args]
            else:
                blocks = list(pool.map(_run_block, *zip(*args)))
            for blk in blocks:
                if nfail >= min_failures:
                    break
                either = (blk[:, 0] | blk[:, 1]).astype(bool)
                need = min_failures - nfail
                hits = np.flatnonzero(either)
                if len(hits) >= need:
                    blk = blk[: hits[need - 1] + 1]
                    nfail = min_failures
                else:
                    nfail += len(hits)
                rows.append(blk)
    finally:
        if pool is not None:
            pool.shutdown()
    data = np.concatenate(rows) if rows else np.zeros((0, 5), dtype=np.int64)
    either = (data[:, 0] | data[:, 1]).astype(bool)
    n_edges = lattice.n_edges
    return FailureStats(
        d=lattice.d,
        p=float(p),
        r=params.r,
        trials=len(data),
        failures=int(either.sum()),
        failures_x=int(data[:, 0].sum()),
        failures_y=int(data[:, 1].sum()),
        stopped_on="failures" if either.sum() >= min_failures else "max_trials",
        raw=DefectStats(len(data), n_edges, data[:, 2].copy()),
        after=DefectStats(len(data), n_edges, data[:, 3].copy()),
        matcher_time_ns=data[:, 4].copy(),
    )


# -- defect statistics ------------------------------------------------------

def defect_counts(lattice: CodeLattice, p: float, params, trials: int, seed: int = 0
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Defect counts before and after pre-decoding (no matching step)."""
    params = PredecoderParams.parse(params)
    raw = np.empty(trials, dtype=np.int64)
    after = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        s = syndrome_of(lattice, sample_error(lattice, p, trial_rng(seed, i)))
        raw[i] = np.count_nonzero(s)
        if params.enabled:
            after[i] = np.count_nonzero(predecode(lattice, s, params).modified_syndrome)
        else:
            after[i] = raw[i]
    return raw, after


@dataclass
class DensityFit:
    """Least-squares line ``mean(M) = rho_hat * volume + intercept``.

    ``volume`` counts fault locations (edges of the decoding lattice).
    """

    p: float
    r: int | None
    rho_hat: float
    intercept: float
    volumes: np.ndarray
    means: np.ndarray
    residuals: np.ndarray
    trials: int

    @property
    def rho_per_vertex(self) -> float:
        """Same slope expressed per syndrome vertex (three edges per vertex)."""
        return 3.0 * self.rho_hat


def defect_density(lattices, p: float, params, trials: int, seed: int = 0) -> DensityFit:
    lattices = list(lattices)
    if len({lat.d for lat in lattices}) < 2:
        raise ValueError("density fit needs at least two distinct lattice sizes")
    params = PredecoderParams.parse(params)
    vols = np.array([lat.n_edges for lat in lattices], dtype=float)
    means = np.empty(len(lattices))
    for k, lat in enumerate(lattices):
        _, after = defect_counts(lat, p, params, trials, seed=seed + k)
        means[k] = after.mean()
    A = np.stack([vols, np.ones_like(vols)], axis=1)
    coef, *_ = np.linalg.lstsq(A, means, rcond=None)
    return DensityFit(
        p=float(p),
        r=params.r,
        rho_hat=float(coef[0]),
        intercept=float(coef[1]),
        volumes=vols,
        means=means,
        residuals=means - A @ coef,
        trials=trials,
    )
