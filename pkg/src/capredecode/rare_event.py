"""Rare-event estimation of small failure probabilities by splitting.

A Metropolis-Hastings chain samples fault configurations conditioned on
logical failure at rate ``p``. The mean likelihood ratio of those samples to
a lower rate ``p'`` estimates ``f(p') / f(p)``; multiplying ratios down a
ladder of rates, anchored by direct Monte Carlo, gives ``f`` deep below
threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation
from .evaluation import FailureStats, direct_mc, fails
from .lattice import CodeLattice
from .noise import trial_rng
from .predecoder import PredecoderParams

MAX_LOG_RATIO = 3.0
MAX_RUNG_SE = 0.25  # relative standard error of one rung's ratio
MIN_LOG_STEP = 1e-3


# -- least-weight failing errors --------------------------------------------

def gap_count(n: int, r) -> int:
    """Faults removed from a length-``n`` string so runs of ``r~+1`` survive."""
    params = PredecoderParams.parse(r)
    if not params.enabled:
        return 0
    rt = params.r_tilde
    return max(0, (n - rt - 1) // (rt + 2))


def gapped_string(n: int, r) -> list[int]:
    """Positions kept along a string of ``n`` consecutive faults."""
    params = PredecoderParams.parse(r)
    g = gap_count(n, params)
    if g == 0:
        return list(range(n))
    rt = params.r_tilde
    gaps = {k * (rt + 2) - 1 for k in range(1, g + 1)}
    return [i for i in range(n) if i not in gaps]


def string_error(lattice: CodeLattice, positions, x0: int, y0: int, t0: int, vertical: bool) -> np.ndarray:
    """Space-like faults at ``positions`` along a row (or column) of qubits."""
    err = np.zeros(lattice.n_edges, dtype=bool)
    for i in positions:
        qx, qy = (x0, y0 + i) if vertical else (x0 + i, y0)
        err[lattice.space_edge(qx, qy, t0)] = True
    return err


def construct_failing_error(lattice: CodeLattice, r=0) -> np.ndarray:
    """A failing fault configuration of least weight for the given scheme.

    Starts from half of a non-trivial cycle (``d/2`` faults in one row at one
    time slice), thins it so the pre-decoder bridges every gap, then tries
    translations and both orientations until the pipeline fails.
    """
    params = PredecoderParams.parse(r)
    n = lattice.half
    if n < 2:
        raise ValueError("construction needs d/2 >= 2")
    positions = gapped_string(n, params)
    for vertical in (False, True):
        for y0 in range(2):
            for x0 in range(lattice.d):
                err = string_error(lattice, positions, x0, y0, 0, vertical)
                if fails(lattice, err, params):
                    return err
    raise InvariantViolation(
        f"no translation of the weight-{len(positions)} string fails at d={lattice.d}, r={params.r}"
    )


# -- Metropolis-Hastings over the failing set --------------------------------

@dataclass
class FailingChainState:
    error: np.ndarray
    weight: int
    failing: bool = True

    @classmethod
    def start(cls, lattice: CodeLattice, error: np.ndarray, params) -> FailingChainState:
        error = np.asarray(error, dtype=bool).copy()
        if not fails(lattice, error, params):
            raise InvariantViolation("chain must start from a failing configuration")
        return cls(error=error, weight=int(error.sum()))


def metropolis_step(lattice: CodeLattice, state: FailingChainState, p: float, params,
                    rng: np.random.Generator, max_weight: int | None = None) -> bool:
    """Toggle one random edge; returns whether the move was accepted.

    ``state`` is updated in place. The cheap likelihood test runs before the
    expensive failure check; the resulting kernel is the same.
    """
    e = int(rng.integers(lattice.n_edges))
    delta = -1 if state.error[e] else 1
    if max_weight is not None and state.weight + delta > max_weight:
        return False
    u = rng.random()
    accept = p / (1.0 - p) if delta > 0 else (1.0 - p) / p
    if accept < 1.0 and u >= accept:
        return False
    state.error[e] ^= True
    if fails(lattice, state.error, params):
        state.weight += delta
        return True
    state.error[e] ^= True
    return False


def _advance(lattice: CodeLattice, state: FailingChainState, p: float, params,
             rng: np.random.Generator, steps: int, max_weight: int | None) -> int:
    """``steps`` applications of the :func:`metropolis_step` kernel, batched draws."""
    if steps <= 0:
        return 0
    edges = rng.integers(lattice.n_edges, size=steps)
    us = rng.random(steps)
    up = p / (1.0 - p)
    down = 1.0 / up
    err = state.error
    accepted = 0
    for e, u in zip(edges.tolist(), us.tolist()):
        delta = -1 if err[e] else 1
        if max_weight is not None and state.weight + delta > max_weight:
            continue
        a = up if delta > 0 else down
        if a < 1.0 and u >= a:
            continue
        err[e] ^= True
        if fails(lattice, err, params):
            state.weight += delta
            accepted += 1
        else:
            err[e] ^= True
    return accepted


@dataclass
class ChainConfig:
    samples: int = 1000
    burn_in: float = 10.0  # in units of N_edges steps
    thin: float = 1.0  # in units of N_edges steps
    ess_floor: float = 50.0
    max_weight: int | None = None

    def steps(self, lattice: CodeLattice) -> tuple[int, int]:
        n = lattice.n_edges
        return int(round(self.burn_in * n)), max(1, int(round(self.thin * n)))


@dataclass
class ChainRun:
    p: float
    weights: np.ndarray
    samples: list[np.ndarray] = field(repr=False)
    acceptance: float
    final: FailingChainState = field(repr=False)


def run_chain(lattice: CodeLattice, params, p: float, start: FailingChainState,
              config: ChainConfig, rng: np.random.Generator, keep_samples: bool = False) -> ChainRun:
    params = PredecoderParams.parse(params)
    burn, thin = config.steps(lattice)
    state = FailingChainState(start.error.copy(), start.weight)
    accepted = _advance(lattice, state, p, params, rng, burn, config.max_weight)
    total = burn
    weights = np.empty(config.samples, dtype=np.int64)
    kept = []
    for k in range(config.samples):
        accepted += _advance(lattice, state, p, params, rng, thin, config.max_weight)
        total += thin
        # every retained sample is re-verified before it is used
        if not fails(lattice, state.error, params):
            raise InvariantViolation("chain state stopped failing")
        weights[k] = state.weight
        if keep_samples:
            kept.append(state.error.copy())
    return ChainRun(p=p, weights=weights, samples=kept, acceptance=accepted / max(total, 1),
                    final=state)


# -- ratio estimator ---------------------------------------------------------

def effective_sample_size(x) -> float:
    """ESS from the initial positive sequence of autocorrelations."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 3:
        return float(n)
    x = x - x.mean()
    var = float(np.dot(x, x) / n)
    if var == 0.0:
        return float(n)
    f = np.fft.rfft(x, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n] / (n * var)
    tau = 1.0
    for lag in range(1, n - 1, 2):
        pair = acf[lag] + acf[lag + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(min(n, n / tau))


@dataclass
class RatioEstimate:
    p_from: float
    p_to: float
    estimate: float
    stderr: float
    n: int
    ess: float

    @property
    def log_estimate(self) -> float:
        return math.log(self.estimate)

    @property
    def rel_err(self) -> float:
        return self.stderr / self.estimate


def likelihood_ratio(weights, n_edges: int, p_from: float, p_to: float) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    log_r = w * math.log(p_to / p_from) + (n_edges - w) * math.log1p(-p_to) - (n_edges - w) * math.log1p(-p_from)
    return np.exp(log_r)


def ratio_estimate(weights, n_edges: int, p_from: float, p_to: float) -> RatioEstimate:
    """Estimate ``f(p_to) / f(p_from)`` from failing samples drawn at ``p_from``."""
    w = np.asarray(weights)
    if len(w) == 0:
        raise ValueError("ratio estimate needs at least one sample")
    for q in (p_from, p_to):
        if not 0.0 < q < 0.5:
            raise ValueError(f"rates must lie in (0, 1/2), got {q}")
    if p_from == p_to:
        return RatioEstimate(p_from, p_to, 1.0, 0.0, len(w), float(len(w)))
    vals = likelihood_ratio(w, n_edges, p_from, p_to)
    ess = effective_sample_size(vals)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(ess)) if len(vals) > 1 else float("inf")
    return RatioEstimate(p_from, p_to, est, se, len(w), ess)


# -- ladder ------------------------------------------------------------------

@dataclass
class Rung:
    p: float
    f: float
    log_f: float
    log_se: float
    ratio: RatioEstimate | None = None
    acceptance: float | None = None
    flagged: bool = False


@dataclass
class LadderResult:
    d: int
    r: int | None
    anchor: FailureStats | None
    rungs: list[Rung]

    @property
    def flagged(self) -> bool:
        return any(r.flagged for r in self.rungs)

    def f_at(self, p: float) -> float:
        for rung in self.rungs:
            if math.isclose(rung.p, p, rel_tol=1e-9):
                return rung.f
        raise KeyError(p)


def splitting_ladder(lattice: CodeLattice, params, p_ladder, config: ChainConfig | None = None,
                     seed: int = 0, anchor: FailureStats | None = None, anchor_failures: int = 100,
                     max_log_ratio: float = MAX_LOG_RATIO, max_rung_se: float = MAX_RUNG_SE,
                     warm_start: bool = False) -> LadderResult:
    """Failure probability at every rate of a descending ladder.

    Rungs are inserted geometrically whenever one ratio exceeds
    ``exp(max_log_ratio)`` in either direction or its relative standard
    error exceeds ``max_rung_se``, so the returned rungs may be a superset
    of ``p_ladder``.

    Every chain starts from the least-weight construction. With
    ``warm_start`` a chain continues from the previous chain's final state
    instead, which can leave low-rate chains stuck above the least weight.
    """
    params = PredecoderParams.parse(params)
    config = config or ChainConfig()
    ladder = [float(p) for p in p_ladder]
    if not ladder:
        raise ValueError("empty ladder")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be strictly descending")
    if anchor is None:
        anchor = direct_mc(lattice, ladder[0], params, min_failures=anchor_failures, seed=seed)
    if not anchor.failures:
        raise ValueError("anchor run saw no failures")
    log_f = math.log(anchor.f)
    log_var = (anchor.stderr / anchor.f) ** 2
    rungs = [Rung(ladder[0], anchor.f, log_f, math.sqrt(log_var))]
    origin = FailingChainState.start(lattice, construct_failing_error(lattice, params), params)
    state = origin
    rng = trial_rng(seed, 1_000_003)
    targets = ladder[1:]
    p_cur = ladder[0]
    while targets:
        run = run_chain(lattice, params, p_cur, state, config, rng)
        state = run.final if warm_start else origin
        p_next = targets[0]
        est = ratio_estimate(run.weights, lattice.n_edges, p_cur, p_next)
        while ((abs(math.log(est.estimate)) > max_log_ratio or est.rel_err > max_rung_se)
               and math.log(p_cur / p_next) > MIN_LOG_STEP):
            p_next = math.sqrt(p_cur * p_next)
            est = ratio_estimate(run.weights, lattice.n_edges, p_cur, p_next)
        if math.isclose(p_next, targets[0]):
            targets.pop(0)
        log_f += math.log(est.estimate)
        log_var += est.rel_err ** 2
        rungs.append(Rung(
            p=p_next, f=math.exp(log_f), log_f=log_f, log_se=math.sqrt(log_var),
            ratio=est, acceptance=run.acceptance, flagged=est.ess < config.ess_floor,
        ))
        p_cur = p_next
    return LadderResult(d=lattice.d, r=params.r, anchor=anchor, rungs=rungs)
