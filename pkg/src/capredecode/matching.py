"""Exact minimum-weight perfect matching of defects and the resulting correction.

The solver kernel is the compiled ``_blossom`` extension when it is
importable, else the pure Python ``_blossom_py`` twin. Setting the
environment variable ``CAPREDECODE_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _blossom_py
from .errors import InvariantViolation, SolverLimitError
from .lattice import CodeLattice
from .noise import edges_to_config, qubit_parity

if os.environ.get("CAPREDECODE_PURE_PYTHON", "") not in ("", "0"):
    _kernel = _blossom_py
    BACKEND = "python"
else:
    try:
        from . import _blossom as _kernel
        BACKEND = "cython"
    except ImportError:  # extension not built
        _kernel = _blossom_py
        BACKEND = "python"

BRUTE_FORCE_LIMIT = 12


def solve_weights(weights, backend: str | None = None) -> np.ndarray:
    """Partner index of each row of a symmetric integer weight matrix."""
    if backend is None:
        kernel = _kernel
    elif backend == "python":
        kernel = _blossom_py
    elif backend == "cython":
        from . import _blossom as kernel
    else:
        raise ValueError(f"unknown backend {backend!r}")
    w = np.asarray(weights, dtype=np.int64)
    if len(w) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.asarray(kernel.solve(w), dtype=np.int64)


@dataclass
class DefectGraph:
    """Complete graph on a defect set with taxicab weights."""

    lattice: CodeLattice
    defects: np.ndarray  # vertex addresses

    def __post_init__(self):
        self.defects = np.asarray(self.defects, dtype=np.int64).ravel()

    @classmethod
    def from_syndrome(cls, lattice: CodeLattice, s) -> DefectGraph:
        return cls(lattice, np.flatnonzero(np.asarray(s, dtype=bool)))

    @property
    def size(self) -> int:
        return len(self.defects)

    @cached_property
    def weights(self) -> np.ndarray:
        return self.lattice.distance_matrix(self.defects)


@dataclass
class Matching:
    pairs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    total_weight: int = 0

    def __len__(self) -> int:
        return len(self.pairs)


def _from_partners(graph: DefectGraph, partner, weights) -> Matching:
    partner = np.asarray(partner, dtype=np.int64)
    idx = np.arange(len(partner))
    if np.any(partner[partner] != idx) or np.any(partner == idx):
        raise InvariantViolation("solver returned an imperfect matching")
    lo = idx[idx < partner]
    hi = partner[lo]
    pairs = np.stack([graph.defects[lo], graph.defects[hi]], axis=1)
    # orient each pair from the lower to the higher address
    pairs.sort(axis=1)
    total = int(weights[lo, hi].sum())
    return Matching(pairs=pairs.reshape(-1, 2), total_weight=total)


def mwpm(graph: DefectGraph, backend: str | None = None) -> Matching:
    """Exact minimum-weight perfect matching of all defects."""
    n = graph.size
    if n % 2:
        raise InvariantViolation(f"odd number of defects ({n}); syndrome parity is broken")
    if n == 0:
        return Matching()
    w = graph.weights
    return _from_partners(graph, solve_weights(w, backend), w)


def timed_mwpm(graph: DefectGraph, backend: str | None = None) -> tuple[Matching, int]:
    """:func:`mwpm` plus the monotonic wall time of weight construction and solve."""
    if graph.size == 0:
        return Matching(), 0
    if graph.size % 2:
        raise InvariantViolation(f"odd number of defects ({graph.size}); syndrome parity is broken")
    t0 = time.perf_counter_ns()
    w = graph.lattice.distance_matrix(graph.defects)
    partner = solve_weights(w, backend)
    elapsed = max(time.perf_counter_ns() - t0, 1)
    return _from_partners(graph, partner, w), elapsed


def brute_force_match(graph: DefectGraph) -> Matching:
    """Minimum over every perfect matching; a test oracle for small graphs."""
    n = graph.size
    if n > BRUTE_FORCE_LIMIT:
        raise SolverLimitError(f"brute force limited to {BRUTE_FORCE_LIMIT} defects, got {n}")
    if n % 2:
        raise InvariantViolation(f"odd number of defects ({n})")
    if n == 0:
        return Matching()
    w = graph.weights.tolist()
    best = [None, None]

    def rec(free, acc, pairs):
        if best[0] is not None and acc >= best[0]:
            return
        if not free:
            best[0], best[1] = acc, list(pairs)
            return
        i = free[0]
        rest = free[1:]
        for k, j in enumerate(rest):
            pairs.append((i, j))
            rec(rest[:k] + rest[k + 1:], acc + w[i][j], pairs)
            pairs.pop()

    rec(list(range(n)), 0, [])
    partner = np.empty(n, dtype=np.int64)
    for i, j in best[1]:
        partner[i], partner[j] = j, i
    return _from_partners(graph, partner, graph.weights)


def matching_edges(lattice: CodeLattice, matching: Matching) -> np.ndarray:
    """Edge set (bool per edge) of the canonical paths of all matched pairs."""
    edges: list[int] = []
    for a, b in matching.pairs:
        edges.extend(lattice.path_edges(int(a), int(b)))
    return edges_to_config(lattice, edges)


def correction_from_matching(lattice: CodeLattice, matching: Matching) -> tuple[np.ndarray, np.ndarray]:
    """Qubit correction bitstring and the time-like edges of the matched paths."""
    cfg = matching_edges(lattice, matching)
    time_edges = np.flatnonzero(cfg[lattice.n_space_edges:]) + lattice.n_space_edges
    return qubit_parity(lattice, cfg), time_edges
