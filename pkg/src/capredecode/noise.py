"""Phenomenological phase-flip noise with faulty measurements.

Errors are bit-vectors over the edges of the decoding lattice (space-like
edges are phase flips, time-like edges are measurement errors). Syndrome
histories are bit-vectors over its vertices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import CodeLattice


@dataclass(frozen=True)
class NoiseParams:
    """Phase-flip rate ``p``; the measurement error rate is tied to it."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"error rate must lie in [0, 1], got {self.p}")

    @property
    def p_m(self) -> float:
        return self.p


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trial ``index`` of a run seeded with ``seed``.

    Streams depend only on ``(seed, index)``, so any partition of the trials
    across workers reproduces the same samples.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def empty_error(lattice: CodeLattice) -> np.ndarray:
    return np.zeros(lattice.n_edges, dtype=bool)


def sample_error(lattice: CodeLattice, params, rng: np.random.Generator) -> np.ndarray:
    """Set every edge independently with probability ``p``."""
    p = params.p if isinstance(params, NoiseParams) else float(params)
    if p <= 0.0:
        return empty_error(lattice)
    if p >= 1.0:
        return np.ones(lattice.n_edges, dtype=bool)
    return rng.random(lattice.n_edges) < p


def syndrome_of(lattice: CodeLattice, error: np.ndarray) -> np.ndarray:
    """Boundary of an edge set: vertex bit = parity of incident faulty edges."""
    error = np.asarray(error, dtype=bool)
    if error.shape != (lattice.n_edges,):
        raise ValueError(
            f"error config has shape {error.shape}, expected ({lattice.n_edges},)"
        )
    ends = lattice.edge_ends[error].ravel()
    counts = np.bincount(ends, minlength=lattice.V)
    return (counts & 1).astype(bool)


def syndrome_of_edges(lattice: CodeLattice, edges) -> np.ndarray:
    """Like :func:`syndrome_of` but from a list of edge indices (repeats cancel)."""
    edges = np.asarray(edges, dtype=np.int64)
    counts = np.bincount(lattice.edge_ends[edges].ravel(), minlength=lattice.V)
    return (counts & 1).astype(bool)


def edges_to_config(lattice: CodeLattice, edges) -> np.ndarray:
    """XOR a list of edge indices into an error config."""
    counts = np.bincount(np.asarray(edges, dtype=np.int64), minlength=lattice.n_edges)
    return (counts & 1).astype(bool)


def qubit_parity(lattice: CodeLattice, error: np.ndarray) -> np.ndarray:
    """Net phase flip per qubit: parity over rounds of space-like faults."""
    space = np.asarray(error[: lattice.n_space_edges], dtype=np.uint8)
    return (space.reshape(lattice.n_rounds, lattice.n_qubits).sum(axis=0) & 1).astype(bool)
