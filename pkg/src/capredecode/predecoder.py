"""Local greedy pre-decoder and its isolation-radius generalisation.

Every edge whose two endpoints are (isolated) defects is matched, all in one
concurrent step. With ``r = 0`` every defect counts as isolated. For
``r > 0`` a defect only takes part if the taxicab ball of radius ``r`` around
it holds at most two defects. ``r = None`` stands for an infinite radius,
i.e. the pre-decoder is switched off.

All sums are mod 2: a defect touched by an even number of matched edges is
left in place, one touched an odd number of times is removed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LatticeError
from .lattice import CodeLattice
from .noise import qubit_parity, syndrome_of

_CHUNK = 2048


@dataclass(frozen=True)
class PredecoderParams:
    """Isolation radius; ``None`` means infinity (MWPM only)."""

    r: int | None = 0

    def __post_init__(self):
        if self.r is not None and (int(self.r) != self.r or self.r < 0):
            raise ValueError(f"isolation radius must be a non-negative integer or None, got {self.r!r}")

    @property
    def enabled(self) -> bool:
        return self.r is not None

    @property
    def r_tilde(self) -> int:
        if self.r is None:
            raise ValueError("r_tilde is undefined for the disabled pre-decoder")
        return max(self.r, 1)

    @property
    def label(self) -> str:
        return "mwpm" if self.r is None else f"pre{self.r}"

    @classmethod
    def parse(cls, text) -> PredecoderParams:
        """Accept ``None``/``inf``/``none``/``mwpm`` or an integer radius."""
        if isinstance(text, PredecoderParams):
            return text
        if text is None:
            return cls(None)
        if isinstance(text, (int, np.integer)):
            return cls(int(text))
        t = str(text).strip().lower()
        if t in ("none", "inf", "infinity", "mwpm", "off"):
            return cls(None)
        return cls(int(t))


@dataclass
class PredecodeOutcome:
    matched_edges: np.ndarray  # bool per edge
    modified_syndrome: np.ndarray  # bool per vertex
    qubit_correction: np.ndarray  # bool per qubit
    isolated: np.ndarray  # bool per vertex, the masked syndrome


def _ball_counts(lattice: CodeLattice, defects: np.ndarray, r: int) -> np.ndarray:
    counts = np.empty(len(defects), dtype=np.int64)
    for lo in range(0, len(defects), _CHUNK):
        block = lattice.distance_matrix(defects[lo:lo + _CHUNK], defects)
        counts[lo:lo + _CHUNK] = (block <= r).sum(axis=1)
    return counts


def isolation_mask(lattice: CodeLattice, s: np.ndarray, r: int) -> np.ndarray:
    """Syndrome restricted to defects with at most two defects within radius ``r``."""
    if r is None:
        raise ValueError("isolation mask needs a finite radius")
    s = np.asarray(s, dtype=bool)
    if r == 0:
        return s.copy()
    defects = np.flatnonzero(s)
    keep = np.zeros_like(s)
    if len(defects):
        keep[defects[_ball_counts(lattice, defects, r) <= 2]] = True
    return keep


def predecode(lattice: CodeLattice, s: np.ndarray, params=0) -> PredecodeOutcome:
    """One concurrent round of greedy nearest-neighbour matching.

    ``params`` may be a :class:`PredecoderParams` or a bare radius.
    """
    params = PredecoderParams.parse(params)
    s = np.asarray(s, dtype=bool)
    if s.shape != (lattice.V,):
        raise ValueError(f"syndrome has shape {s.shape}, expected ({lattice.V},)")
    if not params.enabled:
        return PredecodeOutcome(
            matched_edges=np.zeros(lattice.n_edges, dtype=bool),
            modified_syndrome=s.copy(),
            qubit_correction=np.zeros(lattice.n_qubits, dtype=bool),
            isolated=np.zeros_like(s),
        )
    st = isolation_mask(lattice, s, params.r)
    ends = lattice.edge_ends
    matched = st[ends[:, 0]] & st[ends[:, 1]]
    # s'_v = s_v + st_v * (sum of st over the 6 lattice neighbours), mod 2
    nb = st[lattice.neighbors].sum(axis=1)
    modified = s ^ (st & (nb & 1).astype(bool))
    return PredecodeOutcome(
        matched_edges=matched,
        modified_syndrome=modified,
        qubit_correction=qubit_parity(lattice, matched),
        isolated=st,
    )


def isolation_volume(r: int) -> int:
    """Closed-form isolation volume, counted in fault locations."""
    if r is None or r < 0:
        raise ValueError("isolation volume needs a finite non-negative radius")
    rt = max(int(r), 1)
    return 4 * (rt + 1) ** 3 + 6 * (rt + 1) ** 2 + 1


def min_distance_for_radius(r: int) -> int:
    """Smallest even ``d`` for which radius-``r`` enumeration cannot self-wrap."""
    d = 4 * r + 10
    return d + (d % 2)


def enumerate_disruptors(lattice: CodeLattice, e0: int, r: int) -> set[int]:
    """All edges ``e1 != e0`` whose fault stops a single fault on ``e0`` being cleaned up.

    "Cleaned up" means the pre-decoder leaves no defect behind for the pair
    ``{e0, e1}``. The isolation volume counts these edges plus ``e0`` itself.
    """
    if r is None:
        raise ValueError("disruptors are only defined for a finite radius")
    if lattice.d < min_distance_for_radius(r):
        raise LatticeError(
            f"d={lattice.d} too small for radius {r}: need d >= {min_distance_for_radius(r)}"
        )
    if not 0 <= e0 < lattice.n_edges:
        raise LatticeError(f"edge {e0} out of range")
    out = set()
    base = np.zeros(lattice.n_edges, dtype=bool)
    base[e0] = True
    for e1 in range(lattice.n_edges):
        if e1 == e0:
            continue
        base[e1] = True
        s = syndrome_of(lattice, base)
        base[e1] = False
        if predecode(lattice, s, r).modified_syndrome.any():
            out.add(e1)
    return out


def counted_isolation_volume(lattice: CodeLattice, e0: int, r: int) -> int:
    """Isolation volume by enumeration (disruptors plus the fault itself)."""
    return len(enumerate_disruptors(lattice, e0, r)) + 1


def residual_after(lattice: CodeLattice, error: np.ndarray, outcome: PredecodeOutcome) -> np.ndarray:
    """Error left on the lattice after applying the pre-decoder's matched edges."""
    return np.asarray(error, dtype=bool) ^ outcome.matched_edges

