"""Decoding lattice of the rotated toric code with periodic boundaries.

Qubits sit on the integer points ``(qx, qy)`` of a ``d x d`` torus. The
plaquette whose lower-left corner is ``(x, y)`` covers the qubits
``(x, y), (x+1, y), (x, y+1), (x+1, y+1)``; plaquettes with ``x + y`` even
are X-type and are the vertices of the decoding graph. A phase flip on a
qubit toggles the two X-plaquettes that contain it, so space-like edges join
diagonal neighbours ``(x, y) -> (x +- 1, y +- 1)``.

The spacetime lattice repeats the X-plaquettes for ``d`` rounds with a
periodic time direction. Addresses are time-major and row-major in space::

    address(x, y, t) = t * n_stab + y * (d // 2) + x // 2

Edge indices put every space-like edge first
(``t * d**2 + qy * d + qx``) followed by one time-like edge per vertex,
joining ``(x, y, t)`` and ``(x, y, t + 1 mod d)``.
"""

from __future__ import annotations

from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import LatticeError

SPACE = "space"
TIME = "time"


class VertexId(NamedTuple):
    x: int
    y: int
    t: int


class EdgeId(NamedTuple):
    """Human-readable edge description.

    For space-like edges ``(a, b)`` is the qubit; for time-like edges it is
    the stabilizer coordinate and the edge joins rounds ``t`` and ``t + 1``.
    """

    kind: str
    a: int
    b: int
    t: int


def _wrap(delta, d: int):
    """Map displacements into ``(-d/2, d/2]`` (ties at ``d/2`` stay positive)."""
    return (np.asarray(delta) + d // 2 - 1) % d - (d // 2 - 1)


class CodeLattice:
    """Geometry and indexing for a distance-``d`` periodic rotated code.

    Instances are immutable after construction and cheap to share.
    """

    def __init__(self, d: int):
        if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
            raise LatticeError(f"code distance must be an integer, got {d!r}")
        d = int(d)
        if d < 4:
            raise LatticeError(f"code distance must be at least 4, got {d}")
        if d % 2:
            raise LatticeError(
                f"code distance must be even for the periodic rotated code, got {d}"
            )
        self.d = d
        self.half = d // 2
        self.n_qubits = d * d
        self.n_stab = d * d // 2
        self.n_rounds = d
        self.V = self.n_stab * self.n_rounds
        self.n_space_edges = self.n_qubits * self.n_rounds
        self.n_time_edges = self.V
        self.n_edges = self.n_space_edges + self.n_time_edges

        addr = np.arange(self.V)
        t, rank = np.divmod(addr, self.n_stab)
        y, xh = np.divmod(rank, self.half)
        x = 2 * xh + (y & 1)
        self.vx = x.astype(np.int64)
        self.vy = y.astype(np.int64)
        self.vt = t.astype(np.int64)
        self._build_edges()
        for arr in (self.vx, self.vy, self.vt, self.edge_ends, self.incident_edges,
                    self.neighbors):
            arr.setflags(write=False)

    def __repr__(self) -> str:
        return f"CodeLattice(d={self.d})"

    def __eq__(self, other) -> bool:
        return isinstance(other, CodeLattice) and other.d == self.d

    def __hash__(self) -> int:
        return hash(("CodeLattice", self.d))

    # -- addressing -----------------------------------------------------

    def address(self, x, y, t):
        """Vectorised linear address; coordinates are reduced mod ``d``."""
        d = self.d
        x = np.asarray(x) % d
        y = np.asarray(y) % d
        t = np.asarray(t) % d
        if np.any((x + y) & 1):
            raise LatticeError("X-stabilizer coordinates need x + y even")
        return t * self.n_stab + y * self.half + x // 2

    def vertex_address(self, v) -> int:
        x, y, t = v
        if not (0 <= x < self.d and 0 <= y < self.d and 0 <= t < self.n_rounds):
            raise LatticeError(f"vertex {tuple(v)} outside the d={self.d} lattice")
        if (x + y) % 2:
            raise LatticeError(f"vertex {tuple(v)} is not an X-stabilizer (x + y odd)")
        return int(t * self.n_stab + y * self.half + x // 2)

    def address_vertex(self, a: int) -> VertexId:
        if not 0 <= a < self.V:
            raise LatticeError(f"address {a} out of range [0, {self.V})")
        return VertexId(int(self.vx[a]), int(self.vy[a]), int(self.vt[a]))

    def space_edge(self, qx: int, qy: int, t: int) -> int:
        d = self.d
        return int((t % d) * self.n_qubits + (qy % d) * d + (qx % d))

    def time_edge(self, x: int, y: int, t: int) -> int:
        """Time-like edge between rounds ``t`` and ``t + 1`` at stabilizer (x, y)."""
        return int(self.n_space_edges + self.address(x, y, t))

    def describe_edge(self, e: int) -> EdgeId:
        if not 0 <= e < self.n_edges:
            raise LatticeError(f"edge {e} out of range [0, {self.n_edges})")
        if e < self.n_space_edges:
            t, q = divmod(e, self.n_qubits)
            qy, qx = divmod(q, self.d)
            return EdgeId(SPACE, qx, qy, t)
        v = self.address_vertex(e - self.n_space_edges)
        return EdgeId(TIME, v.x, v.y, v.t)

    def is_space_edge(self, e) -> np.ndarray | bool:
        return np.asarray(e) < self.n_space_edges

    # -- incidence ------------------------------------------------------

    def _qubit_plaquettes(self, qx, qy):
        """The two X-plaquettes containing each qubit, as (x, y) pairs."""
        even = ((qx + qy) & 1) == 0
        return qx - 1, np.where(even, qy - 1, qy), qx, np.where(even, qy, qy - 1)

    def _build_edges(self) -> None:
        d = self.d
        e = np.arange(self.n_space_edges)
        t, q = np.divmod(e, self.n_qubits)
        qy, qx = np.divmod(q, d)
        ax, ay, bx, by = self._qubit_plaquettes(qx, qy)
        ends = np.empty((self.n_edges, 2), dtype=np.int64)
        ends[: self.n_space_edges, 0] = self.address(ax, ay, t)
        ends[: self.n_space_edges, 1] = self.address(bx, by, t)
        v = np.arange(self.V)
        ends[self.n_space_edges:, 0] = v
        ends[self.n_space_edges:, 1] = self.address(self.vx, self.vy, self.vt + 1)
        self.edge_ends = ends

        # Each vertex: 4 space edges then the time edge to t+1 and from t-1.
        inc = np.empty((self.V, 6), dtype=np.int64)
        x, y, tt = self.vx, self.vy, self.vt
        # (dx, dy) -> qubit offset of the shared qubit
        for k, (dx, dy) in enumerate(((1, 1), (-1, -1), (1, -1), (-1, 1))):
            oqx = x + (1 if dx == 1 else 0)
            oqy = y + (1 if dy == 1 else 0)
            inc[:, k] = tt * self.n_qubits + (oqy % d) * d + (oqx % d)
        inc[:, 4] = self.n_space_edges + v
        inc[:, 5] = self.n_space_edges + self.address(x, y, tt - 1)
        self.incident_edges = inc
        other = np.where(ends[inc, 0] == v[:, None], ends[inc, 1], ends[inc, 0])
        self.neighbors = other

    def edge_between(self, u, v):
        """Edge index joining adjacent vertex addresses ``u`` and ``v`` (vectorised)."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        d = self.d
        same = (self.vx[u] == self.vx[v]) & (self.vy[u] == self.vy[v])
        dt = (self.vt[v] - self.vt[u]) % d
        time_e = self.n_space_edges + np.where(dt == 1, u, v)
        dx = _wrap(self.vx[v] - self.vx[u], d)
        dy = _wrap(self.vy[v] - self.vy[u], d)
        qx = np.where(dx > 0, self.vx[v], self.vx[u])
        qy = np.where(dy > 0, self.vy[v], self.vy[u])
        space_e = self.vt[u] * self.n_qubits + (qy % d) * d + (qx % d)
        out = np.where(same, time_e, space_e)
        ok = np.where(same, (dt == 1) | (dt == d - 1),
                      (np.abs(dx) == 1) & (np.abs(dy) == 1) & (self.vt[u] == self.vt[v]))
        if not np.all(ok):
            raise LatticeError("edge_between called on non-adjacent vertices")
        return out if out.ndim else int(out)

    # -- metric ---------------------------------------------------------

    def distance(self, u, v) -> int:
        """Taxicab distance between two vertices (addresses or VertexIds)."""
        if not isinstance(u, (int, np.integer)):
            u = self.vertex_address(u)
        if not isinstance(v, (int, np.integer)):
            v = self.vertex_address(v)
        return int(self.distance_matrix(np.array([u]), np.array([v]))[0, 0])

    def distance_matrix(self, a, b=None) -> np.ndarray:
        """Pairwise taxicab distances between address arrays ``a`` and ``b``."""
        a = np.asarray(a, dtype=np.int64)
        b = a if b is None else np.asarray(b, dtype=np.int64)
        d = self.d
        ddx = np.abs((self.vx[a][:, None] - self.vx[b][None, :]) % d)
        ddy = np.abs((self.vy[a][:, None] - self.vy[b][None, :]) % d)
        ddt = np.abs((self.vt[a][:, None] - self.vt[b][None, :]) % d)
        ddx = np.minimum(ddx, d - ddx)
        ddy = np.minimum(ddy, d - ddy)
        ddt = np.minimum(ddt, d - ddt)
        return np.maximum(ddx, ddy) + ddt

    # -- shortest paths -------------------------------------------------

    def path_edges(self, a: int, b: int) -> list[int]:
        """Canonical shortest path from address ``a`` to address ``b``.

        Time displacement first (at the spatial position of ``a``), then the
        surplus of the dominant spatial axis as a zigzag whose minor-axis
        steps alternate ``+1, -1``, then diagonal steps. Each displacement
        takes the minimal wrap; a displacement of exactly ``d/2`` goes in
        the positive direction.
        """
        d = self.d
        x, y, t = int(self.vx[a]), int(self.vy[a]), int(self.vt[a])
        dt = int(_wrap(int(self.vt[b]) - t, d))
        dx = int(_wrap(int(self.vx[b]) - x, d))
        dy = int(_wrap(int(self.vy[b]) - y, d))
        out: list[int] = []
        step = 1 if dt > 0 else -1
        for _ in range(abs(dt)):
            if step > 0:
                out.append(self.time_edge(x, y, t))
            else:
                out.append(self.time_edge(x, y, t - 1))
            t = (t + step) % d
        sx = 1 if dx > 0 else -1
        sy = 1 if dy > 0 else -1
        ax, ay = abs(dx), abs(dy)
        moves: list[tuple[int, int]] = []
        if ax >= ay:
            moves += [(sx, 1 if i % 2 == 0 else -1) for i in range(ax - ay)]
        else:
            moves += [(1 if i % 2 == 0 else -1, sy) for i in range(ay - ax)]
        moves += [(sx, sy)] * min(ax, ay)
        for mx, my in moves:
            qx = x + 1 if mx > 0 else x
            qy = y + 1 if my > 0 else y
            out.append(self.space_edge(qx, qy, t))
            x = (x + mx) % d
            y = (y + my) % d
        return out

    @cached_property
    def cut_x_mask(self) -> np.ndarray:
        """Qubits in column ``qx == 0``; a residual with odd overlap winds in x."""
        m = np.zeros(self.n_qubits, dtype=bool)
        m[np.arange(self.d) * self.d] = True
        return m

    @cached_property
    def cut_y_mask(self) -> np.ndarray:
        """Qubits in row ``qy == 0``; a residual with odd overlap winds in y."""
        m = np.zeros(self.n_qubits, dtype=bool)
        m[: self.d] = True
        return m


def build(d: int) -> CodeLattice:
    return CodeLattice(d)
