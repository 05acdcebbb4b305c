# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled twin of ``_blossom_py``: minimum-weight perfect matching.

The algorithm, encodings and control flow are identical to the pure Python
kernel; the per-vertex state lives in typed int64 arrays so the scanning and
dual-update loops run at C speed. Blossom child lists stay Python lists.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef long long i64


cdef class _Matcher:
    cdef Py_ssize_t n
    cdef i64[:, ::1] w
    cdef i64[::1] mate, label, labelend, inblossom, blossomparent
    cdef i64[::1] blossombase, bestedge, dualvar
    cdef list blossomchilds, blossomendps, blossombestedges, unusedblossoms, queue

    def __init__(self, weights):
        cdef Py_ssize_t n = weights.shape[0]
        self.n = n
        self.w = np.ascontiguousarray(weights, dtype=np.int64)
        self.mate = np.full(n, -1, dtype=np.int64)
        self.label = np.zeros(2 * n, dtype=np.int64)
        self.labelend = np.full(2 * n, -1, dtype=np.int64)
        self.inblossom = np.arange(n, dtype=np.int64)
        self.blossomparent = np.full(2 * n, -1, dtype=np.int64)
        base = np.full(2 * n, -1, dtype=np.int64)
        base[:n] = np.arange(n)
        self.blossombase = base
        self.bestedge = np.full(2 * n, -1, dtype=np.int64)
        self.dualvar = np.zeros(2 * n, dtype=np.int64)
        self.blossomchilds = [None] * (2 * n)
        self.blossomendps = [None] * (2 * n)
        self.blossombestedges = [None] * (2 * n)
        self.unusedblossoms = list(range(2 * n - 1, n - 1, -1))
        self.queue = []

    # -- helpers --------------------------------------------------------

    cdef inline i64 flip(self, i64 p):
        return (p % self.n) * self.n + p // self.n

    cdef inline i64 slack(self, i64 p):
        cdef i64 i = p // self.n
        cdef i64 j = p % self.n
        return self.dualvar[i] + self.dualvar[j] + 2 * self.w[i, j]

    cdef list leaves(self, i64 b):
        cdef Py_ssize_t n = self.n
        if b < n:
            return [b]
        cdef list out = []
        cdef list stack = [b]
        cdef i64 t
        while stack:
            t = stack.pop()
            if t < n:
                out.append(t)
            else:
                stack.extend(self.blossomchilds[t])
        return out

    # -- tree growing ---------------------------------------------------

    cdef void assign_label(self, i64 w, i64 t, i64 p):
        cdef i64 b, m
        while True:
            b = self.inblossom[w]
            self.label[w] = t
            self.label[b] = t
            self.labelend[w] = p
            self.labelend[b] = p
            self.bestedge[w] = -1
            self.bestedge[b] = -1
            if t == 1:
                self.queue.extend(self.leaves(b))
                return
            m = self.mate[self.blossombase[b]]
            w = m % self.n
            t = 1
            p = self.flip(m)

    cdef i64 scan_blossom(self, i64 v, i64 w):
        cdef i64 n = self.n
        cdef list path = []
        cdef i64 base = -1
        cdef i64 b, tmp
        while v != -1 or w != -1:
            b = self.inblossom[v]
            if self.label[b] & 4:
                base = self.blossombase[b]
                break
            path.append(b)
            self.label[b] = 5
            if self.labelend[b] == -1:
                v = -1
            else:
                v = self.labelend[b] % n
                b = self.inblossom[v]
                v = self.labelend[b] % n
            if w != -1:
                tmp = v
                v = w
                w = tmp
        for b in path:
            self.label[b] = 1
        return base

    cdef void add_blossom(self, i64 base, i64 v, i64 w):
        cdef i64 n = self.n
        cdef i64 connect = w * n + v
        cdef i64 bb = self.inblossom[base]
        cdef i64 bv = self.inblossom[v]
        cdef i64 bw = self.inblossom[w]
        cdef i64 b = self.unusedblossoms.pop()
        cdef i64 i, j, p, q, bj, sub, x, best
        self.blossombase[b] = base
        self.blossomparent[b] = -1
        self.blossomparent[bb] = b
        cdef list path = []
        cdef list endps = []
        while bv != bb:
            self.blossomparent[bv] = b
            path.append(bv)
            endps.append(self.labelend[bv])
            v = self.labelend[bv] % n
            bv = self.inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(connect)
        while bw != bb:
            self.blossomparent[bw] = b
            path.append(bw)
            endps.append(self.flip(self.labelend[bw]))
            w = self.labelend[bw] % n
            bw = self.inblossom[w]
        self.blossomchilds[b] = path
        self.blossomendps[b] = endps
        self.label[b] = 1
        self.labelend[b] = self.labelend[bb]
        self.dualvar[b] = 0
        for x in self.leaves(b):
            if self.label[self.inblossom[x]] == 2:
                self.queue.append(x)
            self.inblossom[x] = b
        cdef dict bestto = {}
        cdef list cand
        for sub in path:
            cand = self.blossombestedges[sub]
            if cand is None:
                cand = [i * n + j for i in self.leaves(sub) for j in range(n) if j != i]
            for p in cand:
                i = p // n
                j = p % n
                if self.inblossom[j] == b:
                    i, j = j, i
                    p = i * n + j
                bj = self.inblossom[j]
                if bj != b and self.label[bj] == 1:
                    q = bestto.get(bj, -1)
                    if q == -1 or self.slack(p) < self.slack(q):
                        bestto[bj] = p
            self.blossombestedges[sub] = None
            self.bestedge[sub] = -1
        cdef list best_list = list(bestto.values())
        self.blossombestedges[b] = best_list
        best = -1
        for p in best_list:
            if best == -1 or self.slack(p) < self.slack(best):
                best = p
        self.bestedge[b] = best

    cdef void expand_blossom(self, i64 b, bint endstage):
        cdef i64 n = self.n
        cdef list childs = self.blossomchilds[b]
        cdef list endps
        cdef i64 s, x, L, entrychild, j, jstep, trick, p, q, bv, hit, v
        for s in childs:
            self.blossomparent[s] = -1
            if s < n:
                self.inblossom[s] = s
            elif endstage and self.dualvar[s] == 0:
                self.expand_blossom(s, endstage)
            else:
                for x in self.leaves(s):
                    self.inblossom[x] = s
        if not endstage and self.label[b] == 2:
            L = len(childs)
            endps = self.blossomendps[b]
            entrychild = self.inblossom[self.flip(self.labelend[b]) % n]
            j = childs.index(entrychild)
            if j & 1:
                j -= L
                jstep = 1
                trick = 0
            else:
                jstep = -1
                trick = 1
            p = self.labelend[b]
            while j != 0:
                if trick:
                    q = self.flip(endps[(j - 1) % L])
                else:
                    q = endps[j % L]
                self.label[self.flip(p) % n] = 0
                self.label[self.flip(q) % n] = 0
                self.assign_label(self.flip(p) % n, 2, p)
                j += jstep
                if trick:
                    p = self.flip(endps[(j - 1) % L])
                else:
                    p = endps[j % L]
                j += jstep
            bv = childs[j % L]
            x = self.flip(p) % n
            self.label[x] = 2
            self.label[bv] = 2
            self.labelend[x] = p
            self.labelend[bv] = p
            self.bestedge[bv] = -1
            j += jstep
            while childs[j % L] != entrychild:
                bv = childs[j % L]
                if self.label[bv] == 1:
                    j += jstep
                    continue
                hit = -1
                for v in self.leaves(bv):
                    if self.label[v] != 0:
                        hit = v
                        break
                if hit != -1:
                    self.label[hit] = 0
                    self.label[self.mate[self.blossombase[bv]] % n] = 0
                    self.assign_label(hit, 2, self.labelend[hit])
                j += jstep
        self.label[b] = -1
        self.labelend[b] = -1
        self.blossomchilds[b] = None
        self.blossomendps[b] = None
        self.blossombase[b] = -1
        self.blossombestedges[b] = None
        self.bestedge[b] = -1
        self.unusedblossoms.append(b)

    cdef void augment_blossom(self, i64 b, i64 v):
        cdef i64 n = self.n
        cdef i64 t = v
        cdef i64 i, j, L, jstep, trick, p
        while self.blossomparent[t] != b:
            t = self.blossomparent[t]
        if t >= n:
            self.augment_blossom(t, v)
        cdef list childs = self.blossomchilds[b]
        cdef list endps = self.blossomendps[b]
        L = len(childs)
        i = childs.index(t)
        j = i
        if i & 1:
            j -= L
            jstep = 1
            trick = 0
        else:
            jstep = -1
            trick = 1
        while j != 0:
            j += jstep
            t = childs[j % L]
            if trick:
                p = self.flip(endps[(j - 1) % L])
            else:
                p = endps[j % L]
            if t >= n:
                self.augment_blossom(t, p % n)
            j += jstep
            t = childs[j % L]
            if t >= n:
                self.augment_blossom(t, self.flip(p) % n)
            self.mate[self.flip(p) % n] = p
            self.mate[p % n] = self.flip(p)
        self.blossomchilds[b] = childs[i:] + childs[:i]
        self.blossomendps[b] = endps[i:] + endps[:i]
        self.blossombase[b] = self.blossombase[childs[i]]

    cdef void augment_matching(self, i64 v, i64 w):
        cdef i64 n = self.n
        cdef i64 s, p, bs, t, bt, j, k
        for k in range(2):
            if k == 0:
                s = v
                p = v * n + w
            else:
                s = w
                p = w * n + v
            while True:
                bs = self.inblossom[s]
                if bs >= n:
                    self.augment_blossom(bs, s)
                self.mate[s] = p
                if self.labelend[bs] == -1:
                    break
                t = self.labelend[bs] % n
                bt = self.inblossom[t]
                s = self.labelend[bt] % n
                j = self.flip(self.labelend[bt]) % n
                if bt >= n:
                    self.augment_blossom(bt, j)
                self.mate[j] = self.labelend[bt]
                p = self.flip(self.labelend[bt])

    # -- driver ---------------------------------------------------------

    cdef void greedy_init(self):
        cdef i64 n = self.n
        cdef i64 i, j, c, best, arg, lo
        for i in range(n):
            lo = -1
            for j in range(n):
                if j != i and (lo == -1 or self.w[i, j] < lo):
                    lo = self.w[i, j]
            self.dualvar[i] = -lo
        for i in range(n):
            if self.mate[i] != -1:
                continue
            arg = -1
            best = 0
            for j in range(n):
                if j == i:
                    continue
                c = -2 * self.w[i, j] - self.dualvar[j]
                if arg == -1 or c > best or (c == best and self.mate[arg] != -1 and self.mate[j] == -1):
                    best = c
                    arg = j
            self.dualvar[i] = best
            if self.mate[arg] == -1:
                self.mate[i] = i * n + arg
                self.mate[arg] = arg * n + i

    cdef int run_stage(self, i64 root) except -1:
        cdef i64 n = self.n
        cdef i64 i, j, v, x, bv, bx, kslack, lx, p, be, base, dv, b
        cdef i64 deltatype, delta, deltaedge, deltablossom, dd, lb
        for i in range(2 * n):
            self.label[i] = 0
            self.bestedge[i] = -1
        for i in range(n, 2 * n):
            self.blossombestedges[i] = None
        self.queue = []
        self.assign_label(root, 1, -1)
        while True:
            while self.queue:
                v = self.queue.pop()
                dv = self.dualvar[v]
                for x in range(n):
                    if x == v:
                        continue
                    bv = self.inblossom[v]
                    bx = self.inblossom[x]
                    if bv == bx:
                        continue
                    kslack = dv + self.dualvar[x] + 2 * self.w[v, x]
                    lx = self.label[bx]
                    p = v * n + x
                    if kslack <= 0:
                        if lx == 0:
                            if self.mate[self.blossombase[bx]] == -1:
                                self.label[bx] = 1
                                self.labelend[bx] = -1
                                self.augment_matching(v, x)
                                return 0
                            self.assign_label(x, 2, self.flip(p))
                        elif lx == 1:
                            base = self.scan_blossom(v, x)
                            if base >= 0:
                                self.add_blossom(base, v, x)
                            else:
                                self.augment_matching(v, x)
                                return 0
                        elif self.label[x] == 0:
                            self.label[x] = 2
                            self.labelend[x] = self.flip(p)
                    elif lx == 1:
                        be = self.bestedge[bv]
                        if be == -1 or kslack < self.slack(be):
                            self.bestedge[bv] = p
                    elif self.label[x] == 0:
                        be = self.bestedge[x]
                        if be == -1 or kslack < self.slack(be):
                            self.bestedge[x] = p
            deltatype = -1
            delta = 0
            deltaedge = -1
            deltablossom = -1
            for v in range(n):
                if self.label[self.inblossom[v]] == 0 and self.bestedge[v] != -1:
                    dd = self.slack(self.bestedge[v])
                    if deltatype == -1 or dd < delta:
                        delta = dd
                        deltatype = 2
                        deltaedge = self.bestedge[v]
            for b in range(2 * n):
                if self.blossomparent[b] == -1 and self.label[b] == 1 and self.bestedge[b] != -1:
                    dd = self.slack(self.bestedge[b]) // 2
                    if deltatype == -1 or dd < delta:
                        delta = dd
                        deltatype = 3
                        deltaedge = self.bestedge[b]
            for b in range(n, 2 * n):
                if (self.blossombase[b] >= 0 and self.blossomparent[b] == -1
                        and self.label[b] == 2 and (deltatype == -1 or self.dualvar[b] < delta)):
                    delta = self.dualvar[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                raise RuntimeError("blossom solver stalled: no perfect matching exists")
            for v in range(n):
                lb = self.label[self.inblossom[v]]
                if lb == 1:
                    self.dualvar[v] -= delta
                elif lb == 2:
                    self.dualvar[v] += delta
            for b in range(n, 2 * n):
                if self.blossombase[b] >= 0 and self.blossomparent[b] == -1:
                    if self.label[b] == 1:
                        self.dualvar[b] += delta
                    elif self.label[b] == 2:
                        self.dualvar[b] -= delta
            if deltatype == 2:
                i = deltaedge // n
                j = deltaedge % n
                if self.label[self.inblossom[i]] == 0:
                    i = j
                self.queue.append(i)
            elif deltatype == 3:
                self.queue.append(deltaedge // n)
            else:
                self.expand_blossom(deltablossom, False)

    def solve(self):
        cdef i64 n = self.n
        cdef i64 root, b
        if n == 0:
            return []
        self.greedy_init()
        for root in range(n):
            if self.mate[root] != -1:
                continue
            self.run_stage(root)
            for b in range(n, 2 * n):
                if (self.blossomparent[b] == -1 and self.blossombase[b] >= 0
                        and self.label[b] == 1 and self.dualvar[b] == 0):
                    self.expand_blossom(b, True)
        return [int(self.mate[root] % n) for root in range(n)]


def solve(weights):
    """Partner of each vertex in a minimum-weight perfect matching."""
    w = np.asarray(weights, dtype=np.int64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"weights must be a square matrix, got shape {w.shape}")
    if w.shape[0] % 2:
        raise ValueError(f"perfect matching needs an even number of vertices, got {w.shape[0]}")
    return _Matcher(w).solve()
