"""Minimum-weight perfect matching on a complete graph (pure Python kernel).

Primal-dual blossom algorithm using the data layout of Joris van Rantwijk's
``mwmatching``, specialised to

* dense integer weight matrices (every pair of vertices is an edge),
* minimum-weight *perfect* matching (vertex duals are unconstrained),
* a greedy dual initialisation followed by single-tree stages.

Growing one alternating tree at a time keeps each search local: the tree
only spreads until its dual ball reaches the nearest free vertex, so for
geometric instances the total work stays close to ``O(n**2)``.

Internally the problem is solved as a maximum-weight problem on ``-w``.
Edges are directed endpoints ``p = i * n + j``; ``p % n`` is the vertex at
the far end and ``flip(p)`` is the opposite endpoint. Vertex duals and
slacks are pre-multiplied by two so everything stays integral.

``_blossom.pyx`` is a typed twin of this module; keep the two in step.
"""

from __future__ import annotations


class _Matcher:
    def __init__(self, weights):
        n = len(weights)
        self.n = n
        self.w = weights
        self.mate = [-1] * n
        self.label = [0] * (2 * n)
        self.labelend = [-1] * (2 * n)
        self.inblossom = list(range(n))
        self.blossomparent = [-1] * (2 * n)
        self.blossomchilds = [None] * (2 * n)
        self.blossombase = list(range(n)) + [-1] * n
        self.blossomendps = [None] * (2 * n)
        self.bestedge = [-1] * (2 * n)
        self.blossombestedges = [None] * (2 * n)
        self.unusedblossoms = list(range(2 * n - 1, n - 1, -1))
        self.dualvar = [0] * (2 * n)
        self.queue = []

    # -- helpers --------------------------------------------------------

    def flip(self, p):
        n = self.n
        return (p % n) * n + p // n

    def slack(self, p):
        n = self.n
        i = p // n
        j = p % n
        return self.dualvar[i] + self.dualvar[j] + 2 * self.w[i][j]

    def leaves(self, b):
        n = self.n
        if b < n:
            return [b]
        out = []
        stack = [b]
        while stack:
            t = stack.pop()
            if t < n:
                out.append(t)
            else:
                stack.extend(self.blossomchilds[t])
        return out

    # -- tree growing ---------------------------------------------------

    def assign_label(self, w, t, p):
        n = self.n
        while True:
            b = self.inblossom[w]
            self.label[w] = self.label[b] = t
            self.labelend[w] = self.labelend[b] = p
            self.bestedge[w] = self.bestedge[b] = -1
            if t == 1:
                self.queue.extend(self.leaves(b))
                return
            # a T-blossom's mate becomes an S-blossom
            m = self.mate[self.blossombase[b]]
            w = m % n
            t = 1
            p = self.flip(m)

    def scan_blossom(self, v, w):
        """Trace back from ``v`` and ``w``; return the common base or -1."""
        n = self.n
        label = self.label
        labelend = self.labelend
        inblossom = self.inblossom
        path = []
        base = -1
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = self.blossombase[b]
                break
            path.append(b)
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = labelend[b] % n
                b = inblossom[v]
                v = labelend[b] % n
            if w != -1:
                v, w = w, v
        for b in path:
            label[b] = 1
        return base

    def add_blossom(self, base, v, w):
        n = self.n
        inblossom = self.inblossom
        labelend = self.labelend
        label = self.label
        connect = w * n + v  # endpoint v of edge (v, w)
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = self.unusedblossoms.pop()
        self.blossombase[b] = base
        self.blossomparent[b] = -1
        self.blossomparent[bb] = b
        path = []
        endps = []
        while bv != bb:
            self.blossomparent[bv] = b
            path.append(bv)
            endps.append(labelend[bv])
            v = labelend[bv] % n
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(connect)
        while bw != bb:
            self.blossomparent[bw] = b
            path.append(bw)
            endps.append(self.flip(labelend[bw]))
            w = labelend[bw] % n
            bw = inblossom[w]
        self.blossomchilds[b] = path
        self.blossomendps[b] = endps
        label[b] = 1
        labelend[b] = labelend[bb]
        self.dualvar[b] = 0
        for x in self.leaves(b):
            if label[inblossom[x]] == 2:
                self.queue.append(x)
            inblossom[x] = b
        # least-slack edge from the new blossom to each neighbouring S-blossom
        bestto = {}
        for sub in path:
            cand = self.blossombestedges[sub]
            if cand is None:
                cand = [i * n + j for i in self.leaves(sub) for j in range(n) if j != i]
            for p in cand:
                i = p // n
                j = p % n
                if inblossom[j] == b:
                    i, j = j, i
                    p = i * n + j
                bj = inblossom[j]
                if bj != b and label[bj] == 1:
                    q = bestto.get(bj, -1)
                    if q == -1 or self.slack(p) < self.slack(q):
                        bestto[bj] = p
            self.blossombestedges[sub] = None
            self.bestedge[sub] = -1
        best_list = list(bestto.values())
        self.blossombestedges[b] = best_list
        best = -1
        for p in best_list:
            if best == -1 or self.slack(p) < self.slack(best):
                best = p
        self.bestedge[b] = best

    def expand_blossom(self, b, endstage):
        n = self.n
        label = self.label
        labelend = self.labelend
        inblossom = self.inblossom
        childs = self.blossomchilds[b]
        for s in childs:
            self.blossomparent[s] = -1
            if s < n:
                inblossom[s] = s
            elif endstage and self.dualvar[s] == 0:
                self.expand_blossom(s, endstage)
            else:
                for x in self.leaves(s):
                    inblossom[x] = s
        if not endstage and label[b] == 2:
            # relabel the sub-blossoms on the even-length path through b
            L = len(childs)
            endps = self.blossomendps[b]
            entrychild = inblossom[self.flip(labelend[b]) % n]
            j = childs.index(entrychild)
            if j & 1:
                j -= L
                jstep = 1
                trick = 0
            else:
                jstep = -1
                trick = 1
            p = labelend[b]
            while j != 0:
                if trick:
                    q = self.flip(endps[(j - 1) % L])
                else:
                    q = endps[j % L]
                label[self.flip(p) % n] = 0
                label[self.flip(q) % n] = 0
                self.assign_label(self.flip(p) % n, 2, p)
                j += jstep
                if trick:
                    p = self.flip(endps[(j - 1) % L])
                else:
                    p = endps[j % L]
                j += jstep
            bv = childs[j % L]
            x = self.flip(p) % n
            label[x] = label[bv] = 2
            labelend[x] = labelend[bv] = p
            self.bestedge[bv] = -1
            j += jstep
            while childs[j % L] != entrychild:
                bv = childs[j % L]
                if label[bv] == 1:
                    j += jstep
                    continue
                hit = -1
                for v in self.leaves(bv):
                    if label[v] != 0:
                        hit = v
                        break
                if hit != -1:
                    label[hit] = 0
                    label[self.mate[self.blossombase[bv]] % n] = 0
                    self.assign_label(hit, 2, labelend[hit])
                j += jstep
        label[b] = labelend[b] = -1
        self.blossomchilds[b] = self.blossomendps[b] = None
        self.blossombase[b] = -1
        self.blossombestedges[b] = None
        self.bestedge[b] = -1
        self.unusedblossoms.append(b)

    def augment_blossom(self, b, v):
        n = self.n
        t = v
        while self.blossomparent[t] != b:
            t = self.blossomparent[t]
        if t >= n:
            self.augment_blossom(t, v)
        childs = self.blossomchilds[b]
        endps = self.blossomendps[b]
        L = len(childs)
        i = j = childs.index(t)
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

    def augment_matching(self, v, w):
        n = self.n
        inblossom = self.inblossom
        labelend = self.labelend
        for s, p in ((v, v * n + w), (w, w * n + v)):
            while True:
                bs = inblossom[s]
                if bs >= n:
                    self.augment_blossom(bs, s)
                self.mate[s] = p
                if labelend[bs] == -1:
                    break
                t = labelend[bs] % n
                bt = inblossom[t]
                s = labelend[bt] % n
                j = self.flip(labelend[bt]) % n
                if bt >= n:
                    self.augment_blossom(bt, j)
                self.mate[j] = labelend[bt]
                p = self.flip(labelend[bt])

    # -- driver ---------------------------------------------------------

    def greedy_init(self):
        n = self.n
        w = self.w
        du = self.dualvar
        mate = self.mate
        for i in range(n):
            row = w[i]
            du[i] = -min(row[j] for j in range(n) if j != i)
        for i in range(n):
            if mate[i] != -1:
                continue
            row = w[i]
            best = None
            arg = -1
            for j in range(n):
                if j == i:
                    continue
                c = -2 * row[j] - du[j]
                if best is None or c > best or (c == best and mate[arg] != -1 and mate[j] == -1):
                    best = c
                    arg = j
            du[i] = best
            if mate[arg] == -1:
                mate[i] = i * n + arg
                mate[arg] = arg * n + i

    def run_stage(self, root):
        n = self.n
        w = self.w
        du = self.dualvar
        label = self.label
        labelend = self.labelend
        inblossom = self.inblossom
        bestedge = self.bestedge
        mate = self.mate
        for i in range(2 * n):
            label[i] = 0
            bestedge[i] = -1
        for i in range(n, 2 * n):
            self.blossombestedges[i] = None
        self.queue = []
        self.assign_label(root, 1, -1)
        while True:
            while self.queue:
                v = self.queue.pop()
                row = w[v]
                dv = du[v]
                for x in range(n):
                    if x == v:
                        continue
                    bv = inblossom[v]
                    bx = inblossom[x]
                    if bv == bx:
                        continue
                    kslack = dv + du[x] + 2 * row[x]
                    lx = label[bx]
                    p = v * n + x
                    if kslack <= 0:
                        if lx == 0:
                            if mate[self.blossombase[bx]] == -1:
                                label[bx] = 1
                                labelend[bx] = -1
                                self.augment_matching(v, x)
                                return
                            self.assign_label(x, 2, self.flip(p))
                        elif lx == 1:
                            base = self.scan_blossom(v, x)
                            if base >= 0:
                                self.add_blossom(base, v, x)
                            else:
                                self.augment_matching(v, x)
                                return
                        elif label[x] == 0:
                            label[x] = 2
                            labelend[x] = self.flip(p)
                    elif lx == 1:
                        be = bestedge[bv]
                        if be == -1 or kslack < self.slack(be):
                            bestedge[bv] = p
                    elif label[x] == 0:
                        be = bestedge[x]
                        if be == -1 or kslack < self.slack(be):
                            bestedge[x] = p
            # no tight edge left: change duals
            deltatype = -1
            delta = 0
            deltaedge = -1
            deltablossom = -1
            for v in range(n):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    dd = self.slack(bestedge[v])
                    if deltatype == -1 or dd < delta:
                        delta = dd
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(2 * n):
                if self.blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    kslack = self.slack(bestedge[b])
                    dd = kslack // 2
                    if deltatype == -1 or dd < delta:
                        delta = dd
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(n, 2 * n):
                if (self.blossombase[b] >= 0 and self.blossomparent[b] == -1
                        and label[b] == 2 and (deltatype == -1 or self.dualvar[b] < delta)):
                    delta = self.dualvar[b]
                    deltatype = 4
                    deltablossom = b
            if deltatype == -1:
                raise RuntimeError("blossom solver stalled: no perfect matching exists")
            for v in range(n):
                lb = label[inblossom[v]]
                if lb == 1:
                    du[v] -= delta
                elif lb == 2:
                    du[v] += delta
            for b in range(n, 2 * n):
                if self.blossombase[b] >= 0 and self.blossomparent[b] == -1:
                    if label[b] == 1:
                        du[b] += delta
                    elif label[b] == 2:
                        du[b] -= delta
            if deltatype == 2:
                i = deltaedge // n
                j = deltaedge % n
                if label[inblossom[i]] == 0:
                    i = j
                self.queue.append(i)
            elif deltatype == 3:
                self.queue.append(deltaedge // n)
            else:
                self.expand_blossom(deltablossom, False)

    def solve(self):
        n = self.n
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
        return [m % n for m in self.mate]


def solve(weights) -> list[int]:
    """Partner of each vertex in a minimum-weight perfect matching.

    ``weights`` is a symmetric ``n x n`` integer matrix (list of lists or
    array) with ``n`` even; the diagonal is ignored.
    """
    w = [list(map(int, row)) for row in weights]
    n = len(w)
    if n % 2:
        raise ValueError(f"perfect matching needs an even number of vertices, got {n}")
    return _Matcher(w).solve()
