"""Bipartite Tanner graphs: girth, cycle enumeration, and message degree.

Variable nodes (VNs) index parity-check columns, check nodes (CNs) index
rows; both are 0-based here.  Cycles alternate VN-CN and are kept in a
canonical form so that enumerations from different code paths agree.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError

UNBOUNDED = math.inf
DEFAULT_CYCLE_CAP = 10_000_000


class TannerGraph:
    """Bipartite graph with mutual VN<->CN adjacency lists, no parallel edges."""

    def __init__(self, n_vns: int, n_cns: int):
        self.n_vns = n_vns
        self.n_cns = n_cns
        self.vn_nbrs: list[list[int]] = [[] for _ in range(n_vns)]
        self.cn_nbrs: list[list[int]] = [[] for _ in range(n_cns)]

    @classmethod
    def from_biadjacency(cls, h) -> "TannerGraph":
        h = np.asarray(h)
        g = cls(h.shape[1], h.shape[0])
        for c, v in zip(*np.nonzero(h)):
            g.add_edge(int(c), int(v))
        return g

    def to_biadjacency(self) -> np.ndarray:
        h = np.zeros((self.n_cns, self.n_vns), dtype=np.uint8)
        for v, cs in enumerate(self.vn_nbrs):
            h[cs, v] = 1
        return h

    def add_edge(self, cn: int, vn: int) -> None:
        if cn in self.vn_nbrs[vn]:
            raise ValueError(f"parallel edge ({cn}, {vn})")
        self.vn_nbrs[vn].append(cn)
        self.cn_nbrs[cn].append(vn)

    def has_edge(self, cn: int, vn: int) -> bool:
        return cn in self.vn_nbrs[vn]

    def vn_degree(self, vn: int) -> int:
        return len(self.vn_nbrs[vn])

    def cn_degree(self, cn: int) -> int:
        return len(self.cn_nbrs[cn])

    def n_edges(self) -> int:
        return sum(len(cs) for cs in self.vn_nbrs)

    def copy(self) -> "TannerGraph":
        g = TannerGraph(self.n_vns, self.n_cns)
        g.vn_nbrs = [list(cs) for cs in self.vn_nbrs]
        g.cn_nbrs = [list(vs) for vs in self.cn_nbrs]
        return g


@dataclass(frozen=True)
class Cycle:
    """Alternating closed walk v0-c0-v1-c1-...-c(t-1)-v0 with no repeats.

    Canonical form: v0 is the smallest VN on the cycle and the orientation
    is the one whose first CN is smaller.
    """

    vns: tuple
    cns: tuple

    @property
    def length(self) -> int:
        return len(self.vns) + len(self.cns)

    def vn_set(self) -> frozenset:
        return frozenset(self.vns)


def canonical_cycle(vns, cns) -> Cycle:
    """Canonicalize a cycle given as parallel VN/CN walk lists."""
    t = len(vns)
    i = min(range(t), key=lambda j: vns[j])
    fwd_v = tuple(vns[(i + j) % t] for j in range(t))
    fwd_c = tuple(cns[(i + j) % t] for j in range(t))
    bwd_v = tuple(vns[(i - j) % t] for j in range(t))
    bwd_c = tuple(cns[(i - 1 - j) % t] for j in range(t))
    if fwd_c[0] <= bwd_c[0]:
        return Cycle(fwd_v, fwd_c)
    return Cycle(bwd_v, bwd_c)


def girth(g: TannerGraph):
    """Length of the shortest cycle, or the unbounded marker for forests."""
    best = UNBOUNDED
    dist = [0] * (g.n_vns + g.n_cns)  # CN u is node n_vns + u
    parent = [0] * (g.n_vns + g.n_cns)

    def nbrs(node):
        if node < g.n_vns:
            return [g.n_vns + c for c in g.vn_nbrs[node]]
        return g.cn_nbrs[node - g.n_vns]

    for start in range(g.n_vns):
        for i in range(len(dist)):
            dist[i] = -1
        dist[start] = 0
        parent[start] = -1
        q = deque([start])
        while q:
            x = q.popleft()
            if 2 * dist[x] >= best:
                break
            for w in nbrs(x):
                if dist[w] < 0:
                    dist[w] = dist[x] + 1
                    parent[w] = x
                    q.append(w)
                elif w != parent[x]:
                    best = min(best, dist[x] + dist[w] + 1)
    return best


def enumerate_cycles(g: TannerGraph, g_max: int, cap: int = DEFAULT_CYCLE_CAP):
    """All cycles of length 4..g_max, canonicalized and grouped by length.

    Each cycle is anchored at its smallest VN and emitted in the orientation
    whose first CN is smaller, so every cycle appears exactly once.

    Raises:
        ResourceLimitError: if more than ``cap`` cycles are found.
    """
    if g_max < 4 or g_max % 2:
        raise ValueError("g_max must be an even length >= 4")
    out: dict[int, list[Cycle]] = {length: [] for length in range(4, g_max + 1, 2)}
    max_vns = g_max // 2
    total = 0

    vn_nbrs, cn_nbrs = g.vn_nbrs, g.cn_nbrs
    on_path_vn = bytearray(g.n_vns)
    on_path_cn = bytearray(g.n_cns)
    path_vns: list[int] = []
    path_cns: list[int] = []

    def from_vn(v0: int, v: int):
        nonlocal total
        for c in vn_nbrs[v]:
            if on_path_cn[c]:
                continue
            path_cns.append(c)
            on_path_cn[c] = 1
            if len(path_vns) >= 2 and path_cns[0] < c and v0 in cn_nbrs[c]:
                out[2 * len(path_vns)].append(
                    Cycle(tuple(path_vns), tuple(path_cns))
                )
                total += 1
                if total > cap:
                    raise ResourceLimitError(f"cycle cap {cap} exceeded")
            if len(path_vns) < max_vns:
                for w in cn_nbrs[c]:
                    if w > v0 and not on_path_vn[w]:
                        path_vns.append(w)
                        on_path_vn[w] = 1
                        from_vn(v0, w)
                        on_path_vn[w] = 0
                        path_vns.pop()
            on_path_cn[c] = 0
            path_cns.pop()

    for v0 in range(g.n_vns):
        path_vns.append(v0)
        on_path_vn[v0] = 1
        from_vn(v0, v0)
        on_path_vn[v0] = 0
        path_vns.pop()

    for length in out:
        out[length].sort(key=lambda cyc: (cyc.vns, cyc.cns))
    return out


def count_new_cycles(g: TannerGraph, cn: int, vn: int, length: int) -> list[Cycle]:
    """Cycles of the given length created by adding the absent edge (cn, vn).

    Each is a simple alternating path of length-1 edges from vn to cn in the
    current graph, closed by the new edge.
    """
    if g.has_edge(cn, vn):
        raise ValueError("edge already present")
    if length < 4 or length % 2:
        raise ValueError("cycle length must be even and >= 4")
    n_inner_vns = length // 2 - 1  # VNs on the path besides vn itself

    # Distance from every node to the target CN, for pruning.
    dist = _bfs_dist_to_cn(g, cn)

    found: list[Cycle] = []
    on_path_vn = bytearray(g.n_vns)
    on_path_cn = bytearray(g.n_cns)
    on_path_vn[vn] = 1
    path_vns = [vn]
    path_cns: list[int] = []

    def from_vn(v: int, remaining_vns: int):
        if remaining_vns == 0:
            if cn in g.vn_nbrs[v]:
                found.append(canonical_cycle(path_vns, path_cns + [cn]))
            return
        for c in g.vn_nbrs[v]:
            if c == cn or on_path_cn[c]:
                continue
            if dist[g.n_vns + c] > 2 * remaining_vns:
                continue
            on_path_cn[c] = 1
            path_cns.append(c)
            for w in g.cn_nbrs[c]:
                if on_path_vn[w] or dist[w] > 2 * remaining_vns - 1:
                    continue
                on_path_vn[w] = 1
                path_vns.append(w)
                from_vn(w, remaining_vns - 1)
                path_vns.pop()
                on_path_vn[w] = 0
            path_cns.pop()
            on_path_cn[c] = 0

    from_vn(vn, n_inner_vns)
    found.sort(key=lambda cyc: (cyc.vns, cyc.cns))
    return found


def _bfs_dist_to_cn(g: TannerGraph, cn: int) -> list:
    """Edge distance from each node (VNs then CNs) to the given CN."""
    dist = [math.inf] * (g.n_vns + g.n_cns)
    dist[g.n_vns + cn] = 0
    q = deque([g.n_vns + cn])
    while q:
        x = q.popleft()
        if x < g.n_vns:
            nxt = [g.n_vns + c for c in g.vn_nbrs[x]]
        else:
            nxt = g.cn_nbrs[x - g.n_vns]
        for w in nxt:
            if dist[w] == math.inf:
                dist[w] = dist[x] + 1
                q.append(w)
    return dist


def emd(g: TannerGraph, vns) -> int:
    """Extrinsic message degree: CNs with exactly one edge into the VN set."""
    vns = set(vns)
    if not vns:
        raise ValueError("VN set must be nonempty")
    counts: dict[int, int] = {}
    for v in vns:
        if not 0 <= v < g.n_vns:
            raise ValueError(f"VN {v} not in graph")
        for c in g.vn_nbrs[v]:
            counts[c] = counts.get(c, 0) + 1
    return sum(1 for k in counts.values() if k == 1)


def cycle_counts(g: TannerGraph, g_c: int, cap: int = DEFAULT_CYCLE_CAP):
    """Per-VN counts of g'-cycles for every tracked length g' < g_c."""
    lengths = list(range(4, g_c, 2))
    counts = {length: np.zeros(g.n_vns, dtype=np.int64) for length in lengths}
    if not lengths:
        return counts
    for length, cycles in enumerate_cycles(g, lengths[-1], cap=cap).items():
        for cyc in cycles:
            counts[length][list(cyc.vns)] += 1
    return counts


def vn_cycle_distribution(g: TannerGraph, length: int, cap: int = DEFAULT_CYCLE_CAP) -> np.ndarray:
    """Fraction of cycles of one length touched by each VN (0/0 := 0)."""
    cycles = enumerate_cycles(g, length, cap=cap)[length]
    frac = np.zeros(g.n_vns, dtype=float)
    for cyc in cycles:
        frac[list(cyc.vns)] += 1.0
    if cycles:
        frac /= len(cycles)
    return frac
