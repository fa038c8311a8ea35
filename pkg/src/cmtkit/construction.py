"""Progressive-edge-growth LDPC constructions and their cycle-aware variants.

All four builders place d_v edges per VN in ascending VN order.  They share
the candidate-CN search of the classic PEG rule and differ only in how one
candidate is selected when a new shortest cycle is unavoidable:

* ``construct_peg``: minimum CN degree, random tie-break.
* ``construct_ec_peg``: minimizes the entropy of the joint normalized
  VN-to-cycle counts, concentrating cycles onto few VNs.
* ``construct_mc_peg``: fewest new cycles among min-degree candidates.
* ``construct_lc_peg``: among fewest-new-cycle candidates, minimizes the
  optimal objective of the cycle-based design LP over an accumulated list
  of low-EMD (bad) cycles.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .lp import lp_objective
from .tanner import UNBOUNDED, TannerGraph, count_new_cycles, emd


@dataclass
class ConstructionConfig:
    n: int
    m: int
    d_v: int
    g_c: int = 0
    t_th: int = 0
    theta_hat: float = 0.0
    mu_hat: float = 0.0
    seed: int = 0

    def validate(self, needs_cycles=False, needs_lp=False) -> None:
        if self.d_v < 2 or self.d_v > self.m:
            raise ValueError("need 2 <= d_v <= m to place distinct edges")
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if needs_cycles:
            if self.g_c < 6 or self.g_c % 2:
                raise ValueError("g_c must be an even bound >= 6")
        if needs_lp:
            if not 0.0 <= self.theta_hat <= 1.0:
                raise ValueError("theta_hat must be in [0, 1]")
            if self.mu_hat <= 0:
                raise ValueError("mu_hat must be positive")
            if self.t_th < 0:
                raise ValueError("t_th must be nonnegative")


def peg_candidates(g: TannerGraph, v: int):
    """Candidate CNs for the next edge of v under the classic PEG rule.

    Expands the BFS subtree under v.  If some CNs are unreachable, they are
    the candidates and no new cycle is created (unbounded marker); otherwise
    the candidates are the CNs at maximum depth and every one of them closes
    a new shortest cycle of the returned length.
    """
    n = g.n_vns
    dist = [-1] * (n + g.n_cns)
    dist[v] = 0
    q = deque([v])
    while q:
        x = q.popleft()
        nxt = (
            [n + c for c in g.vn_nbrs[x]]
            if x < n
            else g.cn_nbrs[x - n]
        )
        for w in nxt:
            if dist[w] < 0:
                dist[w] = dist[x] + 1
                q.append(w)

    unreached = [c for c in range(g.n_cns) if dist[n + c] < 0]
    if unreached:
        return unreached, UNBOUNDED
    dmax = max(dist[n + c] for c in range(g.n_cns))
    return [c for c in range(g.n_cns) if dist[n + c] == dmax], dmax + 1


def _pick(rng, items):
    """Seeded uniform choice; consumes randomness only on actual ties."""
    if len(items) == 1:
        return items[0]
    return items[int(rng.integers(len(items)))]


def _min_degree(g: TannerGraph, cns) -> list:
    dmin = min(g.cn_degree(c) for c in cns)
    return [c for c in cns if g.cn_degree(c) == dmin]


def construct_peg(cfg: ConstructionConfig) -> TannerGraph:
    """Baseline PEG: min-degree candidate, random tie-break."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    g = TannerGraph(cfg.n, cfg.m)
    for v in range(cfg.n):
        for _ in range(cfg.d_v):
            cands, _glen = peg_candidates(g, v)
            g.add_edge(_pick(rng, _min_degree(g, cands)), v)
    return g


def entropy_bits(p) -> float:
    """-sum p_i log2 p_i over positive entries (0 log 0 := 0)."""
    p = np.asarray(p, dtype=float)
    pos = p[p > 0]
    return float(-(pos * np.log2(pos)).sum())


def joint_cycle_entropy(counts: dict, g_c: int) -> float:
    """Entropy of the average of per-length normalized VN-to-cycle counts.

    ``counts`` maps each tracked length g' < g_c to a per-VN count vector;
    a length class with no cycles contributes zero (0/0 := 0).
    """
    lengths = list(range(4, g_c, 2))
    if not lengths:
        return 0.0
    joint = None
    for length in lengths:
        vec = np.asarray(counts.get(length, 0.0), dtype=float)
        total = vec.sum()
        term = vec / total if total > 0 else vec * 0.0
        joint = term if joint is None else joint + term
    return entropy_bits(joint / len(lengths))


def construct_ec_peg(cfg: ConstructionConfig) -> TannerGraph:
    """Entropy-constrained PEG.

    Tracks per-VN counts of every cycle length below g_c.  When an edge must
    close new shortest cycles, each candidate's tentative counts are
    normalized per length, averaged, and the candidate with minimum entropy
    of that joint distribution wins.
    """
    cfg.validate(needs_cycles=True)
    rng = np.random.default_rng(cfg.seed)
    g = TannerGraph(cfg.n, cfg.m)
    lengths = list(range(4, cfg.g_c, 2))
    lam = {length: np.zeros(cfg.n) for length in lengths}

    for v in range(cfg.n):
        for _ in range(cfg.d_v):
            cands, glen = peg_candidates(g, v)
            if glen >= cfg.g_c:
                c_sel = _pick(rng, _min_degree(g, cands))
            else:
                entropies = []
                tentative = []
                for c in cands:
                    lam_g = lam[glen].copy()
                    for cyc in count_new_cycles(g, c, v, glen):
                        lam_g[list(cyc.vns)] += 1
                    counts = dict(lam)
                    counts[glen] = lam_g
                    entropies.append(joint_cycle_entropy(counts, cfg.g_c))
                    tentative.append(lam_g)
                best = min(entropies)
                tied = [i for i, e in enumerate(entropies) if e <= best + 1e-12]
                sel = _pick(rng, tied)
                c_sel = cands[sel]
                lam[glen] = tentative[sel]
            g.add_edge(c_sel, v)
    return g


def construct_mc_peg(cfg: ConstructionConfig) -> TannerGraph:
    """Minimum-cycles PEG: random choice among candidates that create the
    fewest new shortest cycles (min-degree filtered first)."""
    cfg.validate(needs_cycles=True)
    rng = np.random.default_rng(cfg.seed)
    g = TannerGraph(cfg.n, cfg.m)
    for v in range(cfg.n):
        for _ in range(cfg.d_v):
            cands, glen = peg_candidates(g, v)
            mindeg = _min_degree(g, cands)
            if glen >= cfg.g_c:
                c_sel = _pick(rng, mindeg)
            else:
                counts = [len(count_new_cycles(g, c, v, glen)) for c in mindeg]
                cmin = min(counts)
                c_sel = _pick(rng, [c for c, k in zip(mindeg, counts) if k == cmin])
            g.add_edge(c_sel, v)
    return g


def construct_lc_peg(cfg: ConstructionConfig) -> TannerGraph:
    """LP-constrained PEG.

    Keeps a list of "bad" cycles (EMD <= t_th when formed).  Among the
    min-degree candidates that create the fewest new shortest cycles, picks
    the one whose bad-cycle list plus its own new cycles yields the smallest
    optimal objective of the cycle design LP.
    """
    cfg.validate(needs_cycles=True, needs_lp=True)
    rng = np.random.default_rng(cfg.seed)
    g = TannerGraph(cfg.n, cfg.m)
    bad: list = []
    for v in range(cfg.n):
        for _ in range(cfg.d_v):
            cands, glen = peg_candidates(g, v)
            mindeg = _min_degree(g, cands)
            if glen >= cfg.g_c:
                g.add_edge(_pick(rng, mindeg), v)
                continue
            new_by_cn = {c: count_new_cycles(g, c, v, glen) for c in mindeg}
            cmin = min(len(cycs) for cycs in new_by_cn.values())
            mincyc = [c for c in mindeg if len(new_by_cn[c]) == cmin]
            costs = [
                lp_objective(bad + new_by_cn[c], g, cfg.theta_hat, cfg.mu_hat)
                for c in mincyc
            ]
            best = min(costs)
            tied = [i for i, k in enumerate(costs) if k <= best + 1e-12]
            c_sel = mincyc[_pick(rng, tied)]
            g.add_edge(c_sel, v)
            # EMD measured with the cycle-closing edge in place.
            bad.extend(
                cyc for cyc in new_by_cn[c_sel]
                if emd(g, cyc.vns) <= cfg.t_th
            )
    return g


CONSTRUCTORS = {
    "peg": construct_peg,
    "ec_peg": construct_ec_peg,
    "mc_peg": construct_mc_peg,
    "lc_peg": construct_lc_peg,
}


def build(name: str, cfg: ConstructionConfig) -> TannerGraph:
    try:
        return CONSTRUCTORS[name](cfg)
    except KeyError:
        raise ValueError(f"unknown construction '{name}'") from None
