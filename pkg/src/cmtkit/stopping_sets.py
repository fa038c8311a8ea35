"""Stopping-set enumeration, catalogs, and VN/stopping-set statistics.

A stopping set is a VN set where every CN touching the set has at least two
edges into it; erasing one stalls a peeling decoder.  Enumeration below a
size bound is done by branch-and-bound over include/exclude decisions with
CN-constraint propagation; an exhaustive 2^n oracle guards correctness at
small n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _fast
from .errors import EmptyWeightClassError, ResourceLimitError
from .tanner import TannerGraph

DEFAULT_NODE_CAP = 500_000_000


def is_stopping_set(g: TannerGraph, vns) -> bool:
    """True iff no CN has exactly one edge into the set (vacuous for empty)."""
    vns = set(vns)
    for v in vns:
        if not 0 <= v < g.n_vns:
            raise ValueError(f"VN {v} not in graph")
    counts: dict[int, int] = {}
    for v in vns:
        for c in g.vn_nbrs[v]:
            counts[c] = counts.get(c, 0) + 1
    return all(k != 1 for k in counts.values())


@dataclass
class StoppingSetCatalog:
    """All nonempty stopping sets of a graph with size < mu.

    Sets are sorted tuples of 0-based VN indices, ordered by (weight, lex).
    """

    n: int
    mu: int
    sets: list = field(default_factory=list)

    def __post_init__(self):
        self.by_weight: dict[int, list[int]] = {}
        for idx, s in enumerate(self.sets):
            self.by_weight.setdefault(len(s), []).append(idx)

    def weights(self) -> list[int]:
        return sorted(self.by_weight)

    def weight_class(self, kappa: int) -> list[tuple]:
        """All catalog members of one weight, in catalog order."""
        return [self.sets[i] for i in self.by_weight.get(kappa, [])]

    def min_weight(self) -> int:
        if not self.sets:
            raise EmptyWeightClassError("catalog is empty")
        return len(self.sets[0])

    def save(self, path) -> None:
        """Line-oriented text: header 'n mu', one set per line, 1-based."""
        with open(path, "w") as f:
            f.write(f"{self.n} {self.mu}\n")
            for s in self.sets:
                f.write(" ".join(str(v + 1) for v in s) + "\n")

    @classmethod
    def load(cls, path) -> "StoppingSetCatalog":
        with open(path) as f:
            header = f.readline().split()
            n, mu = int(header[0]), int(header[1])
            sets = []
            for line in f:
                if line.strip():
                    sets.append(tuple(int(t) - 1 for t in line.split()))
        return cls(n=n, mu=mu, sets=sets)


def enumerate_stopping_sets(
    g: TannerGraph, mu: int, node_cap: int = DEFAULT_NODE_CAP, backend: str = "auto"
) -> StoppingSetCatalog:
    """All nonempty stopping sets of size < mu, by branch and bound.

    Branches decide one VN at a time.  A CN with one included neighbor and
    no undecided neighbor kills the branch; with a single undecided neighbor
    it forces that VN in.  Deficient CNs drive branching so partial sets die
    as early as possible.  The compiled backend runs the same search over
    bitset state; "python" forces the reference implementation.

    Raises:
        ResourceLimitError: past ``node_cap`` search nodes.
    """
    if mu < 1:
        raise ValueError("mu must be >= 1")
    use_fast = backend == "numba" or (backend == "auto" and _fast.HAVE_NUMBA)
    if use_fast:
        status, found = _fast.search_stopping_sets(
            [list(cs) for cs in g.vn_nbrs],
            [list(vs) for vs in g.cn_nbrs],
            g.n_vns,
            g.n_cns,
            mu,
            node_cap,
        )
        if status == -1:
            raise ResourceLimitError(f"stopping-set search cap {node_cap} exceeded")
        if status == -2:
            raise ResourceLimitError("stopping-set result buffer full")
    else:
        found = _search(g, mu, node_cap)
    found.sort(key=lambda s: (len(s), s))
    return StoppingSetCatalog(n=g.n_vns, mu=mu, sets=found)


def _search(g: TannerGraph, mu: int, node_cap: int) -> list:
    n, m = g.n_vns, g.n_cns
    vn_cns = [list(cs) for cs in g.vn_nbrs]
    cn_vns = [sorted(vs) for vs in g.cn_nbrs]
    cn_deg = [len(vs) for vs in cn_vns]
    d_v_max = max((len(cs) for cs in vn_cns), default=1) or 1

    decided = bytearray(n)  # 0 undecided, 1 in, 2 out
    ic = [0] * m  # included neighbors per CN
    ec = [0] * m  # excluded neighbors per CN
    deficient: set[int] = set()  # CNs with ic == 1
    trail: list[int] = []
    dirty: list[int] = []
    inc_list: list[int] = []
    found: list[tuple] = []
    nodes = 0

    def assign(v: int, kind: int) -> None:
        decided[v] = kind
        trail.append(v)
        if kind == 1:
            inc_list.append(v)
            for c in vn_cns[v]:
                ic[c] += 1
                if ic[c] == 1:
                    deficient.add(c)
                elif ic[c] == 2:
                    deficient.discard(c)
                dirty.append(c)
        else:
            for c in vn_cns[v]:
                ec[c] += 1
                dirty.append(c)

    def undo(base: int) -> None:
        while len(trail) > base:
            v = trail.pop()
            kind = decided[v]
            decided[v] = 0
            if kind == 1:
                inc_list.pop()
                for c in vn_cns[v]:
                    ic[c] -= 1
                    if ic[c] == 1:
                        deficient.add(c)
                    elif ic[c] == 0:
                        deficient.discard(c)
            else:
                for c in vn_cns[v]:
                    ec[c] -= 1

    def propagate() -> bool:
        while dirty:
            c = dirty.pop()
            if ic[c] != 1:
                continue
            uc = cn_deg[c] - ic[c] - ec[c]
            if uc == 0:
                return False
            if uc == 1:
                if len(inc_list) + 1 > mu - 1:
                    return False
                for w in cn_vns[c]:
                    if decided[w] == 0:
                        assign(w, 1)
                        break
        return True

    def include_bound_ok(w: int) -> bool:
        # Deficient CNs after adding w: current ones it does not fix, plus
        # its untouched CNs.  Every such CN needs one more included VN and
        # one VN can serve at most d_v_max of them.
        new_def = len(deficient)
        for c in vn_cns[w]:
            if ic[c] == 0:
                new_def += 1
            elif ic[c] == 1:
                new_def -= 1
        extra = -(-new_def // d_v_max)
        return len(inc_list) + 1 + extra <= mu - 1

    def rec(pending) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise ResourceLimitError(f"stopping-set search cap {node_cap} exceeded")
        base = len(trail)
        if pending is not None:
            assign(pending, 1)
        if not propagate():
            undo(base)
            return
        if len(inc_list) + -(-len(deficient) // d_v_max) > mu - 1:
            undo(base)
            return
        if deficient:
            defc = min(deficient, key=lambda c: (cn_deg[c] - ic[c] - ec[c], c))
            cands = [w for w in cn_vns[defc] if decided[w] == 0]
        else:
            if inc_list:
                found.append(tuple(sorted(inc_list)))
            if len(inc_list) >= mu - 1:
                undo(base)
                return
            cands = [w for w in range(n) if decided[w] == 0]
        for w in cands:
            if decided[w] == 0:
                if include_bound_ok(w):
                    rec(w)
                assign(w, 2)
        undo(base)

    rec(None)
    return found


def brute_force_stopping_sets(g: TannerGraph, mu: int) -> StoppingSetCatalog:
    """Exhaustive 2^n oracle; only sensible for small n (independent check)."""
    n = g.n_vns
    if n > 24:
        raise ValueError("oracle is exponential; use n <= 24")
    ids = np.arange(1, 1 << n, dtype=np.uint64)
    ok = np.bitwise_count(ids) < mu
    for c in range(g.n_cns):
        mask = np.uint64(sum(1 << v for v in g.cn_nbrs[c]))
        ok &= np.bitwise_count(ids & mask) != 1
    sets = [
        tuple(v for v in range(n) if (int(s) >> v) & 1) for s in ids[ok]
    ]
    sets.sort(key=lambda s: (len(s), s))
    return StoppingSetCatalog(n=n, mu=mu, sets=sets)


def min_stopping_set_size(g: TannerGraph, search_cap: int) -> int:
    """Smallest nonempty stopping-set weight, searching sizes up to search_cap.

    Raises:
        ResourceLimitError: if no stopping set of size <= search_cap exists.
    """
    for bound in range(2, search_cap + 2):
        cat = enumerate_stopping_sets(g, bound)
        if cat.sets:
            return cat.min_weight()
    raise ResourceLimitError(
        f"no stopping set of size <= {search_cap} found"
    )


def vn_stopping_distribution(cat: StoppingSetCatalog, kappa: int) -> np.ndarray:
    """Fraction of weight-kappa stopping sets touched by each VN."""
    members = cat.weight_class(kappa)
    if not members:
        raise EmptyWeightClassError(f"no stopping sets of weight {kappa}")
    ss = np.zeros(cat.n, dtype=float)
    for s in members:
        ss[list(s)] += 1.0
    return ss / len(members)


def adjacency_pi(cat: StoppingSetCatalog) -> np.ndarray:
    """VN-to-stopping-set adjacency matrix, one row per catalog member."""
    pi = np.zeros((len(cat.sets), cat.n), dtype=np.uint8)
    for k, s in enumerate(cat.sets):
        pi[k, list(s)] = 1
    return pi
