"""Light-node sampling: greedy orders, matrix alignment, proof coupling,
and the closed-form failure/soundness probabilities.

Two strategy shapes exist.  A greedy strategy is an ordered VN list whose
prefix is sampled deterministically, topped up with uniform samples drawn
with replacement.  An LP strategy is a probability vector x over base
symbols plus per-layer floors beta; both closed forms below are products of
independent per-sample miss probabilities, which forces with-replacement
sampling throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cmt import CmtParams
from .errors import EmptyCatalogError, EmptyWeightClassError
from .stopping_sets import StoppingSetCatalog, adjacency_pi
from .tanner import TannerGraph, enumerate_cycles


def deterministic_samples(rho: float, s: int) -> int:
    """Number of deterministic (greedy) samples out of s: floor(rho * s)."""
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must be in [0, 1)")
    return min(s, math.floor(rho * s + 1e-9))


@dataclass
class GreedyStrategy:
    ordered_vns: list
    rho: float
    s: int = 0

    def __post_init__(self):
        if len(set(self.ordered_vns)) != len(self.ordered_vns):
            raise ValueError("greedy order contains duplicates")
        if self.s:
            deterministic_samples(self.rho, self.s)  # validates rho


@dataclass
class SamplingStrategy:
    x: np.ndarray
    betas: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.betas = np.asarray(self.betas, dtype=float)
        if abs(self.x.sum() - 1.0) > 1e-6 or (self.x < -1e-12).any():
            raise ValueError("x must be a probability vector")


def greedy_set(g: TannerGraph, g_min: int, g_max: int, s: int, rng) -> list:
    """Greedy cycle-covering sample order.

    Repeatedly takes the VN touching the most g-cycles of the working graph
    (seeded-random ties), purges it, escalates g by 2 whenever the working
    graph runs out of g-cycles, and falls back to a random fill of the
    remaining slots once g reaches g_max.
    """
    if s > g.n_vns:
        raise ValueError("cannot take more samples than VNs")
    if g_min < 4 or g_min % 2 or g_max % 2:
        raise ValueError("cycle lengths must be even and >= 4")

    work = g.copy()
    alive = [True] * g.n_vns
    counts = np.zeros(g.n_vns, dtype=np.int64)
    cycle_vns: list[tuple] = []
    cycle_alive: list[bool] = []
    vn_cycles: list[list[int]] = [[] for _ in range(g.n_vns)]
    n_cycles_alive = 0

    def load_cycles(length: int) -> None:
        nonlocal n_cycles_alive
        counts[:] = 0
        cycle_vns.clear()
        cycle_alive.clear()
        for lst in vn_cycles:
            lst.clear()
        found = enumerate_cycles(work, length)[length] if length >= 4 else []
        for cyc in found:
            idx = len(cycle_vns)
            cycle_vns.append(cyc.vns)
            cycle_alive.append(True)
            for v in cyc.vns:
                counts[v] += 1
                vn_cycles[v].append(idx)
        n_cycles_alive = len(cycle_vns)

    def purge(v: int) -> None:
        nonlocal n_cycles_alive
        alive[v] = False
        for c in work.vn_nbrs[v]:
            work.cn_nbrs[c].remove(v)
        work.vn_nbrs[v] = []
        for idx in vn_cycles[v]:
            if cycle_alive[idx]:
                cycle_alive[idx] = False
                n_cycles_alive -= 1
                for w in cycle_vns[idx]:
                    counts[w] -= 1

    glen = g_min
    load_cycles(glen)
    chosen: list[int] = []
    while len(chosen) < s:
        pool = [v for v in range(g.n_vns) if alive[v]]
        best = max(counts[v] for v in pool)
        ties = [v for v in pool if counts[v] == best]
        v = ties[int(rng.integers(len(ties)))] if len(ties) > 1 else ties[0]
        chosen.append(v)
        purge(v)
        if n_cycles_alive == 0:
            glen += 2
            if glen < g_max:
                load_cycles(glen)
        if glen >= g_max:
            rest = s - len(chosen)
            if rest > 0:
                pool = np.array([v for v in range(g.n_vns) if alive[v]])
                chosen.extend(int(v) for v in rng.choice(pool, size=rest, replace=False))
            break
    return chosen


def tau(sample_set, cat: StoppingSetCatalog, kappa: int) -> float:
    """Fraction of weight-kappa stopping sets touched by the sample set."""
    members = cat.weight_class(kappa)
    if not members:
        raise EmptyWeightClassError(f"no stopping sets of weight {kappa}")
    sample = set(sample_set)
    hit = sum(1 for ss in members if sample.intersection(ss))
    return hit / len(members)


def pf_weak_greedy(tau_val: float, omega: int, n_layer: int, s: int, rho: float) -> float:
    """Failure probability of the overall greedy strategy against a weak
    adversary hiding a weight-omega set: greedy prefix misses times the
    with-replacement random top-up missing."""
    if not 0.0 <= tau_val <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    if omega > n_layer:
        raise ValueError("omega cannot exceed the layer size")
    n_random = s - deterministic_samples(rho, s)
    return (1.0 - tau_val) * (1.0 - omega / n_layer) ** n_random


def pf_random(omega: int, n_layer: int, s: int) -> float:
    """Random-sampling failure probability for a hidden weight-omega set."""
    if not 0 <= omega <= n_layer:
        raise ValueError("need 0 <= omega <= n_layer")
    return (1.0 - omega / n_layer) ** s


def pf_random_ratio(nu_star: float, s: int) -> float:
    """Random-sampling failure probability from a stopping ratio."""
    if not 0.0 <= nu_star <= 1.0:
        raise ValueError("stopping ratio must be in [0, 1]")
    return (1.0 - nu_star) ** s


def interleave_source(n_j: int, p_j: int, order, n_l: int):
    """Column map for one intermediate layer: walking base positions i = 1..
    assigns the next unassigned greedy column at the proof-hit data slot
    1+(i-1) mod s_j and parity slot 1+s_j+(i-1) mod p_j until all columns
    are placed."""
    s_j = n_j - p_j
    source = [-1] * n_j
    counter = 0
    for i in range(n_l):
        if counter == n_j:
            break
        d = i % s_j
        if source[d] < 0:
            source[d] = order[counter]
            counter += 1
        p = s_j + i % p_j
        if counter < n_j and source[p] < 0:
            source[p] = order[counter]
            counter += 1
    if counter != n_j:
        raise ValueError("alignment walk did not place every column")
    return source


def alignment_sources(h_list, orders):
    """Per-layer column maps: aligned column pos holds source[pos] of the raw
    matrix.  The base layer is permuted directly to its greedy order;
    intermediate layers follow the proof-hit interleaving walk."""
    n_layers = len(h_list)
    if len(orders) != n_layers:
        raise ValueError("need one greedy order per layer")
    n_l = h_list[-1].shape[1]
    for h, order in zip(h_list, orders):
        if sorted(order) != list(range(h.shape[1])):
            raise ValueError("order is not a permutation of the layer's VNs")
    sources = [
        interleave_source(h.shape[1], h.shape[0], order, n_l)
        for h, order in zip(h_list[:-1], orders[:-1])
    ]
    sources.append(list(orders[-1]))
    return sources


def align_matrices(h_list, orders):
    """Permute per-layer parity-check columns so Merkle proofs of the first
    base symbols sample every layer in its greedy order."""
    sources = alignment_sources(h_list, orders)
    return [h[:, src].copy() for h, src in zip(h_list, sources)]


def align_catalog(cat: StoppingSetCatalog, source) -> StoppingSetCatalog:
    """Re-index a catalog into aligned column space (source as above)."""
    position = {v: pos for pos, v in enumerate(source)}
    sets = [tuple(sorted(position[v] for v in ss)) for ss in cat.sets]
    sets.sort(key=lambda s: (len(s), s))
    return StoppingSetCatalog(n=cat.n, mu=cat.mu, sets=sets)


@dataclass
class CouplingMatrices:
    """Per-layer proof-hit matrices A and coupled stopping-set matrices Delta."""

    a: list
    delta: list


def coupling_a(params: CmtParams) -> list:
    """A^(j) (n_j x n_l): base column i hits data row i mod s_j and parity
    row s_j + (i mod p_j) of layer j; the base layer gets the identity."""
    n_l = params.n_l
    mats = []
    for j in range(1, params.l):
        n_j = params.layer_size(j)
        s_j = params.data_size(j)
        p_j = n_j - s_j
        a = np.zeros((n_j, n_l), dtype=np.uint8)
        cols = np.arange(n_l)
        a[cols % s_j, cols] = 1
        a[s_j + cols % p_j, cols] = 1
        mats.append(a)
    mats.append(np.eye(n_l, dtype=np.uint8))
    return mats


def build_coupling(params: CmtParams, catalogs) -> CouplingMatrices:
    """Couple per-layer catalogs with the Merkle-proof hit pattern.

    delta[j][k, i] = 1 iff base symbol i samples, via its proof into layer
    j+1, the k-th stopping set of that layer's catalog (clamped to binary so
    a proof hitting a set twice is not double counted).
    """
    if len(catalogs) != params.l:
        raise ValueError("need one catalog per layer")
    a_mats = coupling_a(params)
    deltas = []
    for j, cat in enumerate(catalogs):
        pi = adjacency_pi(cat)
        if pi.shape[1] != a_mats[j].shape[0]:
            raise ValueError(f"catalog {j + 1} does not match layer size")
        deltas.append(np.minimum(pi.astype(np.int64) @ a_mats[j].astype(np.int64), 1).astype(np.uint8))
    return CouplingMatrices(a=a_mats, delta=deltas)


def pf_medium(delta: np.ndarray, x: np.ndarray, s: int) -> float:
    """Worst-case hidden catalog set under strategy x: [max(1 - Delta x)]^s."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape[0] == 0:
        raise EmptyCatalogError("no stopping sets to hide below the bound")
    miss = 1.0 - delta @ np.asarray(x, dtype=float)
    return float(np.clip(miss.max(), 0.0, 1.0) ** s)


def pf_strong_bound(x, betas, mus, deltas, s: int) -> list:
    """Per-layer strong-adversary bound: max of the medium term and the
    floor bound (1 - xi * beta * mu)^s with xi = 1/2 off the base layer.

    A layer with an empty catalog contributes its floor bound alone.
    """
    n_layers = len(deltas)
    out = []
    for j in range(n_layers):
        xi = 1.0 if j == n_layers - 1 else 0.5
        strong = float(np.clip(1.0 - xi * betas[j] * mus[j], 0.0, 1.0) ** s)
        if deltas[j].shape[0]:
            out.append(max(pf_medium(deltas[j], x, s), strong))
        else:
            out.append(strong)
    return out


def _binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def _eta_rec(params: CmtParams, omega_mins) -> Fraction:
    """Fraction of distinct symbols guaranteeing full recovery, worst layer."""
    etas = [
        Fraction(params.layer_size(j) - omega_mins[j - 1] + 1, params.layer_size(j))
        for j in range(1, params.l + 1)
    ]
    return max(etas)


def soundness_bound_weak(tau_per_layer, omega_mins, params: CmtParams,
                         s: int, rho: float, m_nodes: int) -> float:
    """Soundness/agreement failure bound per light client, greedy sampling.

    tau_per_layer: per layer, a mapping from hidden weight to the greedy
    prefix coverage of that layer's weight class; the first term maximizes
    the weak-adversary failure over layers and weights.  The second term
    bounds the chance that m_nodes light nodes' random samples miss enough
    distinct symbols for full recovery.  Logs are base 2; the result is
    capped at 1.
    """
    term1 = 0.0
    for j in range(1, params.l + 1):
        n_j = params.layer_size(j)
        for omega, t in tau_per_layer[j - 1].items():
            term1 = max(term1, pf_weak_greedy(t, omega, n_j, s, rho))
    eta = _eta_rec(params, omega_mins)
    eta_f = float(eta)
    exponent = (
        _binary_entropy(eta_f) * params.n_l
        - m_nodes * s * (1.0 - rho) * math.log2(1.0 / eta_f)
    )
    term2 = 2.0 ** exponent
    return min(1.0, max(term1, term2))


def soundness_bound_lp(x, pf_per_layer, omega_mins, params: CmtParams,
                       s: int, m_nodes: int) -> float:
    """Soundness/agreement failure bound per light client, LP sampling.

    The collection term sums the ceil(eta * n_l) largest sampling
    probabilities; a heavier tail makes symbol collection slower and the
    bound looser.  Capped at 1.
    """
    term1 = max(pf_per_layer)
    eta = _eta_rec(params, omega_mins)
    k = -((-eta.numerator * params.n_l) // eta.denominator)  # ceil(eta * n_l)
    top = float(np.sort(np.asarray(x, dtype=float))[::-1][:k].sum())
    top = min(top, 1.0)
    if top >= 1.0:
        return 1.0
    exponent = (
        _binary_entropy(float(eta)) * params.n_l
        - m_nodes * s * math.log2(1.0 / top)
    )
    term2 = 2.0 ** exponent
    return min(1.0, max(term1, term2))


def save_strategy(path, strategy, provenance=None) -> None:
    """Structured-text strategy file: decimal x, betas, and provenance."""
    if isinstance(strategy, GreedyStrategy):
        doc = {
            "type": "greedy",
            "ordered_vns": list(map(int, strategy.ordered_vns)),
            "rho": strategy.rho,
            "s": strategy.s,
        }
    else:
        doc = {
            "type": "lp",
            "x": [f"{v:.17g}" for v in strategy.x],
            "betas": [f"{v:.17g}" for v in strategy.betas],
        }
    doc["provenance"] = provenance or {}
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def load_strategy(path):
    with open(path) as f:
        doc = json.load(f)
    if doc["type"] == "greedy":
        return GreedyStrategy(ordered_vns=doc["ordered_vns"], rho=doc["rho"], s=doc["s"])
    return SamplingStrategy(
        x=np.array([float(v) for v in doc["x"]]),
        betas=np.array([float(v) for v in doc["betas"]]),
    )
