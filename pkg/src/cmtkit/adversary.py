"""Hiding-set selection for the three adversary models and Monte Carlo
validation of the closed-form failure probabilities.

The weak adversary hides a uniformly random stopping set of one weight; the
medium adversary hides the catalog set least likely to be sampled under the
published strategy; the strong adversary is never simulated against an
explicit set (its number is the analytic bound, reported as such).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cmt import CmtParams
from .errors import EmptyCatalogError, EmptyWeightClassError
from .sampling import GreedyStrategy, SamplingStrategy, deterministic_samples
from .stopping_sets import StoppingSetCatalog


@dataclass
class AdversarySpec:
    model: str  # "weak" | "medium" | "strong"
    mus: list
    target_layer: int = 0  # 1-based; 0 = automatic argmax layer

    def __post_init__(self):
        if self.model not in ("weak", "medium", "strong"):
            raise ValueError(f"unknown adversary model '{self.model}'")
        if any(mu < 1 for mu in self.mus):
            raise ValueError("size bounds must be >= 1")


def weak_hide(cat: StoppingSetCatalog, kappa: int, rng) -> tuple:
    """Uniform choice among the weight-kappa catalog members."""
    members = cat.weight_class(kappa)
    if not members:
        raise EmptyWeightClassError(f"no stopping sets of weight {kappa}")
    return members[int(rng.integers(len(members)))]


def medium_hide(cat: StoppingSetCatalog, x_layer, s: int):
    """Worst catalog set under per-VN sampling probabilities.

    Maximizes the single-sample miss probability (1 - sum of x over the
    set); catalog order (weight, then lexicographic) breaks ties.  Returns
    the set and its failure probability at s samples.
    """
    if not cat.sets:
        raise EmptyCatalogError("catalog is empty")
    x = np.asarray(x_layer, dtype=float)
    best, best_miss = None, -1.0
    for ss in cat.sets:
        miss = 1.0 - x[list(ss)].sum()
        if miss > best_miss + 1e-15:
            best, best_miss = ss, miss
    return best, float(np.clip(best_miss, 0.0, 1.0) ** s)


def medium_hide_coupled(cat: StoppingSetCatalog, delta, x, s: int):
    """Worst catalog set for an intermediate layer, using the proof-coupled
    hit matrix (a base sample can touch a set at both proof symbols)."""
    if not cat.sets:
        raise EmptyCatalogError("catalog is empty")
    miss = 1.0 - np.asarray(delta, dtype=float) @ np.asarray(x, dtype=float)
    k = int(np.argmax(miss))
    return cat.sets[k], float(np.clip(miss[k], 0.0, 1.0) ** s)


def choose_attack_layer(pf_values) -> int:
    """Layer (1-based) with maximal failure probability; ties go deepest."""
    pf = list(pf_values)
    best = max(pf)
    for j in range(len(pf), 0, -1):
        if pf[j - 1] == best:
            return j
    raise ValueError("empty probability list")


def _proof_hits(params: CmtParams, base_idx: int, layer: int) -> tuple:
    s = params.data_size(layer)
    p = params.parity_size(layer)
    return base_idx % s, s + base_idx % p


def simulate_light_node(strategy, hidden, params: CmtParams, s: int, rng) -> bool:
    """One light node's s base samples expanded through their Merkle proofs;
    True iff any touched symbol (any layer) is hidden.

    ``hidden`` maps 1-based layer to a set of hidden symbol indices.
    """
    n_l = params.n_l
    if isinstance(strategy, GreedyStrategy):
        n_det = deterministic_samples(strategy.rho, s)
        draws = list(strategy.ordered_vns[:n_det])
        draws.extend(int(v) for v in rng.integers(0, n_l, size=s - n_det))
    elif isinstance(strategy, SamplingStrategy):
        draws = [int(v) for v in rng.choice(n_l, size=s, p=strategy.x)]
    else:
        raise TypeError(f"unknown strategy type {type(strategy)!r}")

    base_hidden = hidden.get(params.l, frozenset())
    for b in draws:
        if b in base_hidden:
            return True
        for j in range(1, params.l):
            layer_hidden = hidden.get(j)
            if not layer_hidden:
                continue
            d, p = _proof_hits(params, b, j)
            if d in layer_hidden or p in layer_hidden:
                return True
    return False


def monte_carlo_pf(spec: AdversarySpec, strategy, params: CmtParams, catalogs,
                   s: int, trials: int, seed: int, weak_kappa: int = 0,
                   deltas=None):
    """Binomial estimate of the probability a light node misses the attack.

    The weak adversary redraws its hidden set each trial (the closed form
    averages over that choice); the medium adversary fixes the worst set
    once.  The strong adversary has no explicit worst set to simulate, so
    callers report its analytic bound instead.

    Returns (estimate, stderr); deterministic given the seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if spec.model == "strong":
        raise ValueError("strong adversary is reported via its analytic bound")
    rng = np.random.default_rng(seed)
    layer = spec.target_layer or params.l
    cat = catalogs[layer - 1]

    if spec.model == "medium":
        if isinstance(strategy, SamplingStrategy):
            if layer == params.l:
                hidden_set, _ = medium_hide(cat, strategy.x, s)
            else:
                if deltas is None:
                    raise ValueError("intermediate-layer medium attack needs deltas")
                hidden_set, _ = medium_hide_coupled(cat, deltas[layer - 1], strategy.x, s)
        else:
            raise ValueError("medium adversary requires a probability strategy")
        hidden = {layer: frozenset(hidden_set)}
        fails = 0
        for _ in range(trials):
            if not simulate_light_node(strategy, hidden, params, s, rng):
                fails += 1
    else:  # weak
        if weak_kappa < 1:
            raise ValueError("weak adversary needs a weight class")
        members = cat.weight_class(weak_kappa)
        if not members:
            raise EmptyWeightClassError(f"no stopping sets of weight {weak_kappa}")
        fails = 0
        for _ in range(trials):
            hidden_set = members[int(rng.integers(len(members)))]
            hidden = {layer: frozenset(hidden_set)}
            if not simulate_light_node(strategy, hidden, params, s, rng):
                fails += 1

    est = fails / trials
    stderr = math.sqrt(est * (1.0 - est) / trials)
    return est, stderr
