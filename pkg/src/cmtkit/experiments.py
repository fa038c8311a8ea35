"""Configuration-driven experiment pipelines.

One JSON config describes a tree shape, the constructions to build, the
adversary bound, and the sampling strategies; the pipeline stages construct
codes, enumerate stopping sets, design sampling, align matrices, build a
tree, run Monte Carlo attacks, and report CSV tables and curve files (with
rendered figures alongside).  Every stage reads and writes only the output
directory, stage seeds derive from the master seed by labeled hashing, and
reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .adversary import AdversarySpec, choose_attack_layer, monte_carlo_pf
from .cmt import CmtParams, LayerCode, build_cmt, hash_aware_peel, save_tree
from .construction import ConstructionConfig, build
from .errors import CmtkitError, RankDeficiencyError, StageError
from .gf2 import read_alist, write_alist
from .lp import lp_full
from .sampling import (
    CouplingMatrices,
    GreedyStrategy,
    SamplingStrategy,
    align_catalog,
    align_matrices,
    alignment_sources,
    build_coupling,
    deterministic_samples,
    greedy_set,
    interleave_source,
    load_strategy,
    pf_medium,
    pf_random,
    pf_random_ratio,
    pf_strong_bound,
    pf_weak_greedy,
    save_strategy,
    tau,
)
from .stopping_sets import (
    StoppingSetCatalog,
    enumerate_stopping_sets,
    min_stopping_set_size,
    vn_stopping_distribution,
)
from .tanner import TannerGraph, girth, vn_cycle_distribution

ALGORITHMS = ("peg", "ec_peg", "mc_peg", "lc_peg")
FIGURE_FAMILIES = ("concentration", "weak_curves", "strategy_comparison", "theta_tradeoff")

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "cmt", "construction", "adversary", "strategy",
                 "samples", "monte_carlo", "seed"],
    "properties": {
        "name": {"type": "string"},
        "cmt": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_l", "rate", "q", "layers"],
            "properties": {
                "n_l": {"type": "integer", "minimum": 2},
                "rate": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "q": {"type": "integer", "minimum": 2},
                "layers": {"type": "integer", "minimum": 1},
                "block_bytes": {"type": "integer", "minimum": 1},
            },
        },
        "construction": {
            "type": "object",
            "additionalProperties": False,
            "required": ["d_v", "algorithms"],
            "properties": {
                "d_v": {"type": "integer", "minimum": 3},
                "algorithms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"enum": list(ALGORITHMS)},
                },
                "g_c": {"type": "array", "items": {"type": "integer", "minimum": 6}},
                "t_th": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "theta_hat": {"type": "array", "items": {"type": "number"}},
                "max_encode_attempts": {"type": "integer", "minimum": 1},
            },
        },
        "adversary": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gamma": {"type": "integer", "minimum": 1},
                "mus": {"type": "array", "items": {"type": "integer", "minimum": 2}},
            },
        },
        "strategy": {
            "type": "object",
            "additionalProperties": False,
            "required": ["rho", "thetas"],
            "properties": {
                "rho": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "thetas": {"type": "array", "items": {"type": "number"}},
            },
        },
        "samples": {
            "type": "object",
            "additionalProperties": False,
            "required": ["s_values"],
            "properties": {
                "s_values": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            },
        },
        "monte_carlo": {
            "type": "object",
            "additionalProperties": False,
            "required": ["trials"],
            "properties": {"trials": {"type": "integer", "minimum": 1}},
        },
        "seed": {"type": "integer", "minimum": 0},
        "ensemble": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"nu_star": {"type": "number", "minimum": 0, "maximum": 1}},
        },
        "figures": {"type": "array", "items": {"enum": list(FIGURE_FAMILIES)}},
        "theta_grid": {"type": "array", "items": {"type": "number"}},
        "plot": {"type": "boolean"},
    },
}


def load_config(path):
    """Parse and validate an experiment config; schema errors abort early."""
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise StageError("config", str(e)) from e
    validate_config(cfg)
    return cfg


def validate_config(cfg) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise StageError("config", e.message) from e
    try:
        params = _params(cfg)
    except ValueError as e:
        raise StageError("config", str(e)) from e
    l = params.l
    cons = cfg["construction"]
    needs_gc = any(a != "peg" for a in cons["algorithms"])
    if needs_gc and len(cons.get("g_c", [])) != l:
        raise StageError("config", "g_c must list one even bound per layer")
    if "lc_peg" in cons["algorithms"]:
        if len(cons.get("t_th", [])) != l or len(cons.get("theta_hat", [])) != l:
            raise StageError("config", "lc_peg needs per-layer t_th and theta_hat")
    if len(cfg["strategy"]["thetas"]) != l:
        raise StageError("config", "thetas must list one value per layer")
    mus = cfg["adversary"].get("mus")
    if mus is not None and len(mus) != l:
        raise StageError("config", "mus must list one bound per layer")
    if mus is None and "gamma" not in cfg["adversary"]:
        raise StageError("config", "adversary needs gamma or explicit mus")


def _params(cfg) -> CmtParams:
    c = cfg["cmt"]
    return CmtParams(n_l=c["n_l"], rate=c["rate"], q=c["q"], l=c["layers"],
                     block_size=c.get("block_bytes", 4096))


def derive_seed(master: int, *labels) -> int:
    text = f"{master}|" + "|".join(str(x) for x in labels)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def config_hash(cfg) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _write_json(path, doc) -> None:
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write("\n")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _fmt(v) -> str:
    return f"{v:.10g}"


class Pipeline:
    """Stage runner over one config and output directory.

    Stages communicate exclusively through files so the CLI can run them in
    separate processes; loaded artifacts are cached per instance.
    """

    def __init__(self, cfg, out):
        validate_config(cfg)
        self.cfg = cfg
        self.out = Path(out)
        self.params = _params(cfg)
        self.algs = list(cfg["construction"]["algorithms"])
        self._cache: dict = {}

    # ---------- layout ----------

    def _dir(self, name: str) -> Path:
        d = self.out / name
        d.mkdir(parents=True, exist_ok=True)
        return d

    def code_path(self, alg, j) -> Path:
        return self._dir("codes") / f"{alg}_layer{j}.alist"

    def order_path(self, alg, j) -> Path:
        return self._dir("orders") / f"{alg}_layer{j}.json"

    def catalog_path(self, alg, j) -> Path:
        return self._dir("catalogs") / f"{alg}_layer{j}.txt"

    def aligned_path(self, alg, j) -> Path:
        return self._dir("aligned") / f"{alg}_layer{j}.alist"

    def strategy_path(self, alg, kind) -> Path:
        return self._dir("strategies") / f"{alg}_{kind}.json"

    # ---------- derived parameters ----------

    def layer_shape(self, j):
        return self.params.layer_size(j), self.params.parity_size(j)

    def gc(self, j) -> int:
        g_c = self.cfg["construction"].get("g_c")
        return g_c[j - 1] if g_c else 0

    def load_params_file(self) -> dict:
        path = self.out / "params.json"
        if not path.exists():
            raise StageError("stopsets", "params.json missing; run construct first")
        with open(path) as f:
            return json.load(f)

    def mus(self) -> list:
        explicit = self.cfg["adversary"].get("mus")
        if explicit:
            return list(explicit)
        gamma = self.cfg["adversary"]["gamma"]
        omega = self.load_params_file()["omega_peg"]
        return [w + gamma for w in omega]

    # ---------- stage: construct ----------

    def _construct_layer(self, alg, j, mus=None):
        """Build one layer code, retrying derived seeds until the aligned
        matrix admits a systematic encoder."""
        n, m = self.layer_shape(j)
        d_v = self.cfg["construction"]["d_v"]
        attempts = self.cfg["construction"].get("max_encode_attempts", 64)
        for attempt in range(attempts):
            seed = derive_seed(self.cfg["seed"], "construct", alg, j, attempt)
            ccfg = ConstructionConfig(
                n=n, m=m, d_v=d_v, g_c=self.gc(j),
                t_th=self.cfg["construction"].get("t_th", [0] * self.params.l)[j - 1],
                theta_hat=self.cfg["construction"].get("theta_hat", [0.0] * self.params.l)[j - 1],
                mu_hat=float(mus[j - 1]) if mus else 0.0,
                seed=seed,
            )
            g = build(alg, ccfg)
            order = self._greedy_order(alg, j, g)
            h_aligned = self._align_one(g.to_biadjacency(), order, j)
            try:
                LayerCode(h=h_aligned)
            except RankDeficiencyError:
                continue
            return g, attempt
        raise StageError(
            "construct",
            f"{alg} layer {j}: no systematically encodable code in {attempts} attempts",
        )

    def _greedy_order(self, alg, j, g: TannerGraph):
        gir = girth(g)
        g_min = int(gir) if gir != float("inf") else 4
        g_max = self.gc(j) or g_min + 4
        rng = np.random.default_rng(derive_seed(self.cfg["seed"], "order", alg, j))
        return greedy_set(g, g_min, g_max, g.n_vns, rng)

    def _align_one(self, h, order, j):
        if j == self.params.l:
            return h[:, list(order)].copy()
        src = interleave_source(h.shape[1], h.shape[0], order, self.params.n_l)
        return h[:, src].copy()

    def stage_construct(self) -> None:
        """Codes for every algorithm and layer, plus the bound parameters."""
        info: dict = {"attempts": {}, "omega_peg": []}
        if "peg" not in self.algs:
            raise StageError("construct", "the peg baseline is required to set size bounds")
        peg_graphs = {}
        for j in range(1, self.params.l + 1):
            g, attempt = self._construct_layer("peg", j)
            peg_graphs[j] = g
            info["attempts"][f"peg_layer{j}"] = attempt
            write_alist(self.code_path("peg", j), g.to_biadjacency())
        for j in range(1, self.params.l + 1):
            omega = min_stopping_set_size(peg_graphs[j], self.layer_shape(j)[0])
            info["omega_peg"].append(omega)
        gamma = self.cfg["adversary"].get("gamma", 0)
        mus = self.cfg["adversary"].get("mus") or [w + gamma for w in info["omega_peg"]]
        info["mus"] = mus
        _write_json(self.out / "params.json", info)

        for alg in self.algs:
            if alg == "peg":
                continue
            for j in range(1, self.params.l + 1):
                g, attempt = self._construct_layer(alg, j, mus=mus)
                info["attempts"][f"{alg}_layer{j}"] = attempt
                write_alist(self.code_path(alg, j), g.to_biadjacency())
        _write_json(self.out / "params.json", info)
        for alg in self.algs:
            for j in range(1, self.params.l + 1):
                self._write_code_meta(alg, j, info["attempts"][f"{alg}_layer{j}"])

    def _write_code_meta(self, alg, j, attempt) -> None:
        path = self.code_path(alg, j)
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        meta = {
            "construction": alg,
            "layer": j,
            "seed": derive_seed(self.cfg["seed"], "construct", alg, j, attempt),
            "attempt": attempt,
            "config": {
                "n": self.layer_shape(j)[0],
                "m": self.layer_shape(j)[1],
                "d_v": self.cfg["construction"]["d_v"],
                "g_c": self.gc(j),
            },
            "content_sha256": digest,
        }
        _write_json(path.with_suffix(".meta.json"), meta)

    # ---------- artifact loading ----------

    def graph(self, alg, j) -> TannerGraph:
        key = ("graph", alg, j)
        if key not in self._cache:
            path = self.code_path(alg, j)
            if not path.exists():
                raise StageError("stopsets", f"missing code file {path}; run construct")
            self._cache[key] = TannerGraph.from_biadjacency(read_alist(path))
        return self._cache[key]

    def order(self, alg, j):
        key = ("order", alg, j)
        if key not in self._cache:
            path = self.order_path(alg, j)
            if not path.exists():
                raise StageError("align", f"missing order file {path}; run design-sampling")
            with open(path) as f:
                self._cache[key] = json.load(f)["order"]
        return self._cache[key]

    def catalog(self, alg, j) -> StoppingSetCatalog:
        key = ("catalog", alg, j)
        if key not in self._cache:
            path = self.catalog_path(alg, j)
            if not path.exists():
                raise StageError("design", f"missing catalog {path}; run stopsets")
            self._cache[key] = StoppingSetCatalog.load(path)
        return self._cache[key]

    def sources(self, alg):
        key = ("sources", alg)
        if key not in self._cache:
            h_list = [self.graph(alg, j).to_biadjacency() for j in range(1, self.params.l + 1)]
            orders = [self.order(alg, j) for j in range(1, self.params.l + 1)]
            self._cache[key] = alignment_sources(h_list, orders)
        return self._cache[key]

    def aligned_catalogs(self, alg):
        src = self.sources(alg)
        return [
            align_catalog(self.catalog(alg, j), src[j - 1])
            for j in range(1, self.params.l + 1)
        ]

    def coupling(self, alg) -> CouplingMatrices:
        key = ("coupling", alg)
        if key not in self._cache:
            self._cache[key] = build_coupling(self.params, self.aligned_catalogs(alg))
        return self._cache[key]

    # ---------- stage: stopsets ----------

    def stage_stopsets(self) -> None:
        """Per-layer stopping-set catalogs below the configured bounds."""
        mus = self.mus()
        for alg in self.algs:
            for j in range(1, self.params.l + 1):
                cat = enumerate_stopping_sets(self.graph(alg, j), mus[j - 1])
                cat.save(self.catalog_path(alg, j))

    # ---------- stage: design-sampling ----------

    def stage_design(self) -> None:
        """Greedy orders per layer plus the LP and greedy strategies."""
        mus = self.mus()
        thetas = self.cfg["strategy"]["thetas"]
        rho = self.cfg["strategy"]["rho"]
        chash = config_hash(self.cfg)
        for alg in self.algs:
            for j in range(1, self.params.l + 1):
                order = self._greedy_order(alg, j, self.graph(alg, j))
                _write_json(self.order_path(alg, j), {"order": [int(v) for v in order]})
            self._cache.pop(("sources", alg), None)
            self._cache.pop(("coupling", alg), None)
            coupling = self.coupling(alg)
            sol = lp_full(coupling.delta, coupling.a[:-1], mus, thetas)
            save_strategy(
                self.strategy_path(alg, "lp"),
                SamplingStrategy(x=sol.x, betas=sol.betas),
                provenance={"config_sha256": chash, "construction": alg,
                            "objective": _fmt(sol.objective)},
            )
            save_strategy(
                self.strategy_path(alg, "greedy"),
                GreedyStrategy(ordered_vns=list(range(self.params.n_l)), rho=rho),
                provenance={"config_sha256": chash, "construction": alg,
                            "note": "aligned columns; greedy order is positional"},
            )

    # ---------- stage: align ----------

    def stage_align(self) -> None:
        for alg in self.algs:
            h_list = [self.graph(alg, j).to_biadjacency() for j in range(1, self.params.l + 1)]
            orders = [self.order(alg, j) for j in range(1, self.params.l + 1)]
            for j, h in enumerate(align_matrices(h_list, orders), start=1):
                write_alist(self.aligned_path(alg, j), h)

    def aligned_codes(self, alg):
        key = ("codes", alg)
        if key not in self._cache:
            codes = []
            for j in range(1, self.params.l + 1):
                path = self.aligned_path(alg, j)
                if not path.exists():
                    raise StageError("build-cmt", f"missing aligned code {path}; run align")
                codes.append(LayerCode(h=read_alist(path)))
            self._cache[key] = codes
        return self._cache[key]

    # ---------- stage: build-cmt ----------

    def stage_build_cmt(self, alg=None, block: bytes | None = None) -> None:
        alg = alg or self.algs[0]
        if block is None:
            rng = np.random.default_rng(derive_seed(self.cfg["seed"], "block"))
            size = self.cfg["cmt"].get("block_bytes", 4096)
            block = rng.integers(0, 256, size=size, dtype=np.uint8).tobytes()
        codes = self.aligned_codes(alg)
        try:
            tree = build_cmt(block, self.params, codes)
        except (CmtkitError, RankDeficiencyError) as e:
            raise StageError("build-cmt", str(e)) from e
        d = self._dir("cmt")
        save_tree(tree, d / f"{alg}_tree.bin", d / f"{alg}_tree.json")
        full = [dict(enumerate(layer)) for layer in tree.layers]
        result = hash_aware_peel(full, tree.root, codes, self.params)
        if result.status != "ok" or result.block != block:
            raise StageError("build-cmt", "self-check decode failed")

    # ---------- analytics shared by attack/report ----------

    def lp_strategy(self, alg) -> SamplingStrategy:
        path = self.strategy_path(alg, "lp")
        if not path.exists():
            raise StageError("attack", f"missing strategy {path}; run design-sampling")
        return load_strategy(path)

    def greedy_strategy(self, alg) -> GreedyStrategy:
        return load_strategy(self.strategy_path(alg, "greedy"))

    def medium_pf_layers(self, alg, x, s):
        deltas = self.coupling(alg).delta
        return [
            pf_medium(d, x, s) if d.shape[0] else 0.0
            for d in deltas
        ]

    def greedy_prefix_hits(self, n_prefix: int, j: int):
        """Aligned layer-j positions touched by base prefix 0..n_prefix-1."""
        if j == self.params.l:
            return set(range(n_prefix))
        s_j = self.params.data_size(j)
        p_j = self.params.parity_size(j)
        hits = set()
        for i in range(n_prefix):
            hits.add(i % s_j)
            hits.add(s_j + i % p_j)
        return hits

    def weak_layer_pf(self, alg, s, rho, mus):
        """Per-layer weak-adversary failure, maximized over hidden weights."""
        cats = self.aligned_catalogs(alg)
        n_prefix = deterministic_samples(rho, s)
        out = []
        for j in range(1, self.params.l + 1):
            n_j = self.params.layer_size(j)
            hits = self.greedy_prefix_hits(n_prefix, j)
            best = 0.0
            for omega in cats[j - 1].weights():
                if omega >= mus[j - 1]:
                    continue
                t = tau(hits, cats[j - 1], omega)
                best = max(best, pf_weak_greedy(t, omega, n_j, s, rho))
            out.append(best)
        return out

    # ---------- stage: attack ----------

    def stage_attack(self) -> None:
        """Monte Carlo validation rows for every construction and adversary."""
        mus = self.mus()
        trials = self.cfg["monte_carlo"]["trials"]
        rows = []
        for alg in self.algs:
            cats = self.aligned_catalogs(alg)
            deltas = self.coupling(alg).delta
            lp_strat = self.lp_strategy(alg)
            greedy_strat = self.greedy_strategy(alg)
            rho = greedy_strat.rho
            for s in self.cfg["samples"]["s_values"]:
                seed = derive_seed(self.cfg["seed"], "attack", alg, s)

                # weak adversary, overall greedy sampling, base layer
                base_cat = cats[-1]
                n_prefix = deterministic_samples(rho, s)
                best = (0.0, 0)
                for omega in base_cat.weights():
                    if omega >= mus[-1]:
                        continue
                    t = tau(range(n_prefix), base_cat, omega)
                    pf = pf_weak_greedy(t, omega, self.params.n_l, s, rho)
                    if pf > best[0]:
                        best = (pf, omega)
                if best[1]:
                    spec = AdversarySpec(model="weak", mus=mus, target_layer=self.params.l)
                    est, err = monte_carlo_pf(spec, greedy_strat, self.params, cats,
                                              s, trials, seed, weak_kappa=best[1])
                    rows.append([alg, "greedy", "weak", self.params.l, s,
                                 _fmt(best[0]), _fmt(est), _fmt(err), seed])

                # medium adversary under LP-sampling, worst layer
                med = self.medium_pf_layers(alg, lp_strat.x, s)
                layer = choose_attack_layer(med)
                spec = AdversarySpec(model="medium", mus=mus, target_layer=layer)
                est, err = monte_carlo_pf(spec, lp_strat, self.params, cats, s,
                                          trials, seed + 1, deltas=deltas)
                rows.append([alg, "lp", "medium", layer, s,
                             _fmt(med[layer - 1]), _fmt(est), _fmt(err), seed + 1])

                # medium adversary under uniform sampling (= random sampling)
                uniform = SamplingStrategy(x=np.full(self.params.n_l, 1.0 / self.params.n_l))
                med_u = self.medium_pf_layers(alg, uniform.x, s)
                layer_u = choose_attack_layer(med_u)
                spec = AdversarySpec(model="medium", mus=mus, target_layer=layer_u)
                est, err = monte_carlo_pf(spec, uniform, self.params, cats, s,
                                          trials, seed + 2, deltas=deltas)
                rows.append([alg, "uniform", "medium", layer_u, s,
                             _fmt(med_u[layer_u - 1]), _fmt(est), _fmt(err), seed + 2])

                # strong adversary: analytic bound only (no explicit worst set)
                strong = pf_strong_bound(lp_strat.x, lp_strat.betas, mus, deltas, s)
                layer_s = choose_attack_layer(strong)
                rows.append([alg, "lp", "strong-bound", layer_s, s,
                             _fmt(strong[layer_s - 1]), "", "", ""])
        self._dir("results")
        _write_csv(self.out / "results" / "mc.csv",
                   ["construction", "strategy", "adversary", "layer", "s",
                    "analytic_pf", "mc_estimate", "stderr", "seed"],
                   rows)

    # ---------- reporting ----------

    def table2_rows(self):
        """Base-layer failure probabilities at s = n_l / 4 per construction."""
        mus = self.mus()
        s = max(1, round(0.25 * self.params.n_l))
        label = (f"({self.params.n_l},{self.cfg['cmt']['rate']},"
                 f"{self.params.q},{self.params.l})")
        header = ["cmt", "s", "ensemble"]
        row = [label, s]
        nu = self.cfg.get("ensemble", {}).get("nu_star")
        row.append(_fmt(pf_random_ratio(nu, s)) if nu is not None else "")
        for alg in self.algs:
            header.append(f"{alg}_random")
            cat = self.catalog(alg, self.params.l)
            if cat.sets:
                row.append(_fmt(pf_random(cat.min_weight(), self.params.n_l, s)))
            else:
                row.append("")
        for alg in self.algs:
            header.append(f"{alg}_lp_strong")
            strat = self.lp_strategy(alg)
            strong = pf_strong_bound(strat.x, strat.betas, mus,
                                     self.coupling(alg).delta, s)
            row.append(_fmt(strong[-1]))
        for alg in self.algs:
            header.append(f"{alg}_lp_medium")
            strat = self.lp_strategy(alg)
            row.append(_fmt(self.medium_pf_layers(alg, strat.x, s)[-1]))
        return header, [row]

    def figure_curves(self, figure_id: str):
        """Long-format (x, curve, value) rows for one curve family."""
        if figure_id == "concentration":
            return self._curves_concentration()
        if figure_id == "weak_curves":
            return self._curves_weak()
        if figure_id == "strategy_comparison":
            return self._curves_strategy()
        if figure_id == "theta_tradeoff":
            return self._curves_theta()
        raise StageError("report", f"unknown figure id '{figure_id}'")

    def _curves_concentration(self):
        """Cycle and stopping-set fractions, VNs sorted by 6-cycle fraction."""
        rows = []
        for alg in self.algs:
            if alg not in ("peg", "ec_peg"):
                continue
            g = self.graph(alg, self.params.l)
            z6 = vn_cycle_distribution(g, 6)
            z8 = vn_cycle_distribution(g, 8)
            order = np.argsort(-z6, kind="stable")
            cat = self.catalog(alg, self.params.l)
            ss_w = max(cat.weights()) if cat.sets else 0
            ss = (vn_stopping_distribution(cat, ss_w) if ss_w else np.zeros(g.n_vns))
            for rank, v in enumerate(order, start=1):
                rows.append([rank, f"{alg}_zeta6", _fmt(z6[v])])
                rows.append([rank, f"{alg}_zeta8", _fmt(z8[v])])
                rows.append([rank, f"{alg}_ss{ss_w}", _fmt(ss[v])])
        return ["x", "curve", "value"], rows

    def _curves_weak(self):
        rows = []
        mus = self.mus()
        rho = self.cfg["strategy"]["rho"]
        nu = self.cfg.get("ensemble", {}).get("nu_star")
        for s in self.cfg["samples"]["s_values"]:
            if nu is not None:
                rows.append([s, "ensemble_random", _fmt(pf_random_ratio(nu, s))])
            for alg in self.algs:
                if alg not in ("peg", "ec_peg"):
                    continue
                cats = self.aligned_catalogs(alg)
                base = cats[-1]
                for omega in base.weights():
                    if omega >= mus[-1]:
                        continue
                    rows.append([s, f"{alg}_random_w{omega}",
                                 _fmt(pf_random(omega, self.params.n_l, s))])
                    n_prefix = deterministic_samples(rho, s)
                    t = tau(range(n_prefix), base, omega)
                    rows.append([s, f"{alg}_greedy_w{omega}",
                                 _fmt(pf_weak_greedy(t, omega, self.params.n_l, s, rho))])
                for j, pf in enumerate(self.weak_layer_pf(alg, s, rho, mus), start=1):
                    rows.append([s, f"{alg}_greedy_layer{j}", _fmt(pf)])
        return ["x", "curve", "value"], rows

    def _curves_strategy(self):
        rows = []
        mus = self.mus()
        for s in self.cfg["samples"]["s_values"]:
            for alg in self.algs:
                cat = self.catalog(alg, self.params.l)
                if cat.sets:
                    rows.append([s, f"{alg}_random",
                                 _fmt(pf_random(cat.min_weight(), self.params.n_l, s))])
                strat = self.lp_strategy(alg)
                med = self.medium_pf_layers(alg, strat.x, s)[-1]
                strong = pf_strong_bound(strat.x, strat.betas, mus,
                                         self.coupling(alg).delta, s)[-1]
                rows.append([s, f"{alg}_lp_medium", _fmt(med)])
                rows.append([s, f"{alg}_lp_strong", _fmt(strong)])
        return ["x", "curve", "value"], rows

    def _curves_theta(self):
        """Base-layer medium/strong trade-off against the base trade-off scalar."""
        rows = []
        mus = self.mus()
        thetas = list(self.cfg["strategy"]["thetas"])
        grid = self.cfg.get("theta_grid", [i / 10 for i in range(11)])
        s = max(1, round(0.25 * self.params.n_l))
        for alg in self.algs:
            coupling = self.coupling(alg)
            for theta in grid:
                th = thetas[:-1] + [theta]
                sol = lp_full(coupling.delta, coupling.a[:-1], mus, th)
                med = pf_medium(coupling.delta[-1], sol.x, s) if coupling.delta[-1].shape[0] else 0.0
                strong = pf_strong_bound(sol.x, sol.betas, mus, coupling.delta, s)[-1]
                rows.append([_fmt(theta), f"{alg}_medium", _fmt(med)])
                rows.append([_fmt(theta), f"{alg}_strong", _fmt(strong)])
        return ["x", "curve", "value"], rows

    def stage_report(self) -> None:
        self._dir("results")
        header, rows = self.table2_rows()
        _write_csv(self.out / "results" / "table2.csv", header, rows)
        curve_dir = self._dir("curves")
        for fig in self.cfg.get("figures", []):
            header, rows = self.figure_curves(fig)
            _write_csv(curve_dir / f"{fig}.csv", header, rows)
        if self.cfg.get("plot", True):
            from .plots import render_all

            render_all(self.out)
        self.write_manifest()

    def write_manifest(self) -> None:
        files = {}
        for path in sorted(self.out.rglob("*")):
            if path.is_file() and path.name != "manifest.json":
                files[str(path.relative_to(self.out))] = hashlib.sha256(
                    path.read_bytes()
                ).hexdigest()
        _write_json(self.out / "manifest.json", {
            "config_sha256": config_hash(self.cfg),
            "name": self.cfg["name"],
            "seed": self.cfg["seed"],
            "version": __version__,
            "files": files,
        })

    # ---------- entry point ----------

    def run(self) -> None:
        self.stage_construct()
        self.stage_stopsets()
        self.stage_design()
        self.stage_align()
        self.stage_build_cmt()
        self.stage_attack()
        self.stage_report()


def run_pipeline(cfg, out) -> None:
    """Full deterministic pipeline: codes, catalogs, strategies, aligned
    matrices, a built tree, Monte Carlo results, and reports."""
    Pipeline(cfg, out).run()


def reproduce_table2(cfg, out):
    """Write the base-layer probability table; returns (header, rows)."""
    p = Pipeline(cfg, out)
    p._dir("results")
    header, rows = p.table2_rows()
    _write_csv(Path(out) / "results" / "table2.csv", header, rows)
    return header, rows


def emit_figure_curves(cfg, figure_id, out):
    """Write one curve family CSV; returns (header, rows)."""
    p = Pipeline(cfg, out)
    header, rows = p.figure_curves(figure_id)
    path = p._dir("curves") / f"{figure_id}.csv"
    _write_csv(path, header, rows)
    return header, rows
