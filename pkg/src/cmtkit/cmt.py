"""Coded Merkle tree construction, proofs, and the hash-aware peeling decoder.

Every layer is a systematic LDPC codeword of byte-string symbols; hashes of
each layer's coded symbols are concatenated q at a time into the data
symbols of the parent layer, and the top layer's hashes form the root.
Symbol indices are 0-based; layers are numbered 1..l with l the base.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CmtkitError
from .gf2 import as_binary, parity_encoder

HASH_BYTES = 32
LENGTH_PREFIX = 8


def hash_symbol(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class CmtParams:
    """Tree shape: base length n_l, code rate, hashes-per-symbol q, layers l."""

    n_l: int
    rate: float
    q: int
    l: int
    block_size: int = 0

    def __post_init__(self):
        r = Fraction(self.rate).limit_denominator(10_000)
        object.__setattr__(self, "_rate", r)
        if not 0 < r < 1:
            raise ValueError("rate must be in (0, 1)")
        if self.q * r <= 1:
            raise ValueError("q * rate must exceed 1 for the tree to shrink")
        for j in range(1, self.l + 1):
            nj = self._layer_fraction(j)
            if nj.denominator != 1:
                raise ValueError(f"layer {j} size {nj} is not integral")
            if (r * nj).denominator != 1:
                raise ValueError(f"layer {j} data size is not integral")
        if self.layer_size(1) <= 1:
            raise ValueError("root must hold more than one hash")

    def _layer_fraction(self, j: int) -> Fraction:
        return self.n_l / (self.q * self._rate) ** (self.l - j)

    def layer_size(self, j: int) -> int:
        """n_j: coded symbols in layer j."""
        if not 1 <= j <= self.l:
            raise ValueError(f"layer {j} out of range")
        return int(self._layer_fraction(j))

    def data_size(self, j: int) -> int:
        """s_j: systematic symbols in layer j."""
        return int(self._rate * self._layer_fraction(j))

    def parity_size(self, j: int) -> int:
        return self.layer_size(j) - self.data_size(j)

    @property
    def t(self) -> int:
        """Root size in hashes."""
        return self.layer_size(1)

    def symbol_bytes(self, block_size=None) -> int:
        """Base symbol size so the length-prefixed block fits the data part."""
        b = self.block_size if block_size is None else block_size
        k = self.data_size(self.l)
        return max(1, -(-(b + LENGTH_PREFIX) // k))


@dataclass
class LayerCode:
    """Aligned parity-check matrix plus the systematic encoding map.

    Even VN degrees make these matrices rank deficient by one, so instead of
    a full-rank check the encoder construction itself decides encodability
    (it raises when the column order leaves data symbols constrained).
    """

    h: np.ndarray
    encoder: np.ndarray = field(init=False)

    def __post_init__(self):
        self.h = as_binary(self.h)
        self.encoder = parity_encoder(self.h)

    @property
    def n(self) -> int:
        return self.h.shape[1]

    @property
    def k(self) -> int:
        return self.h.shape[1] - self.h.shape[0]


@dataclass
class CodedMerkleTree:
    params: CmtParams
    layers: list  # layers[j-1]: list of n_j byte strings
    root: list  # t hashes of layer-1 symbols
    codes: list  # one LayerCode per layer


@dataclass
class ProofEntry:
    layer: int
    data_index: int
    data_symbol: bytes
    parity_index: int
    parity_symbol: bytes


@dataclass
class MerkleProof:
    """One data and one parity symbol from every layer above the target."""

    target_layer: int
    target_index: int
    entries: list

    def at(self, layer: int) -> ProofEntry:
        for e in self.entries:
            if e.layer == layer:
                return e
        raise KeyError(f"proof has no entry for layer {layer}")


def _encode_layer(code: LayerCode, data_symbols: list) -> list:
    """Systematic encode: parity r = XOR of data symbols with encoder[r, i] = 1."""
    arr = np.frombuffer(b"".join(data_symbols), dtype=np.uint8)
    arr = arr.reshape(len(data_symbols), -1)
    out = list(data_symbols)
    for r in range(code.encoder.shape[0]):
        acc = np.zeros(arr.shape[1], dtype=np.uint8)
        for i in np.nonzero(code.encoder[r])[0]:
            acc ^= arr[i]
        out.append(acc.tobytes())
    return out


def build_cmt(block: bytes, params: CmtParams, codes: list) -> CodedMerkleTree:
    """Build the full tree bottom-up from an opaque block.

    The block is length-prefixed and zero-padded into the base data symbols,
    each layer is systematically encoded, and each parent data symbol is the
    concatenation of its q children's hashes.

    Raises:
        CmtkitError: on dimension mismatches (rank errors surface from the
        layer codes themselves).
    """
    if len(codes) != params.l:
        raise CmtkitError(f"need {params.l} layer codes, got {len(codes)}")
    for j in range(1, params.l + 1):
        code = codes[j - 1]
        if code.n != params.layer_size(j) or code.k != params.data_size(j):
            raise CmtkitError(f"layer {j} code shape mismatch")

    c = params.symbol_bytes(len(block))
    k_l = params.data_size(params.l)
    padded = len(block).to_bytes(LENGTH_PREFIX, "big") + block
    padded += b"\x00" * (k_l * c - len(padded))
    data = [padded[i * c:(i + 1) * c] for i in range(k_l)]

    layers: list = [None] * params.l
    layers[params.l - 1] = _encode_layer(codes[params.l - 1], data)
    for j in range(params.l - 1, 0, -1):
        s_j = params.data_size(j)
        below = layers[j]  # layer j+1 (0-based list)
        groups: list[list[bytes]] = [[] for _ in range(s_j)]
        for x, sym in enumerate(below):
            groups[x % s_j].append(hash_symbol(sym))
        data_j = [b"".join(g) for g in groups]
        layers[j - 1] = _encode_layer(codes[j - 1], data_j)

    root = [hash_symbol(sym) for sym in layers[0]]
    return CodedMerkleTree(params=params, layers=layers, root=root, codes=codes)


def merkle_proof(tree: CodedMerkleTree, j: int, i: int) -> MerkleProof:
    """Proof for symbol i of layer j: the proof-hit data and parity symbol
    of every layer above."""
    params = tree.params
    if not 1 < j <= params.l:
        raise ValueError("proofs exist for layers 2..l")
    if not 0 <= i < params.layer_size(j):
        raise ValueError(f"symbol index {i} out of range for layer {j}")
    entries = []
    for jp in range(1, j):
        s, p = params.data_size(jp), params.parity_size(jp)
        d_idx = i % s
        p_idx = s + i % p
        entries.append(
            ProofEntry(
                layer=jp,
                data_index=d_idx,
                data_symbol=tree.layers[jp - 1][d_idx],
                parity_index=p_idx,
                parity_symbol=tree.layers[jp - 1][p_idx],
            )
        )
    return MerkleProof(target_layer=j, target_index=i, entries=entries)


def _hash_slot(params: CmtParams, level: int, index: int):
    """Where the hash of symbol (level, index) lives one layer up."""
    s_prev = params.data_size(level - 1)
    return index % s_prev, index // s_prev


def verify_symbol(root, params: CmtParams, j: int, i: int,
                  symbol: bytes, proof: MerkleProof) -> bool:
    """Check the hash chain from a symbol through the proof to the root.

    Data proof symbols chain upward level by level; parity proof symbols are
    checked against the hashes inside the proof's own data symbols.
    """
    if j == 1:
        return 0 <= i < params.t and hash_symbol(symbol) == root[i]
    if proof.target_layer != j or proof.target_index != i:
        return False

    def checked(level: int, idx: int, sym: bytes) -> bool:
        if level == 1:
            return hash_symbol(sym) == root[idx]
        d_idx, slot = _hash_slot(params, level, idx)
        try:
            entry = proof.at(level - 1)
        except KeyError:
            return False
        if entry.data_index != d_idx:
            return False
        chunk = entry.data_symbol[HASH_BYTES * slot:HASH_BYTES * (slot + 1)]
        return chunk == hash_symbol(sym)

    if not checked(j, i, symbol):
        return False
    for jp in range(j - 1, 0, -1):
        entry = proof.at(jp)
        s, p = params.data_size(jp), params.parity_size(jp)
        if entry.data_index != i % s or entry.parity_index != s + i % p:
            return False
        if not checked(jp, entry.data_index, entry.data_symbol):
            return False
        if not checked(jp, entry.parity_index, entry.parity_symbol):
            return False
    return True


@dataclass
class DecodeResult:
    status: str  # "ok" | "stall" | "ic"
    block: bytes = b""
    layer: int = 0
    stalled_vns: tuple = ()
    ic_cn: int = -1
    ic_symbols: list = field(default_factory=list)


def hash_aware_peel(available, root, codes: list, params: CmtParams) -> DecodeResult:
    """Decode the tree top-down from partial per-layer symbol maps.

    Peels each layer by solving degree-1 check equations, verifying every
    recovered symbol's hash against the layer above (the root for layer 1).
    A hash mismatch or a violated check on a fully known layer yields an
    incorrect-coding result carrying that check's member symbols; a layer
    that cannot complete yields a stall whose unresolved VNs form a stopping
    set of the layer's matrix.
    """
    if len(available) != params.l:
        raise CmtkitError("need one (possibly empty) symbol map per layer")

    expected: list = [None] * (params.l + 1)  # expected[j][i] = hash of N_j[i]
    expected[1] = list(root)
    decoded: list = [None] * (params.l + 1)

    for j in range(1, params.l + 1):
        n_j = params.layer_size(j)
        h = codes[j - 1].h
        known: dict[int, bytes] = {}
        sym_len = None
        for idx, sym in available[j - 1].items():
            if not 0 <= idx < n_j:
                raise CmtkitError(f"layer {j} index {idx} out of range")
            if sym_len is None:
                sym_len = len(sym)
            elif len(sym) != sym_len:
                raise CmtkitError(f"layer {j} symbols have mixed sizes")
            known[int(idx)] = bytes(sym)

        result = _peel_layer(h, known, expected[j], j)
        if result is not None:
            return result
        if len(known) < n_j:
            missing = tuple(sorted(set(range(n_j)) - set(known)))
            return DecodeResult(status="stall", layer=j, stalled_vns=missing)

        # Fully known: every check equation must balance.
        full = np.frombuffer(b"".join(known[i] for i in range(n_j)), dtype=np.uint8)
        full = full.reshape(n_j, -1)
        for c in range(h.shape[0]):
            members = np.nonzero(h[c])[0]
            acc = np.zeros(full.shape[1], dtype=np.uint8)
            for v in members:
                acc ^= full[v]
            if acc.any():
                return DecodeResult(
                    status="ic", layer=j, ic_cn=c,
                    ic_symbols=[known[int(v)] for v in members],
                )
        decoded[j] = [known[i] for i in range(n_j)]
        if j < params.l:
            s_j = params.data_size(j)
            nxt = params.layer_size(j + 1)
            expected[j + 1] = [
                decoded[j][x % s_j][HASH_BYTES * (x // s_j):HASH_BYTES * (x // s_j + 1)]
                for x in range(nxt)
            ]

    data = b"".join(decoded[params.l][: params.data_size(params.l)])
    length = int.from_bytes(data[:LENGTH_PREFIX], "big")
    if length > len(data) - LENGTH_PREFIX:
        raise CmtkitError("decoded length prefix is inconsistent")
    return DecodeResult(status="ok", block=data[LENGTH_PREFIX:LENGTH_PREFIX + length])


def _peel_layer(h: np.ndarray, known: dict, expected_hashes, layer: int):
    """Solve degree-1 checks in place; returns an ic DecodeResult or None."""
    m, n = h.shape
    rows = [np.nonzero(h[c])[0] for c in range(m)]
    unknown_count = np.array([sum(1 for v in r if v not in known) for r in rows])
    queue = [c for c in range(m) if unknown_count[c] == 1]
    vn_rows = [np.nonzero(h[:, v])[0] for v in range(n)]
    while queue:
        c = queue.pop()
        if unknown_count[c] != 1:
            continue
        members = rows[c]
        target = next(v for v in members if v not in known)
        acc = None
        for v in members:
            if v == target:
                continue
            arr = np.frombuffer(known[v], dtype=np.uint8)
            acc = arr.copy() if acc is None else acc ^ arr
        recovered = acc.tobytes()
        if hash_symbol(recovered) != expected_hashes[target]:
            syms = [known[int(v)] for v in members if int(v) in known]
            return DecodeResult(
                status="ic", layer=layer, ic_cn=int(c),
                ic_symbols=syms + [recovered],
            )
        known[int(target)] = recovered
        for c2 in vn_rows[target]:
            unknown_count[c2] -= 1
            if unknown_count[c2] == 1:
                queue.append(int(c2))
    return None


def save_tree(tree: CodedMerkleTree, sym_path, meta_path) -> None:
    """Length-prefixed binary symbols plus JSON metadata with the hex root."""
    with open(sym_path, "wb") as f:
        for layer in tree.layers:
            for sym in layer:
                f.write(len(sym).to_bytes(4, "big"))
                f.write(sym)
    meta = {
        "n_l": tree.params.n_l,
        "rate": tree.params.rate,
        "q": tree.params.q,
        "l": tree.params.l,
        "block_size": tree.params.block_size,
        "root": [h.hex() for h in tree.root],
        "layer_sizes": [tree.params.layer_size(j) for j in range(1, tree.params.l + 1)],
    }
    with open(meta_path, "w") as f:
        json.dump(meta, f, indent=1, sort_keys=True)
        f.write("\n")


def load_tree_symbols(sym_path, meta_path):
    """Read back (params, layers, root) from the serialized form."""
    with open(meta_path) as f:
        meta = json.load(f)
    params = CmtParams(n_l=meta["n_l"], rate=meta["rate"], q=meta["q"],
                       l=meta["l"], block_size=meta["block_size"])
    layers = []
    with open(sym_path, "rb") as f:
        for j in range(1, params.l + 1):
            layer = []
            for _ in range(params.layer_size(j)):
                ln = int.from_bytes(f.read(4), "big")
                layer.append(f.read(ln))
            layers.append(layer)
    root = [bytes.fromhex(h) for h in meta["root"]]
    return params, layers, root
