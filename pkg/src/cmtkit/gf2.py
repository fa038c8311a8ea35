"""Dense GF(2) linear algebra and the alist parity-check matrix format.

Matrices are numpy uint8 arrays with entries in {0, 1}, row-major,
rows = check nodes and columns = variable nodes.  Sizes here are small
(n <= a few hundred), so dense elimination is the right tool.
"""

from __future__ import annotations

import numpy as np

from .errors import RankDeficiencyError


def as_binary(m) -> np.ndarray:
    """Coerce to a 2-D uint8 array with entries reduced mod 2."""
    a = np.asarray(m, dtype=np.uint8) % 2
    if a.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return a


def gf2_row_reduce(m, pivot_order=None):
    """Row-reduce a binary matrix over GF(2).

    Args:
        m: binary matrix (r x c).
        pivot_order: sequence of column indices to search for pivots, in
            order.  Defaults to ``range(c)``.

    Returns:
        (R, pivots): reduced matrix (eliminated above and below each pivot)
        and the list of pivot columns in the order they were used.
    """
    r = as_binary(m).copy()
    n_rows, n_cols = r.shape
    if pivot_order is None:
        pivot_order = range(n_cols)

    pivots = []
    row = 0
    for col in pivot_order:
        if row == n_rows:
            break
        hits = np.nonzero(r[row:, col])[0]
        if hits.size == 0:
            continue
        src = row + hits[0]
        if src != row:
            r[[row, src]] = r[[src, row]]
        for other in np.nonzero(r[:, col])[0]:
            if other != row:
                r[other] ^= r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def gf2_rank(m) -> int:
    """GF(2) rank of a binary matrix."""
    _, pivots = gf2_row_reduce(m)
    return len(pivots)


def systematic_generator(h):
    """Systematic generator matrix for a full-row-rank parity check matrix.

    Returns (g, perm) where g = [I_k | P] is k x n and perm is the column
    permutation applied to ``h`` so that the first k permuted columns are
    the data positions: g @ h[:, perm].T == 0 over GF(2).  The permutation
    is the identity whenever the last m columns of ``h`` already form an
    invertible block; otherwise as few columns as possible are swapped.

    Raises:
        RankDeficiencyError: if h is not full row rank.
    """
    h = as_binary(h)
    m, n = h.shape
    k = n - m

    # Greedy pivot basis preferring the trailing (parity) block, completed
    # from data columns only when that block is singular.
    order = list(range(k, n)) + list(range(k))
    _, pivots = gf2_row_reduce(h, pivot_order=order)
    if len(pivots) < m:
        raise RankDeficiencyError(
            f"parity check matrix has rank {len(pivots)} < {m} rows"
        )

    parity_cols = sorted(pivots)
    data_cols = [c for c in range(n) if c not in set(parity_cols)]
    perm = np.array(data_cols + parity_cols, dtype=np.int64)

    hp = h[:, perm]
    a, b = hp[:, :k], hp[:, k:]
    b_inv = gf2_inverse(b)
    # h [d; p] = 0  =>  p = b^-1 a d; generator row i is (e_i, (b^-1 a)_., i).
    p_block = (b_inv @ a) % 2
    g = np.hstack([np.eye(k, dtype=np.uint8), p_block.T.astype(np.uint8)])
    return g, perm


def gf2_inverse(b) -> np.ndarray:
    """Invert a square binary matrix over GF(2).

    Raises:
        RankDeficiencyError: if b is singular.
    """
    b = as_binary(b)
    m = b.shape[0]
    if b.shape[1] != m:
        raise ValueError("matrix is not square")
    aug = np.hstack([b, np.eye(m, dtype=np.uint8)])
    r, pivots = gf2_row_reduce(aug, pivot_order=range(m))
    if len(pivots) < m:
        raise RankDeficiencyError("singular matrix over GF(2)")
    return r[:, m:].copy()


def parity_encoder(h) -> np.ndarray:
    """Encoder matrix E (m x k) for a code systematic in the given column order.

    With data d in the first k positions, the parity positions are E @ d mod 2
    and [d; E @ d] is a codeword of ``h``.  Regular codes with even VN degree
    are never full row rank (every column sums to 0 mod 2), so this solves
    the parity system by elimination with pivots restricted to the trailing
    m columns: redundant rows are fine, and parity positions the pivots miss
    are pinned to zero.

    Raises:
        RankDeficiencyError: if some row constrains the data columns, i.e.
        no systematic encoder exists in this column order.
    """
    h = as_binary(h)
    m, n = h.shape
    k = n - m
    r, pivots = gf2_row_reduce(h, pivot_order=range(k, n))
    if r[len(pivots):, :k].any():
        raise RankDeficiencyError(
            "data columns are constrained; no systematic encoder in this column order"
        )
    e = np.zeros((m, k), dtype=np.uint8)
    for row_idx, col in enumerate(pivots):
        e[col - k] = r[row_idx, :k]
    return e


def write_alist(path, h) -> None:
    """Write a binary matrix in the standard alist interchange format."""
    h = as_binary(h)
    m, n = h.shape
    col_idx = [list(np.nonzero(h[:, j])[0] + 1) for j in range(n)]
    row_idx = [list(np.nonzero(h[i, :])[0] + 1) for i in range(m)]
    max_dv = max((len(c) for c in col_idx), default=0)
    max_dc = max((len(r) for r in row_idx), default=0)

    lines = [f"{n} {m}", f"{max_dv} {max_dc}"]
    lines.append(" ".join(str(len(c)) for c in col_idx))
    lines.append(" ".join(str(len(r)) for r in row_idx))
    for c in col_idx:
        lines.append(" ".join(str(v) for v in c + [0] * (max_dv - len(c))))
    for r in row_idx:
        lines.append(" ".join(str(v) for v in r + [0] * (max_dc - len(r))))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def read_alist(path) -> np.ndarray:
    """Read an alist file into a dense binary matrix (rows = checks)."""
    with open(path) as f:
        tokens = [int(t) for line in f for t in line.split()]
    it = iter(tokens)
    n, m = next(it), next(it)
    max_dv, _max_dc = next(it), next(it)
    col_deg = [next(it) for _ in range(n)]
    _row_deg = [next(it) for _ in range(m)]
    h = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        entries = [next(it) for _ in range(max_dv)]
        for v in entries[: col_deg[j]]:
            if not 1 <= v <= m:
                raise ValueError(f"alist row index {v} out of range in column {j + 1}")
            h[v - 1, j] = 1
    # Row sections are redundant with the column sections; ignore the rest.
    return h
