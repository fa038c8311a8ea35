"""Numba-compiled core of the stopping-set search.

Same branch-and-bound as the pure-Python search in ``stopping_sets`` (which
stays as the reference implementation): include/exclude decisions, unit
propagation on check-node constraints, and deficiency lower bounds.  Found
sets are emitted as VN bitmasks packed into uint64 words.

Shared mutable scalars live in ``state``: [0] trail length, [1] included
count, [2] deficient-CN count.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional speedup
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def _assign(v, kind, decided, trail, state, inc_mask, dec_mask, ic, ec, vn_adj, vn_deg):
    decided[v] = kind
    trail[state[0]] = v
    state[0] += 1
    w_i = v >> 6
    bit = np.uint64(1) << np.uint64(v & 63)
    dec_mask[w_i] |= bit
    if kind == 1:
        state[1] += 1
        inc_mask[w_i] |= bit
        for t in range(vn_deg[v]):
            c = vn_adj[v, t]
            ic[c] += 1
            if ic[c] == 1:
                state[2] += 1
            elif ic[c] == 2:
                state[2] -= 1
    else:
        for t in range(vn_deg[v]):
            ec[vn_adj[v, t]] += 1


@njit(cache=True)
def _undo_to(base, decided, trail, state, inc_mask, dec_mask, ic, ec, vn_adj, vn_deg):
    while state[0] > base:
        state[0] -= 1
        v = trail[state[0]]
        kind = decided[v]
        decided[v] = 0
        w_i = v >> 6
        bit = np.uint64(1) << np.uint64(v & 63)
        dec_mask[w_i] &= ~bit
        if kind == 1:
            state[1] -= 1
            inc_mask[w_i] &= ~bit
            for t in range(vn_deg[v]):
                c = vn_adj[v, t]
                ic[c] -= 1
                if ic[c] == 1:
                    state[2] += 1
                elif ic[c] == 0:
                    state[2] -= 1
        else:
            for t in range(vn_deg[v]):
                ec[vn_adj[v, t]] -= 1


@njit(cache=True)
def _propagate(
    mu, n_cns, decided, trail, state, inc_mask, dec_mask, ic, ec,
    vn_adj, vn_deg, cn_adj, cn_deg,
):
    changed = True
    while changed:
        changed = False
        for c in range(n_cns):
            if ic[c] == 1:
                uc = cn_deg[c] - 1 - ec[c]
                if uc == 0:
                    return False
                if uc == 1:
                    if state[1] + 1 > mu - 1:
                        return False
                    for t in range(cn_deg[c]):
                        w = cn_adj[c, t]
                        if decided[w] == 0:
                            _assign(w, 1, decided, trail, state, inc_mask,
                                    dec_mask, ic, ec, vn_adj, vn_deg)
                            changed = True
                            break
    return True


@njit(cache=True)
def _disjoint_bound(n_cns, words, ic, cn_masks, dec_mask, used):
    count = 0
    for w_i in range(words):
        used[w_i] = np.uint64(0)
    for c in range(n_cns):
        if ic[c] == 1:
            overlap = False
            for w_i in range(words):
                if cn_masks[c, w_i] & ~dec_mask[w_i] & used[w_i]:
                    overlap = True
                    break
            if not overlap:
                count += 1
                for w_i in range(words):
                    used[w_i] |= cn_masks[c, w_i] & ~dec_mask[w_i]
    return count


@njit(cache=True)
def _search_kernel(
    n, m, mu, vn_adj, vn_deg, cn_adj, cn_deg, cn_masks, node_cap, out_masks
):
    words = cn_masks.shape[1]
    d_v_max = 1
    for v in range(n):
        if vn_deg[v] > d_v_max:
            d_v_max = vn_deg[v]

    decided = np.zeros(n, dtype=np.uint8)
    ic = np.zeros(m, dtype=np.int32)
    ec = np.zeros(m, dtype=np.int32)
    inc_mask = np.zeros(words, dtype=np.uint64)
    dec_mask = np.zeros(words, dtype=np.uint64)
    used = np.zeros(words, dtype=np.uint64)
    trail = np.empty(n + 1, dtype=np.int32)
    state = np.zeros(3, dtype=np.int64)  # trail_len, inc_len, n_deficient

    max_depth = mu + 2
    arena = np.empty(max_depth * n, dtype=np.int32)
    f_base = np.empty(max_depth, dtype=np.int64)
    f_cand0 = np.empty(max_depth, dtype=np.int64)
    f_ncand = np.empty(max_depth, dtype=np.int64)
    f_pos = np.empty(max_depth, dtype=np.int64)
    f_last = np.empty(max_depth, dtype=np.int64)

    n_found = 0
    nodes = 0
    cap_sets = out_masks.shape[0]
    status = 0
    depth = 0
    entering = True  # next step enters a new frame at `depth`
    pending = -1

    while True:
        if entering:
            nodes += 1
            if nodes > node_cap:
                status = -1
                break
            base = state[0]
            if pending >= 0:
                _assign(pending, 1, decided, trail, state, inc_mask, dec_mask,
                        ic, ec, vn_adj, vn_deg)
            ok = _propagate(mu, m, decided, trail, state, inc_mask, dec_mask,
                            ic, ec, vn_adj, vn_deg, cn_adj, cn_deg)
            if ok:
                lb = (state[2] + d_v_max - 1) // d_v_max
                if state[1] + lb > mu - 1:
                    ok = False
                elif state[2] > 0:
                    dj = _disjoint_bound(m, words, ic, cn_masks, dec_mask, used)
                    if state[1] + dj > mu - 1:
                        ok = False
            if not ok:
                _undo_to(base, decided, trail, state, inc_mask, dec_mask,
                         ic, ec, vn_adj, vn_deg)
                depth -= 1
                entering = False
                if depth < 0:
                    break
                continue
            a0 = depth * n
            nc = 0
            if state[2] == 0:
                if state[1] > 0:
                    if n_found >= cap_sets:
                        status = -2
                        break
                    for w_i in range(words):
                        out_masks[n_found, w_i] = inc_mask[w_i]
                    n_found += 1
                if state[1] >= mu - 1:
                    _undo_to(base, decided, trail, state, inc_mask, dec_mask,
                             ic, ec, vn_adj, vn_deg)
                    depth -= 1
                    entering = False
                    if depth < 0:
                        break
                    continue
                for w in range(n):
                    if decided[w] == 0:
                        arena[a0 + nc] = w
                        nc += 1
            else:
                best_c = -1
                best_uc = n + 1
                for c in range(m):
                    if ic[c] == 1:
                        uc = cn_deg[c] - 1 - ec[c]
                        if uc < best_uc:
                            best_uc = uc
                            best_c = c
                for t in range(cn_deg[best_c]):
                    w = cn_adj[best_c, t]
                    if decided[w] == 0:
                        arena[a0 + nc] = w
                        nc += 1
            f_base[depth] = base
            f_cand0[depth] = a0
            f_ncand[depth] = nc
            f_pos[depth] = 0
            f_last[depth] = -1
            entering = False
            continue

        # Advance the frame at `depth` (or finish it).
        if f_last[depth] >= 0:
            _assign(f_last[depth], 2, decided, trail, state, inc_mask,
                    dec_mask, ic, ec, vn_adj, vn_deg)
            f_last[depth] = -1
        if f_pos[depth] < f_ncand[depth]:
            w = arena[f_cand0[depth] + f_pos[depth]]
            f_pos[depth] += 1
            if decided[w] != 0:
                continue
            # Deficiency count if w were included: current minus those it
            # fixes plus its untouched CNs.
            d_after = state[2]
            for t in range(vn_deg[w]):
                c = vn_adj[w, t]
                if ic[c] == 0:
                    d_after += 1
                elif ic[c] == 1:
                    d_after -= 1
            extra = (d_after + d_v_max - 1) // d_v_max
            if state[1] + 1 + extra <= mu - 1:
                f_last[depth] = w
                pending = w
                depth += 1
                entering = True
            else:
                _assign(w, 2, decided, trail, state, inc_mask, dec_mask,
                        ic, ec, vn_adj, vn_deg)
            continue
        _undo_to(f_base[depth], decided, trail, state, inc_mask, dec_mask,
                 ic, ec, vn_adj, vn_deg)
        depth -= 1
        if depth < 0:
            break

    return status, n_found, nodes


def search_stopping_sets(vn_cns, cn_vns, n, m, mu, node_cap, cap_sets=4_000_000):
    """Run the compiled search; returns (status, list of sorted VN tuples).

    status: 0 ok, -1 node cap exceeded, -2 result buffer full.
    """
    d_v_max = max((len(a) for a in vn_cns), default=1) or 1
    d_c_max = max((len(a) for a in cn_vns), default=1) or 1
    vn_adj = np.zeros((n, d_v_max), dtype=np.int32)
    vn_deg = np.zeros(n, dtype=np.int32)
    for v, cs in enumerate(vn_cns):
        vn_deg[v] = len(cs)
        vn_adj[v, : len(cs)] = cs
    cn_adj = np.zeros((m, d_c_max), dtype=np.int32)
    cn_deg = np.zeros(m, dtype=np.int32)
    words = (n + 63) // 64
    cn_masks = np.zeros((m, words), dtype=np.uint64)
    for c, vs in enumerate(cn_vns):
        vs = sorted(vs)
        cn_deg[c] = len(vs)
        cn_adj[c, : len(vs)] = vs
        for v in vs:
            cn_masks[c, v >> 6] |= np.uint64(1) << np.uint64(v & 63)

    out_masks = np.zeros((cap_sets, words), dtype=np.uint64)
    status, n_found, _nodes = _search_kernel(
        n, m, mu, vn_adj, vn_deg, cn_adj, cn_deg, cn_masks, node_cap, out_masks
    )
    sets = []
    for i in range(n_found):
        vs = []
        for w_i in range(words):
            word = int(out_masks[i, w_i])
            base = w_i << 6
            while word:
                low = word & -word
                vs.append(base + low.bit_length() - 1)
                word ^= low
        sets.append(tuple(vs))
    return status, sets
