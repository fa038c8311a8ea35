"""Minimax linear programs for sampling design and code construction.

Problems minimize the max of affine "inner forms" over a sampling vector x
on the simplex plus per-layer floor variables beta, with each beta bounded
by the minimum of a coupling matrix times x.  Solved via the epigraph
reformulation (min t s.t. every form <= t) with a dense two-phase primal
simplex; Bland's rule keeps pivoting deterministic and cycle-proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LpSolverError
from .tanner import TannerGraph

TOL = 1e-9
MAX_ITER = 500_000


@dataclass
class MinimaxLpProblem:
    """min over (x, betas) of max inner form.

    Inner form f = forms_const + forms_x @ x + forms_beta @ betas, one row
    per form.  Constraints: sum(x) = 1, x >= 0, betas >= 0, and for each
    beta b: beta_b <= (couplings[b] @ x)_k for every row k.
    """

    n: int
    forms_x: np.ndarray
    forms_beta: np.ndarray
    forms_const: np.ndarray
    couplings: list = field(default_factory=list)

    def n_betas(self) -> int:
        return len(self.couplings)

    def form_values(self, x, betas) -> np.ndarray:
        return self.forms_const + self.forms_x @ x + self.forms_beta @ betas

    def uniform_point(self):
        """The always-feasible uniform strategy with maximal floors."""
        x = np.full(self.n, 1.0 / self.n)
        betas = np.array([float((m @ x).min()) if m.shape[0] else 0.0
                          for m in self.couplings])
        return x, betas


@dataclass
class LpSolution:
    x: np.ndarray
    betas: np.ndarray
    objective: float
    status: str = "optimal"


def solve_minimax(p: MinimaxLpProblem) -> LpSolution:
    """Optimal solution of the epigraph LP for a minimax problem.

    Raises:
        LpSolverError: on infeasibility or iteration cap (numerical failure).
    """
    n, nb = p.n, p.n_betas()
    n_forms = p.forms_const.shape[0]
    if n_forms == 0:
        raise LpSolverError("minimax problem has no inner forms")
    # Columns: x (n), betas (nb), t+ and t- (free epigraph variable).
    ncols = n + nb + 2

    ub_rows = []
    ub_rhs = []
    for k in range(n_forms):
        row = np.zeros(ncols)
        row[:n] = p.forms_x[k]
        row[n:n + nb] = p.forms_beta[k]
        row[-2], row[-1] = -1.0, 1.0
        ub_rows.append(row)
        ub_rhs.append(-p.forms_const[k])
    for b, m in enumerate(p.couplings):
        for k in range(m.shape[0]):
            row = np.zeros(ncols)
            row[:n] = -m[k]
            row[n + b] = 1.0
            ub_rows.append(row)
            ub_rhs.append(0.0)

    a_eq = np.zeros((1, ncols))
    a_eq[0, :n] = 1.0
    b_eq = np.array([1.0])
    c = np.zeros(ncols)
    c[-2], c[-1] = 1.0, -1.0

    z = _simplex(c, np.array(ub_rows), np.array(ub_rhs), a_eq, b_eq)
    x = z[:n]
    betas = z[n:n + nb]
    return LpSolution(x=x, betas=betas, objective=float(z[-2] - z[-1]))


def _simplex(c, a_ub, b_ub, a_eq, b_eq, tol=TOL, max_iter=MAX_ITER):
    """Two-phase tableau simplex for min c.z, A_ub z <= b_ub, A_eq z = b_eq, z >= 0."""
    n = c.shape[0]
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq

    a = np.zeros((m, n + m_ub))
    a[:m_ub, :n] = a_ub
    a[:m_ub, n:] = np.eye(m_ub)
    a[m_ub:, :n] = a_eq
    b = np.concatenate([b_ub, b_eq]).astype(float)

    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # Artificials for equality rows and for inequality rows whose slack
    # was flipped; everything else starts basic on its slack.
    art_rows = [i for i in range(m) if i >= m_ub or neg[i]]
    n_art = len(art_rows)
    full = np.hstack([a, np.zeros((m, n_art))])
    basis = np.empty(m, dtype=np.int64)
    for i in range(m_ub):
        basis[i] = n + i
    for j, i in enumerate(art_rows):
        full[i, n + m_ub + j] = 1.0
        basis[i] = n + m_ub + j

    tab = np.hstack([full, b[:, None]])

    if n_art:
        c1 = np.zeros(tab.shape[1] - 1)
        c1[n + m_ub:] = 1.0
        iters = _run_simplex(tab, basis, c1, tol, max_iter)
        phase1 = sum(tab[i, -1] for i in range(m) if basis[i] >= n + m_ub)
        if phase1 > 1e-7:
            raise LpSolverError(f"infeasible (phase-1 residual {phase1:.3g})")
        _drive_out_artificials(tab, basis, n + m_ub, tol)
    else:
        iters = 0

    # Phase 2 on the original columns only.
    keep = list(range(n + m_ub)) + [tab.shape[1] - 1]
    tab = tab[:, keep]
    c2 = np.zeros(n + m_ub)
    c2[:n] = c
    _run_simplex(tab, basis, c2, tol, max_iter - iters)

    z = np.zeros(n + m_ub)
    for i, bi in enumerate(basis):
        if bi < n + m_ub:
            z[bi] = tab[i, -1]
    return z[:n]


def _run_simplex(tab, basis, cost, tol, max_iter) -> int:
    """Run primal simplex on a tableau in place; returns iteration count."""
    m = tab.shape[0]
    red = np.concatenate([cost, [0.0]]).astype(float)
    for i in range(m):
        if red[basis[i]] != 0.0:
            red -= red[basis[i]] * tab[i]

    it = 0
    while True:
        it += 1
        if it > max_iter:
            raise LpSolverError(f"simplex iteration cap {max_iter} exceeded")
        negative = np.nonzero(red[:-1] < -tol)[0]
        if negative.size == 0:
            return it
        enter = int(negative[0])  # Bland: smallest eligible index
        col = tab[:, enter]
        pos = np.nonzero(col > tol)[0]
        if pos.size == 0:
            raise LpSolverError("unbounded LP")
        ratios = tab[pos, -1] / col[pos]
        rmin = ratios.min()
        tied = pos[ratios <= rmin + tol * (1.0 + abs(rmin))]
        leave = int(min(tied, key=lambda i: basis[i]))  # Bland on ties

        piv = tab[leave, enter]
        tab[leave] /= piv
        col_vals = tab[:, enter].copy()
        col_vals[leave] = 0.0
        tab -= np.outer(col_vals, tab[leave])
        red -= red[enter] * tab[leave]
        basis[leave] = enter


def _drive_out_artificials(tab, basis, first_art: int, tol) -> None:
    for i in range(tab.shape[0]):
        if basis[i] < first_art:
            continue
        row = tab[i, :first_art]
        nz = np.nonzero(np.abs(row) > tol)[0]
        if nz.size == 0:
            continue  # redundant row; harmless to leave with zero rhs
        enter = int(nz[0])
        piv = tab[i, enter]
        tab[i] /= piv
        col_vals = tab[:, enter].copy()
        col_vals[i] = 0.0
        tab -= np.outer(col_vals, tab[i])
        basis[i] = enter


def minimal_rows(mat: np.ndarray) -> np.ndarray:
    """Drop rows whose support is a superset of another row's support.

    For max(1 - M x) with x >= 0 the support-minimal rows attain the max,
    so this is an exact reduction for the LPs built here.
    """
    if mat.shape[0] <= 1:
        return mat
    supports = [frozenset(np.nonzero(r)[0]) for r in np.asarray(mat) != 0]
    order = sorted(range(len(supports)), key=lambda i: len(supports[i]))
    kept_idx: list[int] = []
    kept_sup: list[frozenset] = []
    for i in order:
        s = supports[i]
        if any(k <= s for k in kept_sup):
            continue
        kept_idx.append(i)
        kept_sup.append(s)
    kept_idx.sort()
    return mat[kept_idx]


def lp_base(pi: np.ndarray, mu_l: float, theta: float) -> LpSolution:
    """Base-layer sampling design: trade off worst catalog miss vs floor bound.

    Solves for (x, beta) minimizing
    max(max(1 - Pi x), theta * (1 - beta * mu_l))
    subject to the simplex and beta <= x_i constraints.
    """
    pi = np.asarray(pi, dtype=float)
    n = pi.shape[1]
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must be in [0, 1]")
    if pi.shape[0] == 0:
        # No stopping sets below the bound: only the floor term binds and
        # the uniform strategy maximizes the floor.
        x = np.full(n, 1.0 / n)
        return LpSolution(x=x, betas=np.array([1.0 / n]),
                          objective=float(theta * (1.0 - mu_l / n)))
    rows = minimal_rows(pi)
    forms_x = np.vstack([-rows, np.zeros((1, n))])
    forms_beta = np.vstack([np.zeros((rows.shape[0], 1)), [[-theta * mu_l]]])
    forms_const = np.concatenate([np.ones(rows.shape[0]), [theta]])
    p = MinimaxLpProblem(n=n, forms_x=forms_x, forms_beta=forms_beta,
                         forms_const=forms_const,
                         couplings=[np.eye(n)])
    return solve_minimax(p)


def lp_full(deltas, a_mats, mus, thetas) -> LpSolution:
    """Whole-tree sampling design over all layers.

    Args:
        deltas: per layer j = 1..l, the coupled stopping-set matrices
            Delta^(j) (rows x n_l); the base layer entry is Pi itself.
        a_mats: per layer j = 1..l-1, the proof-coupling matrices A^(j).
        mus: per-layer size bounds used by the floor terms.
        thetas: per-layer trade-off scalars in [0, 1].

    The floor term for intermediate layers carries the 1/2 factor from the
    data/parity split of Merkle proofs; the base layer has factor 1.
    """
    n_layers = len(deltas)
    n = deltas[-1].shape[1]
    if len(a_mats) != n_layers - 1 or len(mus) != n_layers or len(thetas) != n_layers:
        raise ValueError("inconsistent layer counts")

    forms_x, forms_beta, forms_const = [], [], []
    for j, delta in enumerate(deltas):
        rows = minimal_rows(np.asarray(delta, dtype=float))
        for row in rows:
            fx = -row
            fb = np.zeros(n_layers)
            forms_x.append(fx)
            forms_beta.append(fb)
            forms_const.append(1.0)
    for j in range(n_layers):
        xi = 1.0 if j == n_layers - 1 else 0.5
        fb = np.zeros(n_layers)
        fb[j] = -thetas[j] * xi * mus[j]
        forms_x.append(np.zeros(n))
        forms_beta.append(fb)
        forms_const.append(thetas[j])

    couplings = [np.asarray(a, dtype=float) for a in a_mats] + [np.eye(n)]
    p = MinimaxLpProblem(
        n=n,
        forms_x=np.array(forms_x),
        forms_beta=np.array(forms_beta),
        forms_const=np.array(forms_const),
        couplings=couplings,
    )
    return solve_minimax(p)


def lp_objective(cycles, g: TannerGraph, theta_hat: float, mu_hat: float) -> float:
    """Optimal objective of the cycle-based design LP (value only).

    The incidence matrix has one row per cycle marking the VNs it touches;
    the floor term theta_hat * (1 - beta * mu_hat) plays the same role as in
    the catalog LPs.
    """
    n = g.n_vns
    if not cycles:
        # Only the floor term: uniform x maximizes the floor at 1/n.
        return float(theta_hat * (1.0 - mu_hat / n))
    mat = np.zeros((len(cycles), n))
    for k, cyc in enumerate(cycles):
        mat[k, list(cyc.vns)] = 1.0
    return float(lp_base(mat, mu_hat, theta_hat).objective)


def dump_problem(p: MinimaxLpProblem, path) -> None:
    """Plain-text tableau dump for external cross-checking."""
    with open(path, "w") as f:
        f.write(f"n {p.n} betas {p.n_betas()} forms {p.forms_const.shape[0]}\n")
        f.write("# form rows: const | x coefficients | beta coefficients\n")
        for k in range(p.forms_const.shape[0]):
            xs = " ".join(f"{v:.12g}" for v in p.forms_x[k])
            bs = " ".join(f"{v:.12g}" for v in p.forms_beta[k])
            f.write(f"form {p.forms_const[k]:.12g} | {xs} | {bs}\n")
        for b, m in enumerate(p.couplings):
            f.write(f"coupling {b} rows {m.shape[0]}\n")
            for row in m:
                f.write("  " + " ".join(f"{v:.12g}" for v in row) + "\n")
