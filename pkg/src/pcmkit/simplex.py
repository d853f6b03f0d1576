"""Dense two-phase simplex for small linear programs.

Solves  min c'x  subject to  A x <= b  with free variables, which is the
shape of every stage problem in the lexicographic completion. Free
variables are split into positive parts, slacks turn rows into equalities,
and phase 1 starts from an artificial identity basis. Pricing is Dantzig's
rule with a switch to Bland's rule once the iteration count suggests
cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CycleDetected, Infeasible, LpNumericalFailure, Unbounded

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10


@dataclass
class LpResult:
    x: np.ndarray            # primal values of the original free variables
    objective: float
    duals: np.ndarray        # one multiplier per inequality row
    iterations: int


def _pivot_loop(T: np.ndarray, basis: list, tol: float = FEAS_TOL) -> int:
    """Run simplex pivots in place on tableau T; returns iteration count.

    T has shape (m+1, k+1): m constraint rows, objective row last, rhs in
    the last column. Raises Unbounded / CycleDetected.
    """
    m = T.shape[0] - 1
    k = T.shape[1] - 1
    dantzig_budget = 10 * (m + k)
    hard_cap = dantzig_budget + 200 * (m + k) + 5000
    it = 0
    while True:
        costs = T[-1, :-1]
        if it <= dantzig_budget:
            enter = int(np.argmin(costs))
            if costs[enter] >= -tol:
                return it
        else:
            below = np.where(costs < -tol)[0]
            if below.size == 0:
                return it
            enter = int(below[0])          # Bland: smallest eligible index
        col = T[:-1, enter]
        rhs = T[:-1, -1]
        pos = col > PIVOT_TOL
        if not pos.any():
            raise Unbounded("LP is unbounded along an entering column")
        ratios = np.full(m, np.inf)
        ratios[pos] = rhs[pos] / col[pos]
        best = ratios.min()
        ties = np.where(ratios <= best + tol * (1.0 + abs(best)))[0]
        if it <= dantzig_budget and ties.size == 1:
            leave = int(ties[0])
        else:
            basis_arr = np.asarray(basis)
            leave = int(ties[np.argmin(basis_arr[ties])])
        piv = T[leave, enter]
        T[leave] /= piv
        col_vals = T[:, enter].copy()
        col_vals[leave] = 0.0
        T -= np.outer(col_vals, T[leave])
        T[:, enter] = 0.0
        T[leave, enter] = 1.0
        basis[leave] = enter
        it += 1
        if it > hard_cap:
            raise CycleDetected(f"simplex exceeded {hard_cap} pivots")


def solve_lp(c, A_ub, b_ub) -> LpResult:
    """min c'x s.t. A_ub x <= b_ub, x unrestricted in sign."""
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A_ub, dtype=float))
    b = np.asarray(b_ub, dtype=float)
    nvar = c.size
    m = A.shape[0]
    if m == 0:
        return LpResult(np.zeros(nvar), 0.0, np.zeros(0), 0)

    # split free variables, add slacks: [A, -A, I] z = b
    row_sign = np.ones(m)
    Af = np.hstack([A, -A, np.eye(m)])
    bf = b.copy()
    neg = bf < 0
    Af[neg] *= -1.0
    bf[neg] *= -1.0
    row_sign[neg] = -1.0
    cf = np.concatenate([c, -c, np.zeros(m)])
    ncols = Af.shape[1]

    # phase 1: artificial identity basis
    T = np.zeros((m + 1, ncols + m + 1))
    T[:m, :ncols] = Af
    T[:m, ncols:ncols + m] = np.eye(m)
    T[:m, -1] = bf
    T[-1, ncols:ncols + m] = 1.0
    T[-1] -= T[:m].sum(axis=0)          # price out the artificial basis
    basis = list(range(ncols, ncols + m))
    it1 = _pivot_loop(T, basis)
    if T[-1, -1] < -FEAS_TOL * (1.0 + abs(bf).max(initial=0.0)):
        raise Infeasible(f"phase-1 optimum {-T[-1, -1]:.3e} is nonzero")

    # drive any leftover artificials out of the basis
    for r in range(m):
        if basis[r] >= ncols:
            row = T[r, :ncols]
            piv_candidates = np.where(np.abs(row) > PIVOT_TOL)[0]
            if piv_candidates.size == 0:
                continue                 # redundant row
            enter = int(piv_candidates[0])
            piv = T[r, enter]
            T[r] /= piv
            col_vals = T[:, enter].copy()
            col_vals[r] = 0.0
            T -= np.outer(col_vals, T[r])
            T[:, enter] = 0.0
            T[r, enter] = 1.0
            basis[r] = enter

    # phase 2 tableau: drop artificial columns, install real costs
    T2 = np.zeros((m + 1, ncols + 1))
    T2[:m, :ncols] = T[:m, :ncols]
    T2[:m, -1] = T[:m, -1]
    T2[-1, :ncols] = cf
    for r, bv in enumerate(basis):
        if bv < ncols and abs(T2[-1, bv]) > 0:
            T2[-1] -= T2[-1, bv] * T2[r]
    it2 = _pivot_loop(T2, basis)

    z = np.zeros(ncols)
    for r, bv in enumerate(basis):
        if bv < ncols:
            z[bv] = T2[r, -1]
    x = z[:nvar] - z[nvar:2 * nvar]
    objective = float(c @ x)

    # duals from reduced costs of the slack columns: y_i = -rc(slack_i) * sign_i
    duals = np.array([-T2[-1, 2 * nvar + i] * row_sign[i] for i in range(m)])
    if not np.all(np.isfinite(x)):
        raise LpNumericalFailure("non-finite primal solution")
    return LpResult(x, objective, duals, it1 + it2)
