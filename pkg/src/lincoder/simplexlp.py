"""Dense two-phase primal simplex for small equality-constrained programs.

Solves   minimize c.x   subject to  A x = b,  x >= 0
on a full tableau with Bland's rule (lowest eligible index enters, ties in
the ratio test go to the lowest basic index), which rules out cycling.
Problem sizes here are tiny (tens of variables, a handful of constraints),
so the dense tableau is both adequate and easy to verify.
"""

from __future__ import annotations

import numpy as np

from .errors import InfeasibleTargetError

#: Reduced costs above -REDUCED_COST_TOL count as optimal.
REDUCED_COST_TOL = 1e-10
#: Column entries below PIVOT_TOL are unusable as pivots.
PIVOT_TOL = 1e-11
#: Phase-1 objective above this value marks the program infeasible.
FEASIBILITY_TOL = 1e-9

_MAX_ITERATIONS = 20000


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and tableau[r, col] != 0.0:
            tableau[r] -= tableau[r, col] * tableau[row]


def _iterate(tableau: np.ndarray, basis: list[int], ncols: int) -> None:
    """Run the simplex loop until the bottom row shows optimality."""
    for _ in range(_MAX_ITERATIONS):
        reduced = tableau[-1, :ncols]
        entering = -1
        for j in range(ncols):
            if reduced[j] < -REDUCED_COST_TOL:
                entering = j
                break
        if entering < 0:
            return
        leaving = -1
        best = np.inf
        for i in range(tableau.shape[0] - 1):
            coef = tableau[i, entering]
            if coef > PIVOT_TOL:
                ratio = tableau[i, -1] / coef
                if ratio < best - 1e-15 or (
                    abs(ratio - best) <= 1e-15
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    best = ratio
                    leaving = i
        if leaving < 0:
            raise RuntimeError("linear program is unbounded")
        _pivot(tableau, leaving, entering)
        basis[leaving] = entering
    raise RuntimeError("simplex iteration limit exceeded")


def solve_nonnegative_lp(cost, constraints, rhs) -> np.ndarray:
    """Optimal x >= 0 minimizing cost.x subject to constraints @ x = rhs.

    Raises InfeasibleTargetError when no feasible point exists.
    """
    a = np.asarray(constraints, dtype=float)
    b = np.asarray(rhs, dtype=float)
    c = np.asarray(cost, dtype=float)
    if a.ndim != 2 or b.ndim != 1 or c.ndim != 1:
        raise ValueError("expected a matrix, an rhs vector and a cost vector")
    m, k = a.shape
    if b.shape[0] != m or c.shape[0] != k:
        raise ValueError("constraint, rhs and cost sizes do not agree")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ValueError("linear program data must be finite")

    a = a.copy()
    b = b.copy()
    flip = b < 0.0
    a[flip] *= -1.0
    b[flip] *= -1.0

    # Phase 1: artificial basis, minimize the sum of artificials.
    tableau = np.zeros((m + 1, k + m + 1))
    tableau[:m, :k] = a
    tableau[:m, k : k + m] = np.eye(m)
    tableau[:m, -1] = b
    basis = list(range(k, k + m))
    # Reduced costs r = c_phase1 - ones.B^-1 A: original columns get -sum.
    tableau[-1, :k] = -a.sum(axis=0)
    tableau[-1, -1] = -b.sum()
    _iterate(tableau, basis, k + m)

    if -tableau[-1, -1] > FEASIBILITY_TOL:
        raise InfeasibleTargetError(
            f"phase-1 objective {-tableau[-1, -1]:.3e} exceeds feasibility tolerance"
        )

    # Drive leftover artificials out of the basis; rows that cannot pivot
    # on an original column are redundant constraints.
    keep = []
    for i in range(m):
        if basis[i] >= k:
            pivot_col = -1
            for j in range(k):
                if abs(tableau[i, j]) > PIVOT_TOL:
                    pivot_col = j
                    break
            if pivot_col < 0:
                continue
            _pivot(tableau, i, pivot_col)
            basis[i] = pivot_col
        keep.append(i)

    rows = np.array(keep, dtype=int)
    work = np.zeros((rows.size + 1, k + 1))
    work[:-1, :k] = tableau[rows, :k]
    work[:-1, -1] = tableau[rows, -1]
    basis = [basis[i] for i in keep]

    # Phase 2: reduced costs for the real objective.
    c_basis = c[basis]
    work[-1, :k] = c - c_basis @ work[:-1, :k]
    work[-1, -1] = -float(c_basis @ work[:-1, -1])
    _iterate(work, basis, k)

    x = np.zeros(k)
    for i, var in enumerate(basis):
        x[var] = work[i, -1]
    if np.any(x < -1e-9):
        raise RuntimeError("simplex returned a negative component beyond tolerance")
    return np.clip(x, 0.0, None)
