"""Dense linear-algebra kernel shared by the higher-level modules.

Small matrices only (n <= 64): the routines favour strict validation and
verifiable contracts over asymptotic performance.  All functions are pure,
accept anything array-like, and return fresh float64 arrays.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import NoEquilibriumError, NotPositiveDefiniteError, SingularMatrixError

#: Largest accepted asymmetry max|S - S^T|, relative to max(1, max|S|).
SYMMETRY_TOL = 1e-9
#: Orthogonality guarantee max|Q^T Q - I| for eigenvector matrices.
ORTHOGONALITY_TOL = 1e-10
#: Reconstruction guarantee max|Q diag(w) Q^T - S|, relative to max(1, max|S|).
RECONSTRUCTION_RTOL = 1e-8
#: Residual guarantee for lyapunov_solve, relative to max(1, max|N|).
LYAPUNOV_RESIDUAL_RTOL = 1e-8
#: Pivot cutoff for lu_solve, relative to the largest entry of the matrix.
PIVOT_RTOL = 1e-13
#: Largest dimension the Kronecker-vectorization Lyapunov solver accepts.
MAX_LYAPUNOV_DIM = 64


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_square(value, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(value, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_vector(value, name: str = "vector") -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def max_abs(arr: np.ndarray) -> float:
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def check_symmetric(arr: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Reject asymmetry beyond SYMMETRY_TOL, then return (S + S^T)/2."""
    gap = max_abs(arr - arr.T)
    if gap > SYMMETRY_TOL * max(1.0, max_abs(arr)):
        raise ValueError(f"{name} is not symmetric (max asymmetry {gap:.3e})")
    return 0.5 * (arr + arr.T)


def mat_exp(matrix, t: float = 1.0) -> np.ndarray:
    """Matrix exponential exp(matrix * t).

    Evaluated by scaling-and-squaring with Pade approximants (order 13 at
    the largest scalings), accurate to ~1e-10 relative for norm(M t) <= 10.
    """
    arr = as_square(matrix)
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("time argument must be finite")
    return scipy.linalg.expm(arr * t)


class SymmetricEigen(NamedTuple):
    """Eigendecomposition of a symmetric matrix.

    ``values`` are sorted descending; column i of ``vectors`` pairs with
    ``values[i]`` and the columns are orthonormal.
    """

    values: np.ndarray
    vectors: np.ndarray


def sym_eig(matrix) -> SymmetricEigen:
    """Eigenpairs of a symmetric matrix, eigenvalues sorted descending."""
    sym = check_symmetric(as_square(matrix))
    values, vectors = np.linalg.eigh(sym)
    return SymmetricEigen(values[::-1].copy(), vectors[:, ::-1].copy())


def lu_solve(matrix, rhs) -> np.ndarray:
    """Solve matrix @ x = rhs by LU with partial pivoting.

    Raises SingularMatrixError when any pivot falls below
    PIVOT_RTOL * max|matrix|.  One step of iterative refinement keeps the
    residual below 1e-9 * max(1, max|rhs|) for well-conditioned inputs.
    """
    arr = as_square(matrix)
    vec = as_vector(rhs, "right-hand side")
    if vec.shape[0] != arr.shape[0]:
        raise ValueError("matrix and right-hand side sizes do not agree")
    scale = max_abs(arr)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(arr)
    pivots = np.abs(np.diag(lu))
    if np.any(pivots <= PIVOT_RTOL * scale) or np.any(pivots == 0.0):
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} below cutoff {PIVOT_RTOL * scale:.3e}"
        )
    x = scipy.linalg.lu_solve((lu, piv), vec)
    x += scipy.linalg.lu_solve((lu, piv), vec - arr @ x)
    return x


def lyapunov_solve(a, noise) -> np.ndarray:
    """Equilibrium W of the continuous-time Lyapunov equation.

    Solves A W + W A^T + N = 0 by Kronecker vectorization: the n^2 x n^2
    system (I (x) A + A (x) I) vec(W) = -vec(N) is solved by LU with
    partial pivoting and the result symmetrized.  O(n^6), fine at n <= 64.

    Raises NoEquilibriumError when the Kronecker operator is singular,
    i.e. A and -A^T share an eigenvalue and no unique equilibrium exists.
    """
    arr = as_square(a, "drift matrix")
    n = arr.shape[0]
    if n > MAX_LYAPUNOV_DIM:
        raise ValueError(f"dimension {n} exceeds supported maximum {MAX_LYAPUNOV_DIM}")
    sym = check_symmetric(as_square(noise, "noise matrix"), "noise matrix")
    if sym.shape[0] != n:
        raise ValueError("drift and noise matrices must have the same size")
    eye = np.eye(n)
    operator = np.kron(eye, arr) + np.kron(arr, eye)
    try:
        vec = lu_solve(operator, -sym.flatten(order="F"))
    except SingularMatrixError as exc:
        raise NoEquilibriumError(
            "no unique equilibrium: drift and its negative transpose share an eigenvalue"
        ) from exc
    w = vec.reshape((n, n), order="F")
    return 0.5 * (w + w.T)


def logdet_psd(matrix) -> float:
    """log det of a symmetric positive definite matrix via Cholesky."""
    sym = check_symmetric(as_square(matrix))
    try:
        chol = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(chol))))
