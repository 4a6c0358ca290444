"""Shared numerical kernels: sigmoid, pseudoinverse least squares, kNN,
local hyperplane fitting.

All kernels operate on plain float64 numpy arrays. Inputs are validated
for finiteness once at the boundary (`as_matrix`); NaN/Inf never enter
the linear algebra.
"""

import numpy as np

from .errors import ParameterError, ShapeError

__all__ = ["as_matrix", "sigmoid", "pinv_solve", "knn", "fit_hyperplane"]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce `a` to a 2-D float64 array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise ParameterError(f"{name} contains non-finite entries")
    return m


def sigmoid(z):
    """Logistic sigmoid 1/(1+exp(-z)), elementwise.

    Accepts scalars or arrays; saturates gracefully for large |z|.
    """
    z = np.clip(z, -500.0, 500.0)  # prevent exp overflow
    return 1.0 / (1.0 + np.exp(-z))


def pinv_solve(H, Y, tol: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution B of H @ B ~= Y.

    Computed from the SVD of H: singular values below ``tol * s_max`` are
    treated as zero, which makes B the minimum-Frobenius-norm minimizer
    of ||H B - Y||_F. Default `tol` is ``max(H.shape) * machine epsilon``.
    """
    H = as_matrix(H, "H")
    Y = as_matrix(Y, "Y")
    if H.shape[0] != Y.shape[0]:
        raise ShapeError(f"row counts differ: H {H.shape[0]} vs Y {Y.shape[0]}")
    if tol is None:
        tol = max(H.shape) * np.finfo(float).eps
    u, s, vt = np.linalg.svd(H, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((H.shape[1], Y.shape[1]))
    keep = s > tol * s[0]
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return vt.T @ (s_inv[:, None] * (u.T @ Y))


def knn(points, query, k: int) -> np.ndarray:
    """Indices of the `k` nearest points to `query` (Euclidean).

    If `query` itself is one of `points` (exact componentwise match), that
    single occurrence is excluded. Distance ties are broken by lower
    index, so the result is deterministic.
    """
    pts = as_matrix(points, "points")
    q = np.asarray(query, dtype=float).ravel()
    if q.shape[0] != pts.shape[1]:
        raise ShapeError(f"query length {q.shape[0]} != point dim {pts.shape[1]}")
    d = np.linalg.norm(pts - q, axis=1)
    candidates = np.arange(pts.shape[0])
    self_rows = np.flatnonzero((pts == q).all(axis=1))
    if self_rows.size:
        candidates = np.delete(candidates, self_rows[0])
        d = np.delete(d, self_rows[0])
    if not 1 <= k <= candidates.size:
        raise ParameterError(f"k={k} not in [1, {candidates.size}]")
    order = np.argsort(d, kind="stable")  # stable sort → ties go to lower index
    return candidates[order[:k]]


def fit_hyperplane(inputs, targets) -> tuple[np.ndarray, float]:
    """Ordinary least-squares fit of ``targets ~ coeffs . x + intercept``.

    Solved through `pinv_solve` on the design matrix [X | 1]; with fewer
    points than dimensions the minimum-norm solution is returned.
    """
    X = as_matrix(inputs, "inputs")
    t = np.asarray(targets, dtype=float).ravel()
    if X.shape[0] == 0:
        raise ParameterError("fit_hyperplane needs at least 2 points, got 0")
    if X.shape[0] != t.shape[0]:
        raise ShapeError(f"{X.shape[0]} inputs vs {t.shape[0]} targets")
    if X.shape[0] < 2:
        raise ParameterError("fit_hyperplane needs at least 2 points")
    design = np.hstack([X, np.ones((X.shape[0], 1))])
    sol = pinv_solve(design, t[:, None])[:, 0]
    return sol[:-1], float(sol[-1])
