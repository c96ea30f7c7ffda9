"""Cyclic Jacobi eigensolver for small dense symmetric matrices.

The bound-state matrices here are tiny (one row per surface or point
source), so a hand-rolled Jacobi sweep is plenty fast, bitwise
deterministic, and free of backend-dependent reduction orders.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidArgumentError, NoConvergenceError

__all__ = ["jacobi_eigh"]


def _off_norm(A: np.ndarray) -> float:
    mask = ~np.eye(A.shape[0], dtype=bool)
    return float(np.sqrt(np.sum(A[mask] ** 2)))


def jacobi_eigh(A: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V) with eigenvalues ascending and V[:, k] the unit
    eigenvector for w[k], sign-fixed so each vector's largest-magnitude
    component is positive.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"need a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.max(np.abs(A))))):
        raise InvalidArgumentError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    if n == 1:
        return A[0].copy(), V

    scale = max(float(np.max(np.abs(A))), 1e-300)
    for _sweep in range(max_sweeps):
        off = _off_norm(A)
        if off <= tol * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # Standard stable rotation: t = tan(theta) from the smaller root.
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * A[:, p] - s * A[:, q]
                rot_q = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = rot_p, rot_q
                rot_p = c * A[p, :] - s * A[q, :]
                rot_q = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rot_p, rot_q
                A[p, q] = A[q, p] = 0.0
                rot_p = c * V[:, p] - s * V[:, q]
                rot_q = s * V[:, p] + c * V[:, q]
                V[:, p], V[:, q] = rot_p, rot_q
    else:
        raise NoConvergenceError(f"Jacobi sweeps did not converge in {max_sweeps} passes")

    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    V = V[:, order]
    for k in range(n):
        j = int(np.argmax(np.abs(V[:, k])))
        if V[j, k] < 0.0:
            V[:, k] = -V[:, k]
    return w, V
