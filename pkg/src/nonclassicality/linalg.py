"""Symmetric eigenproblems for the matrix-based witnesses."""

from __future__ import annotations

import numpy as np

JACOBI_MAX_DIM = 256


class ConvergenceError(RuntimeError):
    pass


def jacobi_eigh(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, q)`` with ascending eigenvalues ``w`` and orthonormal
    eigenvectors in the columns of ``q``, so that ``a = q @ diag(w) @ q.T``.
    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * ||a||_F``.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > JACOBI_MAX_DIM:
        raise ValueError(f"jacobi_eigh is limited to dim <= {JACOBI_MAX_DIM}, got {n}")
    a = 0.5 * (a + a.T)
    q = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), q

    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), q
    iu = np.triu_indices(n, 1)

    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(a[iu] ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if apr == 0.0:
                    continue
                gap = a[r, r] - a[p, p]
                if abs(apr) < 1e-300 * max(abs(gap), 1.0) or abs(gap) > 1e150 * abs(apr):
                    # negligible against the diagonal gap: theta would overflow
                    a[p, r] = a[r, p] = 0.0
                    continue
                theta = gap / (2.0 * apr)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0.0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows/columns p and r
                ap = a[:, p].copy()
                ar = a[:, r].copy()
                a[:, p] = c * ap - s * ar
                a[:, r] = s * ap + c * ar
                ap = a[p, :].copy()
                ar = a[r, :].copy()
                a[p, :] = c * ap - s * ar
                a[r, :] = s * ap + c * ar
                a[p, r] = a[r, p] = 0.0
                qp = q[:, p].copy()
                qr = q[:, r].copy()
                q[:, p] = c * qp - s * qr
                q[:, r] = s * qp + c * qr
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = a.diagonal().copy()
    order = np.argsort(w)
    return w[order], q[:, order]


def _is_positive_definite(a: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    return True


def smallest_eigenpair(a: np.ndarray, tol: float = 1e-12, max_iter: int = 200) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and eigenvector of a symmetric matrix.

    Small matrices go through :func:`jacobi_eigh`. Larger ones bracket the
    smallest eigenvalue between the Gershgorin lower bound and the minimal
    diagonal entry, bisect on positive definiteness of ``a - s*I`` (a Cholesky
    attempt), and finish with shifted inverse iteration just below the bracket
    for the eigenvector.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n <= JACOBI_MAX_DIM:
        w, q = jacobi_eigh(a)
        return float(w[0]), q[:, 0]

    a = 0.5 * (a + a.T)
    eye = np.eye(n)
    radius = np.sum(np.abs(a), axis=1) - np.abs(a.diagonal())
    lo = float(np.min(a.diagonal() - radius))
    hi = float(np.min(a.diagonal()))
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if _is_positive_definite(a - mid * eye):
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceError("eigenvalue bisection did not converge")

    shift = lo - tol * max(1.0, abs(lo))
    shifted = a - shift * eye
    v = np.ones(n) / np.sqrt(n)
    for _ in range(20):
        u = np.linalg.solve(shifted, v)
        v = u / np.linalg.norm(u)
    return float(v @ a @ v), v


def min_eigenvalue(a: np.ndarray) -> float:
    return smallest_eigenpair(a)[0]
