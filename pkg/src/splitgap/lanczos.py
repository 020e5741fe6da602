"""Lowest-eigenvalue Lanczos with full reorthogonalization.

Only the matrix-vector product is required.  The Krylov basis is kept
explicitly (full reorthogonalization, twice) and the iteration restarts from
the current Ritz vector when the basis reaches ``krylov_dim``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NotConverged

__all__ = ["LanczosResult", "lowest_eigenvalue"]

_BREAKDOWN = 1e-14


@dataclass
class LanczosResult:
    value: float
    vector: np.ndarray
    residual: float
    error_bound: float
    iterations: int
    restarts: int


def _random_orthogonal(rng, n, Q, m):
    for _ in range(5):
        w = rng.standard_normal(n)
        for _ in range(2):
            w -= Q[:m].T @ (Q[:m] @ w)
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            return w / nw
    return None


def lowest_eigenvalue(
    matvec,
    n: int,
    tol: float = 1e-12,
    max_iterations: int = 2000,
    krylov_dim: int = 80,
    seed: int = 0,
) -> LanczosResult:
    """Lowest eigenpair of a real symmetric operator.

    Parameters
    ----------
    matvec : callable
        ``v -> A @ v`` on float64 vectors of length ``n``.
    tol : float
        Absolute tolerance on the eigenvalue.  The error estimate is
        ``min(r, r**2 / gap)`` with ``r`` the Ritz residual norm and ``gap``
        the distance to the next Ritz value.
    krylov_dim : int
        Basis size before an explicit restart from the Ritz vector.

    Raises
    ------
    NotConverged
        After ``max_iterations`` matrix-vector products; the best Ritz value
        and its residual are attached.
    """
    rng = np.random.default_rng(seed)
    m_max = max(2, min(krylov_dim, n))
    Q = np.empty((m_max, n))
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)

    total = 0
    restarts = 0
    best = None
    while True:
        alpha = np.zeros(m_max)
        beta = np.zeros(m_max)
        Q[0] = v
        m = 0
        while True:
            w = matvec(Q[m])
            total += 1
            alpha[m] = Q[m] @ w
            # Two passes of classical Gram-Schmidt against the whole basis.
            for _ in range(2):
                w -= Q[: m + 1].T @ (Q[: m + 1] @ w)
            m += 1
            b = np.linalg.norm(w)

            theta, S = eigh_tridiagonal(alpha[:m], beta[: m - 1]) if m > 1 else (alpha[:1].copy(), np.ones((1, 1)))
            r = abs(b * S[-1, 0])
            gap = theta[1] - theta[0] if m > 1 else 0.0
            err = min(r, r * r / gap) if gap > 0 else r
            best = (theta[0], S[:, 0], r, err, m)

            exhausted = m == n
            if err <= tol or exhausted:
                vec = Q[:m].T @ S[:, 0]
                vec /= np.linalg.norm(vec)
                if exhausted:
                    err = 0.0 if b < _BREAKDOWN else err
                return LanczosResult(float(theta[0]), vec, float(r), float(err), total, restarts)
            if total >= max_iterations:
                raise NotConverged(
                    f"Lanczos did not reach tol={tol:g} in {total} products",
                    estimate=float(theta[0]),
                    diagnostics={"residual": float(r), "error_bound": float(err), "iterations": total},
                )
            if m == m_max:
                break
            if b < _BREAKDOWN:
                # Invariant subspace found; continue with a fresh direction
                # orthogonal to everything so far (T gets a zero coupling).
                fresh = _random_orthogonal(rng, n, Q, m)
                if fresh is None:
                    vec = Q[:m].T @ S[:, 0]
                    return LanczosResult(float(theta[0]), vec / np.linalg.norm(vec), float(r), 0.0, total, restarts)
                beta[m - 1] = 0.0
                Q[m] = fresh
            else:
                beta[m - 1] = b
                Q[m] = w / b
        theta0, s0, r, err, m = best
        v = Q[:m].T @ s0
        v /= np.linalg.norm(v)
        restarts += 1
