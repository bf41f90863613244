"""Thick-restart Lanczos for the lowest eigenpair of a real symmetric operator."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class LanczosResult:
    value: float
    vector: np.ndarray
    residual: float
    matvecs: int
    restarts: int
    converged: bool


def _orthogonalize(basis: np.ndarray, w: np.ndarray) -> np.ndarray:
    # two passes of classical Gram-Schmidt ("twice is enough")
    h = basis @ w
    w -= h @ basis
    h2 = basis @ w
    w -= h2 @ basis
    return h + h2


def lanczos_lowest(
    apply: Callable[[np.ndarray], np.ndarray],
    v0: np.ndarray,
    *,
    tol: float = 1e-10,
    max_krylov: int = 64,
    max_restarts: int = 200,
    keep: int | None = None,
    check_every: int = 4,
) -> LanczosResult:
    """Lowest eigenpair of the symmetric linear map ``apply``.

    Lanczos with full reorthogonalization, restarted by keeping the ``keep``
    lowest Ritz vectors plus the current residual direction. Stops once the
    residual norm ||A x - theta x|| drops below ``tol * max(1, |theta|)``.
    """
    v0 = np.asarray(v0, dtype=float)
    n = v0.size
    norm0 = np.linalg.norm(v0)
    if n == 0 or norm0 == 0:
        raise ValueError("start vector must be non-zero")
    m = min(max_krylov, n)
    if m < 2:
        x = v0 / norm0
        ax = apply(x)
        theta = float(x @ ax)
        return LanczosResult(theta, x, float(np.linalg.norm(ax - theta * x)), 1, 0, True)
    if keep is None:
        keep = max(1, m // 2)
    keep = min(keep, m - 1)

    basis = np.zeros((m, n))
    proj = np.zeros((m, m))
    basis[0] = v0 / norm0
    start = 0
    matvecs = 0
    theta, x, resid = np.nan, basis[0].copy(), np.inf
    scale = 1.0

    for restart in range(max_restarts + 1):
        w = None
        beta = 0.0
        j = start
        for j in range(start, m):
            w = apply(basis[j])
            matvecs += 1
            h = _orthogonalize(basis[: j + 1], w)
            proj[: j + 1, j] = h
            proj[j, : j + 1] = h
            beta = float(np.linalg.norm(w))
            scale = max(scale, abs(h[j]), beta)
            breakdown = beta <= 1e-14 * scale
            last = j == m - 1
            if breakdown or last or (j + 1 - start) % check_every == 0:
                evals, evecs = np.linalg.eigh(proj[: j + 1, : j + 1])
                theta = float(evals[0])
                est = abs(beta * evecs[j, 0])
                if breakdown or est <= tol * max(1.0, abs(theta)):
                    x = evecs[:, 0] @ basis[: j + 1]
                    x /= np.linalg.norm(x)
                    ax = apply(x)
                    matvecs += 1
                    resid = float(np.linalg.norm(ax - theta * x))
                    if breakdown or resid <= tol * max(1.0, abs(theta)):
                        return LanczosResult(theta, x, resid, matvecs, restart, True)
            if last:
                break
            basis[j + 1] = w / beta

        # thick restart: keep the lowest Ritz vectors, append the residual direction
        evals, evecs = np.linalg.eigh(proj)
        theta = float(evals[0])
        kept = evecs[:, :keep]
        new_basis = kept.T @ basis
        coupling = beta * evecs[m - 1, :keep]
        x = new_basis[0].copy()
        basis[:keep] = new_basis
        basis[keep] = w / beta
        basis[keep + 1 :] = 0.0
        proj[:] = 0.0
        proj[np.arange(keep), np.arange(keep)] = evals[:keep]
        proj[keep, :keep] = coupling
        proj[:keep, keep] = coupling
        start = keep

    ax = apply(x)
    resid = float(np.linalg.norm(ax - theta * x))
    return LanczosResult(theta, x, resid, matvecs + 1, max_restarts, False)
