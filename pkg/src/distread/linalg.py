"""One-sided Jacobi singular value decomposition."""

import numpy as np

from .errors import DegenerateError, InputError


def _complete_orthonormal(U, good):
    """Replace the columns of ``U`` not flagged in ``good`` by unit vectors
    orthogonal to every other column."""
    m, n = U.shape
    basis = [U[:, j] for j in range(n) if good[j]]
    candidates = iter(np.eye(m))
    for j in range(n):
        if good[j]:
            continue
        for e in candidates:
            v = e.copy()
            for _ in range(2):  # re-orthogonalize once for stability
                for b in basis:
                    v -= (b @ v) * b
            norm = np.linalg.norm(v)
            if norm > 1e-6:
                U[:, j] = v / norm
                basis.append(U[:, j])
                break
        else:  # pragma: no cover - m >= n guarantees enough candidates
            raise DegenerateError("cannot complete orthonormal basis")
    return U


def svd(A, tol=1e-15, max_sweeps=100):
    """Thin SVD ``A = U @ diag(s) @ V.T`` by one-sided Jacobi rotations.

    Returns ``(U, s, V)`` with ``s`` non-negative and sorted descending.
    For an m x n input, ``U`` is m x p and ``V`` is n x p with p = min(m, n).
    Columns of ``U`` belonging to zero singular values are completed to an
    orthonormal set, so ``U`` always has orthonormal columns.
    """
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2:
        raise InputError(f"svd expects a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("svd input contains non-finite entries")
    m, n = A.shape
    if m < n:
        V, s, U = svd(A.T, tol=tol, max_sweeps=max_sweeps)
        return U, s, V

    # work at unit scale so squared norms neither overflow nor underflow
    amax = np.max(np.abs(A)) if A.size else 0.0
    amax = amax if amax > 0 else 1.0
    # rotate rows of the transposes: contiguous memory
    Ut = A.T / amax
    Vt = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            up = Ut[p]
            for q in range(p + 1, n):
                uq = Ut[q]
                alpha = up @ up
                beta = uq @ uq
                gamma = up @ uq
                if gamma == 0.0 or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                with np.errstate(over="ignore"):
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                if t == 0.0:
                    continue
                rotated = True
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                Ut[p], Ut[q] = c * up - s * uq, s * up + c * uq
                vp, vq = Vt[p], Vt[q]
                Vt[p], Vt[q] = c * vp - s * vq, s * vp + c * vq
        if not rotated:
            break
    U, V = Ut.T, Vt.T

    sigma = np.linalg.norm(U, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, U, V = sigma[order], U[:, order], V[:, order]
    scale = sigma[0] if n and sigma[0] > 0 else 1.0
    good = sigma > scale * 1e-13 if n else np.zeros(0, bool)
    U = np.where(good, U / np.where(good, sigma, 1.0), 0.0)
    if not np.all(good):
        U = _complete_orthonormal(U, good)
        sigma = np.where(good, sigma, 0.0)
    return U, sigma * amax, V
