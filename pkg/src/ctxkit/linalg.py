"""Hermitian eigendecomposition by the cyclic Jacobi method."""

from __future__ import annotations

import numpy as np

from .errors import SolverDidNotConverge


def jacobi_eigh(H, *, tol: float = 1e-15, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    Each rotation first removes the phase of the pivot entry, then applies
    the real symmetric Jacobi rotation that annihilates it. Only rows and
    columns p, q change.
    """
    A = np.array(H, dtype=complex)
    A = (A + A.conj().T) / 2
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    floor = tol * max(1.0, float(np.linalg.norm(A)))
    off = 0.0
    for _ in range(max_sweeps):
        off = float(np.sqrt(max(0.0, np.sum(np.abs(A) ** 2) - np.sum(np.abs(np.diag(A)) ** 2))))
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= floor:
                    continue
                rotated = True
                phase = apq / r
                tau = (A[q, q].real - A[p, p].real) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # U = diag(1, conj(phase)) @ [[c, s], [-s, c]] on the (p, q) block
                U = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ U
                A[idx, :] = U.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ U
        if not rotated:
            w = np.diag(A).real.copy()
            order = np.argsort(w, kind="stable")
            return w[order], V[:, order]
    raise SolverDidNotConverge(max_sweeps, off)


def eigvalsh(H) -> np.ndarray:
    return jacobi_eigh(H)[0]
