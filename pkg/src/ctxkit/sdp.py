"""Small dense SDP solver for problems of the form

    maximize <C, X>  subject to  <A_k, X> = b_k,  X positive semidefinite.

The primary method is an alternating-direction augmented Lagrangian
scheme: each sweep projects onto the PSD cone, then onto the affine
constraints. A primal-dual interior-point method (HKM direction) is the
fallback when the projection scheme stalls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverDidNotConverge


@dataclass(frozen=True)
class SDPResult:
    value: float
    X: np.ndarray
    y: np.ndarray
    iterations: int
    method: str
    gap: float


def _op(As: list[np.ndarray], X: np.ndarray) -> np.ndarray:
    return np.array([np.vdot(A, X).real for A in As])


def _adj(As: list[np.ndarray], y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(As[0])
    for yk, A in zip(y, As):
        out += yk * A
    return out


def _psd_part(V: np.ndarray) -> np.ndarray:
    w, Q = np.linalg.eigh((V + V.T) / 2)
    w = np.clip(w, 0.0, None)
    return (Q * w) @ Q.T


def admm(C, As, b, *, tol: float = 1e-9, max_iter: int = 20_000, mu: float = 1.0) -> SDPResult:
    """Alternating direction method on the dual (minimization form)."""
    Cm = -np.asarray(C, dtype=float)  # minimize <Cm, X>
    n = Cm.shape[0]
    b = np.asarray(b, dtype=float)
    G = np.array([[np.vdot(Ai, Aj).real for Aj in As] for Ai in As])
    Ginv = np.linalg.inv(G)
    X = np.eye(n) / n
    S = np.zeros((n, n))
    y = np.zeros(len(As))
    nb = 1.0 + np.linalg.norm(b)
    nc = 1.0 + np.linalg.norm(Cm)
    it, residual = 0, float("inf")
    for it in range(1, max_iter + 1):
        y = -Ginv @ (mu * (_op(As, X) - b) + _op(As, S - Cm))
        V = Cm - _adj(As, y) - mu * X
        S = _psd_part(V)
        X = (S - V) / mu
        if it % 10 == 0:
            rp = np.linalg.norm(_op(As, X) - b) / nb
            rd = np.linalg.norm(Cm - _adj(As, y) - S) / nc
            pobj = float(np.vdot(Cm, X).real)
            dobj = float(b @ y)
            gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
            residual = max(rp, rd, gap)
            if residual < tol:
                return SDPResult(-(pobj + dobj) / 2, X, -y, it, "admm", gap)
            # keep primal and dual residuals balanced
            if rp > 10 * rd:
                mu = min(mu * 1.6, 1e4)
            elif rd > 10 * rp:
                mu = max(mu / 1.6, 1e-4)
    raise SolverDidNotConverge(it, residual)


def interior_point(C, As, b, *, tol: float = 1e-10, max_iter: int = 100) -> SDPResult:
    """Infeasible-start primal-dual path following with the HKM direction."""
    Cm = -np.asarray(C, dtype=float)
    n = Cm.shape[0]
    b = np.asarray(b, dtype=float)
    m = len(As)
    X = np.eye(n)
    y = np.zeros(m)
    Z = np.eye(n) * (1.0 + np.abs(Cm).sum())
    resid = np.inf
    for it in range(1, max_iter + 1):
        mu = np.vdot(X, Z).real / n
        Rp = b - _op(As, X)
        Rd = Cm - _adj(As, y) - Z
        resid = max(np.linalg.norm(Rp), np.linalg.norm(Rd))
        pobj = float(np.vdot(Cm, X).real)
        dobj = float(b @ y)
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        if resid < tol and gap < tol:
            return SDPResult(-(pobj + dobj) / 2, X, -y, it, "interior-point", gap)
        Zi = np.linalg.inv(Z)
        M = np.array([[np.vdot(Ai, X @ Aj @ Zi).real for Aj in As] for Ai in As])
        for sigma in (0.0, None):
            if sigma is None:
                # centering from the affine predictor
                sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.1
            rhs_c = sigma * mu * Zi - X
            rhs = Rp - _op(As, rhs_c) + _op(As, X @ Rd @ Zi)
            dy = np.linalg.solve(M, rhs)
            dZ = Rd - _adj(As, dy)
            dX = rhs_c - X @ dZ @ Zi
            dX = (dX + dX.T) / 2
            ap = _step(X, dX)
            ad = _step(Z, dZ)
            mu_aff = np.vdot(X + ap * dX, Z + ad * dZ).real / n
        X = X + 0.98 * ap * dX
        y = y + 0.98 * ad * dy
        Z = Z + 0.98 * ad * dZ
    raise SolverDidNotConverge(max_iter, float(resid))


def _step(M: np.ndarray, dM: np.ndarray) -> float:
    L = np.linalg.cholesky(M)
    Li = np.linalg.inv(L)
    w = np.linalg.eigvalsh(Li @ dM @ Li.T)
    lo = w.min()
    return 1.0 if lo >= 0 else min(1.0, -1.0 / lo)


def solve(C, As, b, *, tol: float = 1e-9) -> SDPResult:
    """Projection method first, interior point if it does not converge."""
    try:
        return admm(C, As, b, tol=tol)
    except (SolverDidNotConverge, np.linalg.LinAlgError):
        return interior_point(C, As, b, tol=min(tol, 1e-9))
