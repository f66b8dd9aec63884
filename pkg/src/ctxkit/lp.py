"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Problems are taken in equality standard form::

    minimize (or maximize)  c @ x
    subject to              A_eq @ x == b_eq,  x >= 0

Infeasible problems come back with a Farkas certificate ``y`` such that
``y @ A_eq <= 0`` componentwise and ``y @ b_eq > 0``, which proves that no
nonnegative ``x`` solves the system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    x: np.ndarray | None = None
    value: float | None = None
    farkas: np.ndarray | None = None
    iterations: int = 0

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])


def _run(T: np.ndarray, basis: list[int], ncols: int, tol: float, max_iter: int) -> tuple[str, int]:
    """Minimize using the last row of ``T`` as reduced costs; columns >= ncols are frozen."""
    m = T.shape[0] - 1
    it = 0
    while True:
        costs = T[-1, :ncols]
        entering = np.flatnonzero(costs < -tol)
        if entering.size == 0:
            return OPTIMAL, it
        col = int(entering[0])
        column = T[:m, col]
        pos = np.flatnonzero(column > tol)
        if pos.size == 0:
            return UNBOUNDED, it
        ratios = T[pos, -1] / column[pos]
        best = ratios.min()
        ties = pos[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
        it += 1
        if it > max_iter:
            raise SolverError(f"simplex exceeded {max_iter} pivots")


def _phase_one(A: np.ndarray, b: np.ndarray, tol: float, max_iter: int):
    """Return (region, None, pivots) when feasible, else (None, farkas, pivots)."""
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status, it = _run(T, basis, n + m, tol, max_iter)
    infeas = -T[-1, -1]
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if status != OPTIMAL or infeas > 1e3 * tol * scale:
        # Duals of phase 1: y solves B^T y = c_B with unit costs on artificials.
        full = np.hstack([A, np.eye(m)])
        cb = np.array([1.0 if j >= n else 0.0 for j in basis])
        y = np.linalg.lstsq(full[:, basis].T, cb, rcond=None)[0]
        return None, y * sign, it

    # Drive artificials out of the basis; drop redundant rows.
    keep = []
    for r in range(m):
        if basis[r] >= n:
            cand = np.flatnonzero(np.abs(T[r, :n]) > 1e-7)
            if cand.size:
                _pivot(T, r, int(cand[0]))
                basis[r] = int(cand[0])
                keep.append(r)
        else:
            keep.append(r)
    rows = T[keep][:, list(range(n)) + [-1]]
    return FeasibleRegion(rows, [basis[r] for r in keep], tol, max_iter), None, it


def _prepare(A_eq, b_eq) -> tuple[np.ndarray, np.ndarray]:
    A = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b = np.asarray(b_eq, dtype=float).ravel()
    if b.shape[0] != A.shape[0]:
        raise ValueError("inconsistent LP dimensions")
    return A, b


def solve(
    c,
    A_eq,
    b_eq,
    *,
    maximize: bool = False,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> LPResult:
    """Solve a standard-form LP. See the module docstring for conventions."""
    A, b = _prepare(A_eq, b_eq)
    cost = np.asarray(c, dtype=float).ravel() if c is not None else np.zeros(A.shape[1])
    if cost.shape[0] != A.shape[1]:
        raise ValueError("inconsistent LP dimensions")
    region, farkas, it1 = _phase_one(A, b, tol, max_iter)
    if region is None:
        return LPResult(INFEASIBLE, farkas=farkas, iterations=it1)
    res = region.optimize(cost, maximize=maximize)
    return LPResult(res.status, res.x, res.value, None, it1 + res.iterations)


class FeasibleRegion:
    """A basic feasible tableau of ``A x = b, x >= 0`` reused across objectives.

    Each ``optimize`` call starts phase 2 from the basis the previous call
    ended on, so a sequence of related objectives avoids repeating phase 1.
    """

    def __init__(self, rows: np.ndarray, basis: list[int], tol: float = 1e-9, max_iter: int = 100_000) -> None:
        self.rows = rows
        self.basis = list(basis)
        self.tol = tol
        self.max_iter = max_iter

    @classmethod
    def from_system(cls, A_eq, b_eq, *, tol: float = 1e-9, max_iter: int = 100_000) -> "FeasibleRegion":
        region, _, _ = _phase_one(*_prepare(A_eq, b_eq), tol, max_iter)
        if region is None:
            raise SolverError("the system has no nonnegative solution")
        return region

    def optimize(self, c, *, maximize: bool = False) -> LPResult:
        n = self.rows.shape[1] - 1
        cost = -np.asarray(c, dtype=float) if maximize else np.asarray(c, dtype=float)
        T2 = np.vstack([self.rows, np.zeros(n + 1)])
        T2[-1, :n] = cost
        for r, j in enumerate(self.basis):
            if cost[j] != 0.0:
                T2[-1] -= cost[j] * T2[r]
        basis = list(self.basis)
        status, it = _run(T2, basis, n, self.tol, self.max_iter)
        if status == UNBOUNDED:
            return LPResult(UNBOUNDED, iterations=it)
        self.rows, self.basis = T2[:-1], basis
        x = np.zeros(n)
        for r, j in enumerate(basis):
            x[j] = T2[r, -1]
        x[np.abs(x) < self.tol] = 0.0
        return LPResult(OPTIMAL, x=x, value=float(np.asarray(c, dtype=float) @ x), iterations=it)


def feasible_point(A_eq, b_eq, *, tol: float = 1e-9) -> LPResult:
    """Find any ``x >= 0`` with ``A_eq x = b_eq`` or a Farkas certificate."""
    A = np.atleast_2d(np.asarray(A_eq, dtype=float))
    return solve(np.zeros(A.shape[1]), A, b_eq, tol=tol)


def check_farkas(A_eq, b_eq, y, *, tol: float = 1e-7) -> bool:
    """True when ``y`` certifies infeasibility of ``A x = b, x >= 0``."""
    A = np.atleast_2d(np.asarray(A_eq, dtype=float))
    y = np.asarray(y, dtype=float)
    yb = float(y @ np.asarray(b_eq, dtype=float))
    scale = max(1.0, float(np.abs(y).max()))
    return bool(np.all(y @ A <= tol * scale) and yb > tol * scale)
