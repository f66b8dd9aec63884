"""Dense complex linear algebra and concrete quantum realizations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    EpsilonOutOfRange,
    IncidenceMismatch,
    NotAPOVM,
    NotAPVM,
    NotAState,
    NotAnEffect,
    NotHermitian,
    ValidationError,
)
from .linalg import eigvalsh
from .scenario import Scenario, new_scenario

HERMITIAN_TOL = 1e-12
MEASUREMENT_TOL = 1e-10
PROB_TOL = 1e-10


# carriers -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ket:
    amps: np.ndarray

    def __post_init__(self) -> None:
        a = np.asarray(self.amps, dtype=complex).ravel()
        if a.size == 0:
            raise ValidationError("a ket needs at least one amplitude")
        object.__setattr__(self, "amps", a)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "Ket":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalise the zero vector")
        return Ket(self.amps / n)

    def inner(self, other: "Ket") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.amps, other.amps))

    def projector(self) -> "HermitianOp":
        k = self.normalized().amps
        return HermitianOp(np.outer(k, k.conj()))

    def tensor(self, other: "Ket") -> "Ket":
        return Ket(np.kron(self.amps, other.amps))


def ket(*amps, normalize: bool = True) -> Ket:
    k = Ket(np.array(amps, dtype=complex))
    return k.normalized() if normalize else k


def basis_ket(dim: int, i: int) -> Ket:
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return Ket(v)


def random_ket(dim: int, rng: np.random.Generator) -> Ket:
    return Ket(rng.normal(size=dim) + 1j * rng.normal(size=dim)).normalized()


@dataclass(frozen=True, eq=False)
class HermitianOp:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NotHermitian(f"expected a square matrix, got shape {m.shape}")
        dev = float(np.abs(m - m.conj().T).max(initial=0.0))
        if dev > HERMITIAN_TOL * max(1.0, float(np.abs(m).max(initial=0.0))):
            raise NotHermitian(f"matrix differs from its adjoint by {dev:.3g}")
        object.__setattr__(self, "matrix", (m + m.conj().T) / 2)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigvals(self) -> np.ndarray:
        return eigvalsh(self.matrix)

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def expectation(self, state: "Ket | HermitianOp") -> float:
        if isinstance(state, Ket):
            k = state.amps
            return float(np.vdot(k, self.matrix @ k).real)
        return float(np.trace(state.matrix @ self.matrix).real)

    def is_psd(self, tol: float = PROB_TOL) -> bool:
        return bool(self.eigvals().min() >= -tol)

    def __add__(self, other: "HermitianOp") -> "HermitianOp":
        return HermitianOp(self.matrix + other.matrix)

    def __sub__(self, other: "HermitianOp") -> "HermitianOp":
        return HermitianOp(self.matrix - other.matrix)

    def scale(self, c: float) -> "HermitianOp":
        return HermitianOp(float(c) * self.matrix)

    def kron(self, other: "HermitianOp") -> "HermitianOp":
        return HermitianOp(np.kron(self.matrix, other.matrix))


def as_op(m) -> HermitianOp:
    return m if isinstance(m, HermitianOp) else HermitianOp(m)


def identity(dim: int) -> HermitianOp:
    return HermitianOp(np.eye(dim))


def kron(*ops) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for o in ops:
        out = np.kron(out, o.matrix if isinstance(o, HermitianOp) else np.asarray(o))
    return out


PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def density(state: "Ket | HermitianOp") -> HermitianOp:
    return state.projector() if isinstance(state, Ket) else state


# measurements -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class POVM:
    effects: tuple[HermitianOp, ...]
    labels: tuple[str, ...]
    name: str = ""

    def __post_init__(self) -> None:
        check_povm(self.effects, self.name)

    def __len__(self) -> int:
        return len(self.effects)

    def __getitem__(self, k: int | str) -> HermitianOp:
        return self.effects[self.labels.index(k) if isinstance(k, str) else k]

    @property
    def dim(self) -> int:
        return self.effects[0].dim


@dataclass(frozen=True, eq=False)
class PVM(POVM):
    def __post_init__(self) -> None:
        check_pvm(self.effects, self.name)


def _completeness(effects: Sequence[HermitianOp]) -> float:
    total = sum((e.matrix for e in effects), np.zeros_like(effects[0].matrix))
    return float(np.abs(total - np.eye(total.shape[0])).max())


def check_povm(effects: Sequence[HermitianOp], name: str = "") -> None:
    if not effects:
        raise NotAPOVM(name, "no effects")
    dims = {e.dim for e in effects}
    if len(dims) != 1:
        raise NotAPOVM(name, f"effects of mixed dimensions {sorted(dims)}")
    for k, e in enumerate(effects):
        if not e.is_psd(MEASUREMENT_TOL):
            raise NotAPOVM(name, f"effect {k} is not positive semidefinite")
    gap = _completeness(effects)
    if gap > MEASUREMENT_TOL:
        raise NotAPOVM(name, f"effects sum to identity only within {gap:.3g}")


def check_pvm(effects: Sequence[HermitianOp], name: str = "") -> None:
    if not effects:
        raise NotAPVM(name, "no effects")
    dims = {e.dim for e in effects}
    if len(dims) != 1:
        raise NotAPVM(name, f"effects of mixed dimensions {sorted(dims)}")
    for k, e in enumerate(effects):
        m = e.matrix
        dev = float(np.abs(m @ m - m).max())
        if dev > MEASUREMENT_TOL:
            raise NotAPVM(name, f"effect {k} is not idempotent (deviation {dev:.3g})")
    for i, j in itertools.combinations(range(len(effects)), 2):
        dev = float(np.abs(effects[i].matrix @ effects[j].matrix).max())
        if dev > MEASUREMENT_TOL:
            raise NotAPVM(name, f"effects {i} and {j} are not orthogonal (overlap {dev:.3g})")
    gap = _completeness(effects)
    if gap > MEASUREMENT_TOL:
        raise NotAPVM(name, f"effects sum to identity only within {gap:.3g}")


def is_pvm(effects: Sequence[HermitianOp]) -> bool:
    try:
        check_pvm(effects)
    except NotAPVM:
        return False
    return True


def pvm(effects, labels: Sequence[str] | None = None, name: str = "") -> PVM:
    ops = tuple(as_op(e) for e in effects)
    labels = tuple(labels) if labels is not None else tuple(str(k) for k in range(len(ops)))
    return PVM(ops, labels, name)


def povm(effects, labels: Sequence[str] | None = None, name: str = "") -> POVM:
    ops = tuple(as_op(e) for e in effects)
    labels = tuple(labels) if labels is not None else tuple(str(k) for k in range(len(ops)))
    return POVM(ops, labels, name)


def born_probability(state: Ket | HermitianOp, effect: HermitianOp) -> float:
    """Tr(rho E), clamped to [0, 1] after checking it lies within rounding of it."""
    rho = density(state)
    w = rho.eigvals()
    if w.min() < -PROB_TOL or abs(w.sum() - 1.0) > PROB_TOL:
        raise NotAState(f"spectrum {np.round(w, 12).tolist()} is not that of a density matrix")
    e = as_op(effect)
    if e.dim != rho.dim:
        raise NotAnEffect(f"effect dimension {e.dim} does not match state dimension {rho.dim}")
    we = e.eigvals()
    if we.min() < -PROB_TOL or we.max() > 1.0 + PROB_TOL:
        raise NotAnEffect(f"effect spectrum outside [0, 1]: {np.round(we, 12).tolist()}")
    p = e.expectation(rho)
    if not (-PROB_TOL <= p <= 1.0 + PROB_TOL):
        raise NotAnEffect(f"Born value {p!r} outside [0, 1]")
    return min(1.0, max(0.0, p))


def outcome_distribution(state: Ket | HermitianOp, m: POVM) -> list[float]:
    return [born_probability(state, e) for e in m.effects]


# KCBS ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KCBSRealization:
    state: Ket
    printed: tuple[Ket, ...]
    printed_issues: tuple[str, ...]
    order: tuple[int, ...]
    vectors: tuple[Ket, ...]
    projectors: tuple[HermitianOp, ...]
    observables: tuple[HermitianOp, ...]
    beta: float
    alpha_corr: float
    adjacent_overlaps: tuple[float, ...]


def _kcbs_printed() -> tuple[Ket, ...]:
    z = math.sqrt(math.cos(math.pi / 5))
    a, b = 1 / math.sqrt(2), 1 / math.sqrt(3)
    c4, s4 = math.cos(4 * math.pi / 5), math.sin(4 * math.pi / 5)
    c2, s2 = math.cos(2 * math.pi / 5), math.sin(2 * math.pi / 5)
    rows = [
        (a, (1.0, 0.0, z)),
        (b, (c4, s4, z)),
        (b, (c2, -s2, z)),
        (b, (c4, -s4, z)),
        (b, (c2, s2, z)),
    ]
    return tuple(Ket(f * np.array(v)) for f, v in rows)


def kcbs_realization() -> KCBSRealization:
    """Pentagon of rank-one projectors and the state (0, 0, 1).

    The vectors are first built with their printed prefactors and checked.
    Every printed vector has squared norm 1 + cos(pi/5) before the
    prefactor, so none of the prefactors yields a unit vector, and the
    printed order puts vectors 3 and 4 at an angle of 2 pi/5 rather than
    4 pi/5. Both problems are reported in ``printed_issues``; the
    realization then normalises and uses the cyclic order 1, 2, 3, 5, 4.
    """
    printed = _kcbs_printed()
    issues = []
    for i, k in enumerate(printed, 1):
        if abs(k.norm() - 1.0) > 1e-9:
            issues.append(f"vector {i} has norm {k.norm():.12g}")
    for i in range(5):
        u, v = printed[i].normalized(), printed[(i + 1) % 5].normalized()
        ov = abs(u.inner(v))
        if ov > 1e-9:
            issues.append(f"vectors {i + 1} and {(i + 1) % 5 + 1} overlap by {ov:.12g}")
    order = (1, 2, 3, 5, 4)
    vectors = tuple(printed[i - 1].normalized() for i in order)
    psi = ket(0, 0, 1)
    projectors = tuple(v.projector() for v in vectors)
    I3 = np.eye(3)
    observables = tuple(HermitianOp(2 * p.matrix - I3) for p in projectors)
    beta = sum(p.expectation(psi) for p in projectors)
    alpha = 0.0
    for i in range(5):
        prod = observables[i].matrix @ observables[(i + 1) % 5].matrix
        alpha += float(np.vdot(psi.amps, prod @ psi.amps).real)
    overlaps = tuple(abs(vectors[i].inner(vectors[(i + 1) % 5])) for i in range(5))
    return KCBSRealization(psi, printed, tuple(issues), order, vectors, projectors, observables, beta, alpha, overlaps)


# Mermin-Peres -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MerminPeres:
    labels: tuple[tuple[str, str, str], ...]
    grid: tuple[tuple[HermitianOp, ...], ...]
    row_products: tuple[np.ndarray, ...]
    column_products: tuple[np.ndarray, ...]

    def commuting(self) -> bool:
        lines = [list(r) for r in self.grid] + [list(c) for c in zip(*self.grid)]
        for line in lines:
            for p, q in itertools.combinations(line, 2):
                if np.abs(p.matrix @ q.matrix - q.matrix @ p.matrix).max() > 0:
                    return False
        return True

    def chi(self, state: Ket | HermitianOp) -> float:
        rho = density(state).matrix
        vals = [float(np.trace(rho @ m).real) for m in self.row_products + self.column_products]
        return sum(vals[:5]) - vals[5]


def mermin_peres_square() -> MerminPeres:
    Z, X, Y, I = PAULI_Z, PAULI_X, PAULI_Y, PAULI_I
    labels = (("A", "B", "C"), ("a", "b", "c"), ("alpha", "beta", "gamma"))
    mats = (
        (np.kron(Z, I), np.kron(I, Z), np.kron(Z, Z)),
        (np.kron(I, X), np.kron(X, I), np.kron(X, X)),
        (np.kron(Z, X), np.kron(X, Z), np.kron(Y, Y)),
    )
    grid = tuple(tuple(HermitianOp(m) for m in row) for row in mats)
    rows = tuple(r[0] @ r[1] @ r[2] for r in mats)
    cols = tuple(mats[0][j] @ mats[1][j] @ mats[2][j] for j in range(3))
    return MerminPeres(labels, grid, rows, cols)


def classical_chi_max() -> int:
    """Largest value of the chi combination over all +-1 assignments to the nine cells."""
    best = -10
    for v in itertools.product((1, -1), repeat=9):
        g = [v[0:3], v[3:6], v[6:9]]
        rows = [g[i][0] * g[i][1] * g[i][2] for i in range(3)]
        cols = [g[0][j] * g[1][j] * g[2][j] for j in range(3)]
        best = max(best, sum(rows) + cols[0] + cols[1] - cols[2])
    return best


# Cabello-18 ---------------------------------------------------------------

# Each basis lists indices into the vector file, in file order.
CABELLO_BASES: tuple[tuple[int, int, int, int], ...] = (
    (0, 1, 2, 3),
    (0, 4, 5, 6),
    (7, 8, 2, 9),
    (7, 10, 6, 11),
    (1, 4, 12, 13),
    (8, 10, 13, 14),
    (15, 16, 3, 9),
    (15, 17, 5, 11),
    (16, 17, 12, 14),
)


@dataclass(frozen=True, eq=False)
class Cabello18:
    vectors: tuple[Ket, ...]
    pvms: tuple[PVM, ...]
    scenario: Scenario


def default_cabello_path() -> Path:
    return Path(str(resources.files("ctxkit") / "data" / "cabello18.txt"))


def load_vectors(path: str | Path) -> list[Ket]:
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            out.append(Ket(np.array([complex(tok) for tok in line.split()])))
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return out


def cabello_vertex(i: int) -> str:
    return f"v{i + 1:02d}"


def cabello18(vectors: Sequence[Ket] | str | Path | None = None) -> Cabello18:
    """Nine four-outcome PVMs from 18 vectors, each vector shared by two bases."""
    if vectors is None:
        vectors = default_cabello_path()
    if isinstance(vectors, (str, Path)):
        vectors = load_vectors(vectors)
    vecs = tuple(vectors)
    if len(vecs) != 18:
        raise IncidenceMismatch(f"expected 18 vectors, got {len(vecs)}")
    for i, v in enumerate(vecs):
        if v.dim != 4:
            raise IncidenceMismatch(f"vector {i + 1} has dimension {v.dim}, expected 4")
        if abs(v.norm() - 1.0) > MEASUREMENT_TOL:
            raise NotAPVM(f"vector {i + 1}", f"norm {v.norm():.12g} is not 1")
    for i, j in itertools.combinations(range(18), 2):
        if abs(abs(vecs[i].inner(vecs[j])) - 1.0) < 1e-9:
            raise IncidenceMismatch(f"vectors {i + 1} and {j + 1} span the same ray")
    degree = [0] * 18
    pvms = []
    for b, idx in enumerate(CABELLO_BASES):
        for i in idx:
            degree[i] += 1
        pvms.append(
            pvm([vecs[i].projector() for i in idx], [cabello_vertex(i) for i in idx], name=f"basis {b + 1}")
        )
    if any(d != 2 for d in degree):
        raise IncidenceMismatch(f"vertex degrees {degree} are not all 2")
    s = new_scenario([cabello_vertex(i) for i in range(18)], [[cabello_vertex(i) for i in idx] for idx in CABELLO_BASES])
    return Cabello18(vecs, tuple(pvms), s)


# weak measurement ---------------------------------------------------------

RARE_CLICK = "rare-click"
SYMMETRIC = "symmetric"


@dataclass(frozen=True, eq=False)
class WeakPOVM:
    epsilon: float
    variant: str
    povm: POVM
    kraus: tuple[np.ndarray, ...]


def weak_povm(epsilon: float, variant: str = RARE_CLICK) -> WeakPOVM:
    """Two-outcome qubit measurement of strength epsilon with diagonal Kraus operators."""
    eps = float(epsilon)
    if not (0.0 <= eps <= 1.0):
        raise EpsilonOutOfRange(f"epsilon must lie in [0, 1], got {epsilon!r}")
    if variant == RARE_CLICK:
        d0, d1 = (1.0, 1.0 - eps), (0.0, eps)
    elif variant == SYMMETRIC:
        d0, d1 = ((1 + eps) / 2, (1 - eps) / 2), ((1 - eps) / 2, (1 + eps) / 2)
    else:
        raise ValidationError(f"unknown variant {variant!r}; use {RARE_CLICK!r} or {SYMMETRIC!r}")
    effects = [np.diag(d0), np.diag(d1)]
    kraus = tuple(np.diag(np.sqrt(d)).astype(complex) for d in (d0, d1))
    return WeakPOVM(eps, variant, povm(effects, ["0", "1"], name=f"{variant} eps={eps}"), kraus)


def binary_entropy(p: float) -> float:
    return -sum(x * math.log2(x) for x in (p, 1.0 - p) if x > 0.0)


def von_neumann_entropy(rho: HermitianOp | np.ndarray) -> float:
    w = as_op(rho).eigvals()
    return -sum(float(x) * math.log2(float(x)) for x in w if x > 1e-15)


@dataclass(frozen=True)
class MeasurementEntropies:
    probabilities: tuple[float, ...]
    shannon: float
    von_neumann_decrease: float


def post_measurement_states(w: WeakPOVM, state: Ket) -> list[Ket | None]:
    """A_k|psi> / sqrt(p_k), or None for an outcome of probability zero."""
    out = []
    for A in w.kraus:
        v = A @ state.amps
        top = float(np.abs(v).max())
        if top == 0.0:
            out.append(None)
            continue
        # exact power-of-two rescale, split in two so subnormal amplitudes do not overflow
        k = -math.frexp(top)[1]
        v = v * 2.0 ** (k // 2) * 2.0 ** (k - k // 2)
        out.append(Ket(v / np.linalg.norm(v)))
    return out


def measurement_entropies(w: WeakPOVM, state: Ket | HermitianOp) -> MeasurementEntropies:
    """Shannon entropy of the outcomes and the average drop in von Neumann entropy."""
    if len(w.povm) != 2:
        raise ValidationError("entropies are defined here for two-outcome measurements")
    rho = density(state)
    probs = tuple(born_probability(rho, e) for e in w.povm.effects)
    shannon = -sum(p * math.log2(p) for p in probs if p > 0.0)
    after = 0.0
    for A, p in zip(w.kraus, probs):
        # an outcome this rare shifts the average by at most p * log2(dim)
        if p > 1e-15:
            after += p * von_neumann_entropy(A @ rho.matrix @ A.conj().T / p)
    return MeasurementEntropies(probs, shannon, von_neumann_entropy(rho) - after)
