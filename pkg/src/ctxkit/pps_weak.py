"""Pre- and post-selected experiments: ABL probabilities, weak values, paradoxes."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    FamilyNotClosed,
    OrthogonalPrePost,
    UnknownName,
    ZeroPostSelectionProbability,
)
from .quantum_kernel import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, PVM, HermitianOp, Ket, ket, kron, pvm

ABL_TOL = 1e-14
OVERLAP_TOL = 1e-12
VALUE_TOL = 1e-9
CLOSURE_CAP = 64


@dataclass(frozen=True, eq=False)
class PPSExperiment:
    name: str
    pre: Ket
    post: Ket
    measurements: tuple[PVM, ...]
    family: tuple[str, ...] = ()
    probes: tuple[tuple[str, HermitianOp], ...] = ()

    def measurement(self, name: str) -> PVM:
        for m in self.measurements:
            if m.name == name:
                return m
        raise UnknownName(f"no measurement named {name!r} in {self.name!r}")

    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.measurements)


def _amp(e: PPSExperiment, P: np.ndarray) -> complex:
    return complex(np.vdot(e.post.amps, P @ e.pre.amps))


def abl_distribution(e: PPSExperiment, measurement: str) -> list[float]:
    """|<phi|P_k|psi>|^2 / sum_j |<phi|P_j|psi>|^2 over one named PVM."""
    m = e.measurement(measurement)
    w = [abs(_amp(e, P.matrix)) ** 2 for P in m.effects]
    total = sum(w)
    if total <= ABL_TOL:
        raise ZeroPostSelectionProbability(f"post-selection impossible after {measurement!r}")
    return [x / total for x in w]


def abl_probability(e: PPSExperiment, measurement: str, outcome: int | str) -> float:
    m = e.measurement(measurement)
    k = m.labels.index(outcome) if isinstance(outcome, str) else outcome
    return abl_distribution(e, measurement)[k]


def _binary_abl(e: PPSExperiment, P: np.ndarray) -> float:
    a = abs(_amp(e, P)) ** 2
    b = abs(_amp(e, np.eye(P.shape[0]) - P)) ** 2
    if a + b <= ABL_TOL:
        raise ZeroPostSelectionProbability("post-selection impossible in the binary context")
    return a / (a + b)


def weak_value(op: HermitianOp | np.ndarray, pre: Ket, post: Ket, *, full: bool = False) -> float | complex:
    """Re(<phi|A|psi> / <phi|psi>); ``full=True`` returns the complex ratio."""
    A = op.matrix if isinstance(op, HermitianOp) else np.asarray(op)
    overlap = complex(np.vdot(post.amps, pre.amps))
    if abs(overlap) <= OVERLAP_TOL:
        raise OrthogonalPrePost("pre- and post-selected states are orthogonal")
    w = complex(np.vdot(post.amps, A @ pre.amps)) / overlap
    return w + 0.0 if full else w.real + 0.0


# projector families -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FamilyEntry:
    label: str
    matrix: np.ndarray
    value: float = float("nan")
    context: str = ""


def _key(M: np.ndarray) -> bytes:
    return (np.round(M.real, 9) + 0.0).tobytes() + (np.round(M.imag, 9) + 0.0).tobytes()


def _commute(P: np.ndarray, Q: np.ndarray) -> bool:
    return bool(np.abs(P @ Q - Q @ P).max() <= VALUE_TOL)


def closure(generators: Sequence[tuple[str, np.ndarray]], *, cap: int = CLOSURE_CAP) -> list[FamilyEntry]:
    """Smallest family containing 0, I and the generators that is closed under
    complements and under meets and joins of commuting pairs."""
    dim = generators[0][1].shape[0]
    out: list[FamilyEntry] = []
    seen: dict[bytes, int] = {}

    def add(label: str, M: np.ndarray) -> bool:
        k = _key(M)
        if k in seen:
            return False
        seen[k] = len(out)
        out.append(FamilyEntry(label, M))
        if len(out) > cap:
            raise FamilyNotClosed(f"closure exceeds {cap} projectors")
        return True

    add("0", np.zeros((dim, dim), dtype=complex))
    add("I", np.eye(dim, dtype=complex))
    for label, M in generators:
        add(label, np.asarray(M, dtype=complex))
    grew = True
    while grew:
        grew = False
        snapshot = list(out)
        for a in snapshot:
            grew |= add(f"~{a.label}", np.eye(dim) - a.matrix)
        for a, b in itertools.combinations(snapshot, 2):
            if not _commute(a.matrix, b.matrix):
                continue
            meet = a.matrix @ b.matrix
            grew |= add(f"({a.label} & {b.label})", meet)
            grew |= add(f"({a.label} | {b.label})", a.matrix + b.matrix - meet)
    return out


def family_values(e: PPSExperiment, family: Sequence[str] | None = None) -> list[FamilyEntry]:
    """ABL value of every projector in the closure of the named PVMs.

    A projector that is an outcome of a named PVM takes its value there
    (first PVM in order); any other projector P is valued in the binary
    context {P, I - P}.
    """
    names = tuple(family) if family is not None else (e.family or e.names())
    gens = []
    where: dict[bytes, tuple[str, float]] = {}
    for n in names:
        m = e.measurement(n)
        dist = abl_distribution(e, n)
        for lab, P, p in zip(m.labels, m.effects, dist):
            gens.append((f"{n}:{lab}", P.matrix))
            where.setdefault(_key(P.matrix), (n, p))
    out = []
    for entry in closure(gens):
        k = _key(entry.matrix)
        if k in where:
            ctx, val = where[k]
        else:
            ctx, val = "binary", _binary_abl(e, entry.matrix)
        out.append(FamilyEntry(entry.label, entry.matrix, val, ctx))
    return out


@dataclass(frozen=True)
class AlgebraicConditionReport:
    alpha: tuple[tuple[str, float], ...]
    beta: float
    gamma: tuple[tuple[str, str, float, float], ...]
    beta_ok: bool = True

    @property
    def alpha_ok(self) -> bool:
        return not self.alpha

    @property
    def gamma_ok(self) -> bool:
        return not self.gamma

    @property
    def violated(self) -> tuple[str, ...]:
        out = []
        if not self.alpha_ok:
            out.append("alpha")
        if not self.beta_ok:
            out.append("beta")
        if not self.gamma_ok:
            out.append("gamma")
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "alpha": {"ok": self.alpha_ok, "violations": [{"projector": p, "value": v} for p, v in self.alpha]},
            "beta": {"ok": self.beta_ok, "f_identity": self.beta},
            "gamma": {
                "ok": self.gamma_ok,
                "violations": [
                    {"P": p, "Q": q, "f_join": lhs, "f_P_plus_f_Q_minus_f_meet": rhs} for p, q, lhs, rhs in self.gamma
                ],
            },
        }


def algebraic_conditions(
    entries: Sequence[FamilyEntry | tuple[str, np.ndarray, float]],
    pairs: Sequence[tuple[str, str]] | None = None,
    *,
    tol: float = VALUE_TOL,
) -> AlgebraicConditionReport:
    """Check range, normalisation and partial additivity of f on a projector family.

    ``pairs`` names the commuting pairs (P, Q) to test; by default every
    commuting pair of the family is tested.
    """
    ents = [x if isinstance(x, FamilyEntry) else FamilyEntry(x[0], np.asarray(x[1], dtype=complex), float(x[2])) for x in entries]
    if not ents:
        raise FamilyNotClosed("empty family")
    dim = ents[0].matrix.shape[0]
    by_key = {_key(x.matrix): x for x in ents}
    by_label = {x.label: x for x in ents}
    zero, ident = _key(np.zeros((dim, dim), dtype=complex)), _key(np.eye(dim, dtype=complex))
    if zero not in by_key or ident not in by_key:
        raise FamilyNotClosed("family must contain 0 and I")
    alpha = tuple((x.label, x.value) for x in ents if not (-tol <= x.value <= 1.0 + tol))
    f_id = by_key[ident].value
    if pairs is None:
        pair_list = [(a, b) for a, b in itertools.combinations(ents, 2) if _commute(a.matrix, b.matrix)]
    else:
        try:
            pair_list = [(by_label[p], by_label[q]) for p, q in pairs]
        except KeyError as exc:
            raise FamilyNotClosed(f"pair member {exc.args[0]!r} not in the family") from exc
    gamma = []
    for a, b in pair_list:
        if not _commute(a.matrix, b.matrix):
            raise FamilyNotClosed(f"{a.label} and {b.label} do not commute")
        meet = a.matrix @ b.matrix
        join = a.matrix + b.matrix - meet
        km, kj = _key(meet), _key(join)
        if km not in by_key or kj not in by_key:
            raise FamilyNotClosed(f"meet or join of {a.label} and {b.label} is missing")
        lhs = by_key[kj].value
        rhs = a.value + b.value - by_key[km].value
        if abs(lhs - rhs) > tol:
            gamma.append((a.label, b.label, lhs, rhs))
    return AlgebraicConditionReport(alpha, f_id, tuple(gamma), abs(f_id - 1.0) <= tol)


@dataclass(frozen=True)
class ParadoxVerdict:
    logical: bool
    abl_zero_one: bool
    overlap: float
    violated: tuple[str, ...]
    report: AlgebraicConditionReport | None = None


def is_logical_pps_paradox(e: PPSExperiment, family: Sequence[str] | None = None) -> ParadoxVerdict:
    """All ABL values of the named PVMs in {0, 1}, non-orthogonal boundary
    states, and a violated algebraic condition on the closure."""
    names = tuple(family) if family is not None else (e.family or e.names())
    zero_one = all(min(p, abs(1.0 - p)) <= VALUE_TOL for n in names for p in abl_distribution(e, n))
    overlap = abs(e.post.inner(e.pre))
    report = algebraic_conditions(family_values(e, names))
    logical = zero_one and overlap > OVERLAP_TOL and bool(report.violated)
    return ParadoxVerdict(logical, zero_one, overlap, report.violated, report)


def anomalous_weak_values(e: PPSExperiment, family: Sequence[str] | None = None) -> list[tuple[str, float]]:
    """Projectors of the closure whose weak value falls outside [0, 1]."""
    names = tuple(family) if family is not None else (e.family or e.names())
    gens = [(f"{n}:{lab}", P.matrix) for n in names for lab, P in zip(e.measurement(n).labels, e.measurement(n).effects)]
    out = []
    for entry in closure(gens):
        w = weak_value(entry.matrix, e.pre, e.post)
        if w < -VALUE_TOL or w > 1.0 + VALUE_TOL:
            out.append((entry.label, w))
    return out


def weak_table(e: PPSExperiment) -> list[tuple[str, float]]:
    return [(label, weak_value(op, e.pre, e.post)) for label, op in e.probes]


# gallery ------------------------------------------------------------------


def _proj(*vectors) -> np.ndarray:
    return sum((np.outer(v, np.conj(v)) for v in vectors), np.zeros((len(vectors[0]),) * 2, dtype=complex))


def three_box() -> PPSExperiment:
    e = np.eye(3, dtype=complex)
    P1, P2, P3 = _proj(e[0]), _proj(e[1]), _proj(e[2])
    I = np.eye(3)
    ms = (
        pvm([P1, I - P1], ["P1", "not P1"], name="M1"),
        pvm([P2, I - P2], ["P2", "not P2"], name="M2"),
        pvm([P1, P2, P3], ["P1", "P2", "P3"], name="M1_alt"),
    )
    return PPSExperiment(
        "three-box",
        ket(1, 1, 1),
        ket(1, 1, -1),
        ms,
        family=("M1", "M2"),
        probes=(("P1+P2", HermitianOp(P1 + P2)), ("P3", HermitianOp(P3))),
    )


def cheshire() -> PPSExperiment:
    """Path qubit (L, R) tensor polarisation qubit (H, V).

    The pre-selected state carries a relative phase i between the two
    paths; with it the ABL and weak values come out as tabulated in the
    report (without it every listed weak value would have zero real part).
    """
    L, R = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    H, V = np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)
    plus, minus = (H + 1j * V) / math.sqrt(2), (H - 1j * V) / math.sqrt(2)
    PL, PR = _proj(L), _proj(R)
    Pp, Pm = _proj(plus), _proj(minus)
    I2 = PAULI_I
    pre = Ket(np.kron(1j * L + R, H) / math.sqrt(2))
    post = Ket((np.kron(L, H) + np.kron(R, V)) / math.sqrt(2))
    ms = (
        pvm([np.kron(PL, I2), np.kron(PR, I2)], ["L", "R"], name="path"),
        pvm(
            [np.kron(PL, Pp), np.kron(PL, Pm), np.kron(PR, Pp), np.kron(PR, Pm)],
            ["L+", "L-", "R+", "R-"],
            name="path_polarization",
        ),
    )
    sz = Pp - Pm
    probes = (
        ("Pi_L", HermitianOp(np.kron(PL, I2))),
        ("Pi_R", HermitianOp(np.kron(PR, I2))),
        ("sigma_z_L", HermitianOp(np.kron(PL, sz))),
        ("sigma_z_R", HermitianOp(np.kron(PR, sz))),
        ("Pi_R+", HermitianOp(np.kron(PR, Pp))),
        ("Pi_R-", HermitianOp(np.kron(PR, Pm))),
    )
    return PPSExperiment("cheshire", pre, post, ms, family=("path", "path_polarization"), probes=probes)


def _pauli_string(s: str) -> np.ndarray:
    table = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}
    return kron(*(table[c] for c in s))


def pigeonhole() -> PPSExperiment:
    """Three two-box pigeons; boxes L, R are the Z eigenbasis."""
    LR = np.array([1, 1], dtype=complex) / math.sqrt(2)
    plus = np.array([1, 1j], dtype=complex) / math.sqrt(2)
    pre = Ket(np.kron(np.kron(LR, LR), LR))
    post = Ket(np.kron(np.kron(plus, plus), plus))
    I8 = np.eye(8)
    ms = []
    for a, b in ((1, 2), (2, 3), (1, 3)):
        s = ["I", "I", "I"]
        s[a - 1] = s[b - 1] = "Z"
        same = (I8 + _pauli_string("".join(s))) / 2
        ms.append(pvm([same, I8 - same], ["same", "different"], name=f"same_{a}{b}"))
    all_same = _proj(*(np.eye(8)[i] for i in (0, 7)))
    probes = tuple((m.name + ":same", m.effects[0]) for m in ms) + (("all_same", HermitianOp(all_same)),)
    return PPSExperiment("pigeonhole", pre, post, tuple(ms), probes=probes)


SQUARE_ROWS: tuple[tuple[str, str, str], ...] = (
    ("ZZI", "IZZ", "ZIZ"),
    ("XXI", "IXX", "XIX"),
    ("YYI", "IYY", "YIY"),
)


def mermin_peres_3q() -> PPSExperiment:
    """Pigeonhole boundary states with one binary PVM per square observable."""
    base = pigeonhole()
    I8 = np.eye(8)
    ms = []
    for row in SQUARE_ROWS:
        for s in row:
            O = _pauli_string(s)
            ms.append(pvm([(I8 + O) / 2, (I8 - O) / 2], ["+1", "-1"], name=s))
    return PPSExperiment("mermin-peres-3q", base.pre, base.post, tuple(ms))


@dataclass(frozen=True)
class SquareReport:
    forced: dict[str, int]
    row_signs: tuple[int, ...]
    column_signs: tuple[int, ...]
    inconsistent: tuple[tuple[str, ...], ...] = field(default_factory=tuple)


def _operator_sign(labels: Sequence[str]) -> int:
    prod = np.eye(8, dtype=complex)
    for s in labels:
        prod = prod @ _pauli_string(s)
    for sign in (1, -1):
        if np.abs(prod - sign * np.eye(8)).max() == 0.0:
            return sign
    raise ValueError(f"product of {list(labels)} is not +-I")


def forced_values(e: PPSExperiment) -> dict[str, int]:
    """+-1 for every binary PVM whose ABL value is 0 or 1; others are omitted."""
    out = {}
    for m in e.measurements:
        p = abl_distribution(e, m.name)[0]
        if abs(p - 1.0) <= VALUE_TOL:
            out[m.name] = 1
        elif abs(p) <= VALUE_TOL:
            out[m.name] = -1
    return out


def square_report() -> SquareReport:
    """Compare ABL-forced values with the operator identities of each line."""
    forced = forced_values(mermin_peres_3q())
    cols = tuple(tuple(r[j] for r in SQUARE_ROWS) for j in range(3))
    lines = SQUARE_ROWS + cols
    bad = []
    for line in lines:
        if all(s in forced for s in line):
            if math.prod(forced[s] for s in line) != _operator_sign(line):
                bad.append(line)
    return SquareReport(
        forced,
        tuple(_operator_sign(r) for r in SQUARE_ROWS),
        tuple(_operator_sign(c) for c in cols),
        tuple(bad),
    )


GALLERY = {
    "three-box": three_box,
    "cheshire": cheshire,
    "pigeonhole": pigeonhole,
    "mermin-peres-3q": mermin_peres_3q,
}


def paradox_gallery() -> dict[str, PPSExperiment]:
    return {name: build() for name, build in GALLERY.items()}
