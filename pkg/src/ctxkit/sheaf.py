"""Table-level contextuality: empirical tables, supports and global sections.

A table fixes a list of observables with finite outcome sets and a cover
of contexts. Each context carries a distribution over joint outcomes of
its observables, listed with the first observable most significant.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import lp
from .errors import (
    InvalidDimension,
    MarginalMismatch,
    RowNotNormalized,
    StateSpaceTooLarge,
    ValidationError,
)
from .models import ProbModel, validate_model
from .scenario import Scenario, new_scenario

ROW_TOL = 1e-9
SUPPORT_TOL = 1e-12
GLOBAL_TOL = 1e-7
MAX_GLOBAL = 10**6


def _outcomes(arities: Sequence[int]) -> list[tuple[int, ...]]:
    return list(itertools.product(*(range(a) for a in arities)))


@dataclass(frozen=True)
class _Shape:
    observables: tuple[tuple[str, int], ...]
    contexts: tuple[tuple[str, ...], ...]

    def arity(self, name: str) -> int:
        return dict(self.observables)[name]

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.observables)

    def cells(self, i: int) -> list[tuple[int, ...]]:
        return _outcomes([self.arity(o) for o in self.contexts[i]])


def _check_shape(observables, contexts, rows) -> _Shape:
    if isinstance(observables, Mapping):
        observables = list(observables.items())
    obs = tuple((str(n), int(a)) for n, a in observables)
    names = [n for n, _ in obs]
    if len(set(names)) != len(names):
        raise ValidationError("observable names must be unique")
    for n, a in obs:
        if a < 1:
            raise ValidationError(f"observable {n!r} needs at least one outcome")
    ctxs = tuple(tuple(str(o) for o in c) for c in contexts)
    known = set(names)
    for c in ctxs:
        if not c:
            raise ValidationError("contexts must be non-empty")
        if len(set(c)) != len(c):
            raise ValidationError(f"context {list(c)} repeats an observable")
        missing = [o for o in c if o not in known]
        if missing:
            raise ValidationError(f"context {list(c)} uses undeclared observables {missing}")
    if len(rows) != len(ctxs):
        raise ValidationError(f"expected {len(ctxs)} rows, got {len(rows)}")
    shape = _Shape(obs, ctxs)
    for i, r in enumerate(rows):
        want = len(shape.cells(i))
        if len(r) != want:
            raise ValidationError(f"row {i} has {len(r)} entries, context needs {want}")
    return shape


def _marginal(shape: _Shape, i: int, row: Sequence[float], keep: Sequence[str]) -> dict[tuple[int, ...], float]:
    ctx = shape.contexts[i]
    pos = [ctx.index(o) for o in keep]
    out: dict[tuple[int, ...], float] = {}
    for cell, p in zip(shape.cells(i), row):
        key = tuple(cell[k] for k in pos)
        out[key] = out.get(key, 0.0) + p
    return out


@dataclass(frozen=True)
class EmpiricalTable:
    observables: tuple[tuple[str, int], ...]
    contexts: tuple[tuple[str, ...], ...]
    rows: tuple[tuple[float, ...], ...]

    @property
    def shape(self) -> _Shape:
        return _Shape(self.observables, self.contexts)

    def to_json(self) -> dict:
        return {
            "observables": dict(self.observables),
            "contexts": [list(c) for c in self.contexts],
            "rows": [list(r) for r in self.rows],
        }


@dataclass(frozen=True)
class PossibilityTable:
    observables: tuple[tuple[str, int], ...]
    contexts: tuple[tuple[str, ...], ...]
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        _check_shape(self.observables, self.contexts, self.rows)
        for i, r in enumerate(self.rows):
            if any(x not in (0, 1) for x in r):
                raise ValidationError(f"possibility row {i} has entries outside {{0, 1}}")
            if not any(r):
                raise ValidationError(f"possibility row {i} has no possible outcome")

    @property
    def shape(self) -> _Shape:
        return _Shape(self.observables, self.contexts)

    def uniform(self) -> EmpiricalTable:
        """Uniform distribution on each support; fails if marginals clash."""
        rows = [[x / sum(r) for x in r] for r in self.rows]
        return build_table(self.observables, self.contexts, rows)

    def to_json(self) -> dict:
        return {
            "observables": dict(self.observables),
            "contexts": [list(c) for c in self.contexts],
            "rows": [list(r) for r in self.rows],
        }


def build_table(observables, contexts, rows, *, tol: float = ROW_TOL) -> EmpiricalTable:
    """Validate normalisation and no-disturbance, then freeze."""
    shape = _check_shape(observables, contexts, rows)
    frows = []
    for i, r in enumerate(rows):
        fr = tuple(float(x) for x in r)
        if any(not (x >= -tol) for x in fr):
            raise RowNotNormalized(f"row {i} has a negative entry")
        total = sum(fr)
        if abs(total - 1.0) > tol:
            raise RowNotNormalized(f"row {i} sums to {total!r}")
        frows.append(fr)
    for i, j in itertools.combinations(range(len(shape.contexts)), 2):
        shared = [o for o in shape.contexts[i] if o in shape.contexts[j]]
        for o in shared:
            mi = _marginal(shape, i, frows[i], [o])
            mj = _marginal(shape, j, frows[j], [o])
            gap = max(abs(mi[k] - mj[k]) for k in mi)
            if gap > tol:
                raise MarginalMismatch((shape.contexts[i], shape.contexts[j]), o, gap)
    return EmpiricalTable(shape.observables, shape.contexts, tuple(frows))


def table_from_json(data: dict | str) -> EmpiricalTable:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        return build_table(data["observables"], data["contexts"], data["rows"])
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"malformed table JSON: {exc}") from exc


def possibilistic_collapse(t: EmpiricalTable | PossibilityTable) -> PossibilityTable:
    if isinstance(t, PossibilityTable):
        return t
    rows = tuple(tuple(1 if p > SUPPORT_TOL else 0 for p in r) for r in t.rows)
    return PossibilityTable(t.observables, t.contexts, rows)


# global assignments -------------------------------------------------------


def _global_space(shape: _Shape) -> list[tuple[int, ...]]:
    size = math.prod(a for _, a in shape.observables)
    if size > MAX_GLOBAL:
        raise StateSpaceTooLarge(f"{size} global assignments exceed the limit of {MAX_GLOBAL}")
    return _outcomes([a for _, a in shape.observables])


def _cell_index(shape: _Shape, i: int, g: Sequence[int]) -> int:
    """Position in context i's row of the restriction of global assignment g."""
    names = shape.names()
    idx = 0
    for o in shape.contexts[i]:
        idx = idx * shape.arity(o) + g[names.index(o)]
    return idx


@dataclass(frozen=True)
class GlobalCertificate:
    feasible: bool
    weights: dict[tuple[int, ...], float] = field(default_factory=dict)
    witness: tuple[tuple[float, ...], ...] = ()

    def to_json(self, names: Sequence[str]) -> dict:
        if self.feasible:
            return {
                "weights": [
                    {"assignment": dict(zip(names, g)), "weight": w} for g, w in sorted(self.weights.items())
                ]
            }
        return {"witness": [list(r) for r in self.witness]}


def has_global_distribution(t: EmpiricalTable) -> tuple[bool, GlobalCertificate]:
    """LP: a distribution on global assignments whose marginals are the rows.

    When infeasible the witness assigns a coefficient to every table entry;
    it is nonpositive on every global assignment yet positive on the table.
    """
    shape = t.shape
    space = _global_space(shape)
    offsets = np.cumsum([0] + [len(r) for r in t.rows])
    A = np.zeros((offsets[-1], len(space)))
    for col, g in enumerate(space):
        for i in range(len(shape.contexts)):
            A[offsets[i] + _cell_index(shape, i, g), col] = 1.0
    b = np.concatenate([np.asarray(r) for r in t.rows])
    res = lp.feasible_point(A, b, tol=1e-10)
    if res.feasible and np.abs(A @ res.x - b).max() <= GLOBAL_TOL:
        weights = {space[k]: float(w) for k, w in enumerate(res.x) if w > 1e-12}
        return True, GlobalCertificate(True, weights=weights)
    y = res.farkas if res.farkas is not None else np.zeros(len(b))
    witness = tuple(tuple(float(v) for v in y[offsets[i] : offsets[i + 1]]) for i in range(len(t.rows)))
    return False, GlobalCertificate(False, witness=witness)


def global_sections(t: EmpiricalTable | PossibilityTable, *, limit: int | None = None) -> list[tuple[int, ...]]:
    """Global assignments whose restriction to every context is possible.

    Backtracking assigns observables in declared order, lexicographically,
    and prunes a branch as soon as a fully assigned context is impossible.
    """
    pt = possibilistic_collapse(t)
    shape = pt.shape
    names = shape.names()
    pos = {n: k for k, n in enumerate(names)}
    closes: list[list[int]] = [[] for _ in names]
    for i, c in enumerate(shape.contexts):
        closes[max(pos[o] for o in c)].append(i)
    g = [0] * len(names)
    out: list[tuple[int, ...]] = []

    def rec(k: int) -> bool:
        if k == len(names):
            out.append(tuple(g))
            return limit is not None and len(out) >= limit
        for v in range(shape.arity(names[k])):
            g[k] = v
            if all(pt.rows[i][_cell_index(shape, i, g)] for i in closes[k]):
                if rec(k + 1):
                    return True
        return False

    rec(0)
    return out


# hierarchy ----------------------------------------------------------------


class Level(enum.IntEnum):
    NONCONTEXTUAL = 0
    PROBABILISTIC = 1
    LOGICAL = 2
    STRONG = 3

    @property
    def label(self) -> str:
        return self.name.capitalize()


@dataclass(frozen=True)
class HierarchyVerdict:
    level: Level
    evidence: dict

    @property
    def label(self) -> str:
        return self.level.label

    def to_json(self) -> dict:
        return {"level": self.label, "evidence": self.evidence}


def unextendable_cells(t: EmpiricalTable | PossibilityTable) -> list[tuple[int, dict[str, int]]]:
    """Possible local outcomes that lie on no global section, in table order."""
    pt = possibilistic_collapse(t)
    shape = pt.shape
    sections = global_sections(pt)
    covered = [set() for _ in shape.contexts]
    for g in sections:
        for i in range(len(shape.contexts)):
            covered[i].add(_cell_index(shape, i, g))
    out = []
    for i, c in enumerate(shape.contexts):
        for k, cell in enumerate(shape.cells(i)):
            if pt.rows[i][k] and k not in covered[i]:
                out.append((i, dict(zip(c, cell))))
    return out


def classify(t: EmpiricalTable | PossibilityTable) -> HierarchyVerdict:
    """Place a table in the hierarchy Noncontextual < Probabilistic < Logical < Strong.

    A possibility table carries no probabilities, so it is judged on its
    support alone: it is reported Noncontextual when every possible cell
    extends to a global section.
    """
    shape = t.shape
    names = shape.names()
    if isinstance(t, EmpiricalTable):
        ok, cert = has_global_distribution(t)
        if ok:
            return HierarchyVerdict(Level.NONCONTEXTUAL, cert.to_json(names))
    sections = global_sections(t)
    if not sections:
        return HierarchyVerdict(Level.STRONG, {"global_sections": []})
    stuck = unextendable_cells(t)
    secs = [dict(zip(names, g)) for g in sections]
    if stuck:
        i, cell = stuck[0]
        return HierarchyVerdict(
            Level.LOGICAL,
            {"context": list(shape.contexts[i]), "section": cell, "global_sections": secs},
        )
    if isinstance(t, PossibilityTable):
        return HierarchyVerdict(Level.NONCONTEXTUAL, {"scope": "support", "global_sections": secs})
    return HierarchyVerdict(Level.PROBABILISTIC, {"global_sections": secs, "witness": cert.to_json(names)["witness"]})


# relabeling ---------------------------------------------------------------


def _support_key(pt: PossibilityTable, rename: Mapping[str, str]) -> frozenset:
    shape = pt.shape
    out = set()
    for i, c in enumerate(shape.contexts):
        cells = frozenset(
            frozenset((rename[o], v) for o, v in zip(c, cell))
            for k, cell in enumerate(shape.cells(i))
            if pt.rows[i][k]
        )
        out.add((frozenset(rename[o] for o in c), cells))
    return frozenset(out)


def support_equivalent(a: EmpiricalTable | PossibilityTable, b: EmpiricalTable | PossibilityTable) -> dict[str, str] | None:
    """Observable bijection carrying the support of a onto that of b, if any."""
    pa, pb = possibilistic_collapse(a), possibilistic_collapse(b)
    if sorted(x for _, x in pa.observables) != sorted(x for _, x in pb.observables):
        return None
    target = _support_key(pb, {n: n for n in pb.shape.names()})
    ar = dict(pa.observables)
    br = dict(pb.observables)
    for perm in itertools.permutations(pb.shape.names()):
        rename = dict(zip(pa.shape.names(), perm))
        if any(ar[k] != br[v] for k, v in rename.items()):
            continue
        if _support_key(pa, rename) == target:
            return rename
    return None


# corpus -------------------------------------------------------------------


def _binary(names: Iterable[str]) -> list[tuple[str, int]]:
    return [(n, 2) for n in names]


def liar_cycle(n: int) -> PossibilityTable:
    """x1 = x2, ..., x_{n-1} = x_n, x_n != x1 as a support table."""
    if not isinstance(n, int) or n < 2:
        raise InvalidDimension(f"liar cycle needs n >= 2, got {n!r}")
    names = [f"x{i}" for i in range(1, n + 1)]
    contexts = [(names[i], names[i + 1]) for i in range(n - 1)] + [(names[-1], names[0])]
    rows = [(1, 0, 0, 1)] * (n - 1) + [(0, 1, 1, 0)]
    return PossibilityTable(tuple(_binary(names)), tuple(contexts), tuple(rows))


def chsh_table() -> EmpiricalTable:
    return build_table(
        _binary(["A", "A'", "B", "B'"]),
        [("A", "B"), ("A", "B'"), ("A'", "B"), ("A'", "B'")],
        [
            (1 / 2, 0, 0, 1 / 2),
            (3 / 8, 1 / 8, 1 / 8, 3 / 8),
            (3 / 8, 1 / 8, 1 / 8, 3 / 8),
            (1 / 8, 3 / 8, 3 / 8, 1 / 8),
        ],
    )


def hardy_table() -> EmpiricalTable:
    return build_table(
        _binary(["A", "A'", "B", "B'"]),
        [("A", "B"), ("A", "B'"), ("A'", "B"), ("A'", "B'")],
        [
            (1 / 16, 3 / 16, 3 / 16, 9 / 16),
            (0, 1 / 4, 5 / 8, 1 / 8),
            (0, 5 / 8, 1 / 4, 1 / 8),
            (1 / 4, 3 / 8, 3 / 8, 0),
        ],
    )


def pr_box_table() -> EmpiricalTable:
    half = (1 / 2, 0, 0, 1 / 2)
    return build_table(
        _binary(["A", "A'", "B", "B'"]),
        [("A", "B"), ("A", "B'"), ("A'", "B"), ("A'", "B'")],
        [half, half, half, (0, 1 / 2, 1 / 2, 0)],
    )


def _anti_cycle(names: Sequence[str]) -> EmpiricalTable:
    n = len(names)
    contexts = [(names[i], names[(i + 1) % n]) for i in range(n)]
    return build_table(_binary(names), contexts, [(0, 1 / 2, 1 / 2, 0)] * n)


def kcbs_table() -> EmpiricalTable:
    return _anti_cycle([f"A{i}" for i in range(1, 6)])


def overprotective_seer_table() -> EmpiricalTable:
    return _anti_cycle(["A", "B", "C"])


def hanging_paradox_table() -> EmpiricalTable:
    """Five binary statements around the week; same rows as the KCBS table."""
    return _anti_cycle(["V", "J", "M'", "M", "L"])


def sea_battle_table() -> EmpiricalTable:
    same = (1 / 2, 0, 0, 1 / 2)
    return build_table(
        _binary(["H", "A", "D"]),
        [("H", "A"), ("A", "D"), ("D", "H")],
        [same, same, (1 / 4, 1 / 4, 1 / 4, 1 / 4)],
    )


PRESETS = {
    "chsh": chsh_table,
    "hardy": hardy_table,
    "pr_box": pr_box_table,
    "kcbs": kcbs_table,
    "overprotective_seer": overprotective_seer_table,
    "sea_battle": sea_battle_table,
    "hanging_paradox": hanging_paradox_table,
}


def paradox_tables() -> dict[str, EmpiricalTable]:
    return {name: build() for name, build in PRESETS.items()}


def chsh_sum(t: EmpiricalTable) -> float:
    """Sum over the four contexts of P(a = b), with the last context using P(a != b)."""
    total = 0.0
    for i, r in enumerate(t.rows):
        same = r[0] + r[3]
        total += (1.0 - same) if i == len(t.rows) - 1 else same
    return total


# bridge -------------------------------------------------------------------


def to_scenario(t: EmpiricalTable) -> tuple[Scenario, ProbModel]:
    """One edge per context over (context, joint outcome) vertices.

    Outcomes that share a marginal across contexts are kept distinct, so
    the resulting classicality question is weaker than the table's own.
    """
    shape = t.shape
    verts, edges, values = [], [], {}
    for i, c in enumerate(shape.contexts):
        edge = []
        for cell, p in zip(shape.cells(i), t.rows[i]):
            name = f"c{i}[{','.join(c)}]={','.join(map(str, cell))}"
            verts.append(name)
            edge.append(name)
            values[name] = p
        edges.append(edge)
    s = new_scenario(verts, edges)
    return s, validate_model(s, values)
