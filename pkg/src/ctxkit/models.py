"""Probability models on scenarios and their classification."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import lp
from .errors import (
    EdgeNotNormalized,
    OutOfRange,
    SearchBudgetExceeded,
    StructureMismatch,
    ValidationError,
)
from .scenario import Scenario, from_json, non_orthogonality_graph

EDGE_TOL = 1e-9
DEFAULT_BUDGET = 10**8


@dataclass(frozen=True)
class ProbModel:
    scenario: Scenario
    values: Mapping[str, float]

    def vector(self) -> np.ndarray:
        return np.array([self.values[v] for v in self.scenario.vertices], dtype=float)

    def to_json(self) -> dict:
        return {"scenario": self.scenario.to_json(), "values": dict(self.values)}


@dataclass(frozen=True)
class ClassicalityCertificate:
    classical: bool
    weights: dict[int, float] = field(default_factory=dict)
    witness: dict[str, float] = field(default_factory=dict)
    witness_offset: float = 0.0
    deterministic: tuple[ProbModel, ...] = ()

    @property
    def verdict(self) -> str:
        return "classical" if self.classical else "non-classical"

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict}
        if self.classical:
            out["weights"] = {str(k): w for k, w in self.weights.items()}
        else:
            out["witness"] = dict(self.witness)
            out["witness_offset"] = self.witness_offset
        return out


def validate_model(s: Scenario, values: Mapping[str, float], *, tol: float = EDGE_TOL) -> ProbModel:
    vals = {}
    for v in s.vertices:
        if v not in values:
            raise ValidationError(f"no value for vertex {v!r}")
        p = float(values[v])
        if not (0.0 <= p <= 1.0) or p != p:
            raise OutOfRange(f"p({v}) = {p!r} outside [0, 1]")
        vals[v] = p
    extra = set(values) - set(s.vertices)
    if extra:
        raise ValidationError(f"values given for unknown vertices {sorted(extra)}")
    for e in s.edges:
        total = sum(vals[v] for v in e)
        if abs(total - 1.0) > tol:
            raise EdgeNotNormalized(e, total)
    return ProbModel(s, vals)


def model_from_json(data: dict | str) -> ProbModel:
    if isinstance(data, str):
        data = json.loads(data)
    return validate_model(from_json(data["scenario"]), data["values"])


def enumerate_deterministic(s: Scenario, *, budget: int = DEFAULT_BUDGET) -> list[ProbModel]:
    """All 0/1 models with exactly one 1 per edge, in lexicographic order."""
    n = len(s.vertices)
    idx = s.index()
    member = [[] for _ in range(n)]
    for j, e in enumerate(s.edges):
        for v in e:
            member[idx[v]].append(j)
    # last vertex position of each edge, to close edges early
    last = [max(idx[v] for v in e) for e in s.edges]
    closes = [[] for _ in range(n)]
    for j, pos in enumerate(last):
        closes[pos].append(j)
    ones = [0] * len(s.edges)
    assign = [0] * n
    out: list[ProbModel] = []
    nodes = 0

    def rec(i: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceeded(budget, "deterministic enumeration")
        if i == n:
            out.append(ProbModel(s, {v: float(a) for v, a in zip(s.vertices, assign)}))
            return
        for bit in (0, 1):
            if bit and any(ones[j] for j in member[i]):
                continue
            assign[i] = bit
            if bit:
                for j in member[i]:
                    ones[j] += 1
            if all(ones[j] == 1 for j in closes[i]):
                rec(i + 1)
            if bit:
                for j in member[i]:
                    ones[j] -= 1
        assign[i] = 0

    rec(0)
    return out


def ks_colorable(s: Scenario, *, budget: int = DEFAULT_BUDGET) -> dict[str, int] | None:
    """First deterministic model, or None when the scenario is a KS proof."""
    n = len(s.vertices)
    idx = s.index()
    member = [[] for _ in range(n)]
    for j, e in enumerate(s.edges):
        for v in e:
            member[idx[v]].append(j)
    last = [max(idx[v] for v in e) for e in s.edges]
    closes = [[] for _ in range(n)]
    for j, pos in enumerate(last):
        closes[pos].append(j)
    ones = [0] * len(s.edges)
    assign = [0] * n
    nodes = 0

    def rec(i: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceeded(budget, "colouring search")
        if i == n:
            return True
        for bit in (0, 1):
            if bit and any(ones[j] for j in member[i]):
                continue
            assign[i] = bit
            if bit:
                for j in member[i]:
                    ones[j] += 1
            ok = all(ones[j] == 1 for j in closes[i]) and rec(i + 1)
            if bit:
                for j in member[i]:
                    ones[j] -= 1
            if ok:
                return True
        assign[i] = 0
        return False

    if rec(0):
        return dict(zip(s.vertices, assign))
    return None


def is_classical(s: Scenario, p: ProbModel, *, budget: int = DEFAULT_BUDGET) -> ClassicalityCertificate:
    """LP over convex combinations of deterministic models."""
    dets = enumerate_deterministic(s, budget=budget)
    target = p.vector()
    if not dets:
        # No deterministic model: the constant row 0 = 1 separates.
        return ClassicalityCertificate(False, witness={v: 0.0 for v in s.vertices}, witness_offset=1.0)
    D = np.array([d.vector() for d in dets]).T  # vertices x models
    A = np.vstack([D, np.ones(len(dets))])
    b = np.concatenate([target, [1.0]])
    res = lp.feasible_point(A, b)
    if res.feasible:
        weights = {i: float(w) for i, w in enumerate(res.x) if w > 1e-12}
        return ClassicalityCertificate(True, weights=weights, deterministic=tuple(dets))
    y = res.farkas
    witness = {v: float(c) for v, c in zip(s.vertices, y[:-1])}
    return ClassicalityCertificate(
        False, witness=witness, witness_offset=float(y[-1]), deterministic=tuple(dets)
    )


_BELL = re.compile(r"^\(([^|()]*)\|([^|()]*)\)$")


def bell_parties(s: Scenario) -> dict[str, tuple[tuple[str, ...], tuple[str, ...]]]:
    """Parse "(a,b|x,y)" vertex names into outcome and setting tuples."""
    out = {}
    width = None
    for v in s.vertices:
        m = _BELL.match(v)
        if not m:
            raise StructureMismatch(f"vertex {v!r} does not follow the (a,b|x,y) convention")
        outs = tuple(m.group(1).split(","))
        sets = tuple(m.group(2).split(","))
        if len(outs) != len(sets) or (width is not None and len(outs) != width):
            raise StructureMismatch(f"vertex {v!r} has an inconsistent party count")
        width = len(outs)
        out[v] = (outs, sets)
    return out


def bell_values(s: Scenario, compact: Mapping[str, float]) -> dict[str, float]:
    """Expand compact labels such as "(11|00)" into a full value map (missing = 0)."""
    parties = bell_parties(s)
    by_key = {(o, x): v for v, (o, x) in parties.items()}
    vals = {v: 0.0 for v in s.vertices}
    for label, p in compact.items():
        m = _BELL.match(label)
        if not m:
            raise StructureMismatch(f"bad compact label {label!r}")
        o, x = m.group(1), m.group(2)
        key = (tuple(o.split(",")) if "," in o else tuple(o), tuple(x.split(",")) if "," in x else tuple(x))
        if key not in by_key:
            raise StructureMismatch(f"label {label!r} names no vertex")
        vals[by_key[key]] = float(p)
    return vals


@dataclass(frozen=True)
class SignalingWitness:
    party: int
    outcome: str
    setting: str
    others_a: tuple[str, ...]
    others_b: tuple[str, ...]
    p_a: float
    p_b: float


def is_no_signaling(
    s: Scenario,
    p: ProbModel | Mapping[str, float],
    parties: Mapping[str, tuple[tuple[str, ...], tuple[str, ...]]] | None = None,
    *,
    tol: float = EDGE_TOL,
) -> tuple[bool, SignalingWitness | None]:
    """Check that each party's marginals ignore the other parties' settings."""
    values = p.values if isinstance(p, ProbModel) else p
    parties = bell_parties(s) if parties is None else parties
    if set(parties) != set(s.vertices):
        raise StructureMismatch("party structure does not cover the vertex set exactly")
    n = len(next(iter(parties.values()))[0])
    outcomes = [sorted({o[i] for o, _ in parties.values()}) for i in range(n)]
    settings = [sorted({x[i] for _, x in parties.values()}) for i in range(n)]
    expected = int(np.prod([len(o) * len(x) for o, x in zip(outcomes, settings)]))
    keys = {(o, x) for o, x in parties.values()}
    if len(keys) != len(parties) or len(keys) != expected:
        raise StructureMismatch("vertex set is not a full product of outcomes and settings")
    table = {parties[v]: float(values[v]) for v in s.vertices}
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for x in settings[i]:
            for a in outcomes[i]:
                ref = None
                for ys in itertools.product(*(settings[j] for j in others)):
                    total = 0.0
                    for bs in itertools.product(*(outcomes[j] for j in others)):
                        o = list(bs)
                        o.insert(i, a)
                        st = list(ys)
                        st.insert(i, x)
                        total += table[(tuple(o), tuple(st))]
                    if ref is None:
                        ref = (ys, total)
                    elif abs(total - ref[1]) > tol:
                        return False, SignalingWitness(i, a, x, ref[0], ys, ref[1], total)
    return True, None


def satisfies_consistent_exclusivity(
    s: Scenario, p: ProbModel, *, tol: float = EDGE_TOL, budget: int = DEFAULT_BUDGET
) -> tuple[bool, tuple[str, ...], float]:
    """Max total probability over pairwise-exclusive sets (independent sets of NO(H))."""
    from .graph_invariants import WeightedGraph, independence_number

    g = non_orthogonality_graph(s)
    wg = WeightedGraph(len(g.vertices), tuple(g.edge_list()), tuple(p.values[v] for v in g.vertices))
    value, witness = independence_number(wg, budget=budget)
    worst = tuple(g.vertices[i] for i in witness)
    return value <= 1.0 + tol, worst, value
