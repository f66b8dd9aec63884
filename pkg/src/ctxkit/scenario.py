"""Contextuality scenarios as hypergraphs.

Vertices are measurement outcomes (opaque strings) and every hyperedge is
one complete measurement. Composite scenarios are built with the
Foulis-Randall product; Bell scenarios are folds of that product.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    DuplicateEdge,
    DuplicateVertex,
    DuplicateVertexInEdge,
    EmptyEdge,
    InvalidDimension,
    UncoveredVertex,
    UnknownVertex,
    ValidationError,
)


@dataclass(frozen=True)
class Scenario:
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, ...], ...]

    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def edges_of(self, v: str) -> list[int]:
        return [i for i, e in enumerate(self.edges) if v in e]

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": [list(e) for e in self.edges]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class OrthogonalityGraph:
    vertices: tuple[str, ...]
    adjacency: frozenset[frozenset[str]]

    def adjacent(self, u: str, v: str) -> bool:
        return frozenset((u, v)) in self.adjacency

    def neighbors(self, v: str) -> set[str]:
        return {w for pair in self.adjacency if v in pair for w in pair if w != v}

    def edge_list(self) -> list[tuple[int, int]]:
        """Index pairs (i < j) in vertex order."""
        idx = {v: i for i, v in enumerate(self.vertices)}
        out = []
        for pair in self.adjacency:
            i, j = sorted(idx[v] for v in pair)
            out.append((i, j))
        return sorted(out)

    def complement(self) -> "OrthogonalityGraph":
        pairs = {
            frozenset((u, v))
            for u, v in itertools.combinations(self.vertices, 2)
            if frozenset((u, v)) not in self.adjacency
        }
        return OrthogonalityGraph(self.vertices, frozenset(pairs))

    def induced(self, keep: Iterable[str]) -> "OrthogonalityGraph":
        keep = [v for v in self.vertices if v in set(keep)]
        ks = set(keep)
        return OrthogonalityGraph(
            tuple(keep), frozenset(p for p in self.adjacency if p <= ks)
        )


def new_scenario(vertices: Sequence[str], edges: Iterable[Iterable[str]]) -> Scenario:
    """Validate and freeze a hypergraph, preserving the given order."""
    verts = tuple(str(v) for v in vertices)
    if len(set(verts)) != len(verts):
        dup = next(v for v in verts if verts.count(v) > 1)
        raise DuplicateVertex(f"vertex {dup!r} listed twice")
    known = set(verts)
    out: list[tuple[str, ...]] = []
    seen: set[frozenset[str]] = set()
    for e in edges:
        e = tuple(str(v) for v in e)
        if not e:
            raise EmptyEdge("edges must be non-empty")
        if len(set(e)) != len(e):
            raise DuplicateVertexInEdge(f"edge {list(e)} repeats a vertex")
        missing = [v for v in e if v not in known]
        if missing:
            raise UnknownVertex(f"edge {list(e)} uses undeclared vertices {missing}")
        key = frozenset(e)
        if key in seen:
            raise DuplicateEdge(f"edge {list(e)} appears twice")
        seen.add(key)
        out.append(e)
    covered = set().union(*seen) if seen else set()
    uncovered = [v for v in verts if v not in covered]
    if uncovered:
        raise UncoveredVertex(f"vertices {uncovered} lie in no edge")
    return Scenario(verts, tuple(out))


def from_json(data: dict | str) -> Scenario:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        return new_scenario(data["vertices"], data["edges"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed scenario JSON: {exc}") from exc


def non_orthogonality_graph(s: Scenario) -> OrthogonalityGraph:
    """Vertices are adjacent iff no edge contains both."""
    return exclusivity_graph(s).complement()


def exclusivity_graph(s: Scenario) -> OrthogonalityGraph:
    """Vertices are adjacent iff some edge contains both."""
    pairs = set()
    for e in s.edges:
        for u, v in itertools.combinations(e, 2):
            pairs.add(frozenset((u, v)))
    return OrthogonalityGraph(s.vertices, frozenset(pairs))


def _pair(a: str, b: str) -> str:
    return f"({a},{b})"


def _canonical(vertices: Iterable[str], edges: Iterable[Iterable[str]]) -> Scenario:
    uniq = sorted({tuple(sorted(e)) for e in edges})
    return new_scenario(sorted(set(vertices)), uniq)


def _one_way_edges(a: Scenario, b: Scenario, flip: bool) -> set[tuple[str, ...]]:
    """Edges where the first operand measures and the second picks a measurement per outcome."""
    out = set()
    for ea in a.edges:
        for choice in itertools.product(b.edges, repeat=len(ea)):
            verts = []
            for va, eb in zip(ea, choice):
                for vb in eb:
                    verts.append(_pair(vb, va) if flip else _pair(va, vb))
            out.add(tuple(sorted(verts)))
    return out


def foulis_randall_product(a: Scenario, b: Scenario) -> Scenario:
    """Union of Alice-first and Bob-first edges, deduplicated and sorted."""
    verts = [_pair(u, v) for u in a.vertices for v in b.vertices]
    edges = _one_way_edges(a, b, flip=False) | _one_way_edges(b, a, flip=True)
    return _canonical(verts, edges)


def simultaneous_product(a: Scenario, b: Scenario) -> Scenario:
    """Naive product: only the joint measurements e_A x e_B."""
    verts = [_pair(u, v) for u in a.vertices for v in b.vertices]
    edges = [[_pair(u, v) for u in ea for v in eb] for ea in a.edges for eb in b.edges]
    return _canonical(verts, edges)


def _bell_local(k: int, m: int) -> Scenario:
    verts = [f"({a}|{x})" for x in range(k) for a in range(m)]
    edges = [[f"({a}|{x})" for a in range(m)] for x in range(k)]
    return new_scenario(verts, edges)


def _split_pair(name: str) -> tuple[str, str]:
    """Split a canonical "(a,b)" name at its top-level comma."""
    inner = name[1:-1]
    depth = 0
    for i, ch in enumerate(inner):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return inner[:i], inner[i + 1 :]
    raise ValueError(f"not a product vertex: {name!r}")


def _flatten(name: str, parties: int) -> tuple[list[str], list[str]]:
    if parties == 1:
        a, x = name[1:-1].split("|")
        return [a], [x]
    left, right = _split_pair(name)
    la, lx = _flatten(left, parties - 1)
    ra, rx = _flatten(right, 1)
    return la + ra, lx + rx


def bell_label(outcomes: Sequence[int | str], settings: Sequence[int | str]) -> str:
    """Vertex name "(a,b,...|x,y,...)" used by Bell scenarios."""
    return f"({','.join(map(str, outcomes))}|{','.join(map(str, settings))})"


def bell_scenario(n: int, k: int, m: int, *, simultaneous: bool = False) -> Scenario:
    """B(n,k,m): n parties, k settings each, m outcomes per setting.

    ``simultaneous=True`` composes with the naive product instead of the
    Foulis-Randall product, which leaves signaling models admissible.
    """
    for name, val, low in (("n", n, 1), ("k", k, 1), ("m", m, 2)):
        if not isinstance(val, int) or val < low:
            raise InvalidDimension(f"{name} must be an integer >= {low}, got {val!r}")
    local = _bell_local(k, m)
    if n == 1:
        return local
    compose = simultaneous_product if simultaneous else foulis_randall_product
    acc = local
    for _ in range(n - 1):
        acc = compose(acc, local)
    rename = {}
    for v in acc.vertices:
        outs, sets = _flatten(v, n)
        rename[v] = bell_label(outs, sets)
    return _canonical(rename.values(), [[rename[v] for v in e] for e in acc.edges])


def triangle_scenario() -> Scenario:
    """Three 3-outcome measurements overlapping pairwise in one outcome."""
    return new_scenario(
        ["v1", "v2", "v3", "v4", "v5", "v6"],
        [["v1", "v2", "v3"], ["v3", "v4", "v5"], ["v5", "v6", "v1"]],
    )


def kcbs_scenario() -> Scenario:
    """Pentagon of compatible pairs of yes/no tests.

    Context i measures tests i and i+1 jointly; its outcomes are "yes on
    i" (``y{i}``), "yes on i+1" (``y{i+1}``) and "no on both" (``n{i}{i+1}``).
    """
    verts = [f"y{i}" for i in range(1, 6)] + [f"n{i}{i % 5 + 1}" for i in range(1, 6)]
    edges = [[f"y{i}", f"y{i % 5 + 1}", f"n{i}{i % 5 + 1}"] for i in range(1, 6)]
    return new_scenario(verts, edges)
