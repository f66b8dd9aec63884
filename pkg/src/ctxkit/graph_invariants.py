"""Weighted independence number and Lovasz theta of exclusivity graphs."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import sdp
from .errors import InvalidGraph, SearchBudgetExceeded
from .models import DEFAULT_BUDGET

THETA_TOL = 1e-5


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.n < 0:
            raise InvalidGraph("vertex count must be non-negative")
        if len(self.weights) != self.n:
            raise InvalidGraph(f"expected {self.n} weights, got {len(self.weights)}")
        for w in self.weights:
            if not (w >= 0.0) or math.isinf(w):
                raise InvalidGraph(f"weight {w!r} is not a finite non-negative number")
        norm = set()
        for e in self.edges:
            i, j = (int(x) for x in e)
            if i == j:
                raise InvalidGraph(f"self-loop on vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidGraph(f"edge {e} out of range")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    def adjacency(self) -> list[int]:
        """Neighbourhood bitmasks."""
        adj = [0] * self.n
        for i, j in self.edges:
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return adj

    def delete(self, v: int) -> "WeightedGraph":
        keep = [i for i in range(self.n) if i != v]
        pos = {old: new for new, old in enumerate(keep)}
        edges = tuple((pos[i], pos[j]) for i, j in self.edges if v not in (i, j))
        return WeightedGraph(self.n - 1, edges, tuple(self.weights[i] for i in keep))

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges], "weights": list(self.weights)}


def graph_from_json(data: dict | str) -> WeightedGraph:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        n = int(data["n"])
        edges = tuple(tuple(e) for e in data.get("edges", []))
        weights = tuple(data.get("weights", [1.0] * n))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidGraph(f"malformed graph JSON: {exc}") from exc
    return WeightedGraph(n, edges, weights)


def unit_graph(n: int, edges) -> WeightedGraph:
    return WeightedGraph(n, tuple(edges), (1.0,) * n)


def cycle(n: int) -> WeightedGraph:
    return unit_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> WeightedGraph:
    return unit_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def independence_number(g: WeightedGraph, *, budget: int = DEFAULT_BUDGET) -> tuple[float, tuple[int, ...]]:
    """Exact maximum-weight independent set by branch and bound.

    The bound greedily covers the candidate set with cliques; an
    independent set takes at most one vertex (the heaviest) per clique.
    """
    n = g.n
    if n == 0:
        return 0.0, ()
    adj = g.adjacency()
    w = g.weights
    order = sorted(range(n), key=lambda i: -w[i])
    best_val = 0.0
    best_set = 0
    nodes = 0

    def bound(cand: int) -> float:
        total = 0.0
        rest = cand
        while rest:
            # grow a clique greedily in weight order
            clique_top = 0.0
            allowed = rest
            for i in order:
                if allowed >> i & 1:
                    if clique_top == 0.0:
                        clique_top = w[i]
                    rest &= ~(1 << i)
                    allowed &= adj[i]
            total += clique_top
        return total

    def rec(cand: int, cur_val: float, cur_set: int) -> None:
        nonlocal best_val, best_set, nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceeded(budget, "independent-set search")
        if cand == 0:
            if cur_val > best_val:
                best_val, best_set = cur_val, cur_set
            return
        if cur_val + bound(cand) <= best_val + 1e-12:
            return
        v = next(i for i in order if cand >> i & 1)
        rec(cand & ~adj[v] & ~(1 << v), cur_val + w[v], cur_set | (1 << v))
        rec(cand & ~(1 << v), cur_val, cur_set)

    rec((1 << n) - 1, 0.0, 0)
    members = tuple(i for i in range(n) if best_set >> i & 1)
    return best_val, members


def lovasz_theta(g: WeightedGraph, *, tol: float = 1e-9) -> float:
    """theta(G, w) = max sum_ij sqrt(w_i w_j) X_ij over X PSD, tr X = 1, X_ij = 0 on edges."""
    support = [i for i in range(g.n) if g.weights[i] > 0.0]
    if not support:
        return 0.0
    pos = {v: k for k, v in enumerate(support)}
    m = len(support)
    sw = np.sqrt(np.array([g.weights[i] for i in support]))
    C = np.outer(sw, sw)
    As = [np.eye(m)]
    b = [1.0]
    for i, j in g.edges:
        if i in pos and j in pos:
            E = np.zeros((m, m))
            E[pos[i], pos[j]] = E[pos[j], pos[i]] = 1.0
            As.append(E)
            b.append(0.0)
    if len(As) == 1:
        return float(sw @ sw)  # edgeless support: X = sw sw^T / |sw|^2
    return sdp.solve(C, As, b, tol=tol).value


@dataclass(frozen=True)
class CSWReport:
    alpha: float
    theta: float
    witness: tuple[int, ...]

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "theta": self.theta, "witness": list(self.witness)}


def csw_report(g: WeightedGraph) -> CSWReport:
    alpha, witness = independence_number(g)
    theta = lovasz_theta(g)
    assert alpha <= theta + THETA_TOL, (alpha, theta)
    return CSWReport(alpha, theta, witness)


def chsh_graph() -> WeightedGraph:
    """Exclusivity graph of the 16 events (ab|xy) with weights [a xor b == x and y]."""
    from .models import bell_parties
    from .scenario import bell_scenario, exclusivity_graph

    s = bell_scenario(2, 2, 2)
    g = exclusivity_graph(s)
    parties = bell_parties(s)
    weights = []
    for v in g.vertices:
        (a, b), (x, y) = parties[v]
        weights.append(1.0 if (int(a) ^ int(b)) == (int(x) & int(y)) else 0.0)
    return WeightedGraph(len(g.vertices), tuple(g.edge_list()), tuple(weights))
