"""Ontological models: finite hidden-variable accounts of prepare-and-measure data."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import lp
from .errors import NotUnitVector, SearchBudgetExceeded, UnknownName, ValidationError
from .models import DEFAULT_BUDGET
from .quantum_kernel import Ket, PVM, born_probability, cabello18, Cabello18
from .scenario import Scenario

NORM_TOL = 1e-9


# generic finite model -----------------------------------------------------


@dataclass(frozen=True)
class OntologicalModel:
    """Finite ontic space; epistemic states mu_P and response functions xi_{M,k}.

    ``preparations[P][lam]`` is mu_P(lam) and ``measurements[M][k][lam]``
    is xi_{M,k}(lam). Entries may be floats or Fractions.
    """

    ontic: tuple
    preparations: Mapping[str, Mapping]
    measurements: Mapping[str, Mapping[str, Mapping]]

    def __post_init__(self) -> None:
        for name, mu in self.preparations.items():
            if any(lam not in self.ontic for lam in mu):
                raise ValidationError(f"preparation {name!r} uses unknown ontic states")
            if any(v < 0 for v in mu.values()) or abs(float(sum(mu.values())) - 1.0) > NORM_TOL:
                raise ValidationError(f"preparation {name!r} is not a probability distribution")
        for name, resp in self.measurements.items():
            for lam in self.ontic:
                total = sum(xi.get(lam, 0) for xi in resp.values())
                if abs(float(total) - 1.0) > NORM_TOL:
                    raise ValidationError(f"responses of {name!r} at {lam!r} sum to {total}")


def predict(m: OntologicalModel, preparation: str, measurement: str) -> dict:
    """p(k | P, M) = sum over lam of mu_P(lam) xi_{M,k}(lam)."""
    if preparation not in m.preparations:
        raise UnknownName(f"unknown preparation {preparation!r}")
    if measurement not in m.measurements:
        raise UnknownName(f"unknown measurement {measurement!r}")
    mu = m.preparations[preparation]
    return {k: sum(mu[lam] * xi.get(lam, 0) for lam in mu) for k, xi in m.measurements[measurement].items()}


def beltrametti_bugajski(states: Mapping[str, Ket], measurements: Mapping[str, PVM]) -> OntologicalModel:
    """Ontic state = the prepared pure state; responses are Born probabilities."""
    ontic = tuple(states)
    preps = {name: {name: 1.0} for name in states}
    meas = {
        mname: {lab: {lam: born_probability(states[lam], E) for lam in ontic} for lab, E in zip(m.labels, m.effects)}
        for mname, m in measurements.items()
    }
    return OntologicalModel(ontic, preps, meas)


# toy model ----------------------------------------------------------------

# Ontic state (column, row); column "+" is the second column, row "+" the first row.
TOY_ONTIC: tuple[tuple[str, str], ...] = (("+", "+"), ("+", "-"), ("-", "+"), ("-", "-"))

TOY_MAXIMAL: dict[str, frozenset] = {
    "+x": frozenset({("+", "+"), ("+", "-")}),
    "-x": frozenset({("-", "+"), ("-", "-")}),
    "+y": frozenset({("+", "+"), ("-", "-")}),
    "-y": frozenset({("+", "-"), ("-", "+")}),
    "+z": frozenset({("+", "+"), ("-", "+")}),
    "-z": frozenset({("+", "-"), ("-", "-")}),
}

TOY_MEASUREMENTS: dict[str, dict[int, str]] = {
    "X": {1: "+x", -1: "-x"},
    "Y": {1: "+y", -1: "-y"},
    "Z": {1: "+z", -1: "-z"},
}


@dataclass(frozen=True)
class ToyState:
    support: frozenset

    def __post_init__(self) -> None:
        sup = frozenset(self.support)
        if not sup <= set(TOY_ONTIC):
            raise ValidationError(f"support {sorted(sup)} leaves the ontic space")
        if len(sup) not in (2, 4):
            raise ValidationError(f"support size {len(sup)} breaks knowledge balance")
        object.__setattr__(self, "support", sup)

    @property
    def name(self) -> str:
        for n, s in TOY_MAXIMAL.items():
            if s == self.support:
                return n
        return "mixed" if len(self.support) == 4 else "other"


def toy_state(name: str) -> ToyState:
    if name == "mixed":
        return ToyState(frozenset(TOY_ONTIC))
    if name not in TOY_MAXIMAL:
        raise UnknownName(f"unknown toy state {name!r}")
    return ToyState(TOY_MAXIMAL[name])


def toy_distribution(state: ToyState, meas: str) -> dict[int, Fraction]:
    if meas not in TOY_MEASUREMENTS:
        raise UnknownName(f"unknown toy measurement {meas!r}")
    n = len(state.support)
    return {k: Fraction(len(state.support & TOY_MAXIMAL[cell]), n) for k, cell in TOY_MEASUREMENTS[meas].items()}


def toy_update(state: ToyState, meas: str, outcome: int) -> ToyState:
    """Post-measurement state: the measured cell, the ontic state randomised within it."""
    cell = TOY_MAXIMAL[TOY_MEASUREMENTS[meas][outcome]]
    if not state.support & cell:
        raise ValidationError(f"outcome {outcome} of {meas} is impossible from {state.name}")
    return ToyState(cell)


def toy_measure(state: ToyState, meas: str, rng: random.Random | int) -> tuple[int, ToyState]:
    """Draw the ontic state uniformly from the support and report its cell."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    if meas not in TOY_MEASUREMENTS:
        raise UnknownName(f"unknown toy measurement {meas!r}")
    lam = rng.choice(sorted(state.support))
    for k, cell in TOY_MEASUREMENTS[meas].items():
        if lam in TOY_MAXIMAL[cell]:
            return k, toy_update(state, meas, k)
    raise AssertionError("measurement cells cover the ontic space")


def toy_update_table() -> dict[tuple[str, str], dict[int, tuple[Fraction, str]]]:
    """For every state and measurement: outcome -> (probability, post-measurement state)."""
    out = {}
    for name in list(TOY_MAXIMAL) + ["mixed"]:
        s = toy_state(name)
        for meas in TOY_MEASUREMENTS:
            dist = toy_distribution(s, meas)
            out[(name, meas)] = {k: (p, toy_update(s, meas, k).name if p else "") for k, p in dist.items()}
    return out


def toy_model() -> OntologicalModel:
    preps = {
        name: {lam: Fraction(1, len(sup)) for lam in sup}
        for name, sup in list(TOY_MAXIMAL.items()) + [("mixed", frozenset(TOY_ONTIC))]
    }
    meas = {
        m: {k: {lam: int(lam in TOY_MAXIMAL[cell]) for lam in TOY_ONTIC} for k, cell in cells.items()}
        for m, cells in TOY_MEASUREMENTS.items()
    }
    return OntologicalModel(TOY_ONTIC, preps, meas)


@dataclass(frozen=True)
class ToyCheshireReport:
    right_path: Fraction
    right_spin_plus: Fraction
    right_spin_minus: Fraction
    outcomes: dict[str, dict[str, tuple[Fraction, Fraction]]]
    post_direct: Fraction
    post_total: dict[str, Fraction]


def toy_cheshire() -> ToyCheshireReport:
    """Two toy bits: A carries the path, B the polarisation.

    Encoding: |0> is -x and |1> is +x on each bit, so L = -x_A, R = +x_A,
    H = -x_B, V = +x_B; the circular polarisations are +-z on B. The
    pre-selection is +z_A with -x_B; the post-selection is the correlated
    state whose support pairs equal ontic states. P(post | S) is the
    fraction of the joint support S lying in the post-selected support.
    """
    post = frozenset((lam, lam) for lam in TOY_ONTIC)
    pre_a, pre_b = TOY_MAXIMAL["+z"], TOY_MAXIMAL["-x"]

    def p_post(sa, sb) -> Fraction:
        joint = {(a, b) for a in sa for b in sb}
        return Fraction(len(joint & post), len(joint))

    def run(meas_a: str, meas_b: str | None) -> dict[str, tuple[Fraction, Fraction]]:
        res = {}
        sa, sb = ToyState(pre_a), ToyState(pre_b)
        for ka, pa in toy_distribution(sa, meas_a).items():
            if not pa:
                continue
            na = toy_update(sa, meas_a, ka).support
            path = "R" if ka == 1 else "L"
            if meas_b is None:
                res[path] = (pa, p_post(na, sb.support))
                continue
            for kb, pb in toy_distribution(sb, meas_b).items():
                if pb:
                    nb = toy_update(sb, meas_b, kb).support
                    res[path + ("+" if kb == 1 else "-")] = (pa * pb, p_post(na, nb))
        return res

    outcomes = {"path": run("X", None), "path_polarization": run("X", "Z")}
    totals = {k: sum(p * q for p, q in v.values()) for k, v in outcomes.items()}
    return ToyCheshireReport(
        right_path=outcomes["path"]["R"][1],
        right_spin_plus=outcomes["path_polarization"]["R+"][1],
        right_spin_minus=outcomes["path_polarization"]["R-"][1],
        outcomes=outcomes,
        post_direct=p_post(pre_a, pre_b),
        post_total=totals,
    )


# Kochen-Specker qubit model -----------------------------------------------


def _unit(v, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > NORM_TOL:
        raise NotUnitVector(f"{name} must be a unit 3-vector, got {a.tolist()}")
    return a


def ks_qubit_predict(psi, phi, resolution: int = 256) -> float:
    """Integral of (1/pi) H(psi.lam) psi.lam H(phi.lam) over the unit sphere.

    With psi on the pole, the polar direction u = cos(theta) runs over
    [0, 1] on Gauss-Legendre nodes; at each u the azimuthal arc where
    phi.lam > 0 has closed-form length.
    """
    if resolution < 64:
        raise ValidationError("quadrature resolution must be at least 64")
    p, f = _unit(psi, "psi"), _unit(phi, "phi")
    fz = float(p @ f)
    fperp = math.sqrt(max(0.0, 1.0 - fz * fz))
    nodes, weights = np.polynomial.legendre.leggauss(resolution)
    u = (nodes + 1.0) / 2.0
    w = weights / 2.0
    s = np.sqrt(1.0 - u * u)
    if fperp < 1e-15:
        arc = np.where(fz * u > 0, 2 * math.pi, 0.0)
    else:
        arc = 2.0 * np.arccos(np.clip(-fz * u / (fperp * s), -1.0, 1.0))
    return float(np.sum(w * u * arc) / math.pi)


def ks_qubit_closed_form(psi, phi) -> float:
    return (1.0 + float(_unit(psi, "psi") @ _unit(phi, "phi"))) / 2.0


# preparation contextuality -----------------------------------------------

PREP_STATES = ("a", "A", "b", "B", "c", "C")


@dataclass(frozen=True)
class PrepContextualityResult:
    feasible: bool
    patterns: tuple[tuple[str, str, str], ...]
    max_mixed_mass: float
    farkas: np.ndarray | None
    certificate_valid: bool
    A: np.ndarray = field(repr=False, default=None)
    b: np.ndarray = field(repr=False, default=None)


def _prep_system(*, thirds: bool = True, disjoint: bool = True, normalise: bool = True):
    symbols = [("a", "A", "-"), ("b", "B", "-"), ("c", "C", "-")]
    if not disjoint:
        symbols = [s + ("both",) for s in symbols]
    patterns = list(itertools.product(*symbols))

    def member(s: str, pat) -> bool:
        slot = "abc".index(s.lower())
        return pat[slot] == s or pat[slot] == "both"

    cols: list[tuple[str, int]] = []
    for s in PREP_STATES:
        cols += [(s, j) for j, pat in enumerate(patterns) if member(s, pat)]
    cols += [("m", j) for j in range(len(patterns))]
    index = {c: i for i, c in enumerate(cols)}
    rows, rhs = [], []

    def row(terms: Mapping[tuple[str, int], Fraction], value: float) -> None:
        r = np.zeros(len(cols))
        for key, coef in terms.items():
            if key in index:
                r[index[key]] += float(coef)
        rows.append(r)
        rhs.append(value)

    if normalise:
        for s in PREP_STATES:
            row({(s, j): 1 for j in range(len(patterns))}, 1.0)
    mixtures = [("a", "A"), ("b", "B"), ("c", "C")]
    if thirds:
        mixtures += [("a", "b", "c"), ("A", "B", "C")]
    for j in range(len(patterns)):
        for mix in mixtures:
            terms = {("m", j): Fraction(-1)}
            for s in mix:
                terms[(s, j)] = Fraction(1, len(mix))
            row(terms, 0.0)
    return patterns, cols, np.array(rows), np.array(rhs)


def prep_contextuality_infeasible(*, thirds: bool = True, disjoint: bool = True) -> PrepContextualityResult:
    """Preparation noncontextuality for six qubit states on the 27 support patterns.

    Each ontic state is summarised by which of a/A, b/B, c/C have it in
    their support (or neither). Every pure state's distribution must
    normalise, and the maximally mixed state's distribution m must equal
    each half- and third-mixture. ``thirds=False`` and ``disjoint=False``
    give the two relaxations.
    """
    patterns, cols, A, b = _prep_system(thirds=thirds, disjoint=disjoint)
    res = lp.feasible_point(A, b)
    certificate_ok = False
    if not res.feasible:
        certificate_ok = lp.check_farkas(A, b, res.farkas)
    # Largest total mass the mixed state can carry without normalising the pure states.
    _, cols2, A2, b2 = _prep_system(thirds=thirds, disjoint=disjoint, normalise=False)
    m_cols = [i for i, c in enumerate(cols2) if c[0] == "m"]
    cap = np.zeros(len(cols2) + 1)
    cap[m_cols] = 1.0
    cap[-1] = 1.0  # slack
    A3 = np.vstack([np.hstack([A2, np.zeros((A2.shape[0], 1))]), cap])
    b3 = np.concatenate([b2, [1.0]])
    c3 = np.zeros(len(cols2) + 1)
    c3[m_cols] = 1.0
    best = lp.solve(c3, A3, b3, maximize=True)
    return PrepContextualityResult(
        res.feasible, tuple(tuple(p) for p in patterns), float(best.value), res.farkas, certificate_ok, A, b
    )


# Kunjwal-Spekkens bound ---------------------------------------------------


def _edge_sets(s: Scenario) -> list[list[int]]:
    idx = s.index()
    return [[idx[v] for v in e] for e in s.edges]


def _context_graph(edges: list[list[int]]) -> list[set[int]]:
    adj = [set() for _ in edges]
    for i, j in itertools.combinations(range(len(edges)), 2):
        if set(edges[i]) & set(edges[j]):
            adj[i].add(j)
            adj[j].add(i)
    return adj


def hypergraph_automorphisms(s: Scenario, *, limit: int = 5000) -> list[tuple[int, ...]]:
    """Vertex permutations that map edges to edges.

    Edges are permuted so that sizes and pairwise intersection sizes are
    kept; vertices follow their set of edges, and vertices with the same
    edge set keep their relative order. At most ``limit`` permutations are
    returned; any subset of automorphisms is safe for orbit pruning.
    """
    edges = [set(e) for e in _edge_sets(s)]
    n, m = len(s.vertices), len(edges)
    classes: dict[frozenset, list[int]] = {}
    for v in range(n):
        classes.setdefault(frozenset(i for i, e in enumerate(edges) if v in e), []).append(v)
    meet = [[len(a & b) for b in edges] for a in edges]
    perms: list[tuple[int, ...]] = []
    image = [-1] * m

    def vertex_map() -> tuple[int, ...] | None:
        out = [-1] * n
        for key, members in classes.items():
            target = classes.get(frozenset(image[k] for k in key), [])
            if len(target) != len(members):
                return None
            for v, w in zip(members, target):
                out[v] = w
        return tuple(out)

    def rec(i: int, used: set[int]) -> None:
        if len(perms) >= limit:
            return
        if i == m:
            p = vertex_map()
            if p is not None:
                perms.append(p)
            return
        for t in range(m):
            if t not in used and meet[t][t] == meet[i][i] and all(meet[image[j]][t] == meet[j][i] for j in range(i)):
                image[i] = t
                used.add(t)
                rec(i + 1, used)
                used.discard(t)
        image[i] = -1

    rec(0, set())
    return perms


def _selection_region(edges: list[list[int]], n: int) -> lp.FeasibleRegion:
    """Assignments x >= 0 normalised on every edge; x <= 1 follows."""
    A = np.zeros((len(edges), n))
    for r, e in enumerate(edges):
        A[r, e] = 1.0
    return lp.FeasibleRegion.from_system(A, np.ones(len(edges)))


@dataclass(frozen=True)
class KSBound:
    nc_bound: float
    quantum_value: float
    example_assignment_value: Fraction
    example_assignment: dict[str, Fraction]
    lp_count: int
    selections: int
    maximiser: tuple[int, ...]


def ks_bound_value(s: Scenario, *, prune: bool = True, budget: int = DEFAULT_BUDGET) -> tuple[float, int, tuple[int, ...]]:
    """max over assignments x of the mean over edges of max_{v in e} x_v.

    Every selection of one vertex per edge gives an LP; selections with
    the same vertex multiplicities give the same LP, and with ``prune``
    multiplicity vectors related by a hypergraph automorphism are solved
    once.
    """
    edges = _edge_sets(s)
    n = len(s.vertices)
    total = math.prod(len(e) for e in edges)
    if total > budget:
        raise SearchBudgetExceeded(budget, "vertex selections")
    picks = np.indices([len(e) for e in edges]).reshape(len(edges), -1)
    counts = np.zeros((total, n), dtype=np.int64)
    rows = np.arange(total)
    for i, e in enumerate(edges):
        np.add.at(counts, (rows, np.asarray(e)[picks[i]]), 1)
    perms = np.array(hypergraph_automorphisms(s)) if prune else np.arange(n)[None, :]
    base = int(counts.max()) + 1
    if n * math.log2(base) < 52:
        # A positional code is exact in float64 here and orders rows lexicographically,
        # so the orbit representative is the permutation with the smallest code.
        weights = float(base) ** np.arange(n - 1, -1, -1)
        _, first = np.unique(counts @ weights, return_index=True)
        counts = counts[np.sort(first)]
        W = np.zeros((n, len(perms)))
        for k, p in enumerate(perms):
            W[p, k] = weights
        codes = counts @ W
        counts = np.take_along_axis(counts, perms[np.argmin(codes, axis=1)], axis=1)
        _, first = np.unique(codes.min(axis=1), return_index=True)
        counts = counts[np.sort(first)]
    else:
        reps = {min(tuple(row[p]) for p in perms) for row in map(np.asarray, counts)}
        counts = np.array(sorted(reps))
    if len(counts) > budget:
        raise SearchBudgetExceeded(budget, "selection LPs")
    region = _selection_region(edges, n)
    best, arg = -1.0, ()
    for row in counts:
        val = float(region.optimize(row, maximize=True).value) / len(edges)
        if val > best + 1e-12:
            best, arg = val, tuple(int(x) for x in row)
    lps = len(counts)
    return best, lps, arg


def ks_example_assignment(s: Scenario) -> dict[str, Fraction]:
    """A triangle of mutually overlapping edges with 1/2 on their shared
    vertices, and a perfect matching of the other edges with 1 on each
    matched pair's shared vertex; every other vertex gets 0."""
    edges = _edge_sets(s)
    adj = _context_graph(edges)
    shared = {}
    for i, j in itertools.combinations(range(len(edges)), 2):
        common = set(edges[i]) & set(edges[j])
        if common:
            shared[(i, j)] = common.pop()
    for tri in itertools.combinations(range(len(edges)), 3):
        if not all(b in adj[a] for a, b in itertools.combinations(tri, 2)):
            continue
        rest = [i for i in range(len(edges)) if i not in tri]
        match = _perfect_matching(rest, adj)
        if match is None:
            continue
        x = {v: Fraction(0) for v in range(len(s.vertices))}
        for a, b in itertools.combinations(tri, 2):
            x[shared[(a, b)]] = Fraction(1, 2)
        for a, b in match:
            x[shared[(min(a, b), max(a, b))]] = Fraction(1)
        return {s.vertices[v]: val for v, val in x.items()}
    raise ValidationError("no triangle-plus-matching assignment exists on this hypergraph")


def _perfect_matching(nodes: list[int], adj: list[set[int]]) -> list[tuple[int, int]] | None:
    if not nodes:
        return []
    first, rest = nodes[0], nodes[1:]
    for k, other in enumerate(rest):
        if other in adj[first]:
            sub = _perfect_matching(rest[:k] + rest[k + 1 :], adj)
            if sub is not None:
                return [(first, other)] + sub
    return None


def predictability_average(s: Scenario, x: Mapping[str, Fraction | float]) -> Fraction | float:
    """(1/|E|) sum over edges of the largest value on the edge."""
    for e in s.edges:
        if sum(x[v] for v in e) != 1:
            raise ValidationError(f"assignment does not normalise on edge {list(e)}")
    return sum(max(x[v] for v in e) for e in s.edges) / len(s.edges)


def ks_quantum_value(c: Cabello18) -> float:
    """Average of p(k | M_i, P_{i,k}) with P_{i,k} the k-th basis vector itself."""
    total, count = 0.0, 0
    for m in c.pvms:
        for E in m.effects:
            # the preparation is the pure state onto which E projects
            total += born_probability(E, E)
            count += 1
    return total / count


def kunjwal_spekkens_bound(c: Cabello18 | None = None, *, prune: bool = True, budget: int = DEFAULT_BUDGET) -> KSBound:
    c = cabello18() if c is None else c
    s = c.scenario
    degrees = [len(s.edges_of(v)) for v in s.vertices]
    if len(s.vertices) != 18 or len(s.edges) != 9 or any(d != 2 for d in degrees):
        raise ValidationError("expected an 18-vertex, 9-edge hypergraph with every vertex in two edges")
    value, lps, arg = ks_bound_value(s, prune=prune, budget=budget)
    example = ks_example_assignment(s)
    return KSBound(
        nc_bound=value,
        quantum_value=ks_quantum_value(c),
        example_assignment_value=predictability_average(s, example),
        example_assignment=example,
        lp_count=lps,
        selections=math.prod(len(e) for e in s.edges),
        maximiser=arg,
    )
