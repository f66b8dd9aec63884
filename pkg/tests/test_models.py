import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ctxkit import models as md
from ctxkit import scenario as sc
from ctxkit.errors import EdgeNotNormalized, OutOfRange, SearchBudgetExceeded, StructureMismatch
from ctxkit.quantum_kernel import cabello18

from test_scenario import scenarios

scipy_opt = pytest.importorskip("scipy.optimize")

CHSH = sc.bell_scenario(2, 2, 2)


def pr_box_values():
    vals = {}
    for v, ((a, b), (x, y)) in md.bell_parties(CHSH).items():
        vals[v] = 0.5 if (int(a) ^ int(b)) == (int(x) & int(y)) else 0.0
    return vals


# oracles ------------------------------------------------------------------


def brute_deterministic(s):
    out = []
    for bits in itertools.product((0, 1), repeat=len(s.vertices)):
        val = dict(zip(s.vertices, bits))
        if all(sum(val[v] for v in e) == 1 for e in s.edges):
            out.append(val)
    return out


def hull_member(s, values):
    dets = brute_deterministic(s)
    if not dets:
        return False
    D = np.array([[d[v] for d in dets] for v in s.vertices], float)
    A = np.vstack([D, np.ones(len(dets))])
    b = np.array([values[v] for v in s.vertices] + [1.0])
    res = scipy_opt.linprog(np.zeros(len(dets)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


def brute_ce(s, values):
    g = sc.non_orthogonality_graph(s)
    best = 0.0
    for r in range(len(s.vertices) + 1):
        for sub in itertools.combinations(s.vertices, r):
            if all(not g.adjacent(u, v) for u, v in itertools.combinations(sub, 2)):
                best = max(best, sum(values[v] for v in sub))
    return best


# validate_model -----------------------------------------------------------


def test_triangle_half_model_is_valid():
    s = sc.triangle_scenario()
    vals = {"v1": 0.5, "v2": 0.0, "v3": 0.5, "v4": 0.0, "v5": 0.5, "v6": 0.0}
    assert md.validate_model(s, vals).values == vals


def test_all_zero_edge_is_rejected():
    s = sc.new_scenario(["a", "b"], [["a", "b"]])
    with pytest.raises(EdgeNotNormalized):
        md.validate_model(s, {"a": 0.0, "b": 0.0})


def test_uniform_single_measurement():
    s = sc.bell_scenario(1, 1, 5)
    md.validate_model(s, {v: 1 / 5 for v in s.vertices})


def test_out_of_range_value():
    s = sc.new_scenario(["a", "b"], [["a", "b"]])
    with pytest.raises(OutOfRange):
        md.validate_model(s, {"a": 1.5, "b": -0.5})


def test_model_json_round_trip():
    s = sc.triangle_scenario()
    p = md.validate_model(s, {"v1": 1, "v2": 0, "v3": 0, "v4": 1, "v5": 0, "v6": 0})
    q = md.model_from_json(p.to_json())
    assert q.scenario == s and dict(q.values) == dict(p.values)


# deterministic models ---------------------------------------------------


def test_deterministic_counts():
    assert len(md.enumerate_deterministic(sc.bell_scenario(1, 2, 2))) == 4
    assert len(md.enumerate_deterministic(sc.bell_scenario(1, 1, 7))) == 7
    assert md.enumerate_deterministic(cabello18().scenario) == []


def test_deterministic_budget():
    with pytest.raises(SearchBudgetExceeded):
        md.enumerate_deterministic(sc.bell_scenario(2, 2, 2), budget=3)


def test_ks_colorable():
    assert md.ks_colorable(cabello18().scenario) is None
    assert md.ks_colorable(sc.bell_scenario(1, 2, 2)) is not None
    col = md.ks_colorable(sc.triangle_scenario())
    s = sc.triangle_scenario()
    assert all(sum(col[v] for v in e) == 1 for e in s.edges)


@given(scenarios(max_vertices=8))
def test_deterministic_models_match_brute_force(s):
    ours = md.enumerate_deterministic(s)
    assert [tuple(int(m.values[v]) for v in s.vertices) for m in ours] == sorted(
        tuple(d[v] for v in s.vertices) for d in brute_deterministic(s)
    )
    for m in ours:
        assert all(sum(m.values[v] for v in e) == 1 for e in s.edges)
        assert md.validate_model(s, m.values, tol=0.0)


# classicality -------------------------------------------------------------


def test_two_local_boxes_are_classical():
    vals = md.bell_values(CHSH, {"(11|00)": 1, "(11|01)": 1, "(01|10)": 1, "(01|11)": 1})
    p = md.validate_model(CHSH, vals)
    cert = md.is_classical(CHSH, p)
    assert cert.classical and cert.verdict == "classical"
    rebuilt = sum(w * cert.deterministic[i].vector() for i, w in cert.weights.items())
    assert np.abs(rebuilt - p.vector()).max() < 1e-7


def test_pr_box_is_not_classical_and_witness_separates():
    p = md.validate_model(CHSH, pr_box_values())
    cert = md.is_classical(CHSH, p)
    assert not cert.classical
    w = np.array([cert.witness[v] for v in CHSH.vertices])
    for d in cert.deterministic:
        assert w @ d.vector() + cert.witness_offset <= 1e-7
    assert w @ p.vector() + cert.witness_offset > 1e-7
    assert cert.to_json()["verdict"] == "non-classical"


def test_triangle_half_model_is_not_classical():
    s = sc.triangle_scenario()
    vals = {"v1": 0.5, "v2": 0.0, "v3": 0.5, "v4": 0.0, "v5": 0.5, "v6": 0.0}
    assert not md.is_classical(s, md.validate_model(s, vals)).classical
    assert not hull_member(s, vals)


def test_deterministic_model_is_classical_with_one_atom():
    s = sc.triangle_scenario()
    d = md.enumerate_deterministic(s)[1]
    cert = md.is_classical(s, d)
    assert cert.classical and list(cert.weights.values()) == pytest.approx([1.0])


def test_scenario_without_deterministic_models():
    c = cabello18().scenario
    p = md.validate_model(c, {v: 0.25 for v in c.vertices})
    assert not md.is_classical(c, p).classical


@st.composite
def models_on_small_scenarios(draw):
    s = draw(scenarios(max_vertices=7))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    A = np.zeros((len(s.edges), len(s.vertices)))
    for r, e in enumerate(s.edges):
        for v in e:
            A[r, s.vertices.index(v)] = 1
    res = scipy_opt.linprog(rng.normal(size=len(s.vertices)), A_eq=A, b_eq=np.ones(len(s.edges)), bounds=(0, 1), method="highs")
    if res.status != 0:
        return s, None
    return s, {v: float(x) for v, x in zip(s.vertices, res.x)}


@given(models_on_small_scenarios())
def test_classicality_agrees_with_hull_oracle(case):
    s, vals = case
    if vals is None or len(brute_deterministic(s)) > 6:
        return
    p = md.validate_model(s, vals, tol=1e-7)
    assert md.is_classical(s, p).classical == hull_member(s, vals)


@given(models_on_small_scenarios())
def test_consistent_exclusivity_agrees_with_enumeration(case):
    s, vals = case
    if vals is None:
        return
    p = md.validate_model(s, vals, tol=1e-7)
    ok, worst, value = md.satisfies_consistent_exclusivity(s, p)
    assert value == pytest.approx(brute_ce(s, vals), abs=1e-9)
    assert sum(vals[v] for v in worst) == pytest.approx(value)
    if md.is_classical(s, p).classical:
        assert ok


# no-signalling ------------------------------------------------------------


def test_naive_product_model_signals():
    naive = sc.bell_scenario(2, 2, 2, simultaneous=True)
    compact = {"(00|00)": 1, "(10|01)": 1, "(00|10)": 1, "(00|11)": 1}
    p = md.validate_model(naive, md.bell_values(naive, compact))
    ok, w = md.is_no_signaling(naive, p)
    assert not ok
    assert (w.party, w.outcome, w.setting) == (0, "0", "0")
    assert (w.p_a, w.p_b) == (1.0, 0.0)
    with pytest.raises(EdgeNotNormalized):
        md.validate_model(CHSH, md.bell_values(CHSH, compact))


def test_pr_box_is_no_signaling():
    ok, w = md.is_no_signaling(CHSH, md.validate_model(CHSH, pr_box_values()))
    assert ok and w is None


@given(st.lists(st.floats(0, 1), min_size=4, max_size=4))
def test_product_of_local_models_is_no_signaling(ps):
    vals = {}
    for v, ((a, b), (x, y)) in md.bell_parties(CHSH).items():
        pa = ps[int(x)] if a == "0" else 1 - ps[int(x)]
        pb = ps[2 + int(y)] if b == "0" else 1 - ps[2 + int(y)]
        vals[v] = pa * pb
    assert md.is_no_signaling(CHSH, vals)[0]


@given(st.lists(st.floats(0, 1), min_size=16, max_size=16).filter(lambda w: sum(w) > 1e-3))
def test_classical_models_are_no_signaling(weights):
    dets = md.enumerate_deterministic(CHSH)
    w = np.array(weights) / sum(weights)
    vals = {v: float(sum(wi * d.values[v] for wi, d in zip(w, dets))) for v in CHSH.vertices}
    p = md.validate_model(CHSH, vals)
    assert md.is_no_signaling(CHSH, p)[0]
    assert md.satisfies_consistent_exclusivity(CHSH, p)[0]


def test_party_structure_must_fit():
    with pytest.raises(StructureMismatch):
        md.is_no_signaling(sc.triangle_scenario(), {v: 0.0 for v in sc.triangle_scenario().vertices})
    with pytest.raises(StructureMismatch):
        md.bell_values(CHSH, {"(22|00)": 1})


# consistent exclusivity ---------------------------------------------------


def test_kcbs_quantum_model_satisfies_ce():
    s = sc.kcbs_scenario()
    y = 1 / math.sqrt(5)
    vals = {v: (y if v.startswith("y") else 1 - 2 * y) for v in s.vertices}
    p = md.validate_model(s, vals)
    ok, worst, value = md.satisfies_consistent_exclusivity(s, p)
    assert ok and value <= 1 + 1e-9
    assert value == pytest.approx(brute_ce(s, vals))


def test_deterministic_models_satisfy_ce():
    s = sc.triangle_scenario()
    for d in md.enumerate_deterministic(s):
        assert md.satisfies_consistent_exclusivity(s, d)[0]
