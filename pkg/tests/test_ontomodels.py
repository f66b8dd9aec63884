import itertools
import math
import random
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctxkit import ontomodels as om
from ctxkit import quantum_kernel as qk
from ctxkit import scenario as sc
from ctxkit.errors import NotUnitVector, SearchBudgetExceeded, SolverError, UnknownName, ValidationError

from test_scenario import scenarios

# Stabilizer qubit states matching the toy states: the toy theory reproduces
# their statistics and collapse, so they serve as an independent oracle.
QUBIT = {
    "+x": qk.ket(1, 1), "-x": qk.ket(1, -1),
    "+y": qk.ket(1, 1j), "-y": qk.ket(1, -1j),
    "+z": qk.ket(1, 0), "-z": qk.ket(0, 1),
}


def sphere_point(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


# generic models ---------------------------------------------------------------


def test_beltrametti_bugajski_matches_born():
    rng = np.random.default_rng(3)
    states = {f"s{i}": qk.random_ket(3, rng) for i in range(5)}
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    meas = {"M": qk.pvm([np.outer(q[:, i], q[:, i].conj()) for i in range(3)], ["0", "1", "2"])}
    m = om.beltrametti_bugajski(states, meas)
    for name, psi in states.items():
        dist = om.predict(m, name, "M")
        for lab, E in zip(meas["M"].labels, meas["M"].effects):
            assert dist[lab] == pytest.approx(qk.born_probability(psi, E), abs=1e-12)
        assert sum(dist.values()) == pytest.approx(1, abs=1e-12)


def test_single_ontic_state_gives_point_mass():
    m = om.OntologicalModel(("l",), {"P": {"l": 1}}, {"M": {"a": {"l": 1}, "b": {"l": 0}}})
    assert om.predict(m, "P", "M") == {"a": 1, "b": 0}


def test_model_validation():
    with pytest.raises(ValidationError):
        om.OntologicalModel(("l",), {"P": {"l": 0.5}}, {})
    with pytest.raises(ValidationError):
        om.OntologicalModel(("l",), {"P": {"k": 1.0}}, {})
    with pytest.raises(ValidationError):
        om.OntologicalModel(("l",), {}, {"M": {"a": {"l": 0.3}}})
    m = om.toy_model()
    with pytest.raises(UnknownName):
        om.predict(m, "+w", "X")
    with pytest.raises(UnknownName):
        om.predict(m, "+x", "W")


# toy model ----------------------------------------------------------------------


def test_toy_predictions_match_stabilizer_qubit():
    m = om.toy_model()
    for name, psi in QUBIT.items():
        for meas, cells in om.TOY_MEASUREMENTS.items():
            dist = om.predict(m, name, meas)
            assert all(isinstance(p, Fraction) for p in dist.values())
            for k, cell in cells.items():
                assert float(dist[k]) == pytest.approx(qk.born_probability(psi, QUBIT[cell].projector()), abs=1e-12)
    assert om.predict(m, "+y", "X") == {1: Fraction(1, 2), -1: Fraction(1, 2)}


def test_every_prediction_normalises():
    m = om.toy_model()
    for p in m.preparations:
        for meas in m.measurements:
            assert sum(om.predict(m, p, meas).values()) == 1


def test_toy_states():
    assert om.toy_state("+x").name == "+x" and om.toy_state("mixed").name == "mixed"
    assert len({om.toy_state(n).support for n in om.TOY_MAXIMAL}) == 6
    for bad in (frozenset(), frozenset(om.TOY_ONTIC[:1]), frozenset(om.TOY_ONTIC[:3])):
        with pytest.raises(ValidationError):
            om.ToyState(bad)
    with pytest.raises(UnknownName):
        om.toy_state("+w")


def test_toy_update_from_plus_y():
    seen = set()
    for seed in range(50):
        k, post = om.toy_measure(om.toy_state("+y"), "X", seed)
        seen.add(k)
        assert post.name == ("+x" if k == 1 else "-x")
    assert seen == {1, -1}


def test_toy_update_table_matches_qubit_collapse():
    table = om.toy_update_table()
    assert len(table) == 7 * 3
    assert table[("+y", "X")][1] == (Fraction(1, 2), "+x")
    assert table[("+x", "X")] == {1: (Fraction(1), "+x"), -1: (Fraction(0), "")}
    for (name, meas), row in table.items():
        for k, (p, post) in row.items():
            cell = om.TOY_MEASUREMENTS[meas][k]
            if name != "mixed":
                assert float(p) == pytest.approx(qk.born_probability(QUBIT[name], QUBIT[cell].projector()), abs=1e-12)
            else:
                assert p == Fraction(1, 2)
            assert post == (cell if p else "")


def test_toy_repeatability_over_seeded_trials():
    rng = random.Random(2024)
    for name in om.TOY_MAXIMAL:
        for meas in om.TOY_MEASUREMENTS:
            for _ in range(10**4 // 18 + 1):
                k, post = om.toy_measure(om.toy_state(name), meas, rng)
                assert om.toy_measure(post, meas, rng) == (k, post)


def test_toy_sampling_frequencies():
    rng = random.Random(7)
    state = om.toy_state("+y")
    counts = Counter(om.toy_measure(state, "X", rng)[0] for _ in range(10**5))
    for k in (1, -1):
        assert counts[k] / 10**5 == pytest.approx(0.5, abs=0.01)


def test_toy_measure_is_seed_deterministic():
    runs = [[om.toy_measure(om.toy_state("mixed"), "Z", random.Random(5))[0] for _ in range(3)] for _ in range(2)]
    assert runs[0] == runs[1]
    with pytest.raises(UnknownName):
        om.toy_measure(om.toy_state("+x"), "W", 0)
    with pytest.raises(ValidationError):
        om.toy_update(om.toy_state("+x"), "X", -1)


def test_toy_cheshire():
    r = om.toy_cheshire()
    assert (r.right_path, r.right_spin_plus, r.right_spin_minus) == (0, Fraction(1, 4), Fraction(1, 4))
    assert all(isinstance(x, Fraction) for x in (r.right_path, r.right_spin_plus, r.post_direct))
    for total in r.post_total.values():
        assert total == r.post_direct


# KS qubit model ---------------------------------------------------------------------


def test_ks_qubit_extremes():
    z = np.array([0.0, 0.0, 1.0])
    assert om.ks_qubit_predict(z, z) == pytest.approx(1, abs=1e-3)
    assert om.ks_qubit_predict(z, -z) == pytest.approx(0, abs=1e-3)


def test_ks_qubit_random_pairs_match_closed_form():
    rng = np.random.default_rng(1)
    err = max(
        abs(om.ks_qubit_predict(p, f) - (1 + p @ f) / 2)
        for p, f in ((sphere_point(rng), sphere_point(rng)) for _ in range(100))
    )
    assert err <= 1e-3


@given(st.integers(0, 10**6))
def test_ks_qubit_matches_born_on_kets(seed):
    rng = np.random.default_rng(seed)
    psi, phi = qk.random_ket(2, rng), qk.random_ket(2, rng)

    def bloch(k):
        rho = k.projector().matrix
        return np.array([np.trace(rho @ P).real for P in (qk.PAULI_X, qk.PAULI_Y, qk.PAULI_Z)])

    born = qk.born_probability(psi, phi.projector())
    assert om.ks_qubit_predict(bloch(psi), bloch(phi)) == pytest.approx(born, abs=1e-3)


def test_ks_qubit_errors():
    z = [0, 0, 1]
    with pytest.raises(ValidationError):
        om.ks_qubit_predict(z, z, resolution=32)
    with pytest.raises(NotUnitVector):
        om.ks_qubit_predict([0, 0, 2], z)
    with pytest.raises(NotUnitVector):
        om.ks_qubit_predict([0, 1], z)


# preparation contextuality -------------------------------------------------------------


def test_preparation_lp_is_infeasible_with_certificate():
    r = om.prep_contextuality_infeasible()
    assert not r.feasible and r.certificate_valid
    assert len(r.patterns) == 27
    assert r.max_mixed_mass == pytest.approx(0, abs=1e-9)
    y = np.asarray(r.farkas)
    assert np.all(y @ r.A <= 1e-9) and y @ r.b > 1e-6


def _assignment_residual(thirds, disjoint, weights):
    """Residual of A x = b for an explicit assignment {state: {pattern: mass}}."""
    patterns, cols, A, b = om._prep_system(thirds=thirds, disjoint=disjoint)
    x = np.array([weights.get(s, {}).get(patterns[j], 0.0) for s, j in cols])
    return np.abs(A @ x - b).max()


def test_dropping_third_mixtures_admits_a_model():
    r = om.prep_contextuality_infeasible(thirds=False)
    assert r.feasible and r.max_mixed_mass == pytest.approx(1)
    lo, hi = ("a", "b", "c"), ("A", "B", "C")
    w = {s: {lo: 1.0} for s in lo} | {s: {hi: 1.0} for s in hi}
    w["m"] = {lo: 0.5, hi: 0.5}
    assert _assignment_residual(False, True, w) == pytest.approx(0)
    # the same witness breaks the third mixtures
    assert _assignment_residual(True, True, w) > 0.1


def test_dropping_disjointness_admits_a_model():
    r = om.prep_contextuality_infeasible(disjoint=False)
    assert r.feasible and len(r.patterns) == 64
    both = ("both",) * 3
    w = {s: {both: 1.0} for s in om.PREP_STATES + ("m",)}
    assert _assignment_residual(True, False, w) == pytest.approx(0)


# Kunjwal-Spekkens bound ------------------------------------------------------------------


def vertex_oracle(s):
    """Maximum of the edge-averaged predictability over the vertices of the
    normalised-assignment polytope, found by enumerating basic solutions."""
    idx = s.index()
    n, m = len(s.vertices), len(s.edges)
    A = np.zeros((m, n))
    for r, e in enumerate(s.edges):
        A[r, [idx[v] for v in e]] = 1.0
    b = np.ones(m)
    rank = np.linalg.matrix_rank(A)
    best = None
    for cols in itertools.combinations(range(n), rank):
        sub = A[:, cols]
        if np.linalg.matrix_rank(sub) < rank:
            continue
        xs, *_ = np.linalg.lstsq(sub, b, rcond=None)
        x = np.zeros(n)
        x[list(cols)] = xs
        if np.abs(A @ x - b).max() > 1e-9 or x.min() < -1e-9:
            continue
        val = np.mean([max(x[idx[v]] for v in e) for e in s.edges])
        best = val if best is None else max(best, val)
    return best


@settings(max_examples=60)
@given(scenarios(max_vertices=7))
def test_ks_bound_matches_vertex_oracle(s):
    expected = vertex_oracle(s)
    if expected is None:
        with pytest.raises(SolverError):
            om.ks_bound_value(s)
        return
    pruned, _, _ = om.ks_bound_value(s)
    full, _, _ = om.ks_bound_value(s, prune=False)
    assert pruned == pytest.approx(expected, abs=1e-9)
    assert full == pytest.approx(expected, abs=1e-9)


def test_automorphisms_of_cabello_hypergraph():
    s = qk.cabello18().scenario
    perms = om.hypergraph_automorphisms(s)
    assert len(perms) == 72 and len(set(perms)) == 72
    edges = {frozenset(e) for e in om._edge_sets(s)}
    for p in perms:
        assert {frozenset(p[v] for v in e) for e in edges} == edges


def test_kunjwal_spekkens_bound():
    r = om.kunjwal_spekkens_bound()
    assert r.nc_bound == pytest.approx(5 / 6, abs=1e-9)
    assert r.quantum_value == pytest.approx(1, abs=1e-12)
    assert r.example_assignment_value == Fraction(5, 6)
    assert r.selections == 4**9
    assert r.nc_bound >= float(r.example_assignment_value) - 1e-12


def test_example_assignment_shape():
    s = qk.cabello18().scenario
    x = om.ks_example_assignment(s)
    maxima = sorted(max(x[v] for v in e) for e in s.edges)
    assert maxima == [Fraction(1, 2)] * 3 + [Fraction(1)] * 6
    assert Counter(x.values()) == {Fraction(1): 3, Fraction(1, 2): 3, Fraction(0): 12}


def test_predictability_rejects_unnormalised_assignment():
    s = qk.cabello18().scenario
    with pytest.raises(ValidationError):
        om.predictability_average(s, {v: Fraction(1, 2) for v in s.vertices})


@pytest.mark.slow
def test_pruning_agrees_with_full_enumeration():
    s = qk.cabello18().scenario
    pruned, lps_p, _ = om.ks_bound_value(s)
    full, lps_f, _ = om.ks_bound_value(s, prune=False)
    assert lps_p < lps_f
    assert pruned == pytest.approx(full, abs=1e-12)


def test_search_budget():
    with pytest.raises(SearchBudgetExceeded):
        om.kunjwal_spekkens_bound(budget=1000)
    with pytest.raises(ValidationError):
        om.kunjwal_spekkens_bound(qk.Cabello18((), (), sc.new_scenario(["a"], [["a"]])))
