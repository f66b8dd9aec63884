import json
import math
import subprocess
import sys

import pytest

from ctxkit import __version__
from ctxkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == 0, err
    return json.loads(out)


def test_classify_presets(capsys):
    assert report(capsys, "classify", "--preset", "hardy")["results"]["level"] == "Logical"
    assert report(capsys, "classify", "--preset", "pr_box")["results"]["level"] == "Strong"
    assert report(capsys, "classify", "--preset", "chsh")["results"]["global_distribution"] is False


def test_report_envelope(capsys):
    r = report(capsys, "classify", "--preset", "hardy", "--seed", "3")
    assert r["command"] == ["classify", "--preset", "hardy", "--seed", "3", "--json"]
    assert r["seed"] == 3 and r["version"] == __version__
    assert len(r["inputs_digest"]) == 64 and r["tolerances"]


def test_invariants_presets(capsys):
    c5 = report(capsys, "invariants", "--preset", "c5")["results"]
    assert c5["alpha"] == 2 and c5["theta"] == pytest.approx(math.sqrt(5), abs=1e-4)
    chsh = report(capsys, "invariants", "--preset", "chsh")["results"]
    assert chsh["alpha"] == 3 and chsh["theta"] == pytest.approx(2 + math.sqrt(2), abs=1e-4)
    e3 = report(capsys, "invariants", "--preset", "edgeless3")["results"]
    assert e3["alpha"] == 3 and e3["theta"] == pytest.approx(3, abs=1e-9)


def test_invariants_from_file(capsys, tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"n": 3, "edges": []}))
    r = report(capsys, "invariants", str(p))["results"]
    assert r["alpha"] == 3 and r["theta"] == pytest.approx(3)


def test_paradox_three_box(capsys):
    r = report(capsys, "paradox", "three-box")["results"]
    assert r["abl"]["M1"]["P1"] == pytest.approx(1)
    assert r["abl"]["M2"]["P2"] == pytest.approx(1)
    assert r["abl"]["M1_alt"]["P1"] == pytest.approx(1 / 3)
    assert r["weak_values"] == {"P1+P2": 2, "P3": -1}
    assert r["logical_paradox"] is True


def test_paradox_cheshire_variants(capsys):
    w = report(capsys, "paradox", "cheshire", "--weak")["results"]["weak_values"]
    assert [w[k] for k in ("Pi_L", "Pi_R", "sigma_z_L", "sigma_z_R", "Pi_R-")] == [1, 0, 0, 1, -0.5]
    toy = report(capsys, "paradox", "cheshire", "--toy")["results"]["toy"]
    assert (toy["right_path"], toy["right_spin_plus"], toy["right_spin_minus"]) == ("0", "1/4", "1/4")
    full = report(capsys, "paradox", "cheshire")["results"]
    assert full["violated"] == ["gamma"] and full["logical_paradox"] is False


def test_paradox_square(capsys):
    r = report(capsys, "paradox", "mermin-peres-3q")["results"]
    assert all(r["forced_values"][s] == -1 for s in ("ZIZ", "ZZI", "IZZ"))
    assert r["inconsistent_lines"] == [["ZZI", "IZZ", "ZIZ"]]


def test_inequalities(capsys):
    k = report(capsys, "inequality", "kcbs")["results"]
    assert k["sum_projectors"] == pytest.approx(math.sqrt(5), abs=1e-9)
    mp = report(capsys, "inequality", "mermin-peres")["results"]
    assert mp["row_products"] == [1, 1, 1] and mp["column_products"] == [1, 1, -1]
    assert all(c == pytest.approx(6) for c in mp["chi_samples"])
    assert report(capsys, "inequality", "chsh")["results"]["chsh_sum"] == pytest.approx(3.25)


def test_ncbound(capsys):
    r = report(capsys, "ncbound", "cabello18")["results"]
    assert r["nc_bound"] == pytest.approx(5 / 6, abs=1e-9)
    assert r["example_assignment_value"] == "5/6" and r["quantum_value"] == 1


def test_ncbound_vector_file(capsys, tmp_path):
    from ctxkit.quantum_kernel import default_cabello_path

    p = tmp_path / "v.txt"
    p.write_bytes(default_cabello_path().read_bytes())
    r = report(capsys, "ncbound", "cabello18", "--vectors", str(p))["results"]
    assert r["nc_bound"] == pytest.approx(5 / 6, abs=1e-9)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]))
    assert run(capsys, "ncbound", "--vectors", str(p))[0] == 4 - 1  # wrong count is a validation error
    assert run(capsys, "ncbound", "--vectors", str(tmp_path / "missing.txt"))[0] == 4


def test_scenario_and_toy(capsys):
    s = report(capsys, "scenario", "--preset", "cabello18")["results"]
    assert (s["vertex_count"], s["edge_count"], s["deterministic_models"]) == (18, 9, 0)
    t = report(capsys, "toy", "demo", "--seed", "1")["results"]
    assert t["update_table"]["+y X"]["1"] == {"probability": "1/2", "post": "+x"}
    assert len(t["runs"]) == 6


@pytest.mark.parametrize(
    "argv",
    [
        ("toy", "demo", "--seed", "9"),
        ("inequality", "mermin-peres", "--seed", "4"),
        ("classify", "--preset", "liar_4"),
        ("paradox", "pigeonhole"),
    ],
)
def test_output_is_byte_identical(capsys, argv):
    first = run(capsys, *argv, "--json")
    second = run(capsys, *argv, "--json")
    assert first == second and first[0] == 0
    text = run(capsys, *argv)
    assert text[0] == 0 and text[1] == run(capsys, *argv)[1]


def test_seed_changes_sampled_output(capsys):
    a = report(capsys, "toy", "demo", "--seed", "1")["results"]["runs"]
    b = report(capsys, "toy", "demo", "--seed", "2")["results"]["runs"]
    assert a != b


def test_text_summary(capsys):
    code, out, _ = run(capsys, "invariants", "--preset", "c5")
    assert code == 0 and "alpha: 2" in out
    with pytest.raises(json.JSONDecodeError):
        json.loads(out)


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "classify", str(bad))[0] == 2
    assert run(capsys, "invariants", str(bad))[0] == 2
    loop = tmp_path / "loop.json"
    loop.write_text(json.dumps({"n": 2, "edges": [[1, 1]]}))
    code, _, err = run(capsys, "invariants", str(loop))
    assert code == 3 and "self-loop" in err
    assert run(capsys, "classify", "--preset", "hardy", str(bad))[0] == 3
    assert run(capsys, "paradox", "four-box")[0] == 4
    assert run(capsys, "paradox", "three-box", "--toy")[0] == 4
    assert run(capsys, "classify", "--preset", "nope")[0] == 4
    assert run(capsys, "classify", str(tmp_path / "missing.json"))[0] == 4
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "toy", "demo", "--seed", "x")[0] == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ctxkit.cli", "invariants", "--preset", "c5", "--json"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["results"]["alpha"] == 2
