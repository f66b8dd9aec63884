"""Command-line front end; every command prints one deterministic report."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from . import graph_invariants as gi
from . import ontomodels as om
from . import pps_weak as pw
from . import quantum_kernel as qk
from . import scenario as sc
from . import sheaf
from .errors import CtxError, SolverError, UnknownName, UnknownResource, ValidationError

DIGITS = 12

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_UNKNOWN, EXIT_SOLVER = 0, 2, 3, 4, 5


class ParseFailure(Exception):
    """Input text is not well-formed JSON."""


# report plumbing ----------------------------------------------------------


def _clean(x: Any) -> Any:
    """JSON-safe copy with floats rounded to DIGITS significant digits."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.{DIGITS}g}") + 0.0
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _clean(x.real), "im": _clean(x.imag)}
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_clean(v) for v in x]
    return str(x)


def _digest(command: list[str], payload: bytes = b"") -> str:
    h = hashlib.sha256()
    h.update(json.dumps(command).encode())
    h.update(payload)
    return h.hexdigest()


def _report(args: argparse.Namespace, results: dict, tolerances: dict, payload: bytes = b"") -> dict:
    return {
        "command": args.argv,
        "inputs_digest": _digest(args.argv, payload),
        "version": __version__,
        "seed": args.seed,
        "tolerances": tolerances,
        "results": results,
    }


def _load_json(path: str) -> tuple[Any, bytes]:
    p = Path(path)
    if not p.is_file():
        raise UnknownResource(f"no such file: {path}")
    raw = p.read_bytes()
    try:
        return json.loads(raw), raw
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseFailure(f"{path}: {exc}") from exc


def _pick(name: str, table: dict, what: str):
    if name not in table:
        raise UnknownName(f"unknown {what} {name!r}; choose from {', '.join(sorted(table))}")
    return table[name]


def _source(args: argparse.Namespace, what: str) -> tuple[str | None, str | None]:
    if (args.preset is None) == (args.file is None):
        raise ValidationError(f"give exactly one of a {what} file or --preset")
    return args.preset, args.file


# commands -----------------------------------------------------------------


def _liar_presets() -> dict:
    return {f"liar_{n}": (lambda n=n: sheaf.liar_cycle(n)) for n in range(2, 9)}


def cmd_classify(args: argparse.Namespace) -> dict:
    preset, path = _source(args, "table")
    payload = b""
    if preset is not None:
        t = _pick(preset, {**sheaf.PRESETS, **_liar_presets()}, "table preset")()
    else:
        data, payload = _load_json(path)
        t = sheaf.table_from_json(data)
    verdict = sheaf.classify(t)
    results = {"table": t.to_json(), **verdict.to_json()}
    if isinstance(t, sheaf.EmpiricalTable):
        ok, _ = sheaf.has_global_distribution(t)
        results["global_distribution"] = ok
    tol = {"row": sheaf.ROW_TOL, "support": sheaf.SUPPORT_TOL, "global": sheaf.GLOBAL_TOL}
    return _report(args, results, tol, payload)


GRAPH_PRESETS = {
    "c5": lambda: gi.cycle(5),
    "chsh": gi.chsh_graph,
    "edgeless3": lambda: gi.unit_graph(3, ()),
}


def cmd_invariants(args: argparse.Namespace) -> dict:
    preset, path = _source(args, "graph")
    payload = b""
    if preset is not None:
        g = _pick(preset, GRAPH_PRESETS, "graph preset")()
    else:
        data, payload = _load_json(path)
        g = gi.graph_from_json(data)
    rep = gi.csw_report(g)
    return _report(args, {"graph": g.to_json(), **rep.to_json()}, {"theta": gi.THETA_TOL}, payload)


def _ineq_kcbs() -> dict:
    k = qk.kcbs_realization()
    return {
        "sum_projectors": k.beta,
        "sqrt5": math.sqrt(5),
        "sum_correlators": k.alpha_corr,
        "five_minus_4_sqrt5": 5 - 4 * math.sqrt(5),
        "classical_bound_projectors": 2,
        "adjacent_overlaps": list(k.adjacent_overlaps),
        "vector_order": list(k.order),
    }


def _ineq_mermin_peres(seed: int) -> dict:
    sq = qk.mermin_peres_square()
    rng = np.random.default_rng(seed)
    chis = [sq.chi(qk.random_ket(4, rng)) for _ in range(10)]
    return {
        "row_products": [int(round(np.trace(m).real / 4)) for m in sq.row_products],
        "column_products": [int(round(np.trace(m).real / 4)) for m in sq.column_products],
        "commuting": sq.commuting(),
        "chi_samples": chis,
        "classical_chi_max": qk.classical_chi_max(),
    }


def _ineq_chsh() -> dict:
    t = sheaf.chsh_table()
    ok, cert = sheaf.has_global_distribution(t)
    return {"chsh_sum": sheaf.chsh_sum(t), "classical_bound": 3, "global_distribution": ok}


def cmd_inequality(args: argparse.Namespace) -> dict:
    name = args.name or args.preset
    if name is None:
        raise ValidationError("name an inequality: kcbs, mermin-peres or chsh")
    table = {"kcbs": _ineq_kcbs, "mermin-peres": lambda: _ineq_mermin_peres(args.seed), "chsh": _ineq_chsh}
    results = {"inequality": name, **_pick(name, table, "inequality")()}
    return _report(args, results, {"lp": 1e-9})


def _paradox_full(e: pw.PPSExperiment) -> dict:
    abl = {}
    for n in e.names():
        try:
            abl[n] = dict(zip(e.measurement(n).labels, pw.abl_distribution(e, n)))
        except CtxError as exc:
            abl[n] = {"error": str(exc)}
    out = {"abl": abl, "weak_values": dict(pw.weak_table(e))}
    if e.name == "mermin-peres-3q":
        # Nine commuting-line observables generate too many projectors to close; the
        # contradiction shows up in the forced values instead.
        rep = pw.square_report()
        out["forced_values"] = rep.forced
        out["row_signs"], out["column_signs"] = list(rep.row_signs), list(rep.column_signs)
        out["inconsistent_lines"] = list(rep.inconsistent)
        return out
    verdict = pw.is_logical_pps_paradox(e)
    out |= {
        "conditions": verdict.report.to_json() if verdict.report else None,
        "logical_paradox": verdict.logical,
        "abl_zero_one": verdict.abl_zero_one,
        "overlap": verdict.overlap,
        "violated": list(verdict.violated),
        "anomalous": dict(pw.anomalous_weak_values(e)),
    }
    return out


def _toy_cheshire_json() -> dict:
    r = om.toy_cheshire()
    return {
        "right_path": r.right_path,
        "right_spin_plus": r.right_spin_plus,
        "right_spin_minus": r.right_spin_minus,
        "outcomes": {k: {o: {"probability": p, "post_given": q} for o, (p, q) in v.items()} for k, v in r.outcomes.items()},
        "post_direct": r.post_direct,
        "post_total": r.post_total,
    }


def cmd_paradox(args: argparse.Namespace) -> dict:
    name = args.name or args.preset
    if name is None:
        raise ValidationError("name a paradox: " + ", ".join(pw.GALLERY))
    e = _pick(name, pw.GALLERY, "paradox")()
    if args.toy:
        if name != "cheshire":
            raise UnknownName(f"no toy-model reproduction for {name!r}")
        results = {"paradox": name, "toy": _toy_cheshire_json()}
    elif args.weak:
        results = {"paradox": name, "weak_values": dict(pw.weak_table(e))}
    else:
        results = {"paradox": name, **_paradox_full(e)}
    tol = {"abl": pw.ABL_TOL, "overlap": pw.OVERLAP_TOL, "value": pw.VALUE_TOL}
    return _report(args, results, tol)


def cmd_ncbound(args: argparse.Namespace) -> dict:
    name = args.name or args.preset or "cabello18"
    if name != "cabello18":
        raise UnknownName(f"unknown hypergraph {name!r}; only cabello18 is available")
    payload = b""
    if args.vectors:
        if not Path(args.vectors).is_file():
            raise UnknownResource(f"no such file: {args.vectors}")
        payload = Path(args.vectors).read_bytes()
    c = qk.cabello18(args.vectors)
    b = om.kunjwal_spekkens_bound(c, prune=not args.no_prune)
    results = {
        "hypergraph": name,
        "nc_bound": b.nc_bound,
        "quantum_value": b.quantum_value,
        "example_assignment_value": b.example_assignment_value,
        "example_assignment": {k: v for k, v in b.example_assignment.items() if v},
        "lp_count": b.lp_count,
        "selections": b.selections,
        "pruned": not args.no_prune,
    }
    return _report(args, results, {"lp": 1e-9}, payload)


def cmd_toy(args: argparse.Namespace) -> dict:
    name = args.name or args.preset or "demo"
    if name != "demo":
        raise UnknownName(f"unknown toy command {name!r}; only demo is available")
    rng = random.Random(args.seed)
    runs = []
    for state in om.TOY_MAXIMAL:
        s = om.toy_state(state)
        trace = []
        for _ in range(args.steps):
            meas = rng.choice(sorted(om.TOY_MEASUREMENTS))
            k, s = om.toy_measure(s, meas, rng)
            trace.append({"measure": meas, "outcome": k, "state": s.name})
        runs.append({"start": state, "trace": trace})
    table = {
        f"{st} {m}": {str(k): {"probability": p, "post": post} for k, (p, post) in out.items()}
        for (st, m), out in om.toy_update_table().items()
    }
    return _report(args, {"update_table": table, "runs": runs}, {"exact": 0})


SCENARIO_PRESETS = {
    "triangle": sc.triangle_scenario,
    "kcbs": sc.kcbs_scenario,
    "chsh": lambda: sc.bell_scenario(2, 2, 2),
    "cabello18": lambda: qk.cabello18().scenario,
}


def cmd_scenario(args: argparse.Namespace) -> dict:
    preset, path = _source(args, "scenario")
    payload = b""
    if preset is not None:
        s = _pick(preset, SCENARIO_PRESETS, "scenario preset")()
    else:
        data, payload = _load_json(path)
        s = sc.from_json(data)
    from .models import enumerate_deterministic

    g = sc.exclusivity_graph(s)
    results = {
        "scenario": s.to_json(),
        "vertex_count": len(s.vertices),
        "edge_count": len(s.edges),
        "exclusivity_edges": [list(e) for e in g.edge_list()],
        "deterministic_models": len(enumerate_deterministic(s)),
    }
    return _report(args, results, {"edge": 1e-9}, payload)


# entry point --------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", help="built-in input instead of a file")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--json", action="store_true", help="print the full JSON report")

    p = argparse.ArgumentParser(prog="ctxkit", description="Contextuality toolkit.")
    p.add_argument("--version", action="version", version=f"ctxkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_: str, positional: str, **kw) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument(positional, nargs="?", default=None, **kw)
        sp.set_defaults(func=func)
        return sp

    add("classify", cmd_classify, "place a table in the contextuality hierarchy", "file")
    add("invariants", cmd_invariants, "independence number and Lovasz theta of a graph", "file")
    add("inequality", cmd_inequality, "quantum values of a built-in inequality", "name")
    pp = add("paradox", cmd_paradox, "pre- and post-selection paradox report", "name")
    pp.add_argument("--weak", action="store_true", help="weak values only")
    pp.add_argument("--toy", action="store_true", help="toy-model reproduction")
    nb = add("ncbound", cmd_ncbound, "noncontextuality bound on a KS hypergraph", "name")
    nb.add_argument("--vectors", help="vector file for the 18 rays")
    nb.add_argument("--no-prune", action="store_true", help="solve every distinct selection LP")
    tp = add("toy", cmd_toy, "seeded toy-model walk and update table", "name")
    tp.add_argument("--steps", type=int, default=6, help="measurements per start state")
    add("scenario", cmd_scenario, "summarise a measurement scenario", "file")
    return p


def _summary(report: dict) -> str:
    lines = []

    def walk(prefix: str, x: Any, depth: int) -> None:
        if isinstance(x, dict) and depth < 2:
            for k, v in x.items():
                walk(f"{prefix}{k}." if depth < 1 else f"{prefix}{k}", v, depth + 1)
        else:
            text = json.dumps(x)
            lines.append(f"{prefix.rstrip('.')}: {text if len(text) <= 100 else text[:97] + '...'}")

    walk("", report["results"], 0)
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        report = _clean(args.func(args))
    except ParseFailure as exc:
        print(f"ctxkit: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"ctxkit: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except UnknownResource as exc:
        print(f"ctxkit: unknown resource: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except SolverError as exc:
        print(f"ctxkit: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=False))
    else:
        print(_summary(report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
