"""JSON-ready payload builders shared by the CLI and the HTTP service.

Everything rational is rendered as a "p/q" string; no floats appear in any
payload, so identical requests serialize to identical bodies.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .attractor import attractor
from .exact import rat_str
from .itm import ITMap
from .returnmap import return_map, rotation_data
from .stability import check_acc, check_matching, _nontrivial_components
from .stabilize import (
    check_correspondence,
    critical_cycles,
    stabilize,
    unstable_number,
)


def classify_payload(m: ITMap, budget: Optional[int] = None) -> dict:
    """Attractor + stability verdicts + per-component return map data."""
    res = attractor(m, budget)
    out: dict = {
        "status": res.status,
        "X": [[rat_str(p.left), rat_str(p.right)] for p in res.X],
    }
    if not res.finite:
        out["stable"] = False
        out["budget_used"] = res.budget_used
        return out
    out["n"] = res.n_stable
    nontrivial = _nontrivial_components(m, res.X)
    acc = check_acc(m, res.X, nontrivial)
    matching = check_matching(m, res.X, nontrivial)
    out["stable"] = acc.a1.ok and acc.a2.ok and acc.a3.ok and matching.ok
    for name, v in (("A1", acc.a1), ("A2", acc.a2), ("A3", acc.a3), ("matching", matching)):
        out[name] = {"ok": v.ok, "witness": v.witness}
    comps = []
    for comp in res.X.parts:
        rmd = return_map(m, res.X, comp)
        d = rmd.to_dict()
        rot = rotation_data(rmd)
        d["rotation"] = (
            {"number": rat_str(rot.rotation_number)} if rot.is_rotation else None
        )
        comps.append(d)
    out["components"] = comps
    return out


def report_payload(m: ITMap, budget: Optional[int] = None) -> dict:
    """classify_payload plus the perturbation-facing diagnostics."""
    out = classify_payload(m, budget)
    if out["status"] != "finite":
        return out
    res = attractor(m, budget)
    dec = critical_cycles(m, res.X, budget if budget is not None else 200_000)
    summary = unstable_number(m, budget)
    ok, failures = check_correspondence(m, budget)
    out["unstable_number"] = summary.to_dict()
    out["cycles"] = [[str(p) for p in c] for c in dec.cycles]
    out["correspondence"] = {"ok": ok, "failures": [str(p) for p in failures]}
    return out


def stabilize_payload(
    m: ITMap, eps_total: Fraction, budget: Optional[int] = None
) -> dict:
    mt, trace = stabilize(m, eps_total, budget)
    disp = Fraction(0)
    for a, b in zip(
        list(m.beta[1:-1]) + list(m.gamma), list(mt.beta[1:-1]) + list(mt.gamma)
    ):
        disp = max(disp, abs(a - b))
    return {
        "map": m.to_dict(),
        "stabilized": mt.to_dict(),
        "trace": trace.to_dict(),
        "displacement": rat_str(disp),
        "eps_total": rat_str(eps_total),
        "U": unstable_number(mt, budget).U,
    }
