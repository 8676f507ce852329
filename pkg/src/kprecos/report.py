"""Chain reports: a JSON document (``schema: 1``) and its Markdown rendering."""

from __future__ import annotations

import json
from importlib import resources

from .constraints import ConstraintChain, sopde_symmetry_check
from .exterior import Chart
from .structures import ValidationReport
from .symbolic import Unknown, render

SCHEMA_VERSION = 1


def load_schema() -> dict:
    return json.loads(resources.files("kprecos").joinpath("report.schema.json").read_text(encoding="utf-8"))


def _assumption(e) -> str:
    return f"{render(e)} != 0"


def chart_dict(chart: Chart) -> dict:
    return {
        "coordinates": [{"name": c.name, "role": c.role, "index": list(c.index)} for c in chart.coordinates],
        "parameters": list(chart.parameters),
        "functions": {f: list(args) for f, args in chart.functions},
    }


def build_report(
    chain: ConstraintChain,
    model_name: str,
    validation: ValidationReport,
    legendre: dict | None = None,
) -> dict:
    chart = chain.ansatz.chart
    levels = []
    for lv in chain.levels:
        levels.append(
            {
                "index": lv.index,
                "equations": [{"label": e.label, "expr": render(e.expr)} for e in lv.equations],
                "constraints": [{"name": c.name, "expr": render(c.expr), "origin": c.origin} for c in lv.constraints],
                "assignments": {u.name: render(v) for u, v in lv.assignments.items()},
                "free": [u.name for u in lv.free],
                "assumptions": [_assumption(a) for a in lv.assumptions],
            }
        )
    fields = []
    for x, X in zip(chart.base, chain.solution):
        fields.append({"base": x.name, "components": {chart.coordinates[i].name: render(c) for i, c in X.components}})
    symmetry = None
    if chain.mode == "sopde":
        symmetry = [
            {"alpha": s.alpha, "beta": s.beta, "i": s.i, "residual": render(s.residual), "status": s.status}
            for s in sopde_symmetry_check(chain)
        ]
    S = chain.final_set
    return {
        "schema": SCHEMA_VERSION,
        "model": model_name,
        "kind": chain.kind,
        "mode": chain.mode,
        "formulation": chain.formulation,
        "chart": chart_dict(chart),
        "legendre": legendre,
        "validation": validation.to_dict(),
        "status": chain.status,
        "dimension": chain.dimension,
        "levels": levels,
        "constraint_set": {
            "pivots": {str(c): render(v) for c, v in S.pivots},
            "residuals": [render(r) for r in S.residuals],
        },
        "solution": {
            "unknowns": [u.name for u in chain.ansatz.unknowns],
            "assignments": {u.name: render(v) for u, v in chain.assignments.items()},
            "free": [u.name for u in chain.free],
            "fields": fields,
        },
        "assumptions": [_assumption(a) for a in chain.assumptions],
        "standing_assumptions": [_assumption(a) for a in chain.standing_assumptions],
        "sopde_symmetry": symmetry,
        "warnings": list(chain.warnings),
    }


def report_namespace(doc: dict) -> dict:
    """Names appearing in a report, for re-parsing its expressions."""
    import sympy as sp

    ns = {}
    for c in doc["chart"]["coordinates"]:
        ns[c["name"]] = sp.Symbol(c["name"])
    for p in doc["chart"]["parameters"]:
        ns[p] = sp.Symbol(p)
    for f, args in doc["chart"]["functions"].items():
        ns[f] = sp.Function(f)(*[sp.Symbol(a) for a in args])
    if doc["legendre"]:
        for n in doc["legendre"]["source_coordinates"] + doc["legendre"]["target_coordinates"]:
            ns.setdefault(n, sp.Symbol(n))
    for u in doc["solution"]["unknowns"]:
        ns[u] = Unknown(u)
    return ns


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def to_markdown(doc: dict) -> str:
    out = [f"# Constraint chain: {doc['model']}", ""]
    out.append(f"- kind: {doc['kind']}")
    out.append(f"- mode: {doc['mode']}")
    out.append(f"- formulation: {doc['formulation']}")
    out.append(f"- status: {doc['status']}")
    out.append(f"- dimension: {doc['dimension'] if doc['dimension'] is not None else 'empty'}")
    coords = ", ".join(f"{c['name']} ({c['role']})" for c in doc["chart"]["coordinates"])
    out.append(f"- coordinates: {coords}")
    if doc["chart"]["parameters"]:
        out.append(f"- parameters: {', '.join(doc['chart']['parameters'])}")
    for f, args in doc["chart"]["functions"].items():
        out.append(f"- function: {f}({', '.join(args)})")
    out.append("")

    if doc["legendre"]:
        lg = doc["legendre"]
        out += ["## Legendre map", ""]
        out += [f"- {k} = `{v}`" for k, v in lg["momenta"].items()]
        out += ["", "Primary constraints:", ""]
        out += [f"- `{c}`" for c in lg["primary_constraints"]] or ["- none"]
        out += ["", f"P coordinates: {', '.join(lg['p_coordinates'])}", "", f"h = `{lg['h']}`", ""]

    v = doc["validation"]
    out += ["## Structure", ""]
    out.append(f"- classification: {v['classification']}")
    out.append(f"- omega ranks: {', '.join(map(str, v['omega_ranks']))}")
    out.append(f"- common kernel of the omegas: dimension {v['kernel_omega_dimension']}")
    out.append(f"- gauge dimension: {v['gauge_dimension']}")
    out.append(f"- gauge coordinates: {', '.join(v['gauge_coordinates']) or 'none'}")
    for b in v["kernel_basis"]:
        out.append(f"- kernel vector: `{b}`")
    for a in v["assumptions"]:
        out.append(f"- assumption: `{a}`")
    out.append("")

    for lv in doc["levels"]:
        out += [f"## Level {lv['index']}", ""]
        if lv["equations"]:
            out += ["Equations:", ""]
            out += [f"- {e['label']}: `{e['expr']} = 0`" for e in lv["equations"]]
            out.append("")
        out += ["Constraints:", ""]
        out += [f"- {c['name']} ({c['origin']}): `{c['expr']}`" for c in lv["constraints"]] or ["- none"]
        out += ["", "Assignments:", ""]
        out += [f"- `{u} = {e}`" for u, e in lv["assignments"].items()] or ["- none"]
        out += ["", f"Free unknowns ({len(lv['free'])}): {', '.join(lv['free']) or 'none'}", ""]
        if lv["assumptions"]:
            out += ["Assumptions:", ""] + [f"- `{a}`" for a in lv["assumptions"]] + [""]

    out += ["## Final constraint set", ""]
    cs = doc["constraint_set"]
    out += [f"- `{c} = {e}`" for c, e in cs["pivots"].items()]
    out += [f"- `{r} = 0`" for r in cs["residuals"]]
    if not cs["pivots"] and not cs["residuals"]:
        out.append("- none")
    out += ["", "## Solution", ""]
    for f in doc["solution"]["fields"]:
        terms = " + ".join(f"({e}) d/d{c}" for c, e in f["components"].items())
        out.append(f"- X_{f['base']} = {terms}")
    out += ["", f"Free unknowns: {', '.join(doc['solution']['free']) or 'none'}", ""]
    if doc["assumptions"] or doc["standing_assumptions"]:
        out += ["## Assumptions", ""]
        out += [f"- `{a}` (standing)" for a in doc["standing_assumptions"]]
        out += [f"- `{a}`" for a in doc["assumptions"]]
        out.append("")
    if doc["sopde_symmetry"] is not None:
        out += ["## SOPDE symmetry", ""]
        for s in doc["sopde_symmetry"]:
            out.append(f"- (X_{s['alpha']})^{s['i']}_{s['beta']} - (X_{s['beta']})^{s['i']}_{s['alpha']}: `{s['residual']}` ({s['status']})")
        if not doc["sopde_symmetry"]:
            out.append("- nothing to check")
        out.append("")
    if doc["warnings"]:
        out += ["## Warnings", ""] + [f"- {w}" for w in doc["warnings"]] + [""]
    return "\n".join(out).rstrip("\n") + "\n"
