"""Command line entry point: ``kprecos validate|run|render <model>``.

Exit status of ``run``: 0 stable with positive dimension, 2 empty or
zero-dimensional, 3 undecided or non-terminating, 1 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import KPrecosError
from .lagrangian import LagrangianSystem, hamiltonianize, legendre, reeb_free_forms
from .model import load_model
from .pipeline import analyze, exit_status
from .report import to_json, to_markdown
from .structures import validate
from .symbolic import render


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kprecos", description="Constraint algorithm for k-precosymplectic field theories.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check the geometric structure of a model")
    v.add_argument("model")
    v.add_argument("--format", choices=("text", "json"), default="text")

    r = sub.add_parser("run", help="run the constraint algorithm and emit a report")
    r.add_argument("model")
    r.add_argument("--mode", choices=("general", "sopde", "hamiltonian"))
    r.add_argument("--formulation", choices=("reeb", "reeb_free"), default="reeb",
                   help="Lagrangian equation set: with Reeb fields or with the Reeb-free forms")
    r.add_argument("--format", choices=("json", "md"), default="json")
    r.add_argument("--out", help="write the report here instead of stdout")
    r.add_argument("--max-levels", type=int)

    d = sub.add_parser("render", help="print the derived forms, energy and Legendre map")
    d.add_argument("model")
    return p


def _validate(args) -> int:
    model = load_model(args.model)
    sys_ = model.system()
    report = validate(sys_.structure).to_dict()
    if isinstance(sys_, LagrangianSystem):
        report["hessian_rank"] = sys_.hessian_rank
        report["regularity"] = sys_.regularity
    if args.format == "json":
        print(json.dumps(report, indent=2))
        return 0
    print(f"model: {model.name} ({model.kind})")
    for key, value in report.items():
        if isinstance(value, list):
            print(f"{key}:" + ("" if value else " none"))
            for item in value:
                print(f"  - {item}")
        else:
            print(f"{key}: {value}")
    return 0


def _run(args) -> int:
    model = load_model(args.model)
    result = analyze(model, args.mode, args.formulation, args.max_levels)
    text = to_json(result.report) if args.format == "json" else to_markdown(result.report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return exit_status(result.chain)


def _render(args) -> int:
    model = load_model(args.model)
    s = model.system()
    lines = [f"model: {model.name} ({model.kind})"]
    if isinstance(s, LagrangianSystem):
        lines.append(f"L = {render(s.L)}")
        for x, t, w in zip(s.chart.base, s.theta, s.omega):
            lines.append(f"theta_L^{x.name} = {t.render()}")
            lines.append(f"omega_L^{x.name} = {w.render()}")
        lines.append(f"E_L = {render(s.energy)}")
        Theta, Omega = reeb_free_forms(s)
        for x, t, w in zip(s.chart.base, Theta, Omega):
            lines.append(f"Theta_L^{x.name} = {t.render()}")
            lines.append(f"Omega_L^{x.name} = {w.render()}")
        lines.append(f"regularity: {s.regularity} (Hessian rank {s.hessian_rank})")
        lm = legendre(s, model.momenta)
        lines.append("Legendre map:")
        lines += [f"  {n} = {render(e)}" for n, e in lm.momenta.items()]
        try:
            H, img = hamiltonianize(s, lm, model.p_coordinates)
        except KPrecosError as exc:
            lines.append(f"Hamiltonian: not available ({exc})")
        else:
            lines.append("primary constraints:" + ("" if img.constraints else " none"))
            lines += [f"  {render(c)}" for c in img.constraints]
            lines.append(f"P coordinates: {', '.join(c.name for c in img.chart.coordinates)}")
            lines.append(f"h = {render(H.h)}")
            for x, w in zip(img.chart.base, H.structure.omega):
                lines.append(f"omega_P^{x.name} = {w.render()}")
    else:
        for x, e, w in zip(s.chart.base, s.structure.eta, s.structure.omega):
            lines.append(f"eta^{x.name} = {e.render()}")
            lines.append(f"omega^{x.name} = {w.render()}")
        lines.append(f"h = {render(s.h)}")
        lines.append(f"dh - dh/dx^a dx^a = {s.gamma_tilde.render()}")
        lines.append(f"gauge coordinates: {', '.join(s.structure.gauge_coordinates) or 'none'}")
    print("\n".join(lines))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    handler = {"validate": _validate, "run": _run, "render": _render}[args.command]
    try:
        return handler(args)
    except (KPrecosError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
