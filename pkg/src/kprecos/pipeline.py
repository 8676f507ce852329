"""Model -> system -> chain -> report, shared by the CLI and the tests."""

from __future__ import annotations

from dataclasses import dataclass

from .constraints import ConstraintChain, run
from .lagrangian import LagrangianSystem, hamiltonianize, legendre
from .model import Model
from .report import build_report
from .structures import HamiltonianSystem, ValidationReport, validate
from .symbolic import render


@dataclass
class Analysis:
    system: object
    chain: ConstraintChain
    validation: ValidationReport
    report: dict


def prepare(model: Model, mode: str | None = None):
    """The system to run and, for a Legendre transform, its report section."""
    mode = mode or model.mode
    sys = model.system()
    if mode != "hamiltonian" or isinstance(sys, HamiltonianSystem):
        return sys, mode, None
    lm = legendre(sys, model.momenta)
    H, img = hamiltonianize(sys, lm, model.p_coordinates)
    section = {
        "source_coordinates": [c.name for c in sys.chart.coordinates],
        "target_coordinates": [c.name for c in lm.target.coordinates],
        "momenta": {n: render(e) for n, e in lm.momenta.items()},
        "primary_constraints": [render(c) for c in img.constraints],
        "p_coordinates": [c.name for c in img.chart.coordinates],
        "h": render(H.h),
    }
    return H, "hamiltonian", section


def analyze(model: Model, mode: str | None = None, formulation: str = "reeb", max_levels: int | None = None) -> Analysis:
    sys, mode, section = prepare(model, mode)
    chain = run(
        sys,
        "general" if mode == "hamiltonian" else mode,
        formulation if isinstance(sys, LagrangianSystem) else "reeb",
        max_levels or model.max_levels,
    )
    report = validate(sys.structure)
    return Analysis(sys, chain, report, build_report(chain, model.name, report, section))


def exit_status(chain: ConstraintChain) -> int:
    if chain.status in ("undecided", "non-terminating"):
        return 3
    if chain.status in ("empty", "zero-dimensional") or not chain.dimension:
        return 2
    return 0
