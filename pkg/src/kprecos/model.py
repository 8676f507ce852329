"""TOML model files describing a Lagrangian or Hamiltonian field theory."""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ChartMismatchError, ModelError, ParseError
from .exterior import Chart, DifferentialForm, fibre_names
from .lagrangian import LagrangianSystem
from .parser import parse_expression
from .structures import HamiltonianSystem, KPrecosymplecticStructure, canonical_structure
from .symbolic import Expr

MODES = ("general", "sopde", "hamiltonian")
_INDEXED = re.compile(r"[vp](\d+)_(\d+)")


@dataclass(frozen=True)
class Model:
    name: str
    kind: str  # lagrangian | hamiltonian
    chart: Chart
    expression: Expr
    structure: KPrecosymplecticStructure | None = None
    momenta: Any = None  # template string or {name: (position, base)} for the Legendre map
    mode: str = "general"
    p_coordinates: tuple | None = None
    max_levels: int = 20
    source: str = ""

    def system(self):
        if self.kind == "lagrangian":
            return LagrangianSystem(self.chart, self.expression, self.name)
        return HamiltonianSystem(self.structure, self.expression, self.name)


def _list_of_str(doc: dict, key: str, default=None) -> list:
    v = doc.get(key, default)
    if v is None:
        raise ModelError(f"missing required key {key!r}")
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise ModelError(f"{key!r} must be a list of names")
    return v


def _fibres(doc: dict, key: str, base: list, positions: list, default_template: str) -> tuple[dict, Any]:
    decl = doc.get(key, default_template)
    if isinstance(decl, str):
        try:
            table = fibre_names(base, positions, decl)
        except (KeyError, IndexError, ValueError) as exc:
            raise ModelError(f"bad {key} template {decl!r}: {exc}") from None
        if len(table) != len(base) * len(positions):
            raise ModelError(f"{key} template {decl!r} does not give distinct names")
        return table, decl
    if isinstance(decl, dict):
        table = {}
        for name, pair in decl.items():
            if not (isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, str) for x in pair)):
                raise ModelError(f"{key}.{name} must be [position, base]")
            table[name] = tuple(pair)
        return table, table
    raise ModelError(f"{key!r} must be a naming template or a table")


def _check_indexed_names(table: dict, base: list, positions: list) -> None:
    for name, (q, x) in table.items():
        m = _INDEXED.fullmatch(name)
        if m and (int(m.group(1)), int(m.group(2))) != (positions.index(q) + 1, base.index(x) + 1):
            raise ModelError(
                f"fibre name {name} suggests indices ({m.group(1)}, {m.group(2)}) but is declared for ({q}, {x})"
            )


def _parse(text: Any, chart: Chart, where: str) -> Expr:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = str(text)
    if not isinstance(text, str):
        raise ModelError(f"{where} must be an expression string")
    try:
        return parse_expression(text, chart.namespace())
    except ParseError as exc:
        raise ModelError(f"{where}: {exc}") from exc


def _form_table(table: Any, chart: Chart, degree: int, where: str) -> DifferentialForm:
    if not isinstance(table, dict):
        raise ModelError(f"{where} must be a table of 'coordinate ...' = coefficient")
    items = []
    for key, coeff in table.items():
        names = key.split()
        if len(names) != degree:
            raise ModelError(f"{where}: key {key!r} needs {degree} coordinate name(s)")
        try:
            for nm in names:
                chart.index(nm)
        except ChartMismatchError as exc:
            raise ModelError(f"{where}: {exc}") from None
        items.append((tuple(names), _parse(coeff, chart, f"{where}.{key}")))
    return DifferentialForm.from_terms(chart, degree, items)


def parse_model(text: str, source: str = "<string>") -> Model:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ModelError(f"{source}: {exc}") from None
    base = _list_of_str(doc, "base")
    positions = _list_of_str(doc, "positions")
    parameters = _list_of_str(doc, "parameters", [])
    gauge = _list_of_str(doc, "gauge", [])
    functions = doc.get("functions", {})
    if not isinstance(functions, dict) or not all(
        isinstance(v, list) and all(isinstance(a, str) for a in v) for v in functions.values()
    ):
        raise ModelError("[functions] maps each name to its list of base arguments")
    for key, want in (("k", len(base)), ("n", len(positions))):
        if key in doc and doc[key] != want:
            raise ModelError(f"{key} = {doc[key]} disagrees with the {want} declared coordinates")

    has_l, has_h = "lagrangian" in doc, "hamiltonian" in doc
    if has_l == has_h:
        raise ModelError("a model declares exactly one of 'lagrangian' or [hamiltonian]")

    options = doc.get("options", {})
    mode = options.get("mode", "hamiltonian" if has_h else "general")
    if mode not in MODES:
        raise ModelError(f"options.mode must be one of {', '.join(MODES)}")
    p_coords = options.get("p_coordinates")
    if p_coords is not None and not (isinstance(p_coords, list) and all(isinstance(x, str) for x in p_coords)):
        raise ModelError("options.p_coordinates must be a list of names")
    max_levels = options.get("max_levels", 20)
    if not isinstance(max_levels, int) or max_levels < 1:
        raise ModelError("options.max_levels must be a positive integer")

    momenta_table, momenta_decl = _fibres(doc, "momenta", base, positions, "p{i}_{a}")
    _check_indexed_names(momenta_table, base, positions)
    common = dict(parameters=parameters, functions=functions)
    name = doc.get("name", Path(source).stem)
    try:
        if has_l:
            if gauge:
                raise ModelError("gauge coordinates are only meaningful for Hamiltonian models")
            vel_table, _ = _fibres(doc, "velocities", base, positions, "v{i}_{a}")
            _check_indexed_names(vel_table, base, positions)
            chart = Chart.build(base, positions, vel_table, "velocity", **common)
            L = _parse(doc["lagrangian"], chart, "lagrangian")
            return Model(name, "lagrangian", chart, L, None, momenta_decl, mode,
                         tuple(p_coords) if p_coords else None, max_levels, source)

        ham = doc["hamiltonian"]
        if not isinstance(ham, dict) or "h" not in ham:
            raise ModelError("[hamiltonian] needs an 'h' expression")
        if mode == "sopde":
            raise ModelError("sopde mode needs a Lagrangian model")
        chart = Chart.build(base, positions, momenta_table, "momentum", gauge=gauge, **common)
        h = _parse(ham["h"], chart, "hamiltonian.h")
        structure = _structure(ham, chart)
        return Model(name, "hamiltonian", chart, h, structure, None, "hamiltonian", None, max_levels, source)
    except ChartMismatchError as exc:
        raise ModelError(str(exc)) from None


def _structure(ham: dict, chart: Chart) -> KPrecosymplecticStructure:
    kind = ham.get("structure", "canonical")
    if kind == "canonical":
        return canonical_structure(chart)
    if kind != "explicit":
        raise ModelError("hamiltonian.structure must be 'canonical' or 'explicit'")
    eta_t = ham.get("eta", {})
    omega_t = ham.get("omega")
    if omega_t is None:
        raise ModelError("an explicit structure needs [hamiltonian.omega]")
    eta, omega = [], []
    for x in chart.base:
        if x.name in eta_t:
            eta.append(_form_table(eta_t[x.name], chart, 1, f"hamiltonian.eta.{x.name}"))
        else:
            eta.append(DifferentialForm.basis(chart, x.name))
        omega.append(_form_table(omega_t.get(x.name, {}), chart, 2, f"hamiltonian.omega.{x.name}"))
    extra = (set(eta_t) | set(omega_t)) - {x.name for x in chart.base}
    if extra:
        raise ModelError(f"structure tables for unknown base coordinates: {sorted(extra)}")
    return KPrecosymplecticStructure(chart, tuple(eta), tuple(omega))


def load_model(path: str | Path) -> Model:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read {p}: {exc.strerror}") from None
    return parse_model(text, str(p))
