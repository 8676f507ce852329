"""The constraint algorithm: ansatz, field equations, elimination and tangency.

A run keeps one growing pool of linear equations in the ansatz unknowns.
Each pass row-reduces the whole pool modulo the current constraint set;
rows left with no unknowns are constraints.  New constraints are added to
the set and the pool is solved again until nothing new appears, then the
tangency conditions X_a(zeta) of the constraints found in that pass are
appended to the pool and the next pass starts.

Level ``j`` of the chain records the constraints found in pass ``j``; the
set accumulated through level ``j`` cuts out the submanifold ``M_(j+1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import sympy as sp

from .errors import ChartMismatchError
from .exterior import Chart, DifferentialForm, KVectorField, VectorField, interior
from .lagrangian import LagrangianSystem, reeb_free_forms, reeb_free_rhs
from .linalg import CONST, Echelon, rref
from .structures import HamiltonianSystem, reeb_fields
from .symbolic import (
    Expr,
    TriangularSet,
    Unknown,
    canonical_polynomial,
    normalize,
    render,
)

System = Union[HamiltonianSystem, LagrangianSystem]

ROLE_LETTER = {"base": "A", "position": "B", "velocity": "C", "momentum": "C", "gauge": "D"}


def unknown_name(chart: Chart, coordinate: str, alpha: int) -> str:
    c = chart.coordinate(coordinate)
    peers = [x.name for x in chart.coordinates if ROLE_LETTER[x.role] == ROLE_LETTER[c.role]]
    return f"{ROLE_LETTER[c.role]}{peers.index(c.name) + 1}_{chart.labels[alpha - 1]}"


@dataclass(frozen=True)
class Ansatz:
    chart: Chart
    mode: str
    field: KVectorField
    unknowns: tuple


def build_ansatz(chart: Chart, mode: str = "general") -> Ansatz:
    """X_a = d/dx^a + sum over non-base coordinates of unknown coefficients.

    The eta-conditions fix the base components; in ``sopde`` mode the
    position components are the velocities v^i_a.
    """
    if mode not in ("general", "sopde"):
        raise ValueError(f"unknown ansatz mode {mode!r}")
    if mode == "sopde" and not chart.role("velocity"):
        raise ChartMismatchError("sopde mode needs a velocity chart")
    fields, unknowns = [], []
    for a, x in enumerate(chart.base, start=1):
        comps = {x.name: 1}
        for c in chart.coordinates:
            if c.role == "base":
                continue
            if mode == "sopde" and c.role == "position":
                comps[c.name] = chart.fibre(c.index[0], a, "velocity").symbol
                continue
            u = Unknown(unknown_name(chart, c.name, a))
            unknowns.append(u)
            comps[c.name] = u
        fields.append(VectorField.from_dict(chart, comps))
    return Ansatz(chart, mode, KVectorField(tuple(fields)), tuple(unknowns))


@dataclass(frozen=True)
class Equation:
    label: str
    expr: Expr


def _forms(sys: System, formulation: str) -> tuple[tuple, DifferentialForm]:
    if isinstance(sys, HamiltonianSystem):
        return sys.structure.omega, sys.gamma_tilde
    if formulation == "reeb":
        return sys.omega, sys.lagrangian_rhs()
    if formulation == "reeb_free":
        _, Omega = reeb_free_forms(sys)
        return Omega, reeb_free_rhs(sys)
    raise ValueError(f"unknown formulation {formulation!r}")


def assemble_equations(sys: System, ansatz: Ansatz, formulation: str = "reeb") -> list[Equation]:
    """Coefficients of sum_a i(X_a) omega^a - rhs, one per coordinate differential."""
    omega, rhs = _forms(sys, formulation)
    chart = sys.chart
    if ansatz.chart != chart:
        raise ChartMismatchError("ansatz and system live on different charts")
    lhs = DifferentialForm.zero(chart, 1)
    for X, w in zip(ansatz.field, omega):
        lhs = lhs + interior(X, w)
    residual = lhs - rhs
    return [Equation(f"d{chart.coordinates[i].name}", c) for (i,), c in residual.terms]


def gauge_compatibility(sys: HamiltonianSystem) -> list[Equation]:
    """dh/dz for every coordinate-aligned gauge direction z."""
    out = []
    for z in sys.structure.gauge_coordinates:
        dz = normalize(sp.diff(sys.h, sys.chart.symbol(z)))
        if dz != 0:
            out.append(Equation(f"d/d{z}", dz))
    return out


# ---------------------------------------------------------------- solving


@dataclass
class SolveResult:
    echelon: Echelon
    assignments: dict
    free: list
    constraints: list
    assumptions: list
    undecided: list

    @property
    def inconsistent(self) -> bool:
        return any(c == 1 for c in self.constraints)


def _linear_row(e: Expr, unknowns: Sequence[Unknown]) -> dict:
    row = {}
    for u in unknowns:
        c = sp.diff(e, u)
        if c != 0:
            row[u] = normalize(c)
    row[CONST] = normalize(e.xreplace({u: 0 for u in unknowns}))
    return row


def split_solve(equations: Sequence[Expr], unknowns: Sequence[Unknown], S: TriangularSet) -> SolveResult:
    """Eliminate unknowns; rows with no unknown left become constraints."""
    rows = [_linear_row(normalize(e), unknowns) for e in equations]
    ech = rref(rows, list(unknowns), S)
    candidates, undecided = [], list(ech.undecided)
    for row in ech.leftover:
        if set(row) == {CONST}:
            candidates.append(row[CONST])
        else:
            undecided.extend(k for k in row if k is not CONST and k not in undecided)
    new, T = [], S
    for c in candidates:
        if T.reduce(c) == 0:
            continue
        canon = canonical_polynomial(T.reduce(c), S.coordinates)
        new.append(canon)
        if canon == 1:
            break
        T, _ = T.with_constraint(canon)
    assignments = {u: ech.value(u) for u in unknowns if u in ech.pivots}
    free = [u for u in unknowns if u not in ech.pivots]
    return SolveResult(ech, assignments, free, new, list(ech.assumptions), undecided)


def tangency_step(constraints: Sequence[Expr], ansatz: Ansatz, S: TriangularSet, names: Sequence[str] | None = None) -> list[Equation]:
    """X_a(zeta) reduced modulo S, for each constraint zeta and each a."""
    out = []
    for j, z in enumerate(constraints):
        zname = names[j] if names else f"zeta{j + 1}"
        for a, X in enumerate(ansatz.field, start=1):
            e = S.reduce(X(z))
            if e != 0:
                out.append(Equation(f"X_{ansatz.chart.labels[a - 1]}({zname})", e))
    return out


# ---------------------------------------------------------------- chain


@dataclass(frozen=True)
class Constraint:
    name: str
    expr: Expr
    origin: str  # compatibility | equations | tangency


@dataclass
class Level:
    index: int
    equations: list
    constraints: list
    assignments: dict
    free: list
    assumptions: list
    set: TriangularSet


@dataclass
class ConstraintChain:
    kind: str  # hamiltonian | lagrangian
    mode: str
    formulation: str
    ansatz: Ansatz
    levels: list
    status: str
    final_set: TriangularSet
    assignments: dict
    free: list
    assumptions: list
    standing_assumptions: list
    warnings: list = field(default_factory=list)

    @property
    def constraints(self) -> list:
        return [c for lv in self.levels for c in lv.constraints]

    @property
    def dimension(self) -> int | None:
        """Generic dimension of the final constraint submanifold (None when empty)."""
        if self.final_set.inconsistent:
            return None
        return max(self.ansatz.chart.dimension - self.final_set.size, 0)

    @property
    def solution(self) -> KVectorField:
        S = self.final_set
        sub = dict(self.assignments)
        return self.ansatz.field.map(lambda c: S.reduce(c.xreplace(sub)))


def _unique_extend(target: list, items) -> list:
    new = []
    for x in items:
        if x not in target:
            target.append(x)
            new.append(x)
    return new


def run(sys: System, mode: str = "general", formulation: str = "reeb", max_levels: int = 20) -> ConstraintChain:
    chart = sys.chart
    hamiltonian = isinstance(sys, HamiltonianSystem)
    if hamiltonian and mode not in ("general", "hamiltonian"):
        raise ValueError("Hamiltonian systems use the general ansatz")
    ansatz = build_ansatz(chart, "general" if hamiltonian else mode)
    structure = sys.structure
    reeb_fields(structure, strict=False)
    warnings = [f"Reeb condition fails: {w}" for w in structure.reeb_violations()]

    S = TriangularSet(chart.symbols, base=tuple(x.symbol for x in chart.base))
    assumptions: list = []
    levels: list = []
    pool: list = []
    new_equations = assemble_equations(sys, ansatz, formulation)
    seeded: list = []
    seeded_assumptions: list = []
    if hamiltonian:
        for eq in gauge_compatibility(sys):
            canon = canonical_polynomial(S.reduce(eq.expr), S.coordinates)
            if canon != 0 and S.reduce(canon) != 0:
                S, a = S.with_constraint(canon)
                seeded_assumptions += _unique_extend(assumptions, a)
                seeded.append(Constraint(f"xi{len(seeded) + 1}", canon, "compatibility"))
    count = len(seeded)
    status = None
    result = None
    index = 0
    while True:
        pool.extend(new_equations)
        found = seeded if index == 0 else []
        level_assumptions = list(seeded_assumptions) if index == 0 else []
        origin = "equations" if index == 0 else "tangency"
        if S.inconsistent:
            result = split_solve([], ansatz.unknowns, S)
            status = "empty"
        while status is None:
            result = split_solve([e.expr for e in pool], ansatz.unknowns, S)
            level_assumptions += _unique_extend(assumptions, result.assumptions)
            if result.inconsistent:
                count += 1
                found.append(Constraint(f"zeta{count}", sp.Integer(1), origin))
                S, _ = S.with_constraint(sp.Integer(1))
                status = "empty"
                break
            if not result.constraints:
                if result.undecided:
                    status = "undecided"
                break
            for c in result.constraints:
                count += 1
                found.append(Constraint(f"zeta{count}", c, origin))
            S, a = S.extended(result.constraints)
            level_assumptions += _unique_extend(assumptions, a)
            if S.inconsistent:
                status = "empty"
                break
        levels.append(
            Level(index, list(new_equations), list(found), dict(result.assignments), list(result.free), level_assumptions, S)
        )
        if status is None and S.size >= chart.dimension:
            status = "zero-dimensional"
        if status is not None:
            break
        if not found:
            status = "stable"
            break
        if index + 1 >= max_levels:
            status = "non-terminating"
            break
        new_equations = tangency_step([c.expr for c in found], ansatz, S, [c.name for c in found])
        index += 1

    return ConstraintChain(
        kind="hamiltonian" if hamiltonian else "lagrangian",
        mode=ansatz.mode,
        formulation="reeb" if hamiltonian else formulation,
        ansatz=ansatz,
        levels=levels,
        status=status,
        final_set=S,
        assignments=dict(result.assignments),
        free=list(result.free),
        assumptions=assumptions,
        standing_assumptions=list(sys.standing_assumptions),
        warnings=warnings,
    )


# ---------------------------------------------------------------- SOPDE symmetry


@dataclass(frozen=True)
class SymmetryEntry:
    alpha: int
    beta: int
    i: int
    residual: Expr
    status: str  # zero | free-choice | forced-nonzero


def sopde_symmetry_check(chain: ConstraintChain) -> list[SymmetryEntry]:
    """(X_a)^i_b - (X_b)^i_a for a < b, reduced on the final constraint set."""
    chart = chain.ansatz.chart
    if not chart.role("velocity") or chart.k < 2:
        return []
    X = chain.solution
    free = set(chain.free)
    out = []
    for a in range(1, chart.k + 1):
        for b in range(a + 1, chart.k + 1):
            for q in chart.positions:
                i = q.index[0]
                vb = chart.fibre(i, b, "velocity")
                va = chart.fibre(i, a, "velocity")
                r = chain.final_set.reduce(X[a - 1].component(vb.name) - X[b - 1].component(va.name))
                if r == 0:
                    status = "zero"
                elif r.free_symbols & free:
                    status = "free-choice"
                else:
                    status = "forced-nonzero"
                out.append(SymmetryEntry(a, b, i, r, status))
    return out


def describe_assignment(u: Unknown, value: Expr) -> str:
    return f"{u.name} = {render(value)}"
