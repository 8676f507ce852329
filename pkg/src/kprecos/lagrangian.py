"""Lagrangian field theory on R^k x T^1_k Q and its Legendre map."""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import sympy as sp

from .errors import ChartMismatchError, LegendreError
from .exterior import Chart, DifferentialForm, VectorField, d, ext_d, pullback
from .linalg import CONST, generic_rank, rref
from .structures import (
    HamiltonianSystem,
    KPrecosymplecticStructure,
    canonical_structure,
    standing_assumptions,
)
from .symbolic import Expr, generators, normalize, render


def _require_velocity_chart(chart: Chart) -> None:
    if not chart.role("velocity") or chart.role("momentum"):
        raise ChartMismatchError("a velocity chart (x, q, v) is required")


def _velocity(chart: Chart, i: int, a: int) -> sp.Symbol:
    c = chart.fibre(i, a, "velocity")
    if c is None:
        raise ChartMismatchError(f"no velocity coordinate for (i={i}, alpha={a})")
    return c.symbol


def k_tangent_apply(chart: Chart, alpha: int, v: VectorField) -> VectorField:
    """J^alpha = sum_i d/dv^i_alpha (x) dq^i, with ``alpha`` 1-based."""
    _require_velocity_chart(chart)
    comps = {}
    for q in chart.positions:
        c = v.component(q.name)
        if c != 0:
            comps[_velocity(chart, q.index[0], alpha)] = c
    return VectorField.from_dict(chart, {str(s): c for s, c in comps.items()})


def liouville(chart: Chart, alpha: int | None = None) -> VectorField:
    """Delta_alpha = sum_i v^i_alpha d/dv^i_alpha; ``alpha=None`` gives the total field."""
    _require_velocity_chart(chart)
    comps = {}
    for c in chart.role("velocity"):
        if alpha is None or c.index[1] == alpha:
            comps[c.name] = c.symbol
    return VectorField.from_dict(chart, comps)


def _numeric_point(e_list: Sequence[Expr], rng: random.Random) -> dict:
    gens = set()
    for e in e_list:
        gens |= generators(e)
    ordered = sorted(gens, key=sp.default_sort_key)
    return {g: sp.Rational(rng.randint(-9, 9) or 1, rng.randint(1, 5)) for g in ordered}


@dataclass(frozen=True)
class LagrangianSystem:
    chart: Chart
    L: Expr
    name: str = ""

    def __post_init__(self):
        _require_velocity_chart(self.chart)
        self.chart.check(self.L, allow_unknowns=False)
        object.__setattr__(self, "L", normalize(self.L))

    @cached_property
    def theta(self) -> tuple:
        """theta^alpha_L = sum_i dL/dv^i_alpha dq^i."""
        out = []
        for a in range(1, self.chart.k + 1):
            terms = [((q.name,), sp.diff(self.L, _velocity(self.chart, q.index[0], a))) for q in self.chart.positions]
            out.append(DifferentialForm.from_terms(self.chart, 1, terms))
        return tuple(out)

    @cached_property
    def omega(self) -> tuple:
        return tuple(-ext_d(t) for t in self.theta)

    @cached_property
    def energy(self) -> Expr:
        return normalize(liouville(self.chart)(self.L) - self.L)

    @cached_property
    def structure(self) -> KPrecosymplecticStructure:
        eta = tuple(DifferentialForm.basis(self.chart, x.name) for x in self.chart.base)
        return KPrecosymplecticStructure(self.chart, eta, self.omega)

    @cached_property
    def hessian(self) -> list:
        vs = [c.symbol for c in self.chart.role("velocity")]
        return [[normalize(sp.diff(self.L, a, b)) for b in vs] for a in vs]

    @cached_property
    def hessian_rank(self) -> int:
        return generic_rank(self.hessian)[0]

    @cached_property
    def regularity(self) -> str:
        size = len(self.hessian)
        if self.hessian_rank == size:
            return "regular"
        rng = random.Random(0)
        flat = [x for row in self.hessian for x in row]
        for _ in range(10):
            point = _numeric_point(flat, rng)
            M = sp.Matrix(self.hessian).xreplace(point)
            if M.rank() != self.hessian_rank:
                return "undetermined"
        try:
            legendre(self)
        except LegendreError:
            return "undetermined"
        return "almost-regular candidate"

    @property
    def standing_assumptions(self) -> list:
        return standing_assumptions(self.L, self.chart)

    def lagrangian_rhs(self) -> DifferentialForm:
        """dE_L + sum_a dL/dx^a dx^a."""
        out = d(self.chart, self.energy)
        for x in self.chart.base:
            out = out + DifferentialForm.basis(self.chart, x.name).scale(sp.diff(self.L, x.symbol))
        return out


def build_lagrangian_system(chart: Chart, L: Expr, name: str = "") -> LagrangianSystem:
    return LagrangianSystem(chart, L, name)


def reeb_free_forms(sys: LagrangianSystem) -> tuple[tuple, tuple]:
    """Theta^a = theta^a + sum_b (delta^a_b L - Delta^a_b L) dx^b and Omega^a = -dTheta^a.

    Here ``Delta^a_b = sum_i v^i_b d/dv^i_a``.
    """
    chart = sys.chart
    Theta, Omega = [], []
    for a in range(1, chart.k + 1):
        form = sys.theta[a - 1]
        for b, x in enumerate(chart.base, start=1):
            delta_ab = sum(
                (_velocity(chart, q.index[0], b) * sp.diff(sys.L, _velocity(chart, q.index[0], a)) for q in chart.positions),
                sp.Integer(0),
            )
            coeff = (sys.L if a == b else 0) - delta_ab
            form = form + DifferentialForm.basis(chart, x.name).scale(coeff)
        Theta.append(form)
        Omega.append(-ext_d(form))
    return tuple(Theta), tuple(Omega)


def reeb_free_rhs(sys: LagrangianSystem) -> DifferentialForm:
    return d(sys.chart, sys.L).scale(sys.chart.k - 1)


# ---------------------------------------------------------------- Legendre map


@dataclass(frozen=True)
class LegendreMap:
    source: Chart
    target: Chart
    assignment: tuple  # ((target name, expression over source), ...) in target chart order

    @property
    def mapping(self) -> dict:
        return dict(self.assignment)

    @property
    def momenta(self) -> dict:
        return {c.name: self.mapping[c.name] for c in self.target.fibres}

    @cached_property
    def primary_constraints(self) -> tuple:
        """p - dL/dv for every momentum fixed as a function of (x, q)."""
        vel = {c.symbol for c in self.source.role("velocity")}
        out = []
        for c in self.target.fibres:
            e = self.mapping[c.name]
            if not (e.free_symbols & vel):
                out.append(normalize(c.symbol - e))
        return tuple(out)


def momentum_chart_for(chart: Chart, names: Mapping[str, tuple] | str | None = None) -> Chart:
    """Momentum chart matching a velocity chart; ``names`` is a template or an explicit table."""
    base = [c.name for c in chart.base]
    positions = [c.name for c in chart.positions]
    kw = dict(parameters=chart.parameters, functions=dict(chart.functions))
    if names is None or isinstance(names, str):
        return Chart.momentum_chart(base, positions, names or "p{i}_{a}", **kw)
    return Chart.build(base, positions, dict(names), "momentum", **kw)


def legendre(sys: LagrangianSystem, momenta: Mapping[str, tuple] | str | None = None) -> LegendreMap:
    target = momentum_chart_for(sys.chart, momenta)
    assignment = []
    for c in target.coordinates:
        if c.role == "momentum":
            i, a = c.index
            assignment.append((c.name, normalize(sp.diff(sys.L, _velocity(sys.chart, i, a)))))
        else:
            assignment.append((c.name, c.symbol))
    lm = LegendreMap(sys.chart, target, tuple(assignment))
    canon = canonical_structure(target)
    theta = _canonical_theta(target)
    for a in range(sys.chart.k):
        if pullback(lm.mapping, theta[a], sys.chart) != sys.theta[a]:
            raise LegendreError(f"pullback of theta^{a + 1} differs from theta_L")
        if pullback(lm.mapping, canon.omega[a], sys.chart) != sys.omega[a]:
            raise LegendreError(f"pullback of omega^{a + 1} differs from omega_L")
    return lm


def _canonical_theta(chart: Chart) -> list:
    """theta^a = sum_i p_i^a dq^i; its differential is -omega^a."""
    out = []
    for a in range(1, chart.k + 1):
        terms = [((chart.positions[p.index[0] - 1].name,), p.symbol) for p in chart.fibres if p.index[1] == a]
        out.append(DifferentialForm.from_terms(chart, 1, terms))
    return out


@dataclass(frozen=True)
class PrimaryImage:
    """The submanifold P = FL(R^k x T^1_k Q) in reduced coordinates."""

    chart: Chart
    embedding: tuple  # ((canonical coordinate, expression over P), ...)
    constraints: tuple  # p - f(x, q, p_kept) in canonical coordinates
    velocity_solution: tuple  # ((velocity, expression over P and free velocities), ...)


def primary_image(sys: LagrangianSystem, lm: LegendreMap, p_coordinates: Sequence[str] | None = None) -> PrimaryImage:
    src, tgt = sys.chart, lm.target
    vel = [c.symbol for c in src.role("velocity")]
    vel_set = set(vel)
    mom = lm.momenta
    for name, e in mom.items():
        for v in vel:
            if sp.diff(e, v, 2) != 0 or any(sp.diff(e, v, w) != 0 for w in vel if w != v):
                raise LegendreError(f"momentum {name} is not affine in the velocities")

    dependent = [n for n, e in mom.items() if e.free_symbols & vel_set]
    if p_coordinates is not None:
        kept = [n for n in dependent if n in set(p_coordinates)]
        unknown = set(p_coordinates) - {c.name for c in tgt.coordinates}
        if unknown:
            raise LegendreError(f"P coordinates not in the momentum chart: {sorted(unknown)}")
    else:
        kept = []
        rank = 0
        for n in dependent:
            trial = kept + [n]
            r, _ = generic_rank([[sp.diff(mom[m], v) for v in vel] for m in trial])
            if r > rank:
                kept, rank = trial, r
    rows = []
    for n in kept:
        e = mom[n]
        row = {v: -sp.diff(e, v) for v in vel if sp.diff(e, v) != 0}
        row[CONST] = tgt.symbol(n) - e.xreplace({v: 0 for v in vel})
        rows.append(row)
    ech = rref(rows, vel)
    if ech.leftover:
        raise LegendreError("chosen P momenta are not independent functions of the velocities")
    solution = {v: ech.value(v) for v in ech.pivots}

    keep_names = [c.name for c in tgt.base + tgt.positions] + kept
    fibres = {c.name: (tgt.positions[c.index[0] - 1].name, tgt.base[c.index[1] - 1].name) for c in tgt.fibres if c.name in kept}
    P = Chart.build(
        [c.name for c in tgt.base],
        [c.name for c in tgt.positions],
        fibres,
        "momentum",
        parameters=tgt.parameters,
        functions=dict(tgt.functions),
    )
    embedding = []
    constraints = []
    for c in tgt.coordinates:
        if c.name in keep_names:
            embedding.append((c.name, c.symbol))
            continue
        e = normalize(mom[c.name].xreplace(solution))
        hit = e.free_symbols & vel_set
        if hit:
            raise LegendreError(
                f"momentum {c.name} is not determined on P (depends on {sorted(map(str, hit))}); choose other P coordinates"
            )
        embedding.append((c.name, e))
        constraints.append(normalize(c.symbol - e))
    return PrimaryImage(P, tuple(embedding), tuple(constraints), tuple(solution.items()))


def hamiltonianize(
    sys: LagrangianSystem, lm: LegendreMap | None = None, p_coordinates: Sequence[str] | None = None
) -> tuple[HamiltonianSystem, PrimaryImage]:
    """Hamiltonian system on P with FL^*h = E_L and the induced forms."""
    lm = lm or legendre(sys)
    img = primary_image(sys, lm, p_coordinates)
    vel = {c.symbol for c in sys.chart.role("velocity")}
    h = normalize(sys.energy.xreplace(dict(img.velocity_solution)))
    left = sorted(h.free_symbols & vel, key=str)
    if left:
        raise LegendreError(
            "the energy is not FL-projectable: it still depends on fibre direction(s) "
            + ", ".join(f"d/d{v}" for v in left)
        )
    canon = canonical_structure(lm.target)
    emb = dict(img.embedding)
    eta = tuple(pullback(emb, e, img.chart) for e in canon.eta)
    omega = tuple(pullback(emb, w, img.chart) for w in canon.omega)
    structure = KPrecosymplecticStructure(img.chart, eta, omega)
    return HamiltonianSystem(structure, h, sys.name), img


def energy_check(sys: LagrangianSystem, lm: LegendreMap, h: Expr, img: PrimaryImage) -> Expr:
    """FL^*h - E_L, which vanishes identically."""
    sub = {img.chart.symbol(n): lm.mapping[n] for n in (c.name for c in img.chart.coordinates)}
    return normalize(h.xreplace(sub) - sys.energy)


def describe_legendre(lm: LegendreMap) -> list[str]:
    return [f"{n} = {render(e)}" for n, e in lm.assignment if lm.target.coordinate(n).role == "momentum"]
