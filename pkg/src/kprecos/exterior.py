"""Coordinate charts, differential forms and (k-)vector fields.

Forms are stored sparsely: a degree-``d`` form is a map from strictly
increasing tuples of coordinate positions to nonzero normalized
coefficients.  Sign bookkeeping happens once, when terms are inserted.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import sympy as sp

from .errors import ChartMismatchError
from .symbolic import Expr, Unknown, generators, is_opaque, normalize, render

ROLES = ("base", "position", "velocity", "momentum", "gauge")


@dataclass(frozen=True)
class Coordinate:
    name: str
    role: str
    # base: (alpha,), position: (i,), velocity/momentum: (i, alpha), gauge: (j,); 1-based
    index: tuple

    @property
    def symbol(self) -> sp.Symbol:
        return sp.Symbol(self.name)


@dataclass(frozen=True)
class Chart:
    """Ordered, role-tagged coordinate system plus parameters and opaque functions."""

    coordinates: tuple
    parameters: tuple = ()
    functions: tuple = ()  # ((name, (arg, ...)), ...); arguments are base coordinate names

    def __post_init__(self):
        names = [c.name for c in self.coordinates] + list(self.parameters) + [f for f, _ in self.functions]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ChartMismatchError(f"duplicate names in chart: {sorted(dup)}")
        for c in self.coordinates:
            if c.role not in ROLES:
                raise ChartMismatchError(f"unknown role {c.role!r} for {c.name}")
        k, n = self.k, self.n
        for c in self.coordinates:
            if c.role in ("velocity", "momentum"):
                i, a = c.index
                if not (1 <= i <= n and 1 <= a <= k):
                    raise ChartMismatchError(f"fibre coordinate {c.name} has index {c.index} outside n={n}, k={k}")
        base_names = {c.name for c in self.base}
        for f, args in self.functions:
            bad = set(args) - base_names
            if bad:
                raise ChartMismatchError(f"opaque function {f} depends on non-base coordinates {sorted(bad)}")

    # -- construction helpers

    @classmethod
    def build(
        cls,
        base: Sequence[str],
        positions: Sequence[str],
        fibres: Mapping[str, tuple] | None = None,
        fibre_role: str = "velocity",
        gauge: Sequence[str] = (),
        parameters: Sequence[str] = (),
        functions: Mapping[str, Sequence[str]] | None = None,
    ) -> "Chart":
        """``fibres`` maps a fibre name to ``(position name, base name)``."""
        coords = [Coordinate(b, "base", (a + 1,)) for a, b in enumerate(base)]
        coords += [Coordinate(q, "position", (i + 1,)) for i, q in enumerate(positions)]
        pos_index = {q: i + 1 for i, q in enumerate(positions)}
        base_index = {b: a + 1 for a, b in enumerate(base)}
        for name, (q, b) in (fibres or {}).items():
            if q not in pos_index or b not in base_index:
                raise ChartMismatchError(f"fibre {name} refers to unknown coordinates {q!r}, {b!r}")
            coords.append(Coordinate(name, fibre_role, (pos_index[q], base_index[b])))
        coords += [Coordinate(z, "gauge", (j + 1,)) for j, z in enumerate(gauge)]
        funcs = tuple((f, tuple(args)) for f, args in (functions or {}).items())
        return cls(tuple(coords), tuple(parameters), funcs)

    @classmethod
    def velocity_chart(cls, base, positions, template="v{i}_{a}", **kw) -> "Chart":
        return cls.build(base, positions, fibre_names(base, positions, template), "velocity", **kw)

    @classmethod
    def momentum_chart(cls, base, positions, template="p{i}_{a}", **kw) -> "Chart":
        return cls.build(base, positions, fibre_names(base, positions, template), "momentum", **kw)

    # -- accessors

    @cached_property
    def symbols(self) -> tuple:
        return tuple(c.symbol for c in self.coordinates)

    @cached_property
    def _position(self) -> dict:
        return {c.name: i for i, c in enumerate(self.coordinates)}

    def index(self, c) -> int:
        name = c if isinstance(c, str) else getattr(c, "name", str(c))
        try:
            return self._position[name]
        except KeyError:
            raise ChartMismatchError(f"{name} is not a coordinate of this chart") from None

    def symbol(self, name: str) -> sp.Symbol:
        return self.coordinates[self.index(name)].symbol

    def coordinate(self, c) -> Coordinate:
        return self.coordinates[self.index(c)]

    def role(self, role: str) -> list:
        return [c for c in self.coordinates if c.role == role]

    @property
    def base(self) -> list:
        return self.role("base")

    @property
    def positions(self) -> list:
        return self.role("position")

    @property
    def fibres(self) -> list:
        return [c for c in self.coordinates if c.role in ("velocity", "momentum")]

    @property
    def gauge(self) -> list:
        return self.role("gauge")

    @property
    def k(self) -> int:
        return len(self.base)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def fibre(self, i: int, a: int, role: str | None = None) -> Coordinate | None:
        for c in self.fibres:
            if c.index == (i, a) and (role is None or c.role == role):
                return c
        return None

    @cached_property
    def labels(self) -> tuple:
        """Short labels of the base directions, used to name ansatz unknowns."""
        names = [c.name for c in self.base]
        m = [re.fullmatch(r"([A-Za-z_]+)(\d+)", s) for s in names]
        if names and all(m) and len({x.group(1) for x in m}) == 1:
            return tuple(x.group(2) for x in m)
        return tuple(names)

    @cached_property
    def parameter_symbols(self) -> tuple:
        return tuple(sp.Symbol(p) for p in self.parameters)

    @cached_property
    def function_applications(self) -> dict:
        return {f: sp.Function(f)(*[sp.Symbol(a) for a in args]) for f, args in self.functions}

    def namespace(self) -> dict:
        ns = {c.name: c.symbol for c in self.coordinates}
        ns.update({p: sp.Symbol(p) for p in self.parameters})
        ns.update(self.function_applications)
        return ns

    def check(self, e: Expr, allow_unknowns: bool = True) -> None:
        known = set(self.symbols) | set(self.parameter_symbols)
        apps = set(self.function_applications.values())
        for g in generators(e):
            if isinstance(g, Unknown) and allow_unknowns:
                continue
            if is_opaque(g):
                core = g.expr if isinstance(g, sp.Derivative) else g
                if core in apps:
                    continue
            elif g in known:
                continue
            raise ChartMismatchError(f"{g} does not belong to this chart")


def fibre_names(base: Sequence[str], positions: Sequence[str], template: str) -> dict:
    """Expand a naming template; ``{i}``/``{a}`` are 1-based indices, ``{q}``/``{x}`` names."""
    out = {}
    for i, q in enumerate(positions, start=1):
        for a, x in enumerate(base, start=1):
            out[template.format(i=i, a=a, q=q, x=x)] = (q, x)
    return out


# ---------------------------------------------------------------- forms


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple]:
    """Sign of the permutation sorting ``idx`` (0 if an index repeats)."""
    if len(set(idx)) != len(idx):
        return 0, ()
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


@dataclass(frozen=True)
class DifferentialForm:
    chart: Chart
    degree: int
    terms: tuple = ()  # ((sorted index tuple, coefficient), ...)

    @classmethod
    def from_terms(cls, chart: Chart, degree: int, items: Iterable[tuple]) -> "DifferentialForm":
        acc: dict = {}
        for idx, coeff in items:
            idx = tuple(chart.index(i) if not isinstance(i, int) else i for i in idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not have length {degree}")
            sign, key = _sort_sign(idx)
            if sign == 0:
                continue
            acc[key] = acc.get(key, 0) + sign * sp.sympify(coeff)
        terms = []
        for key in sorted(acc):
            c = normalize(acc[key])
            if c != 0:
                terms.append((key, c))
        return cls(chart, degree, tuple(terms))

    @classmethod
    def zero(cls, chart: Chart, degree: int) -> "DifferentialForm":
        return cls(chart, degree, ())

    @classmethod
    def function(cls, chart: Chart, f: Expr) -> "DifferentialForm":
        return cls.from_terms(chart, 0, [((), f)])

    @classmethod
    def basis(cls, chart: Chart, *names) -> "DifferentialForm":
        """``d names[0] ^ d names[1] ^ ...``"""
        return cls.from_terms(chart, len(names), [(tuple(names), 1)])

    @property
    def coefficients(self) -> dict:
        return dict(self.terms)

    def coefficient(self, *names) -> Expr:
        idx = tuple(self.chart.index(n) for n in names)
        sign, key = _sort_sign(idx)
        return sign * self.coefficients.get(key, sp.Integer(0))

    def is_zero(self) -> bool:
        return not self.terms

    def _same(self, other: "DifferentialForm") -> None:
        if self.chart != other.chart:
            raise ChartMismatchError("forms live on different charts")

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        self._same(other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        return DifferentialForm.from_terms(self.chart, self.degree, self.terms + other.terms)

    def __neg__(self) -> "DifferentialForm":
        return self.scale(-1)

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, f: Expr) -> "DifferentialForm":
        return DifferentialForm.from_terms(self.chart, self.degree, [(i, f * c) for i, c in self.terms])

    def map(self, fn) -> "DifferentialForm":
        return DifferentialForm.from_terms(self.chart, self.degree, [(i, fn(c)) for i, c in self.terms])

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for idx, c in self.terms:
            basis = "^".join("d" + self.chart.coordinates[i].name for i in idx)
            if not idx:
                parts.append(f"({render(c)})")
            else:
                parts.append(f"({render(c)})*{basis}")
        return " + ".join(parts)

    __str__ = render


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    a._same(b)
    items = []
    for (i, x), (j, y) in itertools.product(a.terms, b.terms):
        items.append((i + j, x * y))
    return DifferentialForm.from_terms(a.chart, a.degree + b.degree, items)


def ext_d(a: DifferentialForm) -> DifferentialForm:
    chart = a.chart
    items = []
    for idx, c in a.terms:
        for m, sym in enumerate(chart.symbols):
            if m in idx:
                continue
            dc = sp.diff(c, sym)
            if dc != 0:
                items.append(((m,) + idx, dc))
    return DifferentialForm.from_terms(chart, a.degree + 1, items)


def d(chart: Chart, f: Expr) -> DifferentialForm:
    return ext_d(DifferentialForm.function(chart, f))


# ---------------------------------------------------------------- vector fields


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    components: tuple = ()  # ((coordinate position, coefficient), ...), nonzero, sorted

    @classmethod
    def from_dict(cls, chart: Chart, comps: Mapping) -> "VectorField":
        acc: dict = {}
        for key, v in comps.items():
            i = key if isinstance(key, int) else chart.index(key)
            acc[i] = acc.get(i, 0) + sp.sympify(v)
        items = []
        for i in sorted(acc):
            c = normalize(acc[i])
            if c != 0:
                items.append((i, c))
        return cls(chart, tuple(items))

    @classmethod
    def coordinate_field(cls, chart: Chart, name) -> "VectorField":
        return cls.from_dict(chart, {name: 1})

    def component(self, c) -> Expr:
        i = c if isinstance(c, int) else self.chart.index(c)
        return dict(self.components).get(i, sp.Integer(0))

    def __call__(self, f: Expr) -> Expr:
        """Directional derivative of a function."""
        syms = self.chart.symbols
        return normalize(sum((v * sp.diff(f, syms[i]) for i, v in self.components), sp.Integer(0)))

    def map(self, fn) -> "VectorField":
        return VectorField.from_dict(self.chart, {i: fn(c) for i, c in self.components})

    def __add__(self, other: "VectorField") -> "VectorField":
        comps = dict(self.components)
        for i, c in other.components:
            comps[i] = comps.get(i, 0) + c
        return VectorField.from_dict(self.chart, comps)

    def render(self) -> str:
        if not self.components:
            return "0"
        return " + ".join(
            f"({render(c)})*d/d{self.chart.coordinates[i].name}" for i, c in self.components
        )

    __str__ = render


@dataclass(frozen=True)
class KVectorField:
    fields: tuple

    def __post_init__(self):
        if self.fields and len(self.fields) != self.fields[0].chart.k:
            raise ValueError(f"a k-vector field needs {self.fields[0].chart.k} components, got {len(self.fields)}")

    def __iter__(self):
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, a: int) -> VectorField:
        return self.fields[a]

    def map(self, fn) -> "KVectorField":
        return KVectorField(tuple(X.map(fn) for X in self.fields))


def interior(v: VectorField, a: DifferentialForm) -> DifferentialForm:
    if v.chart != a.chart:
        raise ChartMismatchError("vector field and form live on different charts")
    if a.degree < 1:
        raise ValueError("interior product of a 0-form is undefined")
    comps = dict(v.components)
    items = []
    for idx, c in a.terms:
        for p, i in enumerate(idx):
            if i in comps:
                items.append((idx[:p] + idx[p + 1:], (-1) ** p * comps[i] * c))
    return DifferentialForm.from_terms(a.chart, a.degree - 1, items)


def pullback(phi: Mapping, a: DifferentialForm, source: Chart) -> DifferentialForm:
    """Pull ``a`` back along the coordinate map ``phi`` (target name -> source expression)."""
    target = a.chart
    images = {}
    for c in target.coordinates:
        for key in (c.name, c.symbol):
            if key in phi:
                images[c.name] = sp.sympify(phi[key])
                break
        else:
            raise ChartMismatchError(f"map does not assign target coordinate {c.name}")
    sub = {c.symbol: images[c.name] for c in target.coordinates}
    differentials = [d(source, images[c.name]) for c in target.coordinates]
    result = DifferentialForm.zero(source, a.degree)
    for idx, coeff in a.terms:
        term = DifferentialForm.function(source, coeff.xreplace(sub))
        for i in idx:
            term = wedge(term, differentials[i])
        result = result + term
    return result
