"""Rational-function kernel over a coordinate chart.

Expressions are plain sympy expressions built from coordinate symbols,
parameter symbols, opaque function applications such as ``sigma(t, s)``
(with their formal partials as ``Derivative`` nodes) and, during solving,
:class:`Unknown` symbols.  Every public operation returns the normal form
produced by :func:`normalize`.

Restriction to a constraint locus is represented by :class:`TriangularSet`:
constraints that are linear in some coordinate are solved for it, the rest
are kept as polynomial residuals and handled by multivariate division.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import sympy as sp
from sympy.core.function import AppliedUndef
from sympy.printing.str import StrPrinter

from .errors import CyclicBindingError, ChartMismatchError, DegenerateInputError

Expr = sp.Expr

ZERO = sp.Integer(0)
ONE = sp.Integer(1)


class Unknown(sp.Symbol):
    """A coefficient of a k-vector field ansatz that the solver may determine."""


def is_opaque(atom) -> bool:
    return isinstance(atom, AppliedUndef) or (
        isinstance(atom, sp.Derivative) and isinstance(atom.expr, AppliedUndef)
    )


def generators(e: Expr) -> set:
    """Symbols and opaque applications that act as polynomial variables in ``e``."""
    gens = set()
    stack = [sp.sympify(e)]
    while stack:
        a = stack.pop()
        if isinstance(a, sp.Symbol) or is_opaque(a):
            gens.add(a)
        else:
            stack.extend(a.args)
    return gens


def _bare_symbols(e: Expr) -> set:
    out = set()
    stack = [e]
    while stack:
        a = stack.pop()
        if isinstance(a, sp.Symbol):
            out.add(a)
        elif is_opaque(a):
            continue
        else:
            stack.extend(a.args)
    return out


def _canonical_partials(e: Expr) -> Expr:
    """Re-evaluate formal partials so mixed derivatives share one variable order."""
    return e.replace(
        lambda a: isinstance(a, sp.Derivative) and isinstance(a.expr, AppliedUndef),
        lambda a: sp.diff(a.expr, *a.variables),
    )


def normalize(e) -> Expr:
    """Canonical rational-function form: expanded numerator over expanded denominator."""
    e = sp.sympify(e)
    if e.has(sp.Derivative):
        e = _canonical_partials(e)
    if e.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise DegenerateInputError(f"division by zero in {e}")
    try:
        out = sp.cancel(e)
    except ZeroDivisionError as exc:
        raise DegenerateInputError(f"division by an identically zero expression in {e}") from exc
    if out.has(sp.zoo, sp.nan):
        raise DegenerateInputError(f"division by an identically zero expression in {e}")
    return out


def numer_denom(e: Expr) -> tuple[Expr, Expr]:
    n, d = normalize(e).as_numer_denom()
    return sp.expand(n), sp.expand(d)


def diff(e: Expr, c: sp.Symbol, coordinates: Iterable[sp.Symbol] | None = None) -> Expr:
    if coordinates is not None and c not in set(coordinates):
        raise ChartMismatchError(f"{c} is not a coordinate of the active chart")
    return normalize(sp.diff(sp.sympify(e), c))


def _check_acyclic(bindings: Mapping[sp.Symbol, Expr]) -> None:
    keys = set(bindings)
    graph = {k: (sp.sympify(v).free_symbols & keys) - {k} for k, v in bindings.items()}
    state: dict = {}

    def visit(node, path):
        if state.get(node) == 1:
            raise CyclicBindingError("cyclic bindings: " + " -> ".join(map(str, path + [node])))
        if state.get(node) == 2:
            return
        state[node] = 1
        for nxt in sorted(graph[node], key=str):
            visit(nxt, path + [node])
        state[node] = 2

    for k in sorted(keys, key=str):
        visit(k, [])


def _opaque_arguments(e: Expr) -> set:
    out = set()
    for a in sp.preorder_traversal(e):
        if isinstance(a, AppliedUndef):
            out |= a.free_symbols
    return out


def substitute(e: Expr, bindings: Mapping[sp.Symbol, Expr]) -> Expr:
    """Simultaneous substitution followed by normalization."""
    b = {k: sp.sympify(v) for k, v in bindings.items() if sp.sympify(v) != k}
    if not b:
        return normalize(e)
    _check_acyclic(b)
    e = sp.sympify(e)
    clash = _opaque_arguments(e) & set(b)
    if clash:
        raise ValueError(f"cannot substitute opaque-function arguments {sorted(map(str, clash))}")
    return normalize(e.xreplace(b))


# ---------------------------------------------------------------- ordering


def _category(g, position: Mapping) -> tuple:
    if g in position:
        return (0, position[g], "")
    if isinstance(g, Unknown):
        return (3, 0, g.name)
    if isinstance(g, sp.Symbol):
        return (1, 0, g.name)
    return (2, 0, sp.srepr(g))


def display_order(gens: Iterable, coordinates: Sequence[sp.Symbol]) -> list:
    """Chart coordinates in chart order, then parameters, opaque symbols, unknowns."""
    position = {c: i for i, c in enumerate(coordinates)}
    return sorted(gens, key=lambda g: _category(g, position))


def elimination_order(gens: Iterable, coordinates: Sequence[sp.Symbol]) -> list:
    """Lex priority used for division: later chart coordinates are eliminated first."""
    position = {c: -i for i, c in enumerate(coordinates)}
    return sorted(gens, key=lambda g: _category(g, position))


def canonical_polynomial(e: Expr, coordinates: Sequence[sp.Symbol]) -> Expr:
    """Numerator with content removed and positive leading coefficient (grlex, chart order)."""
    num, _ = numer_denom(e)
    if num == 0:
        return ZERO
    if num.is_number:
        return ONE
    gens = display_order(generators(num), coordinates)
    poly = sp.Poly(num, *gens)
    _, prim = poly.primitive()
    if prim.LC(order="grlex") < 0:
        prim = -prim
    return prim.as_expr()


def nonzero_factors(e: Expr, coordinates: Sequence[sp.Symbol]) -> list[Expr]:
    """Distinct non-constant factors of the numerator, each in canonical form."""
    num, _ = numer_denom(e)
    if num.is_number:
        return []
    _, facs = sp.factor_list(num)
    out = []
    for f, _mult in facs:
        if f.is_number:
            continue
        out.append(canonical_polynomial(f, coordinates))
    return sorted(set(out), key=sp.default_sort_key)


# ---------------------------------------------------------------- zero tests


class Zero(enum.Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    UNDECIDED = "undecided"


class Decision(NamedTuple):
    status: Zero
    assumptions: tuple = ()


@dataclass(frozen=True)
class TriangularSet:
    """Constraints in solved form.

    ``pivots`` maps a coordinate to a replacement free of every pivot;
    ``residuals`` are polynomial constraints not linear in any coordinate.
    """

    coordinates: tuple = ()
    pivots: tuple = ()
    residuals: tuple = ()
    base: tuple = field(default=(), compare=False)

    @property
    def bindings(self) -> dict:
        return dict(self.pivots)

    @property
    def is_empty(self) -> bool:
        return not self.pivots and not self.residuals

    @property
    def size(self) -> int:
        return len(self.pivots) + len(self.residuals)

    def reduce(self, e: Expr) -> Expr:
        e = normalize(e)
        if self.pivots:
            e = normalize(e.xreplace(self.bindings))
        if self.residuals:
            for _ in range(6):
                num, den = numer_denom(e)
                rem = _divide(num, self.residuals, self.coordinates)
                new = normalize(rem / den)
                if new == e:
                    break
                e = new
        return e

    def is_zero(self, e: Expr) -> Decision:
        r = self.reduce(e)
        if r == 0:
            return Decision(Zero.ZERO)
        if r.is_number:
            return Decision(Zero.NONZERO)
        num, _ = numer_denom(r)
        facs = nonzero_factors(num, self.coordinates)
        for res in self.residuals:
            for f in facs:
                if _shares_factor(f, res):
                    return Decision(Zero.UNDECIDED, tuple(facs))
        if len(self.residuals) >= 2 and generators(num) & set().union(*(generators(g) for g in self.residuals)):
            return Decision(Zero.UNDECIDED, tuple(facs))
        return Decision(Zero.NONZERO, tuple(facs))

    def with_constraint(self, c: Expr) -> tuple["TriangularSet", list[Expr]]:
        """Add one constraint; returns the new set and the pivot assumptions made."""
        pivots = dict(self.pivots)
        residuals = list(self.residuals)
        assumptions: list[Expr] = []
        pending = [c]
        guard = 0
        while pending:
            guard += 1
            if guard > 200:
                break
            cur = TriangularSet(self.coordinates, tuple(pivots.items()), tuple(residuals), self.base)
            r = cur.reduce(pending.pop(0))
            if r == 0:
                continue
            poly = canonical_polynomial(r, self.coordinates)
            if poly == 1:
                # nonzero constant: inconsistent, keep it visible
                residuals.append(ONE)
                continue
            pick = _linear_pivot(poly, cur)
            if pick is None:
                residuals.append(poly)
                continue
            coord, repl, coeff_facs = pick
            assumptions.extend(coeff_facs)
            pivots = {k: normalize(v.xreplace({coord: repl})) for k, v in pivots.items()}
            pivots[coord] = repl
            pending.extend(residuals)
            residuals = []
        ordered = sorted(pivots.items(), key=lambda kv: -self.coordinates.index(kv[0]))
        return (
            TriangularSet(self.coordinates, tuple(ordered), tuple(residuals), self.base),
            assumptions,
        )

    def extended(self, constraints: Iterable[Expr]) -> tuple["TriangularSet", list[Expr]]:
        out, assumptions = self, []
        for c in constraints:
            out, a = out.with_constraint(c)
            assumptions.extend(a)
        return out, assumptions

    @property
    def inconsistent(self) -> bool:
        return any(r == 1 for r in self.residuals)


def _shares_factor(f: Expr, g: Expr) -> bool:
    gcd = sp.gcd(sp.expand(f), sp.expand(g))
    return not gcd.is_number


def _divide(num: Expr, residuals: Sequence[Expr], coordinates: Sequence[sp.Symbol]) -> Expr:
    if num == 0:
        return ZERO
    gens = set(generators(num))
    for g in residuals:
        gens |= generators(g)
    ordered = elimination_order(gens, coordinates)
    if not ordered:
        return num
    _, rem = sp.reduced(num, list(residuals), *ordered, order="lex")
    return sp.expand(rem)


def _linear_pivot(poly: Expr, current: TriangularSet):
    """Pick a coordinate in which ``poly`` is linear; later coordinates first."""
    # base coordinates are never pivots: opaque functions depend on them
    base = set(current.base)
    present = _bare_symbols(poly)
    candidates = [c for c in reversed(current.coordinates) if c in present and c not in base]
    symbolic = None
    for c in candidates:
        if sp.degree(poly, c) != 1:
            continue
        coeff = sp.expand(sp.diff(poly, c))
        if coeff.has(c):
            continue
        rest = sp.expand(poly - coeff * c)
        dec = current.is_zero(coeff)
        if dec.status is Zero.ZERO:
            continue
        repl = normalize(-rest / coeff)
        if coeff.is_number:
            return c, repl, []
        if dec.status is Zero.NONZERO and symbolic is None:
            symbolic = (c, repl, list(dec.assumptions))
    return symbolic


def reduce_mod(e: Expr, S: TriangularSet) -> Expr:
    return S.reduce(e)


def is_zero(e: Expr, S: TriangularSet | None = None) -> Decision:
    return (S or TriangularSet()).is_zero(e)


# ---------------------------------------------------------------- rendering


class _Printer(StrPrinter):
    def _print_Function(self, expr):
        if isinstance(expr, AppliedUndef):
            return expr.func.__name__
        return super()._print_Function(expr)

    def _print_Derivative(self, expr):
        name = expr.expr.func.__name__
        parts = "".join(f"/d{self._print(v)}" for v, n in expr.variable_count for _ in range(int(n)))
        return f"d({name}){parts}"


_PRINTER = _Printer()


def render(e: Expr) -> str:
    """Deterministic infix text, accepted back by :func:`kprecos.parser.parse_expression`."""
    return _PRINTER.doprint(sp.sympify(e)).replace("**", "^")


# ---------------------------------------------------------------- numerics


def instantiate(e: Expr, functions: Mapping[str, sp.Lambda]) -> Expr:
    """Replace opaque functions by concrete ones (e.g. polynomials) and evaluate partials."""
    if not functions:
        return sp.sympify(e)
    mapping = {sp.Function(name): lam for name, lam in functions.items()}
    return sp.sympify(e).subs(mapping).doit()


def evaluate(e: Expr, point: Mapping[sp.Symbol, object], functions: Mapping[str, sp.Lambda] | None = None):
    e = instantiate(e, functions or {})
    return e.xreplace({k: sp.sympify(v) for k, v in point.items()})
