"""Linear algebra over the rational-function field, modulo a constraint set.

Rows are sparse: ``{column: coefficient}`` with the constant term stored
under the key ``None``.  Every nonconstant pivot yields a genericity
assumption (the factors of its numerator) instead of a silent division.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import sympy as sp

from .symbolic import TriangularSet, Zero, generators, normalize, numer_denom

CONST = None


def _degree(e) -> int:
    num, _ = numer_denom(e)
    gens = sorted(generators(num), key=sp.default_sort_key)
    if not gens:
        return 0
    return sp.Poly(num, *gens).total_degree()


def _pivot_key(entry, position: int) -> tuple:
    return (0 if entry.is_Rational else 1, _degree(entry), position)


def generic_rank(matrix: Sequence[Sequence], S: TriangularSet | None = None) -> tuple[int, list]:
    """Rank by fraction-free (Bareiss) elimination with full pivoting.

    Returns the rank and the numerator factors of every symbolic pivot used.
    """
    S = S or TriangularSet()
    M = [[S.reduce(x) for x in row] for row in matrix]
    if not M or not M[0]:
        return 0, []
    rows, cols = len(M), len(M[0])
    assumptions: list = []
    prev = sp.Integer(1)
    r = 0
    for _ in range(min(rows, cols)):
        best = None
        for i in range(r, rows):
            for j in range(r, cols):
                e = M[i][j]
                if e == 0:
                    continue
                dec = S.is_zero(e)
                if dec.status is not Zero.NONZERO:
                    continue
                key = _pivot_key(e, i * cols + j)
                if best is None or key < best[0]:
                    best = (key, i, j, dec)
        if best is None:
            break
        _, i, j, dec = best
        M[r], M[i] = M[i], M[r]
        for row in M:
            row[r], row[j] = row[j], row[r]
        assumptions.extend(dec.assumptions)
        p = M[r][r]
        for i2 in range(r + 1, rows):
            for j2 in range(r + 1, cols):
                M[i2][j2] = S.reduce((p * M[i2][j2] - M[i2][r] * M[r][j2]) / prev)
            M[i2][r] = sp.Integer(0)
        prev = p
        r += 1
    return r, _unique(assumptions)


def _unique(items: list) -> list:
    seen, out = set(), []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


@dataclass
class Echelon:
    """Reduced row-echelon form; each pivot row has coefficient 1 on its column."""

    columns: list
    pivots: dict = field(default_factory=dict)
    leftover: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    undecided: list = field(default_factory=list)

    @property
    def free(self) -> list:
        return [c for c in self.columns if c not in self.pivots]

    def value(self, column: Hashable):
        """Affine expression of a pivot column in terms of the free columns."""
        row = self.pivots[column]
        total = -row.get(CONST, 0)
        for c, v in row.items():
            if c is not CONST and c != column:
                total -= v * (c if isinstance(c, sp.Basic) else sp.Symbol(str(c)))
        return normalize(total)


def _clean(row: dict, S: TriangularSet) -> dict:
    out = {}
    for c, v in row.items():
        v = S.reduce(v)
        if v != 0:
            out[c] = v
    return out


def rref(rows: Sequence[dict], columns: Sequence[Hashable], S: TriangularSet | None = None) -> Echelon:
    """Row-reduce ``rows`` column by column in the given order.

    Candidate pivots are ranked: rational constants first, then the lowest
    total degree of the numerator, then row position.  A column whose only
    candidates have an undecided zero status is recorded and skipped.
    """
    S = S or TriangularSet()
    ech = Echelon(list(columns))
    remaining = [_clean(r, S) for r in rows]
    remaining = [r for r in remaining if r]
    for col in columns:
        best = None
        undecided = False
        for pos, row in enumerate(remaining):
            e = row.get(col)
            if e is None:
                continue
            dec = S.is_zero(e)
            if dec.status is Zero.ZERO:
                continue
            if dec.status is Zero.UNDECIDED:
                undecided = True
                continue
            key = _pivot_key(e, pos)
            if best is None or key < best[0]:
                best = (key, pos, dec)
        if best is None:
            if undecided:
                ech.undecided.append(col)
            continue
        _, pos, dec = best
        ech.assumptions.extend(dec.assumptions)
        row = remaining.pop(pos)
        p = row[col]
        row = {c: normalize(v / p) for c, v in row.items()}
        row[col] = sp.Integer(1)
        remaining = [_eliminate(r, row, col, S) for r in remaining]
        remaining = [r for r in remaining if r]
        for c in list(ech.pivots):
            ech.pivots[c] = _eliminate(ech.pivots[c], row, col, S)
        ech.pivots[col] = row
    ech.leftover = remaining
    ech.assumptions = _unique(ech.assumptions)
    return ech


def _eliminate(target: dict, pivot_row: dict, col, S: TriangularSet) -> dict:
    f = target.get(col)
    if f is None:
        return target
    out = dict(target)
    for c, v in pivot_row.items():
        out[c] = out.get(c, 0) - f * v
    out.pop(col, None)
    return _clean(out, S)


def nullspace(matrix: Sequence[Sequence], S: TriangularSet | None = None) -> tuple[list, list]:
    """Basis of the generic right kernel; returns (vectors, assumptions)."""
    if not matrix:
        return [], []
    ncols = len(matrix[0])
    rows = [{j: x for j, x in enumerate(r) if x != 0} for r in matrix]
    ech = rref(rows, list(range(ncols)), S)
    basis = []
    for f in ech.free:
        v = [sp.Integer(0)] * ncols
        v[f] = sp.Integer(1)
        for c, row in ech.pivots.items():
            if f in row:
                v[c] = normalize(-row[f])
        basis.append(v)
    return basis, ech.assumptions
