import random

import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from kprecos.linalg import CONST, generic_rank, nullspace, rref
from kprecos.symbolic import TriangularSet, normalize

a, b, q = sp.symbols("a b q")


def test_generic_rank_records_symbolic_pivots():
    assert generic_rank([[1, 2], [2, 4]]) == (1, [])
    r, assumptions = generic_rank([[q, 0], [0, q]])
    assert r == 2 and assumptions == [q]
    assert generic_rank([[a, b], [a * q, b * q]])[0] == 1


def test_generic_rank_modulo_constraints():
    S = TriangularSet((a, q), pivots=((q, a),))
    assert generic_rank([[q - a, 1], [0, q - a]], S)[0] == 1


def test_rref_prefers_rational_pivots():
    x, y = sp.symbols("x y")
    rows = [{x: q, y: 1, CONST: -1}, {x: 1, y: 1}]
    ech = rref(rows, [x, y])
    assert ech.assumptions == [q - 1]
    assert normalize(ech.value(x) - 1 / (q - 1)) == 0


def test_rref_leftover_rows_are_constraints():
    x = sp.Symbol("x")
    ech = rref([{x: 1, CONST: -q}, {x: 1, CONST: -1}], [x])
    assert ech.leftover == [{CONST: q - 1}] or ech.leftover == [{CONST: 1 - q}]


def test_nullspace_example():
    basis, assumptions = nullspace([[1, q, 0], [0, 0, 1]])
    assert basis == [[-q, 1, 0]] and assumptions == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 4))
def test_rank_and_nullspace_match_sympy(seed, n, m):
    rng = random.Random(seed)
    rows = [[sp.Integer(rng.randint(-2, 2)) * rng.choice([1, q, a]) for _ in range(m)] for _ in range(n)]
    M = sp.Matrix(rows)
    assert generic_rank(rows)[0] == M.rank(simplify=True)
    basis, _ = nullspace(rows)
    assert len(basis) == m - M.rank(simplify=True)
    for v in basis:
        assert all(normalize(x) == 0 for x in M * sp.Matrix(v))
