import random

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import affine_chart, quadratic_chart, random_polynomial
from kprecos.errors import ParseError
from kprecos.parser import parse_expression, tokenize
from kprecos.symbolic import normalize, render

QNS = quadratic_chart().namespace()
ANS = affine_chart().namespace()


def P(text, ns=QNS):
    return parse_expression(text, ns)


def S(text, ns=QNS):
    return normalize(sp.sympify(text, locals=dict(ns)))


def test_model_lagrangians():
    assert P("x2*(q1*v1_2 + q2*v2_2) + q1*q2", ANS) == S("x2*(q1*v1_2 + q2*v2_2) + q1*q2", ANS)
    assert P("1/(2*e)*qt^2 + 1/2*sigma(t,s)^2*e - 1/2*tau*qs^2") == S("qt**2/(2*e) + sigma**2*e/2 - tau*qs**2/2")
    assert P("0") == 0


@pytest.mark.parametrize("text,expected", [
    ("42", "42"),                               # integer
    ("qt", "qt"),                               # name
    ("sigma", "sigma"),                         # bare opaque function
    ("sigma(t, s)", "sigma"),                   # applied opaque function
    ("d(sigma)/dt", "Derivative(sigma, t)"),    # formal partial
    ("d(sigma)/dt/ds", "Derivative(sigma, t, s)"),
    ("(q + e)*2", "2*q + 2*e"),                 # parentheses
    ("q - e - 1", "q - e - 1"),                 # left-associative minus
    ("q/e/2", "q/(2*e)"),                       # left-associative division
    ("2^3^2", "512"),                           # right-associative power
    ("-q^2", "-q**2"),                          # power binds tighter than unary minus
    ("--q", "q"),                               # nested unary minus
    ("e^-1", "1/e"),                            # signed exponent
    ("q*e + tau", "q*e + tau"),                 # precedence
])
def test_accepting(text, expected):
    assert P(text) == S(expected)


@pytest.mark.parametrize("text,column", [
    ("1.5", 2),          # integer literal only
    ("zeta + 1", 1),     # undeclared name
    ("sigma(s, t)", 1),  # wrong arguments
    ("d(sigma)", 1),     # partial without /dX
    ("d(sigma)/dq", 1),  # differentiation variable is not an argument
    ("(q + e", 7),       # unbalanced parenthesis
    ("q +", 4),          # dangling operator
    ("* q", 1),          # missing left operand
    ("q^e", 3),          # symbolic exponent
    ("q/0", 2),          # division by literal zero
    ("q # e", 3),        # unknown character
    ("q e", 3),          # juxtaposition
    ("", 1),             # empty
])
def test_rejecting(text, column):
    with pytest.raises(ParseError) as exc:
        P(text)
    assert exc.value.column == column
    assert exc.value.line == 1


def test_error_position_on_later_line():
    with pytest.raises(ParseError) as exc:
        P("q +\n  2*zeta")
    assert (exc.value.line, exc.value.column) == (2, 5)
    assert "2:5" in str(exc.value) or "line 2" in str(exc.value)


def test_tokenize():
    kinds = [(t.kind, t.text) for t in tokenize("d(sigma)/dt^2")]
    assert kinds[:4] == [("name", "d"), ("op", "("), ("name", "sigma"), ("op", ")")]
    assert kinds[-1][0] == "end"


def test_mixed_partial_order_is_canonical():
    assert P("d(sigma)/ds/dt - d(sigma)/dt/ds") == 0


def test_unnormalized_parse():
    e = parse_expression("q*e/e", QNS, normal=False)
    assert e == sp.sympify("q", locals=dict(QNS))


# ---------------------------------------------------------------- round trip

_atoms = [QNS[n] for n in ("q", "e", "qt", "qs", "tau", "sigma")] + [
    sp.Derivative(QNS["sigma"], QNS["t"]), sp.Derivative(QNS["sigma"], QNS["t"], QNS["s"])]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_render_parse_round_trip(seed):
    rng = random.Random(seed)
    num = random_polynomial(rng, _atoms, 3, 4)
    den = random_polynomial(rng, _atoms, 2, 2)
    e = normalize(num / den) if normalize(den) != 0 else normalize(num)
    assert P(render(e)) == e
