"""Shared fixtures data and random generators for the test-suite."""

from __future__ import annotations

import random
from pathlib import Path

import sympy as sp

from kprecos.exterior import Chart, fibre_names
from kprecos.lagrangian import build_lagrangian_system
from kprecos.symbolic import TriangularSet

ROOT = Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
GOLDEN = Path(__file__).resolve().parent / "golden"

QUADRATIC_MOMENTA = {"p_t": ("q", "t"), "p_s": ("q", "s"), "pi_t": ("e", "t"), "pi_s": ("e", "s")}


def affine_chart() -> Chart:
    return Chart.velocity_chart(["x1", "x2"], ["q1", "q2"])


def affine_system():
    return build_lagrangian_system(affine_chart(), sp.sympify("x2*(q1*v1_2 + q2*v2_2) + q1*q2"))


def quadratic_chart() -> Chart:
    return Chart.build(
        ["t", "s"],
        ["q", "e"],
        fibre_names(["t", "s"], ["q", "e"], "{q}{x}"),
        parameters=["tau"],
        functions={"sigma": ["t", "s"]},
    )


def quadratic_system():
    ch = quadratic_chart()
    L = sp.sympify("qt**2/(2*e) + sigma**2*e/2 - tau*qs**2/2", locals=ch.namespace())
    return build_lagrangian_system(ch, L)


def S_of(chart: Chart) -> TriangularSet:
    return TriangularSet(chart.symbols, base=tuple(x.symbol for x in chart.base))


def random_polynomial(rng: random.Random, symbols, degree: int = 3, terms: int = 4) -> sp.Expr:
    out = sp.Integer(0)
    for _ in range(terms):
        mono = sp.Integer(rng.randint(-4, 4))
        for _ in range(rng.randint(0, degree)):
            mono *= rng.choice(symbols)
        out += mono
    return sp.expand(out)


def random_singular_lagrangian(rng: random.Random):
    """Rank-deficient quadratic part plus an affine part; k, n <= 2."""
    k, n = rng.choice([(1, 2), (2, 1), (2, 2)])
    chart = Chart.velocity_chart([f"x{a}" for a in range(1, k + 1)], [f"q{i}" for i in range(1, n + 1)])
    base_q = [c.symbol for c in chart.base + chart.positions]
    vel = [c.symbol for c in chart.role("velocity")]
    w = sum((rng.randint(-2, 2) or 1) * v for v in rng.sample(vel, 2))
    L = sp.Rational(1, 2) * w**2
    for v in vel:
        L += random_polynomial(rng, base_q, degree=1, terms=1) * v
    L += random_polynomial(rng, base_q, degree=2, terms=2)
    return build_lagrangian_system(chart, sp.expand(L))
