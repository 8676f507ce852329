"""k-cosymplectic and k-precosymplectic structures on product-type Darboux charts."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import sympy as sp

from .errors import StructureError
from .exterior import (
    Chart,
    DifferentialForm,
    KVectorField,
    VectorField,
    d,
    ext_d,
    interior,
    wedge,
)
from .linalg import generic_rank, nullspace
from .symbolic import Expr, nonzero_factors, normalize, numer_denom, render


@dataclass(frozen=True)
class KPrecosymplecticStructure:
    chart: Chart
    eta: tuple
    omega: tuple

    def __post_init__(self):
        k = self.chart.k
        if len(self.eta) != k or len(self.omega) != k:
            raise StructureError(f"need {k} one-forms and {k} two-forms, got {len(self.eta)} and {len(self.omega)}")
        for a in self.eta:
            if a.degree != 1 or a.chart != self.chart:
                raise StructureError("every eta must be a one-form on the structure's chart")
        for w in self.omega:
            if w.degree != 2 or w.chart != self.chart:
                raise StructureError("every omega must be a two-form on the structure's chart")

    @cached_property
    def gauge_coordinates(self) -> tuple:
        """Coordinates whose coordinate field lies in every ker eta and ker omega."""
        out = []
        for c in self.chart.coordinates:
            v = VectorField.coordinate_field(self.chart, c.name)
            if all(interior(v, a).is_zero() for a in self.eta + self.omega):
                out.append(c.name)
        return tuple(out)

    def reeb_violations(self) -> list[str]:
        out = []
        for a, x in enumerate(self.chart.base):
            R = VectorField.coordinate_field(self.chart, x.name)
            for b, eta in enumerate(self.eta):
                got = normalize(interior(R, eta).coefficient())
                if got != (1 if a == b else 0):
                    out.append(f"i(d/d{x.name}) eta^{b + 1} = {render(got)}")
            for b, w in enumerate(self.omega):
                iw = interior(R, w)
                if not iw.is_zero():
                    out.append(f"i(d/d{x.name}) omega^{b + 1} = {iw.render()}")
        return out


def canonical_hamiltonian_chart(k: int, n: int) -> KPrecosymplecticStructure:
    """Regular structure on R^k x (T^1_k)^*Q: eta^a = dx_a, omega^a = sum_i dq_i ^ dp_i^a."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be at least 1")
    base = [f"x{a}" for a in range(1, k + 1)]
    positions = [f"q{i}" for i in range(1, n + 1)]
    chart = Chart.momentum_chart(base, positions)
    return canonical_structure(chart)


def canonical_structure(chart: Chart) -> KPrecosymplecticStructure:
    """eta^a = dx^a and omega^a = sum over the momenta p_i^a present in the chart."""
    eta = tuple(DifferentialForm.basis(chart, x.name) for x in chart.base)
    omega = []
    for a in range(1, chart.k + 1):
        w = DifferentialForm.zero(chart, 2)
        for p in chart.fibres:
            if p.index[1] == a:
                q = chart.positions[p.index[0] - 1]
                w = w + DifferentialForm.basis(chart, q.name, p.name)
        omega.append(w)
    return KPrecosymplecticStructure(chart, eta, tuple(omega))


def _matrix(form: DifferentialForm) -> list[list[Expr]]:
    N = form.chart.dimension
    M = [[sp.Integer(0)] * N for _ in range(N)]
    for (i, j), c in form.terms:
        M[i][j] = c
        M[j][i] = -c
    return M


def _row(form: DifferentialForm) -> list[Expr]:
    row = [sp.Integer(0)] * form.chart.dimension
    for (i,), c in form.terms:
        row[i] = c
    return row


@dataclass
class ValidationReport:
    classification: str
    omega_ranks: list
    kernel_omega_dimension: int
    gauge_dimension: int
    gauge_coordinates: list
    kernel_basis: list
    assumptions: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "omega_ranks": list(self.omega_ranks),
            "kernel_omega_dimension": self.kernel_omega_dimension,
            "gauge_dimension": self.gauge_dimension,
            "gauge_coordinates": list(self.gauge_coordinates),
            "kernel_basis": [v.render() for v in self.kernel_basis],
            "assumptions": [f"{render(a)} != 0" for a in self.assumptions],
            "warnings": list(self.warnings),
        }


def validate(S: KPrecosymplecticStructure) -> ValidationReport:
    chart = S.chart
    for name, forms in (("eta", S.eta), ("omega", S.omega)):
        for a, f in enumerate(forms, start=1):
            if not ext_d(f).is_zero():
                raise StructureError(f"{name}^{a} is not closed: d{name}^{a} = {ext_d(f).render()}")
    top = S.eta[0]
    for e in S.eta[1:]:
        top = wedge(top, e)
    if top.is_zero():
        raise StructureError("the eta forms are linearly dependent (eta^1 ^ ... ^ eta^k = 0)")

    assumptions: list = []
    ranks = []
    for w in S.omega:
        r, a = generic_rank(_matrix(w))
        ranks.append(r)
        assumptions += a
    omega_rows = [row for w in S.omega for row in _matrix(w)]
    r_omega, a = generic_rank(omega_rows) if omega_rows else (0, [])
    assumptions += a
    N = chart.dimension
    kernel_omega = N - r_omega
    stacked = [_row(e) for e in S.eta] + omega_rows
    basis, a = nullspace(stacked)
    assumptions += a
    gauge_dim = len(basis)
    kernel = [VectorField.from_dict(chart, {i: c for i, c in enumerate(v)}) for v in basis]

    warnings = []
    k, n = chart.k, chart.n
    ell = k * (n + 1) + n - N
    if not 0 <= ell <= n * k:
        warnings.append(f"chart dimension {N} does not match k(n+1)+n-l with 0 <= l <= nk (k={k}, n={n})")
    if kernel_omega < k:
        warnings.append(f"dim of the common kernel of the omegas is {kernel_omega} < k={k}")
    aligned = set(S.gauge_coordinates)
    for v in kernel:
        names = [chart.coordinates[i].name for i, _ in v.components]
        if not (len(names) == 1 and names[0] in aligned):
            warnings.append(f"gauge direction {v.render()} is not a coordinate direction")
    warnings += [f"Reeb condition fails: {w}" for w in S.reeb_violations()]

    regular = gauge_dim == 0 and kernel_omega == k
    seen = []
    for x in assumptions:
        if x not in seen:
            seen.append(x)
    return ValidationReport(
        classification="regular" if regular else "precosymplectic",
        omega_ranks=ranks,
        kernel_omega_dimension=kernel_omega,
        gauge_dimension=gauge_dim,
        gauge_coordinates=list(S.gauge_coordinates),
        kernel_basis=kernel,
        assumptions=seen,
        warnings=warnings,
    )


def reeb_fields(S: KPrecosymplecticStructure, strict: bool = True) -> KVectorField:
    """Product-type Reeb fields d/dx^a.

    With ``strict`` a chart violating ``i_R eta = delta`` or ``i_R omega = 0``
    raises; otherwise the fields are returned and the caller reports the
    violations from :meth:`KPrecosymplecticStructure.reeb_violations`.
    """
    if strict:
        bad = S.reeb_violations()
        if bad:
            raise StructureError("Reeb conditions fail: " + "; ".join(bad))
    return KVectorField(tuple(VectorField.coordinate_field(S.chart, x.name) for x in S.chart.base))


def flat(S: KPrecosymplecticStructure, X: KVectorField) -> DifferentialForm:
    out = DifferentialForm.zero(S.chart, 1)
    for Xa, w, e in zip(X, S.omega, S.eta):
        out = out + interior(Xa, w) + e.scale(interior(Xa, e).coefficient())
    return out


def standing_assumptions(e: Expr, chart: Chart) -> list:
    """Factors of the denominator of ``e``: loci where the input itself is undefined."""
    _, den = numer_denom(e)
    return nonzero_factors(den, chart.symbols)


@dataclass(frozen=True)
class HamiltonianSystem:
    structure: KPrecosymplecticStructure
    h: Expr
    name: str = ""

    def __post_init__(self):
        self.structure.chart.check(self.h, allow_unknowns=False)
        object.__setattr__(self, "h", normalize(self.h))

    @property
    def chart(self) -> Chart:
        return self.structure.chart

    @property
    def gamma(self) -> DifferentialForm:
        return d(self.chart, self.h)

    @property
    def gamma_tilde(self) -> DifferentialForm:
        """gamma - sum_a gamma(R_a) eta^a."""
        g = self.gamma
        out = g
        for x, e in zip(self.chart.base, self.structure.eta):
            out = out - e.scale(g.coefficient(x.name))
        return out

    @property
    def standing_assumptions(self) -> list:
        return standing_assumptions(self.h, self.chart)
