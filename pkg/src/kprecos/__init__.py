"""Symbolic constraint algorithm for k-precosymplectic field theories."""

from .constraints import (
    Ansatz,
    ConstraintChain,
    assemble_equations,
    build_ansatz,
    gauge_compatibility,
    run,
    sopde_symmetry_check,
    split_solve,
    tangency_step,
)
from .errors import (
    ChartMismatchError,
    CyclicBindingError,
    DegenerateInputError,
    KPrecosError,
    LegendreError,
    ModelError,
    ParseError,
    StructureError,
)
from .exterior import Chart, Coordinate, DifferentialForm, KVectorField, VectorField, ext_d, interior, pullback, wedge
from .lagrangian import (
    LagrangianSystem,
    LegendreMap,
    build_lagrangian_system,
    hamiltonianize,
    k_tangent_apply,
    legendre,
    liouville,
    reeb_free_forms,
)
from .model import Model, load_model, parse_model
from .parser import parse_expression
from .structures import (
    HamiltonianSystem,
    KPrecosymplecticStructure,
    canonical_hamiltonian_chart,
    flat,
    reeb_fields,
    validate,
)
from .symbolic import TriangularSet, Unknown, Zero, diff, is_zero, normalize, reduce_mod, render, substitute

__version__ = "0.1.0"

__all__ = [
    "Ansatz",
    "Chart",
    "ChartMismatchError",
    "ConstraintChain",
    "Coordinate",
    "CyclicBindingError",
    "DegenerateInputError",
    "DifferentialForm",
    "HamiltonianSystem",
    "KPrecosError",
    "KPrecosymplecticStructure",
    "KVectorField",
    "LagrangianSystem",
    "LegendreError",
    "LegendreMap",
    "Model",
    "ModelError",
    "ParseError",
    "StructureError",
    "TriangularSet",
    "Unknown",
    "VectorField",
    "Zero",
    "assemble_equations",
    "build_ansatz",
    "build_lagrangian_system",
    "canonical_hamiltonian_chart",
    "diff",
    "ext_d",
    "flat",
    "gauge_compatibility",
    "hamiltonianize",
    "interior",
    "is_zero",
    "k_tangent_apply",
    "legendre",
    "liouville",
    "load_model",
    "normalize",
    "parse_expression",
    "parse_model",
    "pullback",
    "reduce_mod",
    "reeb_fields",
    "reeb_free_forms",
    "render",
    "run",
    "sopde_symmetry_check",
    "split_solve",
    "substitute",
    "tangency_step",
    "validate",
    "wedge",
]
