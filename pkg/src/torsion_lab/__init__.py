"""Homology torsion of finite covers of presented 3-manifold groups."""

from .abelian import LaurentPoly, cyclic_branched_torsion, growth_report, mahler_measure
from .complexes import (
    InducedComplex,
    branched_torsion,
    connecting_map,
    cover_complex,
    torsion_inequality_check,
    homology,
    induce_matrix,
    torsion_report,
)
from .cosets import CosetTable, cyclic_cover_table, low_index_subgroups
from .presentation import (
    GroupPresentation,
    abelianized_alexander,
    fox_derivative,
    load_presentation,
    parse_presentation,
    reduced_jacobian,
)
from .zlinalg import IntMatrix, det_prime_squared, smith_normal_form

__all__ = [
    "CosetTable",
    "GroupPresentation",
    "InducedComplex",
    "IntMatrix",
    "LaurentPoly",
    "abelianized_alexander",
    "branched_torsion",
    "connecting_map",
    "cover_complex",
    "cyclic_branched_torsion",
    "cyclic_cover_table",
    "det_prime_squared",
    "torsion_inequality_check",
    "fox_derivative",
    "growth_report",
    "homology",
    "induce_matrix",
    "load_presentation",
    "low_index_subgroups",
    "mahler_measure",
    "parse_presentation",
    "reduced_jacobian",
    "smith_normal_form",
    "torsion_report",
]

__version__ = "0.1.0"
