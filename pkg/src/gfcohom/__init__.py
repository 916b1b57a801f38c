"""Exact Gelfand-Fuks and Chevalley–Eilenberg cohomology of Lie algebras of
polynomial vector fields with tensor-module coefficients."""

from .coefficient_modules import (
    LPlusModule,
    TensorElem,
    make_weight_module,
    parse_module_spec,
    standard_module,
    tensor_action,
    trivial_module,
)
from .cochain_complex import (
    build_weight_slice,
    cohomology_dim,
    lplus_cohomology,
    stabilized_gf_cohomology,
)
from .coordinate_algebras import Affine, FunctionElem, PuncturedSphere, Torus, jet, parse_function
from .derham import FormElem, d_deRham, derham_betti, phi_map
from .exact_linalg import SparseMatrix, SparseVec, kernel_basis, quotient_dim, rank
from .kunneth import assemble_rhs, compare_main_theorem, star, verify_star_leibniz
from .lie_vectorfields import (
    JetAlgebroid,
    LPlusGenerator,
    VectorFieldElem,
    bracket_fields,
    build_lplus,
    build_semidirect,
    delta_element,
    smash_bracket,
)

__version__ = "0.1.0"

__all__ = [
    "Affine",
    "assemble_rhs",
    "bracket_fields",
    "build_lplus",
    "build_semidirect",
    "build_weight_slice",
    "cohomology_dim",
    "compare_main_theorem",
    "d_deRham",
    "delta_element",
    "derham_betti",
    "FormElem",
    "FunctionElem",
    "jet",
    "JetAlgebroid",
    "kernel_basis",
    "lplus_cohomology",
    "LPlusGenerator",
    "LPlusModule",
    "make_weight_module",
    "parse_function",
    "parse_module_spec",
    "phi_map",
    "PuncturedSphere",
    "quotient_dim",
    "rank",
    "smash_bracket",
    "SparseMatrix",
    "SparseVec",
    "stabilized_gf_cohomology",
    "standard_module",
    "star",
    "tensor_action",
    "TensorElem",
    "Torus",
    "trivial_module",
    "VectorFieldElem",
    "verify_star_leibniz",
]
