"""Exact-arithmetic Dolbeault cohomology of nilmanifolds with nilpotent
complex structure, and the obstruction calculus that predicts how Hodge
numbers jump under deformation."""

from .coeff import GaussianRational, Jet, Poly
from .exterior import (
    ComplexStructureSpec,
    InvariantForm,
    VectorForm,
    contract,
    deformed_coframe,
    differential,
    validate_spec,
    wedge,
)
from .deform import (
    DeformationFamily,
    extend_class,
    frolicher_d1,
    hodge_table,
    jump_report,
    mc_extend,
    obstruction_o1,
    oracle_hodge_at_point,
    parallelisable_witness,
    second_class_subspace,
    validate_first_order,
)
from .freemod import (
    FreeComplex,
    JetCochain,
    classify_first_class,
    classify_second_class,
    extend_step,
    h_dims,
    jump_accounting,
    o_n_q,
    reduce_to_primitive,
    validate_complex,
)
from .manifest import Manifest, load_manifest, parse_manifest

__version__ = "0.1.0"
