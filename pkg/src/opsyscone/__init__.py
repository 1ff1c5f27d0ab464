"""Operator-system cone experimentation toolkit.

Certificate-checked membership oracles for the generator cones attached to
SIC and MUB coordinate systems, compression and projection tests on top of
them, and an iterative ordering construction cross-checked against concrete
quantum instances.
"""

__version__ = "0.1.0"

from .cones import (
    ConeOracle,
    Gram,
    MembershipResult,
    ProbeBudget,
    TSequence,
    Thresholds,
    WorkBudget,
    build_initial_cone,
    gram_matrix,
    lp_member,
    omax_member,
    properness_probe,
    reevaluate_certificate,
    schedule_member,
    t_thresholds,
)
from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidGeneratorError,
    InvalidParameterError,
    NumericInputError,
    OpsysError,
    PreconditionError,
    SearchFailed,
    UnsupportedDimensionError,
)
from .instances import (
    MatrixModelOracle,
    load_instance,
    mub_generate,
    pi_positivity_check,
    save_instance,
    sic_search,
    soundness_check,
    verify_instance,
)
from .iteration import run_iteration
from .projections import (
    SearchBudget,
    cnp_member,
    dmin_refute,
    dmin_sampled_certify,
    lemma_compression_witness,
    projection_lift,
    relation_check,
)
from .spaces import HermLevel, VElement, build_space, compress, element_from_json

__all__ = [
    "__version__",
    "ConeOracle",
    "DimensionMismatchError",
    "Gram",
    "HermLevel",
    "InvalidDimensionError",
    "InvalidGeneratorError",
    "InvalidParameterError",
    "MatrixModelOracle",
    "MembershipResult",
    "NumericInputError",
    "OpsysError",
    "PreconditionError",
    "ProbeBudget",
    "SearchBudget",
    "SearchFailed",
    "TSequence",
    "Thresholds",
    "UnsupportedDimensionError",
    "VElement",
    "WorkBudget",
    "build_initial_cone",
    "build_space",
    "cnp_member",
    "compress",
    "dmin_refute",
    "dmin_sampled_certify",
    "element_from_json",
    "gram_matrix",
    "lemma_compression_witness",
    "load_instance",
    "lp_member",
    "mub_generate",
    "omax_member",
    "pi_positivity_check",
    "projection_lift",
    "properness_probe",
    "reevaluate_certificate",
    "relation_check",
    "run_iteration",
    "save_instance",
    "schedule_member",
    "sic_search",
    "soundness_check",
    "t_thresholds",
    "verify_instance",
]
