"""Checkers, parameter derivations and fixed-point solvers for asymptotic
contractivity conditions on nonexpansive mappings."""

from .conditions import (
    ConditionSpec,
    CurvePoint,
    derivation_chain,
    derive_c1_from_c2,
    derive_c3_from_c4,
    derive_c4_from_c2,
    gap_curve,
    pointwise_margin,
    ratio_curve,
    residual_infimum_probe,
    verify_condition,
    verify_universal,
)
from .errors import (
    ConvergenceError,
    DerivationError,
    DomainError,
    FixpointError,
    SamplerError,
    StructureError,
    UnknownMappingError,
)
from .mappings import CATALOG, Mapping, check_nonexpansive, get_mapping
from .report import HOLDS, REFUTED, VerificationReport
from .solver import (
    Ball,
    FixedPointResult,
    SolverTrace,
    certify_c6_from_fixed_point,
    find_fixed_point,
    invariant_ball,
    resolvent,
    verify_invariance,
)
from .spaces import C0Box, RealInterval, Scalar, Seq

__version__ = "0.1.0"
