"""Exact symbolic verification of Poisson principal bundle identities."""

from .action import ActionSpec, conn_covariance_defect, cor44_check, plg_action_defect
from .bundle import InducedBase, cor52_check, induce_base, is_horizontal, transversality_defect, ver
from .calculus import Frame, OneForm, TwoForm, VectorField, interior, interior2, wedge
from .checks import CHECK_NAMES, CheckReport, emit_report, run_checks
from .liebialg import LieBialgebra, XiData, xi_from_connection
from .poisson import ContravariantConnection, PoissonStructure, compatibility_defect, curvature, jacobiator, schouten
from .spec import GeometrySpec, SpecError, build_spec, load_spec
from .spinconn import gamma, leibniz_gap_check, nabla_P, validate_spin_connection, varsigma
from .symkernel import Expr, NormalizationError, Ring, RingError, normalize

__all__ = [
    "ActionSpec",
    "CHECK_NAMES",
    "CheckReport",
    "ContravariantConnection",
    "Expr",
    "Frame",
    "GeometrySpec",
    "InducedBase",
    "LieBialgebra",
    "NormalizationError",
    "OneForm",
    "PoissonStructure",
    "Ring",
    "RingError",
    "SpecError",
    "TwoForm",
    "VectorField",
    "XiData",
    "build_spec",
    "compatibility_defect",
    "conn_covariance_defect",
    "cor44_check",
    "cor52_check",
    "curvature",
    "emit_report",
    "gamma",
    "induce_base",
    "interior",
    "interior2",
    "is_horizontal",
    "jacobiator",
    "leibniz_gap_check",
    "load_spec",
    "nabla_P",
    "normalize",
    "plg_action_defect",
    "run_checks",
    "schouten",
    "transversality_defect",
    "validate_spin_connection",
    "varsigma",
    "ver",
    "wedge",
    "xi_from_connection",
]
