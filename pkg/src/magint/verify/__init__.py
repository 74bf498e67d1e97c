"""Verification engine: commutator suites, algebra tables, adjoint classification,
determining equations, eigenfunctions, classical conservation and the numeric oracle."""
from .classical import DriftTable, StepFailure, classical_conservation, conservation_report
from .determining import (
    DeterminingEquationSet, ReplayMismatch, compatibility_replay, determining_equations,
)
from .eigen import eigen_suite, eigenfunction_residual
from .numeric import NumericResult, SamplingExhausted, numeric_oracle
from .report import FAIL, INFO, PASS, Check, Report
from .suites import (
    AlgebraTable, ClosureFailure, Settings, adjoint_classify, algebra_closure, algebra_report,
    check_commutes, dependence_check, integrability_suite,
)

__all__ = [
    "AlgebraTable", "Check", "ClosureFailure", "DeterminingEquationSet", "DriftTable", "FAIL", "INFO",
    "NumericResult", "PASS", "ReplayMismatch", "Report", "SamplingExhausted", "Settings", "StepFailure",
    "adjoint_classify", "algebra_closure", "algebra_report", "check_commutes", "classical_conservation",
    "compatibility_replay", "conservation_report", "dependence_check", "determining_equations", "eigen_suite",
    "eigenfunction_residual", "integrability_suite", "numeric_oracle",
]
