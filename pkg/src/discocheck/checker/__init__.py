"""Diagram, model and system checks with an evaluator and a solver back end."""

from .check import check_diagram, check_model, check_system, evaluate_merged
from .encode import Encoding, compute_scope, encode_instance, validate_via_solver
from .merge import MergedModel, MergeError, diagram_as_model, merge_model
from .report import CheckOptions, Finding, Report, Verdict
from .suite import AssertionResult, builtin_assertion_suite, run_assertion

__all__ = [
    "check_diagram", "check_model", "check_system", "evaluate_merged",
    "Encoding", "compute_scope", "encode_instance", "validate_via_solver",
    "MergedModel", "MergeError", "diagram_as_model", "merge_model",
    "CheckOptions", "Finding", "Report", "Verdict",
    "AssertionResult", "builtin_assertion_suite", "run_assertion",
]
