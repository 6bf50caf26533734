"""Well-formedness checking for Discovery method diagrams, models and systems."""

from .checker import (
    CheckOptions, Finding, MergedModel, Report, Verdict, builtin_assertion_suite, check_diagram,
    check_model, check_system, compute_scope, encode_instance, merge_model, validate_via_solver,
)
from .dsl import load_workspace, parse_source, resolve
from .metamodel import MetamodelCatalog, conforms, declare_metamodel, diagram_fields
from .workspace import Diagram, Element, Model, Relationship, System, Workspace

__all__ = [
    "CheckOptions", "Finding", "MergedModel", "Report", "Verdict", "builtin_assertion_suite",
    "check_diagram", "check_model", "check_system", "compute_scope", "encode_instance",
    "merge_model", "validate_via_solver", "load_workspace", "parse_source", "resolve",
    "MetamodelCatalog", "conforms", "declare_metamodel", "diagram_fields",
    "Diagram", "Element", "Model", "Relationship", "System", "Workspace",
]
