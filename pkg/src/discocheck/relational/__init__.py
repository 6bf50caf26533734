"""A finite relational logic: formulas, exact scopes, evaluation and bounded search."""

from .ast import (
    TRUE, Acyclic, And, CardCmp, Diff, DomRestrict, Empty, Equal, Expr, FieldRef, Formula, Implies,
    In, Intersect, Join, Not, Or, Quant, SigRef, TransClosure, Transpose, Union, Var, all_of, conj,
    disj, no, some, some_of,
)
from .closure import find_cycle, is_acyclic, transitive_closure
from .errors import (
    ArityError, RelationalError, ScopeError, SearchBudgetExceeded, SpecError, UnknownNameError,
)
from .evaluate import eval_expr, eval_formula
from .search import DEFAULT_BUDGET, check_assertion, enumerate_instances, find_instance
from .spec import FieldDecl, Instance, Scope, SignatureDecl, Spec, Universe, atom_name

__all__ = [
    "TRUE", "Acyclic", "And", "CardCmp", "Diff", "DomRestrict", "Empty", "Equal", "Expr", "FieldRef",
    "Formula", "Implies", "In", "Intersect", "Join", "Not", "Or", "Quant", "SigRef", "TransClosure",
    "Transpose", "Union", "Var", "all_of", "conj", "disj", "no", "some", "some_of",
    "find_cycle", "is_acyclic", "transitive_closure",
    "ArityError", "RelationalError", "ScopeError", "SearchBudgetExceeded", "SpecError",
    "UnknownNameError", "eval_expr", "eval_formula",
    "DEFAULT_BUDGET", "check_assertion", "enumerate_instances", "find_instance",
    "FieldDecl", "Instance", "Scope", "SignatureDecl", "Spec", "Universe", "atom_name",
]
