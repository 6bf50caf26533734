"""Relational expressions and formulas.

Expressions denote sets of atom tuples; formulas denote truth values.  Both
are immutable, hashable trees.  A handful of operators are overloaded so
facts read close to the relational notation they come from::

    Var("s").join(FieldRef("head")) + Var("s").join(FieldRef("tail"))
    ~In(Var("n"), Var("s").join(FieldRef("tail")))
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator


class Expr:
    """Base class of relational expressions."""

    __slots__ = ()

    def __add__(self, other: Expr) -> Expr:
        return Union(self, other)

    def __and__(self, other: Expr) -> Expr:
        return Intersect(self, other)

    def __sub__(self, other: Expr) -> Expr:
        return Diff(self, other)

    def __invert__(self) -> Expr:
        return Transpose(self)

    def join(self, other: Expr) -> Expr:
        return Join(self, other)

    def closure(self) -> Expr:
        return TransClosure(self)


@dataclass(frozen=True)
class SigRef(Expr):
    name: str


@dataclass(frozen=True)
class FieldRef(Expr):
    name: str


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Join(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Union(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Intersect(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Diff(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Transpose(Expr):
    expr: Expr


@dataclass(frozen=True)
class TransClosure(Expr):
    expr: Expr


@dataclass(frozen=True)
class DomRestrict(Expr):
    """``domain <: relation``: tuples of ``relation`` whose first atom is in ``domain``."""

    domain: Expr
    relation: Expr


@dataclass(frozen=True)
class Empty(Expr):
    arity: int = 1


NONE = Empty()


class Formula:
    """Base class of formulas."""

    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return And((self, other))

    def __or__(self, other: Formula) -> Formula:
        return Or((self, other))

    def __invert__(self) -> Formula:
        return Not(self)

    def implies(self, other: Formula) -> Formula:
        return Implies(self, other)


@dataclass(frozen=True)
class In(Formula):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Equal(Formula):
    left: Expr
    right: Expr


CARD_OPS = ("=", "<=", ">=")


@dataclass(frozen=True)
class CardCmp(Formula):
    expr: Expr
    op: str
    n: int

    def __post_init__(self) -> None:
        if self.op not in CARD_OPS:
            raise ValueError(f"unknown cardinality operator {self.op!r}")
        if self.n < 0:
            raise ValueError("cardinality bound must be nonnegative")


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


QUANTIFIERS = ("all", "some", "no", "one")


@dataclass(frozen=True)
class Quant(Formula):
    kind: str
    var: str
    bound: Expr
    body: Formula

    def __post_init__(self) -> None:
        if self.kind not in QUANTIFIERS:
            raise ValueError(f"unknown quantifier {self.kind!r}")


@dataclass(frozen=True)
class Acyclic(Formula):
    expr: Expr


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


TRUE = TrueFormula()


def conj(*formulas: Formula) -> Formula:
    """Conjunction that drops ``TRUE`` operands and flattens nested ``And``."""
    flat: list[Formula] = []
    for f in formulas:
        if isinstance(f, And):
            flat.extend(f.operands)
        elif f != TRUE:
            flat.append(f)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*formulas: Formula) -> Formula:
    if len(formulas) == 1:
        return formulas[0]
    return Or(tuple(formulas))


def union_all(exprs, arity: int = 1) -> Expr:
    """Left-folded union; the empty union is ``Empty(arity)``."""
    result: Expr | None = None
    for e in exprs:
        result = e if result is None else Union(result, e)
    return result if result is not None else Empty(arity)


def all_of(var: str, bound: Expr, body: Formula) -> Formula:
    return Quant("all", var, bound, body)


def some_of(var: str, bound: Expr, body: Formula) -> Formula:
    return Quant("some", var, bound, body)


def no(expr: Expr) -> Formula:
    return CardCmp(expr, "=", 0)


def some(expr: Expr) -> Formula:
    return CardCmp(expr, ">=", 1)


def children(node: Expr | Formula) -> Iterator[Expr | Formula]:
    """Immediate sub-expressions and sub-formulas of ``node``."""
    if isinstance(node, (Join, Union, Intersect, Diff, In, Equal)):
        yield node.left
        yield node.right
    elif isinstance(node, DomRestrict):
        yield node.domain
        yield node.relation
    elif isinstance(node, (Transpose, TransClosure, CardCmp, Acyclic)):
        yield node.expr
    elif isinstance(node, Not):
        yield node.body
    elif isinstance(node, (And, Or)):
        yield from node.operands
    elif isinstance(node, Implies):
        yield node.left
        yield node.right
    elif isinstance(node, Quant):
        yield node.bound
        yield node.body


def walk(node: Expr | Formula) -> Iterator[Expr | Formula]:
    yield node
    for child in children(node):
        yield from walk(child)


def field_names(node: Expr | Formula) -> frozenset[str]:
    return frozenset(n.name for n in walk(node) if isinstance(n, FieldRef))


def sig_names(node: Expr | Formula) -> frozenset[str]:
    return frozenset(n.name for n in walk(node) if isinstance(n, SigRef))


def free_vars(node: Expr | Formula) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, Quant):
        return free_vars(node.bound) | (free_vars(node.body) - {node.var})
    out: frozenset[str] = frozenset()
    for child in children(node):
        out |= free_vars(child)
    return out


def rename_var(node, old: str, new: str):
    """``node`` with free occurrences of variable ``old`` renamed to ``new``."""
    if isinstance(node, Var):
        return Var(new) if node.name == old else node
    if isinstance(node, Quant):
        body = node.body if node.var == old else rename_var(node.body, old, new)
        return Quant(node.kind, node.var, rename_var(node.bound, old, new), body)
    if isinstance(node, (And, Or)):
        return type(node)(tuple(rename_var(o, old, new) for o in node.operands))
    if isinstance(node, (Join, Union, Intersect, Diff, In, Equal, Implies)):
        return type(node)(rename_var(node.left, old, new), rename_var(node.right, old, new))
    if isinstance(node, DomRestrict):
        return DomRestrict(rename_var(node.domain, old, new), rename_var(node.relation, old, new))
    if isinstance(node, CardCmp):
        return CardCmp(rename_var(node.expr, old, new), node.op, node.n)
    if isinstance(node, (Transpose, TransClosure, Acyclic)):
        return type(node)(rename_var(node.expr, old, new))
    if isinstance(node, Not):
        return Not(rename_var(node.body, old, new))
    return node


def push_negation(f: Formula) -> Formula:
    """Move top-level negations inward through connectives and quantifiers.

    Only the propositional and quantifier structure is rewritten; atomic
    formulas keep a single ``Not`` in front.
    """
    if isinstance(f, And):
        return conj(*(push_negation(o) for o in f.operands))
    if isinstance(f, Quant) and f.kind in ("all", "some"):
        return Quant(f.kind, f.var, f.bound, push_negation(f.body))
    if not isinstance(f, Not):
        return f
    g = f.body
    if isinstance(g, Not):
        return push_negation(g.body)
    if isinstance(g, Or):
        return conj(*(push_negation(Not(o)) for o in g.operands))
    if isinstance(g, Implies):
        return conj(push_negation(g.left), push_negation(Not(g.right)))
    if isinstance(g, Quant) and g.kind == "all":
        return Quant("some", g.var, g.bound, push_negation(Not(g.body)))
    if isinstance(g, Quant) and g.kind == "no":
        return Quant("some", g.var, g.bound, push_negation(g.body))
    if isinstance(g, And):
        return Or(tuple(Not(o) for o in g.operands))
    return f
