"""Evaluation of expressions and formulas.

Two evaluators live here.  The exact one (``eval_expr``/``eval_formula``) is
the semantics of the logic.  The three-valued one works over partial
instances, where each relation is only known to lie between a lower and an
upper tuple set; it answers True, False or None (unknown) and is what the
search uses to prune.  Every operator is monotone in its bounds, so a
definite answer is one that every completion of the partial instance agrees
with.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Callable, Mapping

from .ast import (
    Acyclic, And, CardCmp, Diff, DomRestrict, Empty, Equal, Expr, FieldRef, Formula,
    Implies, In, Intersect, Join, Not, Or, Quant, SigRef, Transpose, TransClosure,
    TrueFormula, Union, Var, free_vars,
)
from .closure import is_acyclic, transitive_closure
from .errors import ArityError, UnknownNameError
from .spec import Instance, Spec

Rel = frozenset


def join(a: Rel, b: Rel) -> Rel:
    index: dict = defaultdict(list)
    for t in b:
        index[t[0]].append(t[1:])
    return frozenset(x[:-1] + y for x in a for y in index.get(x[-1], ()))


def transpose(a: Rel) -> Rel:
    return frozenset((t[1], t[0]) for t in a)


def dom_restrict(domain: Rel, rel: Rel) -> Rel:
    keep = {t[0] for t in domain}
    return frozenset(t for t in rel if t[0] in keep)


# -- static checking ---------------------------------------------------------

def arity(e: Expr, spec: Spec, bound: frozenset[str] = frozenset()) -> int:
    """Static arity of ``e``; raises on unknown names or ill-formed arities."""
    if isinstance(e, SigRef):
        spec.sig(e.name)
        return 1
    if isinstance(e, FieldRef):
        spec.field_decls(e.name)
        return 2
    if isinstance(e, Var):
        if e.name not in bound:
            raise UnknownNameError("variable", e.name)
        return 1
    if isinstance(e, Empty):
        return e.arity
    if isinstance(e, Join):
        n = arity(e.left, spec, bound) + arity(e.right, spec, bound) - 2
        if n < 1:
            raise ArityError(f"join of {e.left!r} and {e.right!r} has arity {n}")
        return n
    if isinstance(e, (Union, Intersect, Diff)):
        a, b = arity(e.left, spec, bound), arity(e.right, spec, bound)
        if a != b and not isinstance(e.left, Empty) and not isinstance(e.right, Empty):
            raise ArityError(f"{type(e).__name__} of arities {a} and {b}")
        return a if not isinstance(e.left, Empty) else b
    if isinstance(e, (Transpose, TransClosure)):
        if arity(e.expr, spec, bound) != 2:
            raise ArityError(f"{type(e).__name__} needs a binary relation")
        return 2
    if isinstance(e, DomRestrict):
        if arity(e.domain, spec, bound) != 1:
            raise ArityError("domain restriction needs a unary left side")
        return arity(e.relation, spec, bound)
    raise TypeError(f"not an expression: {e!r}")


def check_formula(f: Formula, spec: Spec, bound: frozenset[str] = frozenset()) -> None:
    if isinstance(f, (In, Equal)):
        a, b = arity(f.left, spec, bound), arity(f.right, spec, bound)
        if a != b and not isinstance(f.left, Empty) and not isinstance(f.right, Empty):
            raise ArityError(f"comparison of arities {a} and {b}")
    elif isinstance(f, CardCmp):
        arity(f.expr, spec, bound)
    elif isinstance(f, Acyclic):
        if arity(f.expr, spec, bound) != 2:
            raise ArityError("acyclicity needs a binary relation")
    elif isinstance(f, Not):
        check_formula(f.body, spec, bound)
    elif isinstance(f, (And, Or)):
        for g in f.operands:
            check_formula(g, spec, bound)
    elif isinstance(f, Implies):
        check_formula(f.left, spec, bound)
        check_formula(f.right, spec, bound)
    elif isinstance(f, Quant):
        if arity(f.bound, spec, bound) != 1:
            raise ArityError(f"quantifier over {f.var} needs a unary bound")
        check_formula(f.body, spec, bound | {f.var})
    elif not isinstance(f, TrueFormula):
        raise TypeError(f"not a formula: {f!r}")


# -- exact evaluation --------------------------------------------------------

class _Exact:
    def __init__(self, inst: Instance) -> None:
        self.inst = inst
        self.extent = inst.universe.extent

    def expr(self, e: Expr, env: Mapping[str, str]) -> Rel:
        if isinstance(e, FieldRef):
            return self.inst.tuples.get(e.name, frozenset())
        if isinstance(e, Var):
            return frozenset(((env[e.name],),))
        if isinstance(e, SigRef):
            return self.extent[e.name]
        if isinstance(e, Join):
            return join(self.expr(e.left, env), self.expr(e.right, env))
        if isinstance(e, Union):
            return self.expr(e.left, env) | self.expr(e.right, env)
        if isinstance(e, Intersect):
            return self.expr(e.left, env) & self.expr(e.right, env)
        if isinstance(e, Diff):
            return self.expr(e.left, env) - self.expr(e.right, env)
        if isinstance(e, Transpose):
            return transpose(self.expr(e.expr, env))
        if isinstance(e, TransClosure):
            return transitive_closure(self.expr(e.expr, env))
        if isinstance(e, DomRestrict):
            return dom_restrict(self.expr(e.domain, env), self.expr(e.relation, env))
        if isinstance(e, Empty):
            return frozenset()
        raise TypeError(f"not an expression: {e!r}")

    def formula(self, f: Formula, env: Mapping[str, str]) -> bool:
        if isinstance(f, In):
            return self.expr(f.left, env) <= self.expr(f.right, env)
        if isinstance(f, Equal):
            return self.expr(f.left, env) == self.expr(f.right, env)
        if isinstance(f, CardCmp):
            n = len(self.expr(f.expr, env))
            return n == f.n if f.op == "=" else n <= f.n if f.op == "<=" else n >= f.n
        if isinstance(f, Not):
            return not self.formula(f.body, env)
        if isinstance(f, And):
            return all(self.formula(g, env) for g in f.operands)
        if isinstance(f, Or):
            return any(self.formula(g, env) for g in f.operands)
        if isinstance(f, Implies):
            return not self.formula(f.left, env) or self.formula(f.right, env)
        if isinstance(f, Quant):
            hits = 0
            for (a,) in sorted(self.expr(f.bound, env)):
                ok = self.formula(f.body, {**env, f.var: a})
                if f.kind == "all" and not ok:
                    return False
                if f.kind in ("some", "no") and ok:
                    return f.kind == "some"
                hits += ok
            if f.kind == "all":
                return True
            if f.kind == "some":
                return False
            if f.kind == "no":
                return True
            return hits == 1
        if isinstance(f, Acyclic):
            return is_acyclic(self.expr(f.expr, env))
        if isinstance(f, TrueFormula):
            return True
        raise TypeError(f"not a formula: {f!r}")


def _check_env(inst: Instance, env: Mapping[str, str] | None) -> dict[str, str]:
    env = dict(env or {})
    for var, atom in env.items():
        if atom not in inst.universe.kind_of:
            raise UnknownNameError("atom", atom)
    return env


def eval_expr(e: Expr, inst: Instance, env: Mapping[str, str] | None = None) -> Rel:
    """Value of ``e`` in ``inst``: a set of atom tuples of uniform arity."""
    env = _check_env(inst, env)
    arity(e, inst.spec, frozenset(env))
    return _Exact(inst).expr(e, env)


_CHECKED: dict[tuple, tuple[Formula, Spec]] = {}


def _checked(f: Formula, spec: Spec, bound: frozenset[str]) -> None:
    """``check_formula``, remembered by object identity (hashing a formula walks it)."""
    key = (id(f), id(spec), bound)
    hit = _CHECKED.get(key)
    if hit is not None and hit[0] is f and hit[1] is spec:
        return
    check_formula(f, spec, bound)
    if len(_CHECKED) >= 1024:
        _CHECKED.clear()
    _CHECKED[key] = (f, spec)


def eval_formula(f: Formula, inst: Instance, env: Mapping[str, str] | None = None) -> bool:
    env = _check_env(inst, env)
    _checked(f, inst.spec, frozenset(env))
    return _Exact(inst).formula(f, env)


# -- three-valued evaluation -------------------------------------------------

Bounds = tuple  # (lower: Rel, upper: Rel)


class BoundsEvaluator:
    """Evaluate over a partial instance given by per-field (lower, upper) bounds.

    ``field_bounds(name)`` must return a pair with ``lower <= upper``.
    Formulas evaluate to True, False or None for unknown.
    """

    def __init__(self, extent: Mapping[str, Rel], field_bounds: Callable[[str], Bounds]) -> None:
        self.extent = extent
        self.field_bounds = field_bounds
        self._memo: dict | None = None
        self._free: dict[int, tuple] = {}

    def begin(self) -> None:
        """Start memoizing; call again whenever the field bounds change."""
        self._memo = {}

    def expr(self, e: Expr, env: Mapping[str, str]) -> Bounds:
        memo = self._memo
        if memo is None or isinstance(e, (FieldRef, Var, SigRef)):
            return self._expr(e, env)
        entry = self._free.get(id(e))
        if entry is None or entry[0] is not e:
            entry = self._free[id(e)] = (e, tuple(sorted(free_vars(e))))
        key = (id(e), *(env[v] for v in entry[1]))
        out = memo.get(key)
        if out is None:
            out = memo[key] = self._expr(e, env)
        return out

    def _expr(self, e: Expr, env: Mapping[str, str]) -> Bounds:
        if isinstance(e, FieldRef):
            return self.field_bounds(e.name)
        if isinstance(e, Var):
            v = frozenset(((env[e.name],),))
            return v, v
        if isinstance(e, SigRef):
            v = self.extent[e.name]
            return v, v
        if isinstance(e, Join):
            if isinstance(e.left, Var):
                # common case: navigation from a single atom
                atom = env[e.left.name]
                lo, hi = self.expr(e.right, env)
                return (frozenset(t[1:] for t in lo if t[0] == atom),
                        frozenset(t[1:] for t in hi if t[0] == atom))
            (l1, h1), (l2, h2) = self.expr(e.left, env), self.expr(e.right, env)
            return join(l1, l2), join(h1, h2)
        if isinstance(e, Union):
            (l1, h1), (l2, h2) = self.expr(e.left, env), self.expr(e.right, env)
            return l1 | l2, h1 | h2
        if isinstance(e, Intersect):
            (l1, h1), (l2, h2) = self.expr(e.left, env), self.expr(e.right, env)
            return l1 & l2, h1 & h2
        if isinstance(e, Diff):
            (l1, h1), (l2, h2) = self.expr(e.left, env), self.expr(e.right, env)
            return l1 - h2, h1 - l2
        if isinstance(e, Transpose):
            lo, hi = self.expr(e.expr, env)
            return transpose(lo), transpose(hi)
        if isinstance(e, TransClosure):
            lo, hi = self.expr(e.expr, env)
            return transitive_closure(lo), transitive_closure(hi)
        if isinstance(e, DomRestrict):
            (l1, h1), (l2, h2) = self.expr(e.domain, env), self.expr(e.relation, env)
            return dom_restrict(l1, l2), dom_restrict(h1, h2)
        if isinstance(e, Empty):
            return frozenset(), frozenset()
        raise TypeError(f"not an expression: {e!r}")

    def formula(self, f: Formula, env: Mapping[str, str]) -> bool | None:
        if isinstance(f, In):
            (l1, h1), (l2, h2) = self.expr(f.left, env), self.expr(f.right, env)
            if h1 <= l2:
                return True
            if not l1 <= h2:
                return False
            return None
        if isinstance(f, Equal):
            (l1, h1), (l2, h2) = self.expr(f.left, env), self.expr(f.right, env)
            if not (l1 <= h2 and l2 <= h1):
                return False
            if l1 == h1 == l2 == h2:
                return True
            return None
        if isinstance(f, CardCmp):
            lo, hi = self.expr(f.expr, env)
            nlo, nhi = len(lo), len(hi)
            if f.op == "=":
                if f.n < nlo or f.n > nhi:
                    return False
                return True if nlo == nhi else None
            if f.op == "<=":
                return True if nhi <= f.n else False if nlo > f.n else None
            return True if nlo >= f.n else False if nhi < f.n else None
        if isinstance(f, Not):
            r = self.formula(f.body, env)
            return None if r is None else not r
        if isinstance(f, And):
            unknown = False
            for g in f.operands:
                r = self.formula(g, env)
                if r is False:
                    return False
                unknown |= r is None
            return None if unknown else True
        if isinstance(f, Or):
            unknown = False
            for g in f.operands:
                r = self.formula(g, env)
                if r is True:
                    return True
                unknown |= r is None
            return None if unknown else False
        if isinstance(f, Implies):
            a = self.formula(f.left, env)
            if a is False:
                return True
            b = self.formula(f.right, env)
            if b is True:
                return True
            if a is True and b is False:
                return False
            return None
        if isinstance(f, Quant):
            return self._quant(f, env)
        if isinstance(f, Acyclic):
            lo, hi = self.expr(f.expr, env)
            if is_acyclic(hi):
                return True
            if not is_acyclic(lo):
                return False
            return None
        if isinstance(f, TrueFormula):
            return True
        raise TypeError(f"not a formula: {f!r}")

    def _quant(self, f: Quant, env: Mapping[str, str]) -> bool | None:
        lo, hi = self.expr(f.bound, env)
        certain_hits = 0    # certainly a member and body certainly true
        possible_hits = 0   # possibly a member and body possibly true
        unknown = False
        for (a,) in sorted(hi):
            member = (a,) in lo
            r = self.formula(f.body, {**env, f.var: a})
            if f.kind == "all":
                if r is False and member:
                    return False
                unknown |= r is not True
            elif f.kind in ("some", "no"):
                if r is True and member:
                    return f.kind == "some"
                unknown |= r is not False
            else:
                certain_hits += member and r is True
                possible_hits += r is not False
                if certain_hits > 1:
                    return False
        if f.kind == "all":
            return None if unknown else True
        if f.kind == "some":
            return None if unknown else False
        if f.kind == "no":
            return None if unknown else True
        if possible_hits == 0:
            return False
        if certain_hits == 1 and possible_hits == 1:
            return True
        return None
