"""Bounded model finding by exhaustive backtracking.

The search variables are *cells*: one per (field, owner atom) pair, whose
value is the set of target atoms that owner maps to.  Cells are assigned in
a fixed canonical order; candidate values are enumerated in a fixed order,
so the first instance found and the enumeration order are deterministic.

Pruning:

* The goal and the facts are split into conjuncts, and top-level universal
  quantifiers over field-free bounds are grounded per atom.  After each
  assignment the conjuncts mentioning the assigned field are re-evaluated
  three-valued over the partial instance; a definite False backtracks.
* Goal conjuncts of the shapes ``x.f = E``, ``E in x.f``, ``x.f in E`` and
  ``no x.f`` (``x`` a bound variable, ``E`` field-free) narrow the candidate
  values of the cell for ``x``'s ``f`` before the search starts.
* Optionally (``symmetry_breaking=True``), interchangeable atoms of one
  signature must have lexicographically non-decreasing rows of cell values.
  Only atoms whose fields point at strictly lower layers of the signature
  graph, and which the goal does not name, take part.  This keeps at least
  one member of every isomorphism class, so existence answers are
  unchanged; enumeration counts are not.

:func:`check_assertion` additionally replaces a top-level ``some x: S``
of the negated assertion by a witness pinned to the first atom of each
concrete signature in ``S`` (one search per signature).  Atoms of a
signature that nothing names are interchangeable, so a counterexample
exists iff one exists with the witness at index 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .ast import (
    And, CardCmp, Equal, Expr, FieldRef, Formula, In, Join, Not, Quant, TRUE, Var,
    conj, field_names, push_negation, rename_var,
)
from .errors import ScopeError, SearchBudgetExceeded
from .evaluate import BoundsEvaluator, _Exact, check_formula
from .spec import FieldDecl, Instance, Scope, Spec, Universe

DEFAULT_BUDGET = 10_000_000
_MATERIALIZE = 4096


@dataclass
class _Cell:
    decl: FieldDecl
    owner: str
    lower: tuple[str, ...]
    free: tuple[str, ...]
    singles: tuple[frozenset, ...] | None  # for one/lone fields
    first: int = 0          # depth of the owner's first cell
    prev: int | None = None  # same-position cell of the preceding symmetric atom
    _cache: list = field(default_factory=list)

    @property
    def count(self) -> int:
        if self.singles is not None:
            return len(self.singles)
        return 1 << len(self.free)

    def value(self, i: int) -> frozenset:
        if self.singles is not None:
            return self.singles[i]
        if self._cache:
            return self._cache[i]
        return self._mask_value(i)

    def _mask_value(self, i: int) -> frozenset:
        chosen = list(self.lower)
        for bit, atom in enumerate(self.free):
            if i >> bit & 1:
                chosen.append(atom)
        return frozenset((self.owner, t) for t in chosen)

    def materialize(self) -> None:
        if self.singles is None and self.count <= _MATERIALIZE:
            self._cache = [self._mask_value(i) for i in range(self.count)]

    def __post_init__(self) -> None:
        if self.singles is not None:
            self.potential = frozenset().union(*self.singles)
        else:
            self.potential = frozenset((self.owner, t) for t in self.lower + self.free)


@dataclass
class _Conjunct:
    formula: Formula
    env: dict
    fields: frozenset[str]
    origin: str


def _ground(f: Formula, env: dict, ev: BoundsEvaluator, origin: str, out: list[_Conjunct]) -> None:
    if isinstance(f, And):
        for g in f.operands:
            _ground(g, env, ev, origin, out)
        return
    if isinstance(f, Quant) and f.kind == "all" and not field_names(f.bound):
        lo, _ = ev.expr(f.bound, env)
        for (atom,) in sorted(lo):
            _ground(f.body, {**env, f.var: atom}, ev, origin, out)
        return
    if f == TRUE:
        return
    out.append(_Conjunct(f, env, field_names(f), origin))


def _nav(e: Expr) -> tuple[str, str] | None:
    """``(var, field)`` when ``e`` is ``var.field``."""
    if isinstance(e, Join) and isinstance(e.left, Var) and isinstance(e.right, FieldRef):
        return e.left.name, e.right.name
    return None


class Search:
    """One model-finding query; iterate :meth:`solutions` for instances."""

    def __init__(
        self,
        spec: Spec,
        goal: Formula,
        scope: Scope,
        *,
        env: Mapping[str, str] | None = None,
        budget: int = DEFAULT_BUDGET,
        symmetry_breaking: bool = False,
    ) -> None:
        self.spec = spec
        self.goal = goal
        self.universe = Universe(spec, scope)
        self.env = dict(env or {})
        for var, atom in self.env.items():
            if atom not in self.universe.kind_of:
                raise ScopeError(f"variable {var} pinned to {atom}, which is not in the scope")
        check_formula(goal, spec, frozenset(self.env))
        for fact in spec.facts.values():
            check_formula(fact, spec)
        self.budget = budget
        self.nodes = 0
        self._static = BoundsEvaluator(self.universe.extent, self._no_fields)
        self.conjuncts: list[_Conjunct] = []
        _ground(goal, self.env, self._static, "goal", self.conjuncts)
        for fid, fact in spec.facts.items():
            _ground(fact, {}, self._static, fid, self.conjuncts)
        self.cells = self._build_cells(symmetry_breaking)
        self.by_field: dict[str, list[int]] = {}
        for i, c in enumerate(self.conjuncts):
            for name in c.fields:
                self.by_field.setdefault(name, []).append(i)
        self.bounds: dict[str, tuple[frozenset, frozenset]] = {}
        self.eval = BoundsEvaluator(self.universe.extent, self.bounds.__getitem__)

    @staticmethod
    def _no_fields(name: str):
        raise AssertionError(f"field {name} read in a field-free context")

    # -- setup ---------------------------------------------------------------

    def _cell_restrictions(self) -> dict[tuple[str, str], tuple[set, set | None]]:
        """(field, owner) -> (lower, upper) target atom sets implied by the goal."""
        out: dict[tuple[str, str], tuple[set, set | None]] = {}

        def add(var: str, fname: str, env: dict, lower=None, upper=None):
            owner = env.get(var)
            if owner is None:
                return
            lo, up = out.get((fname, owner), (set(), None))
            if lower is not None:
                lo = lo | lower
            if upper is not None:
                up = set(upper) if up is None else up & upper
            out[(fname, owner)] = (lo, up)

        def atoms(e: Expr, env: dict) -> set | None:
            if field_names(e):
                return None
            lo, _ = self._static.expr(e, env)
            if any(len(t) != 1 for t in lo):
                return None
            return {t[0] for t in lo}

        for c in self.conjuncts:
            if c.origin != "goal":
                continue
            f, env = c.formula, c.env
            if isinstance(f, Equal):
                for side, other in ((f.left, f.right), (f.right, f.left)):
                    nav = _nav(side)
                    vals = atoms(other, env) if nav else None
                    if nav and vals is not None:
                        add(*nav, env, lower=vals, upper=vals)
            elif isinstance(f, In):
                nav = _nav(f.right)
                vals = atoms(f.left, env) if nav else None
                if nav and vals is not None:
                    add(*nav, env, lower=vals)
                nav = _nav(f.left)
                vals = atoms(f.right, env) if nav else None
                if nav and vals is not None:
                    add(*nav, env, upper=vals)
            elif isinstance(f, CardCmp) and f.op == "=" and f.n == 0:
                nav = _nav(f.expr)
                if nav:
                    add(*nav, env, upper=set())
        return out

    def _levels(self) -> dict[str, int | None]:
        """Layer of each concrete signature in the field graph; None on a cycle."""
        spec, levels, visiting = self.spec, {}, set()

        def targets(sig: str) -> set[str]:
            out = set()
            for f in spec.fields_of(sig):
                excluded = set(spec.descendants(f.exclude)) if f.exclude else set()
                out |= {t for t in spec.descendants(f.target)
                        if not spec.sig(t).is_abstract and t not in excluded}
            return out

        def level(sig: str) -> int | None:
            if sig in levels:
                return levels[sig]
            if sig in visiting:
                return None
            visiting.add(sig)
            sub = [level(t) for t in targets(sig)]
            visiting.discard(sig)
            levels[sig] = None if any(s is None for s in sub) else 1 + max(sub, default=-1)
            return levels[sig]

        for sig in spec.concrete:
            level(sig)
        return levels

    def _build_cells(self, symmetry_breaking: bool) -> list[_Cell]:
        spec, u = self.spec, self.universe
        restrict = self._cell_restrictions()
        levels = self._levels()
        order = {name: i for i, name in enumerate(spec.concrete)}
        pinned = set(self.env.values())
        big = len(order) + 1
        concrete = sorted(spec.concrete, key=lambda s: (
            levels[s] if levels[s] is not None else big, order[s]))
        cells: list[_Cell] = []
        # atoms the goal names come first: their cells decide the goal soonest
        for pinned_pass in (True, False):
            for sig in concrete:
                decls = spec.fields_of(sig)
                prev_atom_cells: list[int] | None = None
                symmetric = symmetry_breaking and levels[sig] is not None and decls
                for atom in u.own[sig]:
                    if (atom in pinned) != pinned_pass:
                        continue
                    first = len(cells)
                    for decl in decls:
                        cell = self._cell(decl, atom, restrict)
                        cell.first = first
                        cell.materialize()
                        cells.append(cell)
                    mine = list(range(first, len(cells)))
                    if symmetric and not pinned_pass:
                        if prev_atom_cells is not None:
                            for depth, prev in zip(mine, prev_atom_cells):
                                cells[depth].prev = prev
                        prev_atom_cells = mine
        return cells

    def _cell(self, decl: FieldDecl, atom: str, restrict) -> _Cell:
        lo, up = restrict.get((decl.name, atom), (set(), None))
        allowed = [t for t in self.universe.field_targets(decl) if up is None or t in up]
        if not lo <= set(allowed):
            return _Cell(decl, atom, (), (), ())  # goal contradicts typing
        if decl.multiplicity == "set":
            return _Cell(decl, atom, tuple(t for t in allowed if t in lo),
                         tuple(t for t in allowed if t not in lo), None)
        singles = [frozenset({(atom, t)}) for t in allowed if lo <= {t}]
        if decl.multiplicity == "lone" and not lo:
            singles.insert(0, frozenset())
        return _Cell(decl, atom, (), (), tuple(singles))

    # -- search --------------------------------------------------------------

    def _tied(self, depth: int, idx: list[int]) -> bool:
        cells = self.cells
        for d in range(cells[depth].first, depth):
            if idx[d] != idx[cells[d].prev]:
                return False
        return True

    def _assign(self, depth: int, i: int, trail: list) -> bool:
        cell = self.cells[depth]
        name = cell.decl.name
        chosen = cell.value(i)
        lo, hi = self.bounds[name]
        trail.append(("b", name, lo, hi))
        self.bounds[name] = (lo | chosen, (hi - cell.potential) | chosen)
        return self._propagate(self.by_field.get(name, ()), trail)

    def _propagate(self, conj_ids, trail: list) -> bool:
        self.eval.begin()
        done = self.done
        for ci in conj_ids:
            if done[ci]:
                continue
            c = self.conjuncts[ci]
            r = self.eval.formula(c.formula, c.env)
            if r is False:
                return False
            if r is True:
                done[ci] = True
                trail.append(("d", ci))
        return True

    def _undo(self, trail: list) -> None:
        while trail:
            rec = trail.pop()
            if rec[0] == "b":
                self.bounds[rec[1]] = (rec[2], rec[3])
            else:
                self.done[rec[1]] = False

    def _leaf(self) -> Instance:
        inst = Instance.build(self.universe, {k: lo for k, (lo, _) in self.bounds.items()})
        # every field is fixed here, so propagation has settled each conjunct;
        # any it could not settle is decided exactly
        exact = None
        for ci, settled in enumerate(self.done):
            if not settled:
                c = self.conjuncts[ci]
                exact = exact or _Exact(inst)
                if not exact.formula(c.formula, c.env):
                    raise AssertionError(f"search produced an instance violating {c.origin}")
        return inst

    def solutions(self) -> Iterator[Instance]:
        cells = self.cells
        self.bounds.clear()
        for f in self.spec.fields:
            self.bounds.setdefault(f.name, (frozenset(), frozenset()))
        for c in cells:
            lo, hi = self.bounds[c.decl.name]
            self.bounds[c.decl.name] = (lo, hi | c.potential)
        self.done = [False] * len(self.conjuncts)
        if not self._propagate(range(len(self.conjuncts)), []):
            return
        n = len(cells)
        if n == 0:
            yield self._leaf()
            return
        idx = [-1] * n
        trails: list[list] = [[] for _ in range(n)]
        depth = 0
        while depth >= 0:
            cell = cells[depth]
            trail = trails[depth]
            self._undo(trail)
            i = idx[depth] + 1
            if cell.prev is not None and self._tied(depth, idx):
                i = max(i, idx[cell.prev])
            placed = False
            while i < cell.count:
                self.nodes += 1
                if self.nodes > self.budget:
                    raise SearchBudgetExceeded(self.budget)
                if self._assign(depth, i, trail):
                    placed = True
                    break
                self._undo(trail)
                i += 1
            if not placed:
                idx[depth] = -1
                depth -= 1
                continue
            idx[depth] = i
            if depth == n - 1:
                yield self._leaf()
            else:
                depth += 1


def find_instance(spec: Spec, goal: Formula, scope: Scope, *,
                  env: Mapping[str, str] | None = None, budget: int = DEFAULT_BUDGET,
                  symmetry_breaking: bool = False) -> Instance | None:
    """First instance, in canonical order, satisfying the facts and ``goal``.

    Returns None when no instance exists at exactly this scope.  Raises
    :class:`SearchBudgetExceeded` rather than returning None when the search
    was cut short.
    """
    search = Search(spec, goal, scope, env=env, budget=budget,
                    symmetry_breaking=symmetry_breaking)
    return next(search.solutions(), None)


def enumerate_instances(spec: Spec, goal: Formula, scope: Scope, limit: int | None = None, *,
                        env: Mapping[str, str] | None = None, budget: int = DEFAULT_BUDGET,
                        symmetry_breaking: bool = False) -> list[Instance]:
    """Up to ``limit`` satisfying instances in canonical order (None: all)."""
    if limit is not None and limit < 1:
        raise ValueError("limit must be positive")
    search = Search(spec, goal, scope, env=env, budget=budget,
                    symmetry_breaking=symmetry_breaking)
    out = []
    for inst in search.solutions():
        out.append(inst)
        if limit is not None and len(out) >= limit:
            break
    return out


def witness_alternatives(goal: Formula, universe: Universe,
                         env: Mapping[str, str]) -> list[tuple[Formula, dict[str, str]]]:
    """Goal/pinning pairs, one of which is satisfiable iff ``goal`` is.

    Each top-level existential over a field-free bound made of whole
    signatures with no pinned atoms is replaced by its body with the
    variable pinned to atom 0 of one of those signatures.
    """
    static = BoundsEvaluator(universe.extent, Search._no_fields)
    goal = push_negation(goal)
    parts = list(goal.operands) if isinstance(goal, And) else [goal]
    for k, f in enumerate(parts):
        if not (isinstance(f, Quant) and f.kind == "some" and not field_names(f.bound)):
            continue
        lo, _ = static.expr(f.bound, env)
        atoms = {t[0] for t in lo if len(t) == 1}
        kinds = sorted({universe.kind_of[a] for a in atoms})
        pinned = set(env.values())
        if not atoms or any(set(universe.own[kind]) - atoms or pinned & set(universe.own[kind])
                            for kind in kinds):
            continue
        out = []
        for kind in kinds:
            fresh = f"{f.var}${kind}"
            while fresh in env:
                fresh += "'"
            rest = parts[:k] + [rename_var(f.body, f.var, fresh)] + parts[k + 1:]
            out += witness_alternatives(conj(*rest), universe, {**env, fresh: universe.own[kind][0]})
        return out
    return [(goal, dict(env))]


def check_assertion(spec: Spec, assertion: Formula, scope: Scope, *,
                    env: Mapping[str, str] | None = None, budget: int = DEFAULT_BUDGET,
                    symmetry_breaking: bool = False) -> Instance | None:
    """A counterexample satisfying the facts but not ``assertion``, or None.

    The budget applies to the combined node count of all witness searches.
    """
    universe = Universe(spec, scope)
    remaining = budget
    for goal, pins in witness_alternatives(Not(assertion), universe, dict(env or {})):
        search = Search(spec, goal, scope, env=pins, budget=remaining,
                        symmetry_breaking=symmetry_breaking)
        found = next(search.solutions(), None)
        if found is not None:
            return found
        remaining -= search.nodes
    return None


__all__ = ["DEFAULT_BUDGET", "Search", "find_instance", "enumerate_instances",
           "check_assertion", "conj"]
