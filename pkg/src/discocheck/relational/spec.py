"""Signatures, fields, scopes and instances."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

from .ast import Formula, field_names, free_vars, sig_names
from .errors import ScopeError, SpecError, UnknownNameError

MULTIPLICITIES = ("one", "lone", "set")

Tuple = tuple  # an atom tuple, e.g. ("Task$0", "Task$1")
_NO_TUPLES: frozenset = frozenset()


@dataclass(frozen=True)
class FieldDecl:
    """A binary relation from ``owner`` atoms to ``target`` atoms.

    ``exclude`` narrows the target to ``target - exclude`` (used for element
    sets such as "aggregations that are not compositions").
    """

    name: str
    owner: str
    target: str
    multiplicity: str = "set"
    exclude: str | None = None

    def __post_init__(self) -> None:
        if self.multiplicity not in MULTIPLICITIES:
            raise ValueError(f"bad multiplicity {self.multiplicity!r}")


@dataclass(frozen=True)
class SignatureDecl:
    name: str
    is_abstract: bool = False
    parent: str | None = None
    fields: tuple[FieldDecl, ...] = ()


@dataclass(frozen=True, eq=False)
class Spec:
    """A forest of signatures plus named global facts.

    Construction validates the forest and that every fact is closed and
    refers only to declared signatures and fields.
    """

    signatures: tuple[SignatureDecl, ...]
    facts: Mapping[str, Formula] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "signatures", tuple(self.signatures))
        object.__setattr__(self, "facts", dict(self.facts))
        self._validate()

    def _validate(self) -> None:
        names = [s.name for s in self.signatures]
        if len(set(names)) != len(names):
            raise SpecError("duplicate signature names")
        by_name = {s.name: s for s in self.signatures}
        for sig in self.signatures:
            if sig.parent is not None and sig.parent not in by_name:
                raise UnknownNameError("signature", sig.parent)
            seen = set()
            cur: str | None = sig.name
            while cur is not None:
                if cur in seen:
                    raise SpecError(f"signature {sig.name!r} is its own ancestor")
                seen.add(cur)
                cur = by_name[cur].parent
            for f in sig.fields:
                if f.owner != sig.name:
                    raise SpecError(f"field {f.name!r} declared on {sig.name!r} but owned by {f.owner!r}")
                for target in (f.target, f.exclude):
                    if target is not None and target not in by_name:
                        raise UnknownNameError("signature", target)
        declared_fields = {f.name for f in self.fields}
        for fid, fact in self.facts.items():
            for name in sig_names(fact):
                if name not in by_name:
                    raise UnknownNameError("signature", name)
            for name in field_names(fact):
                if name not in declared_fields:
                    raise UnknownNameError("field", name)
            if free_vars(fact):
                raise SpecError(f"fact {fid} has free variables {sorted(free_vars(fact))}")

    @cached_property
    def _by_name(self) -> dict[str, SignatureDecl]:
        return {s.name: s for s in self.signatures}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {s.name: [] for s in self.signatures}
        for s in self.signatures:
            if s.parent is not None:
                out[s.parent].append(s.name)
        return {k: tuple(v) for k, v in out.items()}

    def sig(self, name: str) -> SignatureDecl:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownNameError("signature", name) from None

    def has_sig(self, name: str) -> bool:
        return name in self._by_name

    def children(self, name: str) -> tuple[str, ...]:
        self.sig(name)
        return self._children[name]

    def roots(self) -> list[str]:
        return [s.name for s in self.signatures if s.parent is None]

    def ancestors(self, name: str) -> list[str]:
        """``name`` followed by its ancestors, nearest first."""
        out = []
        cur: str | None = name
        while cur is not None:
            out.append(cur)
            cur = self.sig(cur).parent
        return out

    def conforms(self, kind: str, ancestor: str) -> bool:
        self.sig(ancestor)
        return ancestor in self.ancestors(kind)

    def descendants(self, name: str) -> list[str]:
        """``name`` and every signature below it, in preorder."""
        out = [name]
        for child in self.children(name):
            out.extend(self.descendants(child))
        return out

    @property
    def concrete(self) -> list[str]:
        return [s.name for s in self.signatures if not s.is_abstract]

    @property
    def fields(self) -> list[FieldDecl]:
        return [f for s in self.signatures for f in s.fields]

    def fields_of(self, name: str) -> list[FieldDecl]:
        """Fields applicable to atoms of ``name``: inherited ones first."""
        out: list[FieldDecl] = []
        for anc in reversed(self.ancestors(name)):
            out.extend(self.sig(anc).fields)
        return out

    def field_decls(self, name: str) -> list[FieldDecl]:
        decls = [f for f in self.fields if f.name == name]
        if not decls:
            raise UnknownNameError("field", name)
        return decls

    def with_facts(self, fact_ids: Iterable[str]) -> Spec:
        wanted = set(fact_ids)
        unknown = wanted - set(self.facts)
        if unknown:
            raise UnknownNameError("fact", sorted(unknown)[0])
        return Spec(self.signatures, {k: v for k, v in self.facts.items() if k in wanted})

    def without_facts(self) -> Spec:
        return Spec(self.signatures, {})


@dataclass(frozen=True, eq=False)
class Scope:
    """Exact per-signature atom counts.

    Counts are inclusive: a signature's count covers the atoms of all its
    descendants.  Missing entries are filled in by :meth:`complete`.
    """

    counts: Mapping[str, int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", dict(self.counts))
        for name, n in self.counts.items():
            if not isinstance(n, int) or n < 0:
                raise ScopeError(f"count for {name!r} must be a nonnegative integer")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Scope) and self.counts == other.counts

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.counts.items())))

    def __getitem__(self, name: str) -> int:
        return self.counts[name]

    def get(self, name: str, default: int = 0) -> int:
        return self.counts.get(name, default)

    def complete(self, spec: Spec) -> Scope:
        """Fill in every signature's count and check consistency.

        Unlisted leaves get 0, unlisted parents get the sum of their
        children.  A listed abstract count must equal that sum; a listed
        concrete count must be at least that sum (the surplus are atoms of
        the concrete signature itself).
        """
        for name in self.counts:
            spec.sig(name)
        full: dict[str, int] = {}

        def fill(name: str) -> int:
            kids = sum(fill(c) for c in spec.children(name))
            sig = spec.sig(name)
            if name in self.counts:
                n = self.counts[name]
                if sig.is_abstract and n != kids:
                    raise ScopeError(
                        f"abstract signature {name} has count {n} but its children sum to {kids}")
                if n < kids:
                    raise ScopeError(f"{name} has count {n} below its children's sum {kids}")
            else:
                n = kids
            full[name] = n
            return n

        for root in spec.roots():
            fill(root)
        return Scope({s.name: full[s.name] for s in spec.signatures})

    def own(self, spec: Spec, name: str) -> int:
        """Atoms belonging to ``name`` itself rather than to a child."""
        return self.counts[name] - sum(self.counts[c] for c in spec.children(name))

    def total(self, spec: Spec) -> int:
        return sum(self.counts[r] for r in spec.roots())


def atom_name(sig: str, index: int) -> str:
    return f"{sig}${index}"


class Universe:
    """Atoms of every signature under a completed scope."""

    def __init__(self, spec: Spec, scope: Scope) -> None:
        self.spec = spec
        self.scope = scope.complete(spec)
        self.own: dict[str, tuple[str, ...]] = {
            name: tuple(atom_name(name, i) for i in range(self.scope.own(spec, name)))
            for name in spec.concrete
        }
        self.kind_of: dict[str, str] = {a: k for k, atoms in self.own.items() for a in atoms}
        self.extent: dict[str, frozenset[Tuple]] = {}
        self.ordered: dict[str, tuple[str, ...]] = {}
        for sig in spec.signatures:
            atoms = tuple(a for d in spec.descendants(sig.name) for a in self.own.get(d, ()))
            self.ordered[sig.name] = atoms
            self.extent[sig.name] = frozenset((a,) for a in atoms)
        self.atoms: tuple[str, ...] = tuple(a for name in spec.concrete for a in self.own[name])
        self.field_names: tuple[str, ...] = tuple(dict.fromkeys(f.name for f in spec.fields))
        self.own_view: Mapping[str, tuple[str, ...]] = MappingProxyType(self.own)

    def field_targets(self, f: FieldDecl) -> tuple[str, ...]:
        targets = self.ordered[f.target]
        if f.exclude is not None:
            excluded = set(self.ordered[f.exclude])
            targets = tuple(a for a in targets if a not in excluded)
        return targets


@dataclass(frozen=True, eq=False)
class Instance:
    """A finite universe of atoms plus a tuple set for every field name.

    Fields that share a name across disjoint owners are stored as one
    relation, the union of their tuples.
    """

    spec: Spec
    atoms: Mapping[str, tuple[str, ...]]
    tuples: Mapping[str, frozenset[Tuple]]

    @classmethod
    def build(cls, universe: Universe, tuples: Mapping[str, Iterable[Tuple]]) -> Instance:
        rels: dict[str, frozenset[Tuple]] = dict.fromkeys(universe.field_names, _NO_TUPLES)
        for name, ts in tuples.items():
            if name not in rels:
                raise UnknownNameError("field", name)
            rels[name] = ts if type(ts) is frozenset else frozenset(tuple(t) for t in ts)
        inst = cls(universe.spec, universe.own_view, rels)
        # fills the cached property below so it is never recomputed
        inst.__dict__["universe"] = universe
        return inst

    @cached_property
    def universe(self) -> Universe:
        return Universe(self.spec, Scope({k: len(v) for k, v in self.atoms.items()}))

    def extent(self, sig: str) -> frozenset[Tuple]:
        return self.universe.extent[sig]

    @cached_property
    def _key(self) -> tuple:
        return (
            tuple(sorted((k, v) for k, v in self.atoms.items() if v)),
            tuple(sorted((k, tuple(sorted(v))) for k, v in self.tuples.items() if v)),
        )

    def key(self) -> tuple:
        """Canonical hashable form, used for equality and set comparisons."""
        return self._key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Instance) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        atoms = ", ".join(a for v in self.atoms.values() for a in v)
        rels = "; ".join(f"{k}={sorted(v)}" for k, v in sorted(self.tuples.items()) if v)
        return f"Instance(atoms=[{atoms}], {rels})"

    def check_multiplicities(self) -> bool:
        u = self.universe
        for f in self.spec.fields:
            owners = u.ordered[f.owner]
            allowed = set(u.field_targets(f))
            by_owner: dict[str, list[str]] = {o: [] for o in owners}
            for t in self.tuples.get(f.name, ()):
                if t[0] in by_owner:
                    by_owner[t[0]].append(t[1])
            for o, ts in by_owner.items():
                if any(x not in allowed for x in ts):
                    return False
                if f.multiplicity == "one" and len(ts) != 1:
                    return False
                if f.multiplicity == "lone" and len(ts) > 1:
                    return False
        return True
