"""Transitive closure and cycle detection on binary relations."""

from __future__ import annotations

from collections import defaultdict
from itertools import repeat
from typing import Hashable, Iterable, Sequence


def successors(pairs: Iterable[tuple]) -> dict[Hashable, list[Hashable]]:
    succ: dict[Hashable, list[Hashable]] = defaultdict(list)
    for a, b in pairs:
        succ[a].append(b)
    return succ


def transitive_closure(pairs: Iterable[tuple]) -> frozenset[tuple]:
    """Least transitive relation containing ``pairs``."""
    succ: dict[Hashable, set[Hashable]] = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    out = []
    for start, direct in succ.items():
        seen = set(direct)
        stack = list(direct)
        while stack:
            for y in succ.get(stack.pop(), ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        out.extend(zip(repeat(start), seen))
    return frozenset(out)


def is_acyclic(pairs: Iterable[tuple]) -> bool:
    """True iff no atom reaches itself, i.e. the closure has no ``(a, a)``.

    Kahn's algorithm: repeatedly drop vertices without incoming edges; a
    cycle is what remains.
    """
    succ: dict[Hashable, set[Hashable]] = {}
    indegree: dict[Hashable, int] = {}
    for a, b in pairs:
        out = succ.setdefault(a, set())
        if b not in out:
            out.add(b)
            indegree[b] = indegree.get(b, 0) + 1
            indegree.setdefault(a, 0)
    ready = [v for v, n in indegree.items() if n == 0]
    removed = 0
    while ready:
        v = ready.pop()
        removed += 1
        for w in succ.get(v, ()):
            indegree[w] -= 1
            if indegree[w] == 0:
                ready.append(w)
    return removed == len(indegree)


def find_cycle(pairs: Iterable[tuple]) -> list | None:
    """Return the atoms of some cycle in visiting order, or None.

    Iterative three-colour DFS; vertices are visited in sorted order so the
    reported cycle is deterministic.
    """
    succ = successors(pairs)
    for v in succ:
        succ[v] = sorted(set(succ[v]))
    white, grey, black = 0, 1, 2
    colour: dict = defaultdict(int)
    for root in sorted(succ):
        if colour[root] != white:
            continue
        path = [root]
        iters = [iter(succ[root])]
        colour[root] = grey
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                colour[path.pop()] = black
                iters.pop()
                continue
            if colour[nxt] == grey:
                return path[path.index(nxt):]
            if colour[nxt] == white:
                colour[nxt] = grey
                path.append(nxt)
                iters.append(iter(succ.get(nxt, ())))
    return None


def strongly_connected_components(nodes: Sequence, pairs: Iterable[tuple]) -> list[list]:
    """Tarjan's algorithm, iterative.  Components come out in reverse topological order."""
    succ = successors(pairs)
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    result: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            w = next(it, None)
            if w is not None:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(comp)
    return result
