"""Dual-edge networks: validation, decomposability, cliques and junction trees.

Vertices are the integers ``1..n``. Every edge ``(i, j)`` of either edge set
points from a lower to a higher index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .errors import (CycleDetected, InvalidDeun, NotDecomposable,
                     OrderingViolated, SelfLoop)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Violation:
    kind: str
    edge: Edge | None = None
    detail: str = ""

    def __str__(self):
        where = f" {self.edge}" if self.edge is not None else ""
        return f"{self.kind}{where}: {self.detail}" if self.detail else f"{self.kind}{where}"


def _edge_set(edges: Iterable) -> frozenset[Edge]:
    return frozenset((int(i), int(j)) for i, j in edges)


def find_cycle(n: int, edges: Iterable[Edge]) -> tuple[int, ...] | None:
    """Return one directed cycle as a vertex sequence (first vertex repeated
    at the end), or None when the graph is acyclic."""
    succ: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for i, j in sorted(edges):
        succ.setdefault(i, []).append(j)
        succ.setdefault(j, [])
    colour = {v: 0 for v in succ}
    for root in sorted(succ):
        if colour[root]:
            continue
        stack = [(root, iter(succ[root]))]
        path = [root]
        colour[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                colour[v] = 2
            elif colour[nxt] == 1:
                k = path.index(nxt)
                return tuple(path[k:]) + (nxt,)
            elif colour[nxt] == 0:
                colour[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(succ[nxt])))
    return None


def deun_violations(n: int, prob_edges: Iterable, util_edges: Iterable) -> list[Violation]:
    found: list[Violation] = []
    if n < 1:
        return [Violation("EmptyNetwork", None, "at least one vertex is required")]
    for label, edges in (("probabilistic", _edge_set(prob_edges)),
                         ("utility", _edge_set(util_edges))):
        for i, j in sorted(edges):
            if not (1 <= i <= n and 1 <= j <= n):
                found.append(Violation("VertexOutOfRange", (i, j),
                                       f"{label} edge outside 1..{n}"))
            elif i == j:
                found.append(Violation("SelfLoop", (i, j), f"{label} edge"))
            elif i > j:
                found.append(Violation("OrderingViolated", (i, j),
                                       f"{label} edge must point to a higher index"))
        cycle = find_cycle(n, ((i, j) for i, j in edges if i != j))
        if cycle:
            found.append(Violation("CycleDetected", None,
                                   f"{label} cycle {' -> '.join(map(str, cycle))}"))
    return found


@dataclass(frozen=True)
class Deun:
    """Attribute DAG carrying probabilistic and utility edge sets."""

    n: int
    prob_edges: frozenset[Edge] = field(default_factory=frozenset)
    util_edges: frozenset[Edge] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "prob_edges", _edge_set(self.prob_edges))
        object.__setattr__(self, "util_edges", _edge_set(self.util_edges))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def _prob_parents(self) -> dict[int, tuple[int, ...]]:
        return {v: tuple(sorted(i for i, j in self.prob_edges if j == v))
                for v in self.vertices}

    @cached_property
    def _util_parents(self) -> dict[int, tuple[int, ...]]:
        return {v: tuple(sorted(i for i, j in self.util_edges if j == v))
                for v in self.vertices}

    def prob_parents(self, v: int) -> tuple[int, ...]:
        return self._prob_parents[v]

    def util_parents(self, v: int) -> tuple[int, ...]:
        return self._util_parents[v]

    def prob_children(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(j for i, j in self.prob_edges if i == v))

    def family(self, v: int) -> frozenset[int]:
        return frozenset((v,) + self.prob_parents(v))

    @cached_property
    def skeleton(self) -> dict[int, frozenset[int]]:
        """Undirected adjacency of the probabilistic edge set."""
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for i, j in self.prob_edges:
            adj[i].add(j)
            adj[j].add(i)
        return {v: frozenset(a) for v, a in adj.items()}

    def has_prob_path(self, i: int, j: int) -> bool:
        """True when a directed probabilistic path leads from ``i`` to ``j``."""
        stack, seen = [i], {i}
        while stack:
            v = stack.pop()
            for w in self.prob_children(v):
                if w == j:
                    return True
                if w not in seen and w < j:
                    seen.add(w)
                    stack.append(w)
        return False


def validate_deun(n: int, prob_edges: Iterable = (), util_edges: Iterable = ()) -> Deun:
    """Build a :class:`Deun`, raising on any structural violation.

    The raised exception's ``violations`` attribute lists every problem.
    """
    prob_edges = _edge_set(prob_edges)
    util_edges = _edge_set(util_edges)
    found = deun_violations(n, prob_edges, util_edges)
    if found:
        first = found[0]
        message = "; ".join(map(str, found))
        if first.kind == "SelfLoop":
            raise SelfLoop(message, found)
        if first.kind == "OrderingViolated":
            raise OrderingViolated(message, found)
        if first.kind == "CycleDetected":
            raise CycleDetected(message, found)
        raise InvalidDeun(message, found)
    return Deun(n, prob_edges, util_edges)


# --------------------------------------------------------------------------
# Decomposability
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DecomposabilityCheck:
    """Outcome of :func:`is_decomposable`; truthy iff decomposable.

    On failure ``condition`` is ``"unmarried_parents"`` (two probabilistic
    parents of ``child`` are not joined) or ``"unshadowed_utility_edge"``
    (a utility edge has no directed probabilistic path), and ``vertices``
    holds the offending pair.
    """

    decomposable: bool
    condition: str | None = None
    vertices: tuple[int, ...] = ()
    child: int | None = None

    def __bool__(self):
        return self.decomposable


def _unmarried_parents(deun: Deun) -> list[tuple[int, int, int]]:
    missing = []
    for child in deun.vertices:
        for a, b in itertools.combinations(deun.prob_parents(child), 2):
            if (a, b) not in deun.prob_edges:
                missing.append((a, b, child))
    return missing


def is_decomposable(deun: Deun) -> DecomposabilityCheck:
    unmarried = _unmarried_parents(deun)
    if unmarried:
        a, b, child = unmarried[0]
        return DecomposabilityCheck(False, "unmarried_parents", (a, b), child)
    for i, j in sorted(deun.util_edges):
        if not deun.has_prob_path(i, j):
            return DecomposabilityCheck(False, "unshadowed_utility_edge", (i, j))
    return DecomposabilityCheck(True)


def make_decomposable(deun: Deun) -> Deun:
    """Add probabilistic edges until the network is decomposable.

    First every utility edge without a probabilistic path is copied into the
    probabilistic set, then pairs of co-parents are joined (lower index to
    higher) repeatedly until no unjoined pair is left. Utility edges are
    never changed.
    """
    prob = set(deun.prob_edges)
    current = deun
    while True:
        shadow = {e for e in current.util_edges if not current.has_prob_path(*e)}
        marry = {(a, b) for a, b, _ in _unmarried_parents(current)}
        added = (shadow | marry) - prob
        if not added:
            return current
        prob |= added
        current = Deun(deun.n, prob, deun.util_edges)


# --------------------------------------------------------------------------
# Cliques and junction trees
# --------------------------------------------------------------------------

def maximum_cardinality_search(deun: Deun) -> list[int]:
    """Visit order starting at vertex 1; ties go to the lowest index."""
    adj = deun.skeleton
    weight = {v: 0 for v in deun.vertices}
    order: list[int] = []
    remaining = set(deun.vertices)
    while remaining:
        best = max(weight[v] for v in remaining)
        v = min(u for u in remaining if weight[u] == best)
        order.append(v)
        remaining.remove(v)
        for u in adj[v]:
            if u in remaining:
                weight[u] += 1
    return order


@dataclass(frozen=True)
class CliqueSet:
    cliques: tuple[frozenset[int], ...]
    separators: tuple[frozenset[int], ...]  # separators[k] belongs to cliques[k]; separators[0] is empty
    rip_parent: tuple[int | None, ...]      # rip_parent[0] is None

    def __len__(self):
        return len(self.cliques)


def _require_decomposable(deun: Deun):
    check = is_decomposable(deun)
    if not check:
        raise NotDecomposable(
            f"network is not decomposable ({check.condition} at {check.vertices})")


def enumerate_cliques(deun: Deun) -> CliqueSet:
    """Maximal cliques of the probabilistic skeleton in running-intersection
    order, as produced by maximum cardinality search."""
    _require_decomposable(deun)
    adj = deun.skeleton
    order = maximum_cardinality_search(deun)
    candidates: list[frozenset[int]] = []
    for k, v in enumerate(order):
        earlier = set(order[:k])
        candidates.append(frozenset({v} | (adj[v] & earlier)))
    cliques: list[frozenset[int]] = []
    for c in candidates:
        if any(c < d for d in candidates) or c in cliques:
            continue
        cliques.append(c)
    separators = [frozenset()]
    parents: list[int | None] = [None]
    seen = set(cliques[0])
    for k in range(1, len(cliques)):
        sep = frozenset(cliques[k] & seen)
        holder = next((j for j in range(k) if sep <= cliques[j]), None)
        if holder is None:
            raise NotDecomposable("cliques do not satisfy running intersection")
        separators.append(sep)
        parents.append(holder)
        seen |= cliques[k]
    return CliqueSet(tuple(cliques), tuple(separators), tuple(parents))


@dataclass(frozen=True)
class JunctionTree:
    clique_set: CliqueSet
    edges: tuple[tuple[int, int], ...]          # (parent, child) clique indices
    family_assignment: dict[int, int]           # vertex -> clique index

    @property
    def cliques(self):
        return self.clique_set.cliques

    @property
    def separators(self):
        return self.clique_set.separators

    def parent(self, k: int) -> int | None:
        for p, c in self.edges:
            if c == k:
                return p
        return None

    def children(self, k: int) -> tuple[int, ...]:
        return tuple(c for p, c in self.edges if p == k)

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(k for k in range(len(self.cliques)) if self.parent(k) is None)

    def assigned(self, k: int) -> tuple[int, ...]:
        return tuple(sorted(v for v, c in self.family_assignment.items() if c == k))


def build_junction_tree(deun: Deun) -> JunctionTree:
    """Link each clique to its running-intersection parent and assign every
    vertex to the lowest-index clique holding its probabilistic family.

    A clique whose separator is empty starts a new tree, so disconnected
    networks give a forest.
    """
    cs = enumerate_cliques(deun)
    edges = tuple((cs.rip_parent[k], k) for k in range(1, len(cs))
                  if cs.separators[k])
    assignment = {}
    for v in deun.vertices:
        fam = deun.family(v)
        k = next(k for k, c in enumerate(cs.cliques) if fam <= c)
        first = next(k for k, c in enumerate(cs.cliques) if v in c)
        if k != first:
            raise NotDecomposable(
                f"family of vertex {v} is not in the first clique containing it")
        assignment[v] = k
    return JunctionTree(cs, edges, assignment)
