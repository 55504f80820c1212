"""Exact expected utilities: backward induction over single attributes,
junction-tree absorption, and the corner-weight utility expansion."""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Real
from typing import Iterable, Sequence

import numpy as np

from .algebra import (CornerConfig, LabeledTable, table_circ, table_reduce_sum)
from .errors import (ExpansionTooLarge, NotConstant, OutOfDomain, PendingVariable,
                     UnsupportedCombination)
from .graph import build_junction_tree
from .model import DecisionModel, LinearGaussian, conditional_utility_vector

EXPANSION_CAP = 24
METHODS = ("theorem1", "jtree")


def _require_closed_form(model: DecisionModel):
    if model.kind == "mixed":
        raise UnsupportedCombination(
            "closed-form evaluation needs either all-Gaussian distributions with "
            "exponential utilities or all-tabular distributions and utilities")


def _marginalize(entry, v: int, cpd):
    if isinstance(entry, Real):
        return entry
    if isinstance(cpd, LinearGaussian):
        if v not in entry.variables:
            return entry
        return entry.expect(v, cpd.mean_form(), cpd.sigma)
    if v not in entry.variables:
        return entry
    return entry.expect(v, cpd.factor(v))


def _integrate(table: LabeledTable, v: int, cpd) -> LabeledTable:
    return table.map(lambda e: _marginalize(e, v, cpd))


def _final_sum(table: LabeledTable) -> float:
    try:
        return table_reduce_sum(table)
    except NotConstant as exc:
        raise PendingVariable(f"attributes left unintegrated: {exc}") from exc


def _check_order(model: DecisionModel, order: Sequence[int]):
    if sorted(order) != list(model.deun.vertices):
        raise ValueError(f"order must be a permutation of 1..{model.n}")
    done: set[int] = set()
    for v in order:
        pending = [c for c in model.deun.prob_children(v) if c not in done]
        if pending:
            raise ValueError(
                f"attribute {v} integrated before its probabilistic children {pending}")
        done.add(v)


def backward_induction(model: DecisionModel, decision: str,
                       order: Iterable[int] | None = None):
    """Run the attribute-by-attribute recursion and keep every intermediate
    table.

    Returns ``(eu, steps)`` where ``steps`` lists ``(attribute, table)``
    after each integration. ``order`` defaults to ``n, ..., 1``; any order
    integrating every attribute after its probabilistic children is valid.
    """
    _require_closed_form(model)
    order = tuple(order) if order is not None else tuple(range(model.n, 0, -1))
    _check_order(model, order)
    table = LabeledTable.unit()
    steps = []
    for v in order:
        table = table_circ(table, conditional_utility_vector(model, v))
        table = _integrate(table, v, model.cpd(decision, v))
        steps.append((v, table))
    total = table_circ(model.corner_table(), table)
    return _final_sum(total), steps


def backward_induction_eu(model: DecisionModel, decision: str,
                          order: Iterable[int] | None = None) -> float:
    """Expected utility of ``decision`` on any valid network."""
    return backward_induction(model, decision, order)[0]


def junction_tree_eu(model: DecisionModel, decision: str, stats: dict | None = None) -> float:
    """Expected utility of ``decision`` by leaf absorption on the junction
    tree; the network must be decomposable.

    Cliques are absorbed from the highest index down, so every child is done
    before its parent. Inside a clique the assigned attributes are integrated
    one at a time from the highest index down. For a forest the root
    contributions are combined with the corner weights at the end.

    If ``stats`` is given it receives the entry count of every message.
    """
    _require_closed_form(model)
    jt = build_junction_tree(model.deun)
    m = len(jt.cliques)
    inbox: list[list[LabeledTable]] = [[] for _ in range(m)]
    inbox[0].append(model.corner_table())
    roots = []
    for k in reversed(range(m)):
        table = LabeledTable.unit()
        for msg in inbox[k]:
            table = table_circ(table, msg)
        for v in sorted(jt.assigned(k), reverse=True):
            table = table_circ(table, conditional_utility_vector(model, v))
            table = _integrate(table, v, model.cpd(decision, v))
        parent = jt.parent(k)
        allowed = jt.separators[k] if parent is not None else frozenset()
        for e in table.entries:
            if not isinstance(e, Real) and not set(e.variables) <= allowed:
                raise PendingVariable(
                    f"clique {sorted(jt.cliques[k])} passes {sorted(set(e.variables) - allowed)}")
        if stats is not None:
            stats.setdefault("message_sizes", []).append((k, len(table)))
        if parent is None:
            roots.append(table)
        else:
            inbox[parent].append(table)
    total = LabeledTable.unit()
    for t in reversed(roots):
        total = table_circ(total, t)
    return _final_sum(total)


def expected_utility(model: DecisionModel, decision: str, method: str = "theorem1") -> float:
    if method == "theorem1":
        return backward_induction_eu(model, decision)
    if method == "jtree":
        return junction_tree_eu(model, decision)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def rank_decisions(model: DecisionModel, method: str = "theorem1") -> list[tuple[str, float]]:
    """Decisions with their expected utilities, best first; ties keep the
    declaration order."""
    scored = [(d, expected_utility(model, d, method)) for d in model.decisions]
    return sorted(scored, key=lambda pair: -pair[1])


# --------------------------------------------------------------------------
# Utility expansion
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    """``u(y_attr | given)`` or, when ``complement``, ``1 - u(y_attr | given)``."""

    attr: int
    complement: bool
    given: CornerConfig

    def __str__(self):
        name = "uhat" if self.complement else "u"
        cond = ", ".join(f"y{a}{'*' if b else '^0'}"
                         for a, b in zip(self.given.scope, self.given.bits))
        return f"{name}(y{self.attr}|{cond})" if cond else f"{name}(y{self.attr})"


@dataclass(frozen=True)
class Monomial:
    corner: CornerConfig
    weight: float
    factors: tuple[Factor, ...]

    @property
    def label(self) -> str:
        stars = self.corner.stars
        return "r_" + ("".join(map(str, stars)) if stars else "{}")

    def __str__(self):
        return f"{self.label}={self.weight:.6g} " + " ".join(map(str, self.factors))


def utility_expansion(model: DecisionModel, cap: int = EXPANSION_CAP) -> list[Monomial]:
    """All ``2**n`` corner terms of the utility, expanded in ascending
    attribute order so each factor conditions only on earlier corner bits.

    Terms are listed by number of starred attributes, then lexicographically.
    """
    n = model.n
    if n > cap:
        raise ExpansionTooLarge(f"{2 ** n} terms for n={n} exceeds the cap of 2**{cap}")
    deun = model.deun
    out = []
    for corner in CornerConfig.all(deun.vertices):
        factors = tuple(
            Factor(i, not corner[i], corner.restrict(deun.util_parents(i)))
            for i in deun.vertices)
        out.append(Monomial(corner, float(model.corner_weights[corner.key]), factors))
    out.sort(key=lambda mono: (len(mono.corner.stars), mono.corner.stars))
    return out


def _factor_values(model: DecisionModel, y: np.ndarray) -> dict:
    vals = {}
    for i in model.deun.vertices:
        parents = model.deun.util_parents(i)
        for cfg in CornerConfig.all(parents):
            vals[(i, cfg.key)] = np.asarray(model.normalized_utility(i, cfg.key)(y[:, i - 1]),
                                            dtype=float)
    return vals


def evaluate_utility_pointwise(model: DecisionModel, y, *, allow_out_of_domain: bool = False,
                               monomials: list[Monomial] | None = None):
    """Utility at ``y`` (length ``n``, or an ``(N, n)`` batch) from the corner
    expansion.

    Continuous attributes outside their domain raise :class:`OutOfDomain`
    unless ``allow_out_of_domain``, in which case the normalised analytic
    forms are extrapolated.
    """
    arr = np.asarray(y, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != model.n:
        raise ValueError(f"expected {model.n} attribute values per point")
    if not allow_out_of_domain:
        for a in model.attributes:
            if not a.contains(arr[:, a.index - 1]):
                raise OutOfDomain(f"{a.name} outside [{a.domain[0]}, {a.domain[1]}]")
    vals = _factor_values(model, arr)
    total = np.zeros(arr.shape[0])
    for mono in monomials or utility_expansion(model):
        if mono.weight == 0.0:
            continue
        prod = np.full(arr.shape[0], mono.weight)
        for f in mono.factors:
            u = vals[(f.attr, f.given.key)]
            prod = prod * ((1.0 - u) if f.complement else u)
        total += prod
    return float(total[0]) if single else total
