"""Elicited decision models: attributes, conditional distributions,
conditional utilities and corner weights."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Union

import numpy as np

from .algebra import CornerConfig, DiscreteFactor, ExpLinExpr, LabeledTable, LinForm
from .errors import DegenerateUtility, UnknownDecision
from .graph import Deun, deun_violations, make_decomposable

REF_TOL = 1e-12
ROW_TOL = 1e-12


# --------------------------------------------------------------------------
# Attributes and conditional distributions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Attribute:
    index: int
    name: str
    domain: tuple[float, float]
    ref_zero: float | None = None
    ref_star: float | None = None

    def __post_init__(self):
        a, b = self.domain
        object.__setattr__(self, "domain", (float(a), float(b)))

    def contains(self, y) -> bool:
        a, b = self.domain
        return bool(np.all((np.asarray(y) >= a) & (np.asarray(y) <= b)))


@dataclass(frozen=True)
class LinearGaussian:
    """``Y = intercept + sum(coef * Y_parent) + sigma * Z``, Z standard normal."""

    intercept: float
    coefficients: Mapping[int, float]
    sigma: float

    @property
    def parents(self) -> tuple[int, ...]:
        return tuple(sorted(self.coefficients))

    def mean_form(self) -> LinForm:
        return LinForm(self.intercept, dict(self.coefficients))


@dataclass(frozen=True)
class TabularCpd:
    """Finite conditional distribution.

    ``rows`` has one probability row (aligned with ``support``) per parent
    combination, parent combinations enumerated in ``itertools.product``
    order over ``parent_grids`` sorted by parent index.
    """

    support: tuple[float, ...]
    parent_grids: Mapping[int, tuple[float, ...]]
    rows: tuple[tuple[float, ...], ...]

    @property
    def parents(self) -> tuple[int, ...]:
        return tuple(sorted(self.parent_grids))

    def table(self) -> np.ndarray:
        shape = [len(self.parent_grids[p]) for p in self.parents] + [len(self.support)]
        return np.asarray(self.rows, dtype=float).reshape(shape)

    def factor(self, var: int) -> DiscreteFactor:
        return DiscreteFactor(self.parents + (var,), self.table())


Cpd = Union[LinearGaussian, TabularCpd]


# --------------------------------------------------------------------------
# Utility forms and normalisation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpIncreasing:
    """Un-normalised ``exp(delta * y)``."""
    delta: float
    form = "exp_increasing"

    def raw(self, y):
        return np.exp(self.delta * np.asarray(y, dtype=float))

    def _parts(self):
        return 0.0, 1.0, self.delta


@dataclass(frozen=True)
class ExpDecreasing:
    """Un-normalised ``exp(-delta * y)``."""
    delta: float
    form = "exp_decreasing"

    def raw(self, y):
        return np.exp(-self.delta * np.asarray(y, dtype=float))

    def _parts(self):
        return 0.0, 1.0, -self.delta


@dataclass(frozen=True)
class OneMinusExp:
    """Un-normalised ``1 - exp(delta * y)``."""
    delta: float
    form = "one_minus_exp"

    def raw(self, y):
        return 1.0 - np.exp(self.delta * np.asarray(y, dtype=float))

    def _parts(self):
        return 1.0, -1.0, self.delta


@dataclass(frozen=True)
class TabularUtility:
    """Un-normalised utility values aligned with the attribute's support."""
    values: tuple[float, ...]
    form = "tabular"


UtilityForm = Union[ExpIncreasing, ExpDecreasing, OneMinusExp, TabularUtility]
EXP_FORMS = (ExpIncreasing, ExpDecreasing, OneMinusExp)


@dataclass(frozen=True)
class NormalizedUtility:
    """A utility form rescaled to ``(raw - m) / (M - m)`` on its domain.

    Exponential forms carry ``expr``, an :class:`ExpLinExpr` in ``attr``;
    tabular forms carry ``values`` aligned with ``support``.
    """

    attr: int
    m: float
    M: float
    argmin: float
    argmax: float
    expr: ExpLinExpr | None = None
    support: tuple[float, ...] | None = None
    values: tuple[float, ...] | None = None

    def __call__(self, y):
        if self.expr is not None:
            return self.expr.evaluate({self.attr: y if np.ndim(y) else float(y)})
        idx = _support_index(self.support, y)
        out = np.asarray(self.values)[idx]
        return float(out) if np.ndim(out) == 0 else out

    def as_entry(self):
        if self.expr is not None:
            return self.expr
        return DiscreteFactor((self.attr,), self.values)

    def complement_entry(self):
        if self.expr is not None:
            return 1.0 - self.expr
        return DiscreteFactor((self.attr,), 1.0 - np.asarray(self.values))


def _support_index(support, y):
    arr = np.asarray(support, dtype=float)
    y = np.asarray(y, dtype=float)
    idx = np.searchsorted(arr, y)
    idx = np.clip(idx, 0, len(arr) - 1)
    if not np.all(arr[idx] == y):
        from .errors import OutOfDomain
        raise OutOfDomain(f"value(s) not in support {tuple(support)}")
    return idx


def normalize_utility(form: UtilityForm, domain: tuple[float, float], attr: int = 1,
                      support: tuple[float, ...] | None = None) -> NormalizedUtility:
    """Affinely rescale ``form`` so that it spans [0, 1] on ``domain``.

    Exponential forms are monotone, so their extrema sit at the domain
    endpoints and the result is ``c0 + c1 * exp(rate * y)``. Tabular forms
    are min-max rescaled over ``support``.
    """
    a, b = float(domain[0]), float(domain[1])
    if isinstance(form, TabularUtility):
        if support is None or len(support) != len(form.values):
            raise ValueError("tabular utility needs a support of matching length")
        vals = np.asarray(form.values, dtype=float)
        m, M = float(vals.min()), float(vals.max())
        if not M > m:
            raise DegenerateUtility(f"utility of attribute {attr} is constant")
        norm = tuple(float(x) for x in (vals - m) / (M - m))
        return NormalizedUtility(attr, m, M, float(support[int(vals.argmin())]),
                                 float(support[int(vals.argmax())]),
                                 support=tuple(float(s) for s in support), values=norm)
    offset, scale, rate = form._parts()
    ends = {a: offset + scale * math.exp(rate * a), b: offset + scale * math.exp(rate * b)}
    argmin = min(ends, key=ends.get)
    argmax = max(ends, key=ends.get)
    m, M = ends[argmin], ends[argmax]
    if not M > m or not math.isfinite(M - m):
        raise DegenerateUtility(
            f"utility of attribute {attr} has no usable range on [{a}, {b}]")
    width = M - m
    expr = ExpLinExpr.constant((offset - m) / width) + ExpLinExpr.exp(attr, rate, scale / width)
    return NormalizedUtility(attr, m, M, argmin, argmax, expr=expr)


# --------------------------------------------------------------------------
# The decision model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DecisionModel:
    """A network plus, for every decision, one conditional distribution per
    attribute; utilities and corner weights are shared by all decisions.

    ``utilities[i]`` maps corner-config keys over the utility parents of
    ``i`` (ascending index, ``'0'``/``'*'`` per parent) to a utility form;
    ``corner_weights`` maps keys over all attributes to ``u(y^{0*})``.
    """

    deun: Deun
    attributes: tuple[Attribute, ...]
    decisions: tuple[str, ...]
    cpds: Mapping[str, Mapping[int, Cpd]]
    utilities: Mapping[int, Mapping[str, UtilityForm]]
    corner_weights: Mapping[str, float]
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.deun.n

    def attribute(self, index: int) -> Attribute:
        return self._by_index[index]

    @cached_property
    def _by_index(self) -> dict[int, Attribute]:
        return {a.index: a for a in self.attributes}

    def index_of(self, name: str) -> int:
        for a in self.attributes:
            if a.name == name:
                return a.index
        raise KeyError(name)

    def cpd(self, decision: str, index: int) -> Cpd:
        if decision not in self.cpds:
            raise UnknownDecision(f"unknown decision {decision!r}")
        return self.cpds[decision][index]

    def support(self, index: int) -> tuple[float, ...] | None:
        cpd = self.cpds[self.decisions[0]].get(index)
        return cpd.support if isinstance(cpd, TabularCpd) else None

    @property
    def kind(self) -> str:
        """``"continuous"``, ``"discrete"`` or ``"mixed"``."""
        kinds = {isinstance(c, TabularCpd) for d in self.cpds.values() for c in d.values()}
        kinds |= {isinstance(f, TabularUtility)
                  for forms in self.utilities.values() for f in forms.values()}
        if kinds == {False}:
            return "continuous"
        if kinds == {True}:
            return "discrete"
        return "mixed"

    def normalized_utility(self, index: int, key: str) -> NormalizedUtility:
        ck = ("norm", index, key)
        if ck not in self._cache:
            attr = self.attribute(index)
            self._cache[ck] = normalize_utility(
                self.utilities[index][key], attr.domain, index, self.support(index))
        return self._cache[ck]

    def corner_table(self) -> LabeledTable:
        return LabeledTable(tuple(self.deun.vertices),
                            {k: float(v) for k, v in self.corner_weights.items()})


def conditional_utility_vector(model: DecisionModel, i: int) -> LabeledTable:
    """Utilities and disutilities of attribute ``i`` for every corner
    configuration of its utility parents.

    The table scope is ``{i}`` plus the utility parents; entries with ``i`` at
    star hold ``u``, entries with ``i`` at zero hold ``1 - u``.
    """
    ck = ("cuv", i)
    if ck in model._cache:
        return model._cache[ck]
    parents = model.deun.util_parents(i)

    def entry(cfg: CornerConfig):
        nu = model.normalized_utility(i, cfg.restrict(parents).key)
        return nu.as_entry() if cfg[i] else nu.complement_entry()

    table = LabeledTable.from_function((i,) + parents, entry)
    model._cache[ck] = table
    return table


def resolve_references(model: DecisionModel) -> DecisionModel:
    """Fill missing reference values with the points where the normalised
    utilities reach 1 (star) and 0 (zero)."""
    attrs = []
    for a in model.attributes:
        if a.ref_zero is None or a.ref_star is None:
            forms = model.utilities.get(a.index, {})
            first = next(iter(sorted(forms)), None)
            if first is None:
                attrs.append(a)
                continue
            nu = model.normalized_utility(a.index, first)
            a = replace(a,
                        ref_zero=nu.argmin if a.ref_zero is None else a.ref_zero,
                        ref_star=nu.argmax if a.ref_star is None else a.ref_star)
        attrs.append(a)
    return replace(model, attributes=tuple(attrs))


def decompose_model(model: DecisionModel) -> DecisionModel:
    """Return the model on the decomposable version of its network.

    Each added probabilistic edge enters the child's distribution with no
    effect: a zero regression coefficient, or probability rows repeated
    across the new parent's support.
    """
    deun = make_decomposable(model.deun)
    if deun == model.deun:
        return model
    cpds = {}
    for d, per_attr in model.cpds.items():
        new = {}
        for i, cpd in per_attr.items():
            parents = deun.prob_parents(i)
            if isinstance(cpd, LinearGaussian):
                coefs = {p: float(cpd.coefficients.get(p, 0.0)) for p in parents}
                new[i] = LinearGaussian(cpd.intercept, coefs, cpd.sigma)
            else:
                grids = {p: cpd.parent_grids.get(p) or model.cpds[d][p].support
                         for p in parents}
                old_table = cpd.table()
                old_parents = cpd.parents
                rows = []
                for combo in itertools.product(*(range(len(grids[p])) for p in parents)):
                    pick = tuple(c for p, c in zip(parents, combo) if p in old_parents)
                    rows.append(tuple(float(x) for x in old_table[pick]))
                new[i] = TabularCpd(cpd.support, grids, tuple(rows))
        cpds[d] = new
    return DecisionModel(deun, model.attributes, model.decisions, cpds,
                         model.utilities, model.corner_weights)


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    kind: str
    location: str
    message: str

    def __str__(self):
        return f"{self.kind} at {self.location}: {self.message}"


@dataclass
class ValidationReport:
    errors: list[Issue] = field(default_factory=list)
    warnings: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return self.ok

    def add(self, kind, location, message):
        self.errors.append(Issue(kind, location, message))

    def warn(self, kind, location, message):
        self.warnings.append(Issue(kind, location, message))

    def lines(self) -> list[str]:
        out = [f"error: {e}" for e in self.errors]
        out += [f"warning: {w}" for w in self.warnings]
        return out or ["ok: no violations"]


def _keys(k: int) -> list[str]:
    return [c.key for c in CornerConfig.all(range(k))]


def validate_model(model: DecisionModel) -> ValidationReport:
    """Check every structural, probabilistic and preferential constraint and
    return all violations found."""
    r = ValidationReport()
    deun = model.deun
    for v in deun_violations(deun.n, deun.prob_edges, deun.util_edges):
        r.add(v.kind, f"edge {v.edge}" if v.edge else "network", v.detail or v.kind)
    if r.errors:
        return r
    n = deun.n

    names = [a.name for a in model.attributes]
    if sorted(a.index for a in model.attributes) != list(range(1, n + 1)):
        r.add("AttributeMismatch", "attributes", f"indices must be exactly 1..{n}")
        return r
    if len(set(names)) != len(names):
        r.add("DuplicateName", "attributes", "attribute names must be unique")
    for a in model.attributes:
        lo, hi = a.domain
        loc = f"attribute {a.name}"
        if not lo < hi:
            r.add("DomainViolation", loc, f"empty domain [{lo}, {hi}]")
        for label, ref in (("ref_zero", a.ref_zero), ("ref_star", a.ref_star)):
            if ref is not None and not lo <= ref <= hi:
                r.add("DomainViolation", loc, f"{label}={ref} outside [{lo}, {hi}]")
        if a.ref_zero is not None and a.ref_zero == a.ref_star:
            r.add("ReferenceViolation", loc, "ref_zero equals ref_star")

    if not model.decisions:
        r.add("CompletenessViolation", "decisions", "no decisions declared")
    if len(set(model.decisions)) != len(model.decisions):
        r.add("DuplicateName", "decisions", "decision labels must be unique")
    if model.kind == "mixed":
        r.add("UnsupportedCombination", "model",
              "mixes tabular and continuous distributions or utilities")

    supports: dict[int, tuple] = {}
    for d in model.decisions:
        per = model.cpds.get(d)
        if per is None:
            r.add("CompletenessViolation", f"cpds.{d}", "no distributions for decision")
            continue
        for i in deun.vertices:
            name = model.attribute(i).name
            loc = f"cpds.{d}.{name}"
            cpd = per.get(i)
            parents = deun.prob_parents(i)
            if cpd is None:
                r.add("CompletenessViolation", loc, "missing distribution")
                continue
            if tuple(sorted(cpd.parents)) != parents:
                r.add("ParentMismatch", loc,
                      f"distribution parents {list(cpd.parents)} != network parents {list(parents)}")
            if isinstance(cpd, LinearGaussian):
                if not (cpd.sigma > 0 and math.isfinite(cpd.sigma)):
                    r.add("ParameterViolation", loc, f"sigma must be positive, got {cpd.sigma}")
            else:
                _check_tabular(r, loc, cpd, model, d, i, supports)

    for i in deun.vertices:
        _check_utilities(r, model, i)

    _check_corner_weights(r, model)
    return r


def _check_tabular(r, loc, cpd: TabularCpd, model, d, i, supports):
    support = tuple(cpd.support)
    if list(support) != sorted(set(support)):
        r.add("SupportViolation", loc, "support must be strictly increasing")
    lo, hi = model.attribute(i).domain
    if support and not (lo <= support[0] and support[-1] <= hi):
        r.add("DomainViolation", loc, "support outside the attribute domain")
    if i in supports and supports[i] != support:
        r.add("SupportViolation", loc, "support differs between decisions")
    supports.setdefault(i, support)
    for p, grid in cpd.parent_grids.items():
        parent_cpd = model.cpds[d].get(p)
        if isinstance(parent_cpd, TabularCpd) and tuple(grid) != tuple(parent_cpd.support):
            r.add("SupportViolation", loc,
                  f"grid for parent {model.attribute(p).name} differs from its support")
    expected = math.prod(len(cpd.parent_grids[p]) for p in cpd.parents)
    if len(cpd.rows) != expected:
        r.add("CompletenessViolation", loc, f"expected {expected} rows, got {len(cpd.rows)}")
    for k, row in enumerate(cpd.rows):
        if len(row) != len(support):
            r.add("CompletenessViolation", f"{loc}.rows[{k}]", "row length != support size")
        elif any(p < 0 for p in row) or abs(math.fsum(row) - 1.0) > ROW_TOL:
            r.add("ProbabilityViolation", f"{loc}.rows[{k}]",
                  "row must be non-negative and sum to 1")


def _check_utilities(r, model: DecisionModel, i: int):
    attr = model.attribute(i)
    loc = f"utilities.{attr.name}"
    parents = model.deun.util_parents(i)
    forms = model.utilities.get(i)
    if forms is None:
        r.add("CompletenessViolation", loc, "missing utility specification")
        return
    wanted = _keys(len(parents))
    for key in forms:
        if len(key) != len(parents) or set(key) - {"0", "*"}:
            r.add("KeyLengthMismatch", f"{loc}[{key!r}]",
                  f"key must have {len(parents)} characters over '0' and '*'")
    for key in wanted:
        if key not in forms:
            r.add("CompletenessViolation", f"{loc}[{key!r}]", "missing utility for config")
    support = model.support(i)
    ref_star, ref_zero = attr.ref_star, attr.ref_zero
    if ref_star is None or ref_zero is None:
        # all conditional utilities must share the references that
        # resolve_references would pick from the first config
        try:
            first = model.normalized_utility(i, sorted(forms)[0])
            ref_star = first.argmax if ref_star is None else ref_star
            ref_zero = first.argmin if ref_zero is None else ref_zero
        except Exception:
            pass
    for key in wanted:
        form = forms.get(key)
        if form is None:
            continue
        where = f"{loc}[{key!r}]"
        if isinstance(form, EXP_FORMS) and not form.delta > 0:
            r.add("ParameterViolation", where, f"delta must be positive, got {form.delta}")
            continue
        if isinstance(form, TabularUtility):
            if support is None or len(form.values) != len(support):
                r.add("SupportViolation", where, "values must align with the attribute support")
                continue
            if any(not 0.0 <= v <= 1.0 for v in form.values):
                r.add("RangeViolation", where, "tabular utility values must lie in [0, 1]")
        try:
            nu = model.normalized_utility(i, key)
        except DegenerateUtility as exc:
            r.add("DegenerateUtility", where, str(exc))
            continue
        for label, ref, target in (("ref_star", ref_star, 1.0), ("ref_zero", ref_zero, 0.0)):
            if ref is None:
                continue
            try:
                got = nu(ref)
            except Exception:
                got = float("nan")
            if not abs(got - target) <= REF_TOL:
                r.add("ReferenceMismatch", where,
                      f"normalised utility at {label}={ref} is {got:.6g}, expected {target:g}")


def _check_corner_weights(r, model: DecisionModel):
    n = model.n
    weights = model.corner_weights
    for key in weights:
        if len(key) != n or set(key) - {"0", "*"}:
            r.add("KeyLengthMismatch", f"corner_weights[{key!r}]",
                  f"key must have {n} characters over '0' and '*'")
    for key in _keys(n):
        if key not in weights:
            r.add("CompletenessViolation", f"corner_weights[{key!r}]", "missing corner weight")
    for key, w in weights.items():
        if not 0.0 <= w <= 1.0:
            r.add("RangeViolation", f"corner_weights[{key!r}]", f"weight {w} outside [0, 1]")
    for key in _keys(n):
        if key not in weights:
            continue
        for pos, ch in enumerate(key):
            if ch != "0":
                continue
            up = key[:pos] + "*" + key[pos + 1:]
            if up not in weights:
                continue
            if weights[up] < weights[key]:
                r.add("MonotonicityViolation", f"corner_weights[{up!r}]",
                      f"{weights[up]} < corner_weights[{key!r}] = {weights[key]}")
            elif weights[up] == weights[key]:
                r.warn("WeakMonotonicity", f"corner_weights[{up!r}]",
                       f"equals corner_weights[{key!r}] = {weights[key]}")
