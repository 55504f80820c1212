"""Symbolic kernel: corner configurations, labelled tables and the
exponential-linear expressions that stay closed under products and Gaussian
expectations.

Table entries can be plain floats, :class:`ExpLinExpr` (continuous pending
attributes) or :class:`DiscreteFactor` (finite-support pending attributes).
All three interoperate through the ordinary arithmetic operators.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from numbers import Real
from typing import Callable, Iterable, Iterator, Mapping

import numpy as np

from .errors import NotConstant, PendingVariable, SelfReferentialMean

MERGE_TOL = 1e-12
UNDERFLOW = 1e-300

_Exps = tuple  # sorted tuple of (attribute, coefficient) pairs


# --------------------------------------------------------------------------
# Corner configurations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CornerConfig:
    """Assignment of each attribute in ``scope`` to its zero (False) or
    star (True) reference value."""

    scope: tuple[int, ...]
    bits: tuple[bool, ...]

    def __post_init__(self):
        scope = tuple(int(v) for v in self.scope)
        bits = tuple(bool(b) for b in self.bits)
        if len(scope) != len(bits):
            raise ValueError("scope and bits must have equal length")
        if list(scope) != sorted(set(scope)):
            raise ValueError(f"scope must be strictly increasing, got {scope}")
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_key(cls, scope: Iterable[int], key: str) -> "CornerConfig":
        scope = tuple(scope)
        if len(key) != len(scope) or set(key) - {"0", "*"}:
            raise ValueError(
                f"config key {key!r} does not match a scope of size {len(scope)}")
        return cls(scope, tuple(c == "*" for c in key))

    @classmethod
    def all(cls, scope: Iterable[int]) -> Iterator["CornerConfig"]:
        """Every configuration on ``scope`` in canonical order (binary
        counting, star = 1, lowest attribute most significant)."""
        scope = tuple(sorted(scope))
        for bits in itertools.product((False, True), repeat=len(scope)):
            yield cls(scope, bits)

    @property
    def key(self) -> str:
        return "".join("*" if b else "0" for b in self.bits)

    def __getitem__(self, attr: int) -> bool:
        return self.bits[self.scope.index(attr)]

    def restrict(self, attrs: Iterable[int]) -> "CornerConfig":
        attrs = sorted(attrs)
        return CornerConfig(tuple(attrs), tuple(self[a] for a in attrs))

    def flip(self, attr: int) -> "CornerConfig":
        i = self.scope.index(attr)
        bits = list(self.bits)
        bits[i] = not bits[i]
        return CornerConfig(self.scope, tuple(bits))

    @property
    def stars(self) -> tuple[int, ...]:
        return tuple(a for a, b in zip(self.scope, self.bits) if b)

    def __str__(self):
        return self.key


def config_index(bits: Iterable[bool]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


# --------------------------------------------------------------------------
# Linear forms and exponential-linear expressions
# --------------------------------------------------------------------------

def _canonical_pairs(coefficients) -> _Exps:
    if isinstance(coefficients, Mapping):
        coefficients = coefficients.items()
    acc: dict[int, float] = {}
    for v, c in coefficients:
        acc[int(v)] = acc.get(int(v), 0.0) + float(c)
    return tuple(sorted((v, c) for v, c in acc.items() if c != 0.0))


@dataclass(frozen=True)
class LinForm:
    """``constant + sum(coef * y[attr])``; zero coefficients are dropped."""

    constant: float = 0.0
    coefficients: _Exps = ()

    def __post_init__(self):
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "coefficients", _canonical_pairs(self.coefficients))

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.coefficients)

    def coefficient(self, attr: int) -> float:
        for v, c in self.coefficients:
            if v == attr:
                return c
        return 0.0

    def evaluate(self, point: Mapping[int, float]):
        total = self.constant
        for v, c in self.coefficients:
            total = total + c * _lookup(point, v)
        return total

    def __str__(self):
        parts = [f"{self.constant:g}"] if self.constant or not self.coefficients else []
        parts += [f"{c:g}*y{v}" for v, c in self.coefficients]
        return " + ".join(parts)


def _lookup(point, var):
    try:
        return point[var]
    except (KeyError, IndexError):
        raise PendingVariable(f"no value supplied for attribute {var}") from None


def _add_exps(e1: _Exps, e2: _Exps) -> _Exps:
    if not e1:
        return e2
    if not e2:
        return e1
    acc = dict(e1)
    for v, c in e2:
        acc[v] = acc.get(v, 0.0) + c
    return tuple(sorted((v, c) for v, c in acc.items() if c != 0.0))


def _close(k1: _Exps, k2: _Exps) -> bool:
    if len(k1) != len(k2):
        return False
    return all(v1 == v2 and abs(c1 - c2) <= MERGE_TOL
               for (v1, c1), (v2, c2) in zip(k1, k2))


def _canonical_terms(raw: Iterable[tuple[float, _Exps]]) -> tuple:
    acc: dict[_Exps, float] = {}
    for c, e in raw:
        acc[e] = acc.get(e, 0.0) + c
    merged: list[list] = []
    for key in sorted(acc):
        if merged and _close(merged[-1][1], key):
            merged[-1][0] += acc[key]
        else:
            merged.append([acc[key], key])
    return tuple((c, k) for c, k in merged if abs(c) >= UNDERFLOW)


class ExpLinExpr:
    """Finite sum ``sum_k c_k * exp(l_k(y))`` with ``l_k`` linear.

    Terms sharing an exponent (within ``MERGE_TOL``) are merged and exponent
    constants are folded into the coefficients, so a constant ``c`` is the
    single term ``(c, LinForm())``.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable = ()):
        raw = []
        for coef, form in terms:
            if not isinstance(form, LinForm):
                form = LinForm(0.0, form)
            raw.append((float(coef) * math.exp(form.constant), form.coefficients))
        self._terms = _canonical_terms(raw)

    @classmethod
    def _from_raw(cls, raw) -> "ExpLinExpr":
        obj = cls.__new__(cls)
        obj._terms = _canonical_terms(raw)
        return obj

    @classmethod
    def constant(cls, value: float) -> "ExpLinExpr":
        return cls._from_raw([(float(value), ())])

    @classmethod
    def exp(cls, attr: int, rate: float, coef: float = 1.0) -> "ExpLinExpr":
        """``coef * exp(rate * y[attr])``."""
        return cls._from_raw([(float(coef), _canonical_pairs([(attr, rate)]))])

    @property
    def terms(self) -> tuple[tuple[float, LinForm], ...]:
        return tuple((c, LinForm(0.0, e)) for c, e in self._terms)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(v for _, e in self._terms for v, _ in e)

    def is_constant(self) -> bool:
        return all(not e for _, e in self._terms)

    def constant_value(self) -> float:
        if not self.is_constant():
            raise NotConstant(f"expression still depends on {sorted(self.variables)}")
        return sum(c for c, _ in self._terms)

    def evaluate(self, point: Mapping[int, float]):
        """Evaluate at ``point`` (attribute -> value or array of values)."""
        total = 0.0
        for c, e in self._terms:
            expo = 0.0
            for v, b in e:
                expo = expo + b * _lookup(point, v)
            total = total + c * np.exp(expo)
        return float(total) if np.ndim(total) == 0 else total

    def expect(self, attr: int, mean: LinForm, sigma: float) -> "ExpLinExpr":
        return gaussian_expectation(self, attr, mean, sigma)

    # arithmetic ----------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, Real):
            return ExpLinExpr._from_raw([(c * other, e) for c, e in self._terms])
        if isinstance(other, ExpLinExpr):
            return ExpLinExpr._from_raw(
                [(c1 * c2, _add_exps(e1, e2))
                 for c1, e1 in self._terms for c2, e2 in other._terms])
        return NotImplemented

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, Real):
            other = ExpLinExpr.constant(other)
        if isinstance(other, ExpLinExpr):
            return ExpLinExpr._from_raw(self._terms + other._terms)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __eq__(self, other):
        if isinstance(other, Real):
            other = ExpLinExpr.constant(other)
        if not isinstance(other, ExpLinExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __len__(self):
        return len(self._terms)

    def __repr__(self):
        if not self._terms:
            return "ExpLinExpr(0)"
        parts = []
        for c, e in self._terms:
            if e:
                expo = " + ".join(f"{b:g}*y{v}" for v, b in e)
                parts.append(f"{c:.6g}*exp({expo})")
            else:
                parts.append(f"{c:.6g}")
        return "ExpLinExpr(" + " + ".join(parts) + ")"


def expr_mul(a: ExpLinExpr, b: ExpLinExpr) -> ExpLinExpr:
    return a * b


def gaussian_expectation(e: ExpLinExpr, var: int, mean: LinForm,
                         sigma: float) -> ExpLinExpr:
    """Integrate ``var`` out of ``e`` against ``N(mean, sigma**2)``.

    Uses ``E[exp(b Y)] = exp(b mu + b^2 sigma^2 / 2)`` term by term, so the
    result depends on the attributes in ``mean`` in place of ``var``.
    """
    if mean.coefficient(var) != 0.0:
        raise SelfReferentialMean(f"mean of y{var} refers to y{var} itself")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    half_var = 0.5 * sigma * sigma
    raw = []
    for c, exps in e._terms:
        b = 0.0
        rest = []
        for v, coef in exps:
            if v == var:
                b = coef
            else:
                rest.append((v, coef))
        if b == 0.0:
            raw.append((c, exps))
            continue
        scale = math.exp(b * mean.constant + b * b * half_var)
        shifted = tuple((v, b * a) for v, a in mean.coefficients)
        raw.append((c * scale, _add_exps(tuple(rest), shifted)))
    return ExpLinExpr._from_raw(raw)


# --------------------------------------------------------------------------
# Discrete factors
# --------------------------------------------------------------------------

class DiscreteFactor:
    """Real-valued function of finitely-supported attributes.

    ``values`` has one axis per attribute in ``variables`` (sorted); the axis
    position along an attribute is the index of the value in its support.
    """

    __slots__ = ("variables", "values")

    def __init__(self, variables: Iterable[int], values):
        variables = tuple(int(v) for v in variables)
        values = np.asarray(values, dtype=float)
        if list(variables) != sorted(set(variables)):
            raise ValueError("factor variables must be strictly increasing")
        if values.ndim != len(variables):
            raise ValueError("one axis per variable required")
        self.variables = variables
        self.values = values

    @classmethod
    def scalar(cls, value: float) -> "DiscreteFactor":
        return cls((), np.asarray(float(value)))

    def is_constant(self) -> bool:
        return not self.variables

    def constant_value(self) -> float:
        if self.variables:
            raise NotConstant(f"factor still depends on {list(self.variables)}")
        return float(self.values)

    def _aligned(self, union):
        shape = [self.values.shape[self.variables.index(v)] if v in self.variables else 1
                 for v in union]
        return self.values.reshape(shape)

    def _binary(self, other, op):
        if isinstance(other, Real):
            return DiscreteFactor(self.variables, op(self.values, float(other)))
        if isinstance(other, DiscreteFactor):
            union = tuple(sorted(set(self.variables) | set(other.variables)))
            return DiscreteFactor(union, op(self._aligned(union), other._aligned(union)))
        return NotImplemented

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __neg__(self):
        return DiscreteFactor(self.variables, -self.values)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def expect(self, var: int, conditional: "DiscreteFactor") -> "DiscreteFactor":
        """Sum ``var`` out of ``self * conditional`` (``conditional`` is the
        probability table of ``var`` given its parents)."""
        joint = self * conditional
        if var not in joint.variables:
            return joint
        axis = joint.variables.index(var)
        rest = tuple(v for v in joint.variables if v != var)
        return DiscreteFactor(rest, joint.values.sum(axis=axis))

    def evaluate(self, point: Mapping[int, int]) -> float:
        """``point`` maps attribute -> support index."""
        return float(self.values[tuple(_lookup(point, v) for v in self.variables)])

    def __repr__(self):
        return f"DiscreteFactor(variables={self.variables}, shape={self.values.shape})"


# --------------------------------------------------------------------------
# Labelled tables and the circ product
# --------------------------------------------------------------------------

class LabeledTable:
    """Map from every corner configuration on ``scope`` to an entry, stored
    in canonical configuration order."""

    __slots__ = ("scope", "entries")

    def __init__(self, scope: Iterable[int], entries):
        scope = tuple(int(v) for v in scope)
        if list(scope) != sorted(set(scope)):
            raise ValueError("table scope must be strictly increasing")
        if isinstance(entries, Mapping):
            lookup = {}
            for cfg, value in entries.items():
                if isinstance(cfg, str):
                    cfg = CornerConfig.from_key(scope, cfg)
                lookup[cfg.bits if isinstance(cfg, CornerConfig) else tuple(cfg)] = value
            entries = [lookup[c.bits] for c in CornerConfig.all(scope)]
        entries = tuple(entries)
        if len(entries) != 2 ** len(scope):
            raise ValueError(
                f"table on {len(scope)} attributes needs {2 ** len(scope)} entries, "
                f"got {len(entries)}")
        self.scope = scope
        self.entries = entries

    @classmethod
    def unit(cls) -> "LabeledTable":
        return cls((), (1.0,))

    @classmethod
    def from_function(cls, scope: Iterable[int],
                      fn: Callable[[CornerConfig], object]) -> "LabeledTable":
        scope = tuple(sorted(scope))
        return cls(scope, [fn(c) for c in CornerConfig.all(scope)])

    def configs(self) -> Iterator[CornerConfig]:
        return CornerConfig.all(self.scope)

    def items(self):
        return zip(self.configs(), self.entries)

    def __getitem__(self, cfg):
        if isinstance(cfg, str):
            cfg = CornerConfig.from_key(self.scope, cfg)
        if isinstance(cfg, CornerConfig):
            if cfg.scope != self.scope:
                cfg = cfg.restrict(self.scope)
            cfg = cfg.bits
        return self.entries[config_index(cfg)]

    def __len__(self):
        return len(self.entries)

    def map(self, fn: Callable[[object], object]) -> "LabeledTable":
        return LabeledTable(self.scope, [fn(e) for e in self.entries])

    def circ(self, other: "LabeledTable") -> "LabeledTable":
        return table_circ(self, other)

    def __repr__(self):
        return f"LabeledTable(scope={self.scope}, entries={len(self.entries)})"


def _times(x, y):
    if isinstance(x, Real) and x == 1.0:
        return y
    if isinstance(y, Real) and y == 1.0:
        return x
    return x * y


def table_circ(a: LabeledTable, b: LabeledTable) -> LabeledTable:
    """Multiply every pair of entries whose configurations agree on the
    shared attributes; the result lives on the union of the scopes."""
    scope = tuple(sorted(set(a.scope) | set(b.scope)))
    pos_a = [scope.index(v) for v in a.scope]
    pos_b = [scope.index(v) for v in b.scope]
    out = []
    for bits in itertools.product((0, 1), repeat=len(scope)):
        ia = ib = 0
        for p in pos_a:
            ia = (ia << 1) | bits[p]
        for p in pos_b:
            ib = (ib << 1) | bits[p]
        out.append(_times(a.entries[ia], b.entries[ib]))
    return LabeledTable(scope, out)


def as_constant(entry) -> float:
    if isinstance(entry, Real):
        return float(entry)
    if isinstance(entry, (ExpLinExpr, DiscreteFactor)):
        return entry.constant_value()
    raise TypeError(f"unsupported table entry {entry!r}")


def table_reduce_sum(table: LabeledTable) -> float:
    """Sum of all entries; every entry must already be a constant."""
    return math.fsum(as_constant(e) for e in table.entries)
