"""Reading and writing model files.

A model file is a UTF-8 JSON document. Serialisation is canonical (sorted
keys, two-space indentation, reals with 17 significant digits), so
parse -> serialise -> parse reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ModelParseError, ModelValidationError
from .graph import Deun
from .model import (Attribute, DecisionModel, ExpDecreasing, ExpIncreasing, LinearGaussian,
                    OneMinusExp, TabularCpd, TabularUtility, resolve_references,
                    validate_model)

FORMS = {
    "exp_increasing": ExpIncreasing,
    "exp_decreasing": ExpDecreasing,
    "one_minus_exp": OneMinusExp,
}


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ModelParseError(f"{path}: missing key {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ModelParseError(f"{path}.{key}: expected {getattr(kind, '__name__', kind)}")
    return value


def _real(value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelParseError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _edges(raw, path):
    if not isinstance(raw, list):
        raise ModelParseError(f"{path}: expected a list of [i, j] pairs")
    out = []
    for k, e in enumerate(raw):
        if (not isinstance(e, list) or len(e) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)):
            raise ModelParseError(f"{path}[{k}]: expected an [i, j] integer pair")
        out.append((e[0], e[1]))
    return out


def _parse_cpd(raw, path, names) -> LinearGaussian | TabularCpd:
    kind = _need(raw, "type", path, str)
    if kind == "linear_gaussian":
        coeffs = raw.get("coeffs", {})
        if not isinstance(coeffs, dict):
            raise ModelParseError(f"{path}.coeffs: expected an object")
        parsed = {}
        for pname, c in coeffs.items():
            if pname not in names:
                raise ModelParseError(f"{path}.coeffs: unknown attribute {pname!r}")
            parsed[names[pname]] = _real(c, f"{path}.coeffs.{pname}")
        return LinearGaussian(_real(_need(raw, "intercept", path), f"{path}.intercept"),
                              parsed, _real(_need(raw, "sigma", path), f"{path}.sigma"))
    if kind == "tabular":
        support = tuple(_real(v, f"{path}.support") for v in _need(raw, "support", path, list))
        grids_raw = raw.get("parent_grids", {})
        if not isinstance(grids_raw, dict):
            raise ModelParseError(f"{path}.parent_grids: expected an object")
        grids = {}
        for pname, grid in grids_raw.items():
            if pname not in names:
                raise ModelParseError(f"{path}.parent_grids: unknown attribute {pname!r}")
            if not isinstance(grid, list):
                raise ModelParseError(f"{path}.parent_grids.{pname}: expected a list")
            grids[names[pname]] = tuple(_real(v, f"{path}.parent_grids.{pname}") for v in grid)
        rows = []
        for k, row in enumerate(_need(raw, "rows", path, list)):
            if not isinstance(row, list):
                raise ModelParseError(f"{path}.rows[{k}]: expected a list")
            rows.append(tuple(_real(v, f"{path}.rows[{k}]") for v in row))
        return TabularCpd(support, grids, tuple(rows))
    raise ModelParseError(f"{path}.type: unknown distribution type {kind!r}")


def _parse_form(raw, path):
    form = _need(raw, "form", path, str)
    if form in FORMS:
        return FORMS[form](_real(_need(raw, "delta", path), f"{path}.delta"))
    if form == "tabular":
        return TabularUtility(tuple(_real(v, f"{path}.values")
                                    for v in _need(raw, "values", path, list)))
    raise ModelParseError(f"{path}.form: unknown utility form {form!r}")


def model_from_dict(doc: dict) -> DecisionModel:
    """Build a model (references resolved, not validated) from a parsed
    document."""
    if not isinstance(doc, dict):
        raise ModelParseError("top level must be an object")
    attrs_raw = _need(doc, "attributes", "$", list)
    attributes = []
    for k, a in enumerate(attrs_raw):
        path = f"attributes[{k}]"
        index = _need(a, "index", path, int)
        name = _need(a, "name", path, str)
        domain = _need(a, "domain", path, list)
        if len(domain) != 2:
            raise ModelParseError(f"{path}.domain: expected [a, b]")
        ref_zero = a.get("ref_zero")
        ref_star = a.get("ref_star")
        attributes.append(Attribute(
            index, name, (_real(domain[0], f"{path}.domain"), _real(domain[1], f"{path}.domain")),
            None if ref_zero is None else _real(ref_zero, f"{path}.ref_zero"),
            None if ref_star is None else _real(ref_star, f"{path}.ref_star")))
    attributes.sort(key=lambda a: a.index)
    names = {a.name: a.index for a in attributes}
    n = len(attributes)
    deun = Deun(n, _edges(_need(doc, "prob_edges", "$"), "prob_edges"),
                _edges(_need(doc, "util_edges", "$"), "util_edges"))

    decisions = _need(doc, "decisions", "$", list)
    if not all(isinstance(d, str) for d in decisions):
        raise ModelParseError("decisions: labels must be strings")

    shared_raw = doc.get("shared_cpds", {})
    cpds_raw = _need(doc, "cpds", "$", dict)
    cpds = {}
    for d in decisions:
        per_raw = dict(shared_raw)
        per_raw.update(cpds_raw.get(d, {}))
        per = {}
        for aname, raw in per_raw.items():
            if aname not in names:
                raise ModelParseError(f"cpds.{d}: unknown attribute {aname!r}")
            per[names[aname]] = _parse_cpd(raw, f"cpds.{d}.{aname}", names)
        cpds[d] = per
    for d in cpds_raw:
        if d not in decisions:
            raise ModelParseError(f"cpds: undeclared decision {d!r}")

    utilities = {}
    for aname, forms in _need(doc, "utilities", "$", dict).items():
        if aname not in names:
            raise ModelParseError(f"utilities: unknown attribute {aname!r}")
        if not isinstance(forms, dict):
            raise ModelParseError(f"utilities.{aname}: expected an object")
        utilities[names[aname]] = {key: _parse_form(f, f"utilities.{aname}[{key!r}]")
                                   for key, f in forms.items()}

    weights = {key: _real(w, f"corner_weights[{key!r}]")
               for key, w in _need(doc, "corner_weights", "$", dict).items()}

    model = DecisionModel(deun, tuple(attributes), tuple(decisions), cpds, utilities, weights)
    try:
        return resolve_references(model)
    except Exception:
        return model


def loads_model(text: str, *, validate: bool = True) -> DecisionModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    model = model_from_dict(doc)
    if validate:
        report = validate_model(model)
        if not report.ok:
            raise ModelValidationError("; ".join(map(str, report.errors)), report)
    return model


def parse_model(path, *, validate: bool = True) -> DecisionModel:
    """Read, build and (by default) validate a model file."""
    text = Path(path).read_text(encoding="utf-8")
    return loads_model(text, validate=validate)


# --------------------------------------------------------------------------
# Serialisation
# --------------------------------------------------------------------------

def _render_real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite real {x}")
    return "%.17g" % x


def _emit(obj, depth: int = 0) -> str:
    pad = "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_emit(obj[k], depth + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + "  " * depth + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_emit(v, depth + 1) for v in obj) + "]"
        items = [pad + _emit(v, depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * depth + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _render_real(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Canonical text for any JSON-compatible document."""
    return _emit(obj) + "\n"


def _cpd_doc(cpd, name_of):
    if isinstance(cpd, LinearGaussian):
        return {"type": "linear_gaussian", "intercept": float(cpd.intercept),
                "coeffs": {name_of[p]: float(c) for p, c in cpd.coefficients.items()},
                "sigma": float(cpd.sigma)}
    return {"type": "tabular", "support": [float(v) for v in cpd.support],
            "parent_grids": {name_of[p]: [float(v) for v in g]
                             for p, g in cpd.parent_grids.items()},
            "rows": [[float(v) for v in row] for row in cpd.rows]}


def _form_doc(form):
    if isinstance(form, TabularUtility):
        return {"form": "tabular", "values": [float(v) for v in form.values]}
    return {"form": form.form, "delta": float(form.delta)}


def model_to_dict(model: DecisionModel) -> dict:
    name_of = {a.index: a.name for a in model.attributes}
    attrs = []
    for a in sorted(model.attributes, key=lambda a: a.index):
        doc = {"index": a.index, "name": a.name, "domain": [a.domain[0], a.domain[1]]}
        if a.ref_zero is not None:
            doc["ref_zero"] = float(a.ref_zero)
        if a.ref_star is not None:
            doc["ref_star"] = float(a.ref_star)
        attrs.append(doc)
    return {
        "attributes": attrs,
        "prob_edges": [[i, j] for i, j in sorted(model.deun.prob_edges)],
        "util_edges": [[i, j] for i, j in sorted(model.deun.util_edges)],
        "decisions": list(model.decisions),
        "cpds": {d: {name_of[i]: _cpd_doc(c, name_of) for i, c in per.items()}
                 for d, per in model.cpds.items()},
        "utilities": {name_of[i]: {k: _form_doc(f) for k, f in forms.items()}
                      for i, forms in model.utilities.items()},
        "corner_weights": {k: float(w) for k, w in model.corner_weights.items()},
    }


def serialize_model(model: DecisionModel) -> str:
    return dumps_canonical(model_to_dict(model))


def write_model(model: DecisionModel, path) -> None:
    Path(path).write_text(serialize_model(model), encoding="utf-8")
