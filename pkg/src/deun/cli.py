"""Command-line front end.

    deun <command> <model-file> [--decision LABEL] [--method theorem1|jtree]
         [--mc-samples N] [--seed S] [--output PATH] [--structured]

Exit status: 0 success, 1 invalid model or invocation, 2 computation
failure, 3 unreadable input or unwritable output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .engine import METHODS, expected_utility, utility_expansion
from .errors import DeunError, ModelParseError, ModelValidationError
from .graph import build_junction_tree, is_decomposable
from .model import DecisionModel, decompose_model, validate_model
from .modelfile import dumps_canonical, loads_model, serialize_model
from .oracle import RNG_ALGORITHM, exact_discrete_eu, monte_carlo_eu

COMMANDS = ("validate", "decompose", "jtree", "expand", "evaluate", "rank", "oracle")
EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    model_path: str
    decision: str | None = None
    method: str | None = None
    mc_samples: int | None = None
    seed: int = 0
    output_path: str | None = None
    structured: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.method is not None and self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}")
        if self.command == "oracle" and self.mc_samples is None:
            raise UsageError("oracle needs --mc-samples")
        if self.mc_samples is not None and self.mc_samples < 1:
            raise UsageError("--mc-samples must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise UsageError("--seed must be a 64-bit unsigned integer")


@dataclass
class Outcome:
    status: int
    text: str
    document: dict | None = None


def fmt(x: float) -> str:
    return f"{x:.6g}"


def _table(rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def _set(s) -> str:
    return "{" + ", ".join(map(str, sorted(s))) + "}"


def _pick_method(model: DecisionModel, method: str | None) -> str:
    if method is not None:
        return method
    return "jtree" if is_decomposable(model.deun) else "theorem1"


def _for_method(model: DecisionModel, method: str) -> tuple[DecisionModel, list[str]]:
    """The junction tree needs a decomposable network; decompose silently
    equivalent copies on request and say so."""
    if method == "jtree" and not is_decomposable(model.deun):
        return decompose_model(model), ["note: network is not decomposable; "
                                        "evaluated on its decomposed equivalent"]
    return model, []


def _decisions(model: DecisionModel, decision: str | None) -> tuple[str, ...]:
    if decision is None:
        return model.decisions
    model.cpd(decision, 1)  # raises UnknownDecision
    return (decision,)


def _notify(notes):
    for line in notes:
        print(line, file=sys.stderr)


def _range_problems(results: dict) -> list[str]:
    return [f"error: expected utility of {d} is {fmt(v)}, outside [0, 1]; "
            "check the attribute domains" for d, v in results.items()
            if not (0.0 <= v <= 1.0)]


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_validate(model: DecisionModel, cfg: RunConfig) -> Outcome:
    report = validate_model(model)
    doc = {"ok": report.ok,
           "errors": [vars(e) for e in report.errors],
           "warnings": [vars(w) for w in report.warnings]}
    return Outcome(EXIT_OK if report.ok else EXIT_VALIDATION, "\n".join(report.lines()), doc)


def cmd_decompose(model: DecisionModel, cfg: RunConfig) -> Outcome:
    out = decompose_model(model)
    added = sorted(out.deun.prob_edges - model.deun.prob_edges)
    note = "added probabilistic edges: " + (", ".join(map(str, added)) or "none")
    print(note, file=sys.stderr)
    return Outcome(EXIT_OK, serialize_model(out).rstrip("\n"))


def cmd_jtree(model: DecisionModel, cfg: RunConfig) -> Outcome:
    model, notes = _for_method(model, "jtree")
    jt = build_junction_tree(model.deun)
    rows = [["clique", "vertices", "separator", "parent", "assigned"]]
    for k, c in enumerate(jt.cliques):
        parent = jt.parent(k)
        rows.append([f"C{k + 1}", _set(c), _set(jt.separators[k]) if k else "-",
                     f"C{parent + 1}" if parent is not None else "-",
                     _set(jt.assigned(k))])
    lines = notes + _table(rows)
    lines.append("edges: " + (", ".join(f"C{p + 1} -> C{c + 1}" for p, c in jt.edges) or "none"))
    doc = {"cliques": [sorted(c) for c in jt.cliques],
           "separators": [sorted(s) for s in jt.separators],
           "edges": [[p + 1, c + 1] for p, c in jt.edges],
           "family_assignment": {str(v): k + 1 for v, k in sorted(jt.family_assignment.items())},
           "decomposed": bool(notes)}
    return Outcome(EXIT_OK, "\n".join(lines), doc)


def cmd_expand(model: DecisionModel, cfg: RunConfig) -> Outcome:
    monomials = utility_expansion(model)
    lines = [f"{len(monomials)} monomials"] + [str(m) for m in monomials]
    doc = {"monomials": [{"corner": m.corner.key, "label": m.label, "weight": m.weight,
                          "factors": [str(f) for f in m.factors]} for m in monomials]}
    return Outcome(EXIT_OK, "\n".join(lines), doc)


def _evaluate_all(model, cfg, decisions):
    method = _pick_method(model, cfg.method)
    target, notes = _for_method(model, method)
    results = {d: expected_utility(target, d, method) for d in decisions}
    return method, notes, results


def cmd_evaluate(model: DecisionModel, cfg: RunConfig) -> Outcome:
    method, notes, results = _evaluate_all(model, cfg, _decisions(model, cfg.decision))
    problems = _range_problems(results)
    _notify(notes)
    lines = _table([[d, fmt(v), f"[{method}]"] for d, v in results.items()])
    doc = {"method": method, "expected_utility": results, "errors": problems}
    return Outcome(EXIT_COMPUTATION if problems else EXIT_OK, "\n".join(lines + problems), doc)


def cmd_rank(model: DecisionModel, cfg: RunConfig) -> Outcome:
    method, notes, results = _evaluate_all(model, cfg, model.decisions)
    ranking = sorted(results.items(), key=lambda pair: -pair[1])
    problems = _range_problems(results)
    _notify(notes)
    lines = _table([[f"{k + 1}.", d, fmt(v), f"[{method}]"] for k, (d, v) in enumerate(ranking)])
    doc = {"method": method,
           "ranking": [{"decision": d, "expected_utility": v} for d, v in ranking],
           "errors": problems}
    return Outcome(EXIT_COMPUTATION if problems else EXIT_OK, "\n".join(lines + problems), doc)


def cmd_oracle(model: DecisionModel, cfg: RunConfig) -> Outcome:
    method, notes, results = _evaluate_all(model, cfg, _decisions(model, cfg.decision))
    discrete = model.kind == "discrete"
    rows = [["decision", "closed form", "oracle", "std error", "difference" if discrete else "z"]]
    doc_results = {}
    for d, eu in results.items():
        if discrete:
            est, se, clamped = exact_discrete_eu(model, d), 0.0, 0.0
        else:
            rep = monte_carlo_eu(model, d, cfg.mc_samples, cfg.seed)
            est, se, clamped = rep.estimate, rep.std_error, rep.clamped_fraction
        entry = {"closed_form": eu, "oracle": est, "std_error": se}
        if discrete:
            entry["difference"] = eu - est
        else:
            entry["z"] = (eu - est) / se if se > 0 else 0.0
        rows.append([d, fmt(eu), fmt(est), fmt(se), fmt(entry.get("z", eu - est))])
        doc_results[d] = entry
    oracle_name = ("exact enumeration" if discrete
                   else f"monte carlo, {cfg.mc_samples} samples, seed {cfg.seed}")
    lines = notes + [f"method: {method}", f"oracle: {oracle_name}"] + _table(rows)
    doc = {"method": method, "oracle": oracle_name, "results": doc_results}
    if not discrete:
        lines.insert(len(notes) + 2, f"generator: {RNG_ALGORITHM}")
        doc.update(seed=cfg.seed, samples=cfg.mc_samples, generator=RNG_ALGORITHM)
    return Outcome(EXIT_OK, "\n".join(lines), doc)


HANDLERS = {
    "validate": cmd_validate, "decompose": cmd_decompose, "jtree": cmd_jtree,
    "expand": cmd_expand, "evaluate": cmd_evaluate, "rank": cmd_rank, "oracle": cmd_oracle,
}


def run(cfg: RunConfig) -> Outcome:
    """Execute one command; every failure is mapped to an exit status and a
    message instead of an exception."""
    try:
        text = Path(cfg.model_path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        return Outcome(EXIT_IO, f"error: cannot read {cfg.model_path}: {exc}")
    try:
        model = loads_model(text, validate=cfg.command != "validate")
    except ModelParseError as exc:
        return Outcome(EXIT_VALIDATION, f"error: malformed model file: {exc}")
    except ModelValidationError as exc:
        lines = exc.report.lines() if exc.report is not None else [str(exc)]
        return Outcome(EXIT_VALIDATION, "\n".join(lines))
    try:
        return HANDLERS[cfg.command](model, cfg)
    except (DeunError, ValueError, ArithmeticError) as exc:
        return Outcome(EXIT_COMPUTATION, f"error: {type(exc).__name__}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="deun", description="Evaluate decisions on dual-edge utility networks.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("model_file")
    p.add_argument("--decision")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--mc-samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--structured", action="store_true",
                   help="emit a JSON document with full-precision numbers")
    return p


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = RunConfig(ns.command, ns.model_file, ns.decision, ns.method, ns.mc_samples,
                        ns.seed, ns.output, ns.structured)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    out = run(cfg)
    if cfg.structured and out.document is not None:
        doc = dict(out.document, command=cfg.command, status=out.status)
        body = dumps_canonical(doc)
    else:
        body = out.text + "\n"
    if cfg.output_path:
        try:
            Path(cfg.output_path).write_text(body, encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {cfg.output_path}: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        stream = sys.stdout if out.status == EXIT_OK or out.document is not None else sys.stderr
        stream.write(body)
    return out.status


if __name__ == "__main__":
    sys.exit(main())
