"""Random model generators and small utilities shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np

from deun import CornerConfig, DecisionModel, Deun, make_decomposable, validate_model
from deun.model import (Attribute, ExpDecreasing, ExpIncreasing, LinearGaussian, OneMinusExp,
                        TabularCpd, TabularUtility, resolve_references)

FIG1A = Deun(5, [(1, 2), (1, 3), (1, 5), (2, 3), (2, 4)], [])
UTIL_DIAGRAM = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 4)]
FIG3B = Deun(5, [(1, 2), (1, 3), (1, 5), (2, 3), (2, 4)],
             [(1, 2), (1, 3), (1, 4), (1, 5), (2, 4), (2, 5)])


def random_deun(rng, n, p_prob=0.4, p_util=0.4, decomposable=False) -> Deun:
    pe = [(i, j) for i, j in itertools.combinations(range(1, n + 1), 2) if rng.random() < p_prob]
    ue = [(i, j) for i, j in itertools.combinations(range(1, n + 1), 2) if rng.random() < p_util]
    deun = Deun(n, pe, ue)
    return make_decomposable(deun) if decomposable else deun


def monotone_corner_weights(rng, n) -> dict[str, float]:
    """Weights from non-negative main and pairwise effects, scaled into
    [0, 1]; monotone by construction."""
    main = rng.uniform(0.05, 1.0, n)
    pair = rng.uniform(0.0, 0.3, (n, n))
    raw = {}
    for cfg in CornerConfig.all(range(1, n + 1)):
        s = [k for k, b in enumerate(cfg.bits) if b]
        raw[cfg.key] = main[s].sum() + sum(pair[a, b] for a, b in itertools.combinations(s, 2))
    top = max(raw.values())
    return {k: float(v / top) for k, v in raw.items()}


def _marginals(deun, cpds):
    """Exact marginal means and standard deviations of a linear-Gaussian
    network, propagated in index order."""
    n = deun.n
    mean = np.zeros(n)
    cov = np.zeros((n, n))
    for i in deun.vertices:
        cpd = cpds[i]
        b = np.zeros(n)
        for p, c in cpd.coefficients.items():
            b[p - 1] = c
        mean[i - 1] = cpd.intercept + b @ mean
        row = cov @ b
        cov[i - 1, :] = row
        cov[:, i - 1] = row
        cov[i - 1, i - 1] = b @ cov @ b + cpd.sigma ** 2
    return mean, np.sqrt(np.diag(cov))


def random_gaussian_model(rng, n, deun=None, n_decisions=2, width_sd=8.0,
                          decomposable=True) -> DecisionModel:
    """Linear-Gaussian model with exponential utilities on domains wide
    enough (``width_sd`` marginal standard deviations) that extrapolating
    the utility forms barely matters."""
    deun = deun or random_deun(rng, n, decomposable=decomposable)
    decisions = tuple(f"d{k}" for k in range(n_decisions))
    cpds = {}
    lo, hi = np.full(n, np.inf), np.full(n, -np.inf)
    for d in decisions:
        per = {}
        for i in deun.vertices:
            coefs = {p: float(rng.uniform(-1.2, 1.2)) for p in deun.prob_parents(i)}
            per[i] = LinearGaussian(float(rng.uniform(-5, 5)), coefs, float(rng.uniform(0.5, 2.5)))
        cpds[d] = per
        mu, sd = _marginals(deun, per)
        lo = np.minimum(lo, mu - width_sd * sd)
        hi = np.maximum(hi, mu + width_sd * sd)
    attrs = tuple(Attribute(i, f"a{i}", (float(np.floor(lo[i - 1])), float(np.ceil(hi[i - 1]))))
                  for i in deun.vertices)
    utilities = {}
    for i in deun.vertices:
        a, b = attrs[i - 1].domain
        # conditional utilities of one attribute share their reference points,
        # so they must all increase or all decrease
        forms = (ExpIncreasing,) if rng.random() < 0.5 else (ExpDecreasing, OneMinusExp)
        utilities[i] = {
            cfg.key: forms[rng.integers(len(forms))](float(rng.uniform(0.2, 3.0) / (b - a)))
            for cfg in CornerConfig.all(deun.util_parents(i))}
    model = DecisionModel(deun, attrs, decisions, cpds, utilities,
                          monotone_corner_weights(rng, n))
    return checked(resolve_references(model))


def random_tabular_model(rng, n, deun=None, n_decisions=2, max_support=4) -> DecisionModel:
    deun = deun or random_deun(rng, n)
    supports = {}
    for i in deun.vertices:
        k = int(rng.integers(2, max_support + 1))
        supports[i] = tuple(float(v) for v in np.sort(rng.choice(np.arange(-10, 11), k,
                                                                 replace=False)))
    decisions = tuple(f"d{k}" for k in range(n_decisions))
    cpds = {}
    for d in decisions:
        per = {}
        for i in deun.vertices:
            parents = deun.prob_parents(i)
            rows = int(np.prod([len(supports[p]) for p in parents])) if parents else 1
            probs = rng.dirichlet(np.ones(len(supports[i])), rows)
            probs = probs / probs.sum(axis=1, keepdims=True)
            per[i] = TabularCpd(supports[i], {p: supports[p] for p in parents},
                                tuple(tuple(float(x) for x in r) for r in probs))
        cpds[d] = per
    attrs = tuple(Attribute(i, f"a{i}", (supports[i][0], supports[i][-1]))
                  for i in deun.vertices)
    utilities = {}
    for i in deun.vertices:
        forms = {}
        worst, best = rng.choice(len(supports[i]), 2, replace=False)
        for cfg in CornerConfig.all(deun.util_parents(i)):
            vals = rng.uniform(0.01, 0.99, len(supports[i]))
            vals[worst], vals[best] = 0.0, 1.0
            forms[cfg.key] = TabularUtility(tuple(float(v) for v in vals))
        utilities[i] = forms
    model = DecisionModel(deun, attrs, decisions, cpds, utilities,
                          monotone_corner_weights(rng, n))
    return checked(resolve_references(model))


def checked(model: DecisionModel) -> DecisionModel:
    report = validate_model(model)
    assert report.ok, report.lines()
    return model


# --------------------------------------------------------------------------
# Relabelling
# --------------------------------------------------------------------------

def random_consistent_relabeling(rng, deun: Deun) -> dict[int, int]:
    """A map old -> new index under which every edge of both sets still
    points upwards: a random topological order of their union."""
    edges = deun.prob_edges | deun.util_edges
    remaining = set(deun.vertices)
    order = []
    while remaining:
        ready = sorted(v for v in remaining if not any(j == v and i in remaining for i, j in edges))
        v = ready[rng.integers(len(ready))]
        order.append(v)
        remaining.remove(v)
    return {old: new for new, old in enumerate(order, start=1)}


def _rekey(key: str, old_scope, perm) -> str:
    """Re-express a config key over ``old_scope`` in the relabelled
    ascending order."""
    bits = dict(zip(old_scope, key))
    return "".join(bits[o] for o in sorted(old_scope, key=lambda o: perm[o]))


def relabel_model(model: DecisionModel, perm: dict[int, int]) -> DecisionModel:
    deun = model.deun
    new_deun = Deun(deun.n, [(perm[i], perm[j]) for i, j in deun.prob_edges],
                    [(perm[i], perm[j]) for i, j in deun.util_edges])
    attrs = tuple(sorted((Attribute(perm[a.index], a.name, a.domain, a.ref_zero, a.ref_star)
                          for a in model.attributes), key=lambda a: a.index))
    cpds = {}
    for d, per in model.cpds.items():
        new = {}
        for i, cpd in per.items():
            if isinstance(cpd, LinearGaussian):
                new[perm[i]] = LinearGaussian(cpd.intercept,
                                              {perm[p]: c for p, c in cpd.coefficients.items()},
                                              cpd.sigma)
            else:
                old_parents = cpd.parents
                new_parents = sorted(old_parents, key=lambda p: perm[p])
                table = cpd.table()
                axes = [old_parents.index(p) for p in new_parents] + [len(old_parents)]
                table = np.transpose(table, axes).reshape(-1, len(cpd.support))
                new[perm[i]] = TabularCpd(cpd.support,
                                          {perm[p]: cpd.parent_grids[p] for p in new_parents},
                                          tuple(tuple(r) for r in table))
        cpds[d] = new
    utilities = {perm[i]: {_rekey(k, deun.util_parents(i), perm): f for k, f in forms.items()}
                 for i, forms in model.utilities.items()}
    weights = {_rekey(k, tuple(deun.vertices), perm): w for k, w in model.corner_weights.items()}
    return DecisionModel(new_deun, attrs, model.decisions, cpds, utilities, weights)


def with_corner_weights(model: DecisionModel, weights: dict[str, float]) -> DecisionModel:
    return DecisionModel(model.deun, model.attributes, model.decisions, model.cpds,
                         model.utilities, weights)
