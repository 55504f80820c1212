"""Independent checks of the closed-form engine: brute-force enumeration
for tabular models, seeded Monte Carlo and numerical quadrature for
Gaussian ones."""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtri

from .algebra import ExpLinExpr
from .engine import evaluate_utility_pointwise, utility_expansion
from .errors import NonConvergence, TooLarge, UnsupportedCombination
from .model import DecisionModel, LinearGaussian, TabularCpd

MAX_JOINT = 10 ** 7
CHUNK = 1 << 16  # samples per RNG chunk; a multiple of 4 keeps Philox blocks aligned
RNG_ALGORITHM = "philox4x64-10/raw-uint64/ndtri"


def exact_discrete_eu(model: DecisionModel, decision: str) -> float:
    """Sum of ``p(y) * u(y)`` over every joint configuration."""
    cpds = [model.cpd(decision, i) for i in model.deun.vertices]
    if not all(isinstance(c, TabularCpd) for c in cpds):
        raise UnsupportedCombination("exact enumeration needs tabular distributions")
    sizes = [len(c.support) for c in cpds]
    total = math.prod(sizes)
    if total > MAX_JOINT:
        raise TooLarge(f"{total} joint configurations exceed {MAX_JOINT}")
    idx = np.array(list(itertools.product(*(range(s) for s in sizes))), dtype=int)
    values = np.column_stack([np.asarray(c.support, dtype=float)[idx[:, k]]
                              for k, c in enumerate(cpds)])
    prob = np.ones(len(idx))
    for k, cpd in enumerate(cpds):
        table = cpd.table()
        pick = tuple(idx[:, p - 1] for p in cpd.parents) + (idx[:, k],)
        prob *= table[pick]
    util = evaluate_utility_pointwise(model, values)
    return math.fsum(prob * util)


@dataclass(frozen=True)
class McReport:
    estimate: float
    std_error: float
    sample_count: int
    seed: int
    algorithm: str = RNG_ALGORITHM
    clamped_fraction: float = 0.0


def _chunk_stats(model, decision, monomials, seed, start, count, clamp):
    """Draw samples ``start .. start+count`` and return ``(count, mean, M2,
    clamped)``. Sample ``j``, attribute ``k`` always uses raw draw
    ``j * n + (k - 1)``, whatever the chunking."""
    n = model.n
    bitgen = np.random.Philox(key=seed)
    bitgen.advance(start * n // 4)
    raw = bitgen.random_raw(count * n).reshape(count, n)
    uniform = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    z = ndtri(uniform)
    y = np.empty((count, n))
    for i in model.deun.vertices:
        cpd = model.cpd(decision, i)
        col = np.full(count, cpd.intercept)
        for p, c in sorted(cpd.coefficients.items()):
            col += c * y[:, p - 1]
        y[:, i - 1] = col + cpd.sigma * z[:, i - 1]
    clamped = 0
    if clamp:
        lo = np.array([model.attribute(i).domain[0] for i in model.deun.vertices])
        hi = np.array([model.attribute(i).domain[1] for i in model.deun.vertices])
        outside = np.any((y < lo) | (y > hi), axis=1)
        clamped = int(outside.sum())
        y = np.clip(y, lo, hi)
    u = evaluate_utility_pointwise(model, y, allow_out_of_domain=True, monomials=monomials)
    mean = float(u.mean())
    m2 = float(((u - mean) ** 2).sum())
    return count, mean, m2, clamped


def _combine(stats):
    count, mean, m2 = 0, 0.0, 0.0
    for c, mu, s in stats:
        delta = mu - mean
        total = count + c
        mean += delta * c / total
        m2 += s + delta * delta * count * c / total
        count = total
    return count, mean, m2


def monte_carlo_eu(model: DecisionModel, decision: str, samples: int, seed: int, *,
                   clamp: bool = False, workers: int = 1) -> McReport:
    """Estimate the expected utility by ancestral sampling.

    Standard normals come from Philox4x64 keyed by ``seed`` through the
    inverse normal CDF, one raw 64-bit draw per attribute per sample, so the
    result is bit-identical for fixed ``(seed, samples)`` regardless of
    ``workers``. By default utilities are evaluated unclamped, extrapolating
    the analytic forms as the closed-form integration does; ``clamp=True``
    projects samples onto the attribute domains instead.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    if not all(isinstance(model.cpd(decision, i), LinearGaussian) for i in model.deun.vertices):
        raise UnsupportedCombination("Monte Carlo sampling needs linear-Gaussian distributions")
    monomials = utility_expansion(model)
    starts = range(0, samples, CHUNK)

    def job(start):
        return _chunk_stats(model, decision, monomials, seed, start,
                            min(CHUNK, samples - start), clamp)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(s) for s in starts]
    count, mean, m2 = _combine((c, mu, s) for c, mu, s, _ in parts)
    clamped = sum(p[3] for p in parts)
    std_error = math.sqrt(m2 / (count - 1)) / math.sqrt(count) if count > 1 else 0.0
    return McReport(mean, std_error, count, seed, RNG_ALGORITHM, clamped / count)


def quadrature_expectation(e: ExpLinExpr, var: int, mean: float, sigma: float,
                           point: dict | None = None, tol: float = 1e-10) -> float:
    """``E[e]`` for ``y_var ~ N(mean, sigma**2)`` by adaptive quadrature over
    ``mean +/- 12 sigma``; other attributes of ``e`` are fixed by ``point``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    fixed = dict(point or {})
    norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))

    def integrand(y):
        fixed[var] = y
        return e.evaluate(fixed) * norm * math.exp(-0.5 * ((y - mean) / sigma) ** 2)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(integrand, mean - 12 * sigma, mean + 12 * sigma,
                                        points=[mean], epsabs=tol, epsrel=1e-13, limit=500)
        except integrate.IntegrationWarning as exc:
            raise NonConvergence(str(exc)) from exc
    if err > max(tol, 1e-13 * abs(value)) * 10:
        raise NonConvergence(f"quadrature error estimate {err:.3g} too large")
    return value
