"""Single-letter information quantities and the constant-term functions.

Everything is in nats. The five constant-term functions F1..F5 feed the
asymptotic expansions; they consume precomputed DivergenceStats so the
conditional variants (joint measure against a conditioning marginal) go
through the same code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .measures import DiscreteMeasure, JointMeasure, product_reference
from .spectrum import SpectrumError, build_spectrum, lattice_span


@dataclass(frozen=True)
class DivergenceStats:
    """Relative entropy D, its variance V, skewness kappa, and lattice span.

    kappa is the skewness of -log(P/Q) under P (third standardized moment);
    it is defined as 0 when V = 0 so the record stays total.
    """

    d: float
    v: float
    kappa: float
    span: float


def divergence_stats(p, q) -> DivergenceStats:
    """D, V, kappa and lattice span for the pair (p, q), p probability."""
    spec = build_spectrum(p, q)
    t, w = spec.t, spec.p
    total = w.sum()
    w = w / total
    d = float(np.dot(w, t))
    c = t - d
    v = float(np.dot(w, c * c))
    if v > 0:
        # skewness of -t; centered cubes flip sign
        kappa = float(np.dot(w, (-c) ** 3)) / v**1.5
    else:
        kappa = 0.0
    return DivergenceStats(d, max(v, 0.0), kappa, lattice_span(spec).span)


def cond_entropies(j: JointMeasure, r: DiscreteMeasure) -> tuple[float, float, float]:
    """(H, H_min, H_2) of a joint measure relative to a conditioning marginal.

    H is -D(j || r lifted to the joint alphabet); H_min uses the max ratio
    over supp(j); H_2 is the order-2 value -log sum j^2 / r.
    """
    if r.labels != j.col_labels:
        raise SpectrumError("conditioning measure must live on the column system")
    rw = r.weights[None, :]
    jw = j.weights
    on = jw > 0
    if np.any(on & (rw <= 0)):
        raise SpectrumError("conditioning measure vanishes where the joint has mass")
    ratio = np.where(on, jw / np.where(rw > 0, rw, 1.0), 0.0)
    h = -float(np.sum(jw[on] * np.log(ratio[on])))
    h_min = -math.log(float(ratio.max()))
    h_2 = -math.log(float(np.sum(jw * ratio)))
    return h, h_min, h_2


def v_of(d: float, s: float | None = None) -> float:
    """Lattice correction: log(d / (1 - e^{-d s})), continuous at d = 0.

    With s omitted it is the one-argument version (s = 1, value 0 at d = 0);
    the two-argument version tends to -log(s) as d -> 0.
    """
    if d < 0:
        raise ValueError("lattice span must be non-negative")
    if s is None:
        s = 1.0
        at_zero = 0.0
    else:
        if s <= 0:
            raise ValueError("tilt must be positive")
        at_zero = -math.log(s)
    if d == 0:
        return at_zero
    return math.log(d) - math.log(-math.expm1(-d * s))


def gauss_cdf(x: float) -> float:
    """Standard normal CDF."""
    return float(ndtr(x))


def _gauss_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def gauss_inv(eps: float) -> float:
    """Inverse standard normal CDF, polished with one Newton step."""
    if not 0.0 < eps < 1.0:
        raise ValueError("quantile argument must lie in (0, 1)")
    x = float(ndtri(eps))
    pdf = _gauss_pdf(x)
    if pdf > 0:
        x -= (float(ndtr(x)) - eps) / pdf
    return x


def f_constant(i: int, stats: DivergenceStats, eps: float) -> float:
    """Constant term F_i (i in 1..5) for the given divergence statistics."""
    if i not in (1, 2, 3, 4, 5):
        raise ValueError("constant index must be 1..5")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    v, kappa, d = stats.v, stats.kappa, stats.span
    if v <= 0:
        raise ValueError("degenerate pair: V = 0 has no expansion constant")
    b = gauss_inv(eps)
    common = math.sqrt(v) * kappa * (b * b - 1.0) / 6.0
    log2 = math.log(2.0)
    if i == 1:
        return common + math.exp(v_of(d))
    if i == 2:
        return common + math.exp(v_of(d)) + 3 * log2 - 2 - math.log(math.pi) - math.log(v) - b * b
    if i == 3:
        return common + 3.5 * log2 - 2 - 0.5 * math.log(math.pi) - 0.5 * math.log(v) - 0.5 * b * b - v_of(d)
    if i == 4:
        return common + 0.5 * math.log(2 * math.pi * v) + 0.5 * b * b - v_of(d)
    return common - 0.5 * math.log(v) - v_of(d) - 1.0


def _skew_term(stats: DivergenceStats, eps: float) -> float:
    b = gauss_inv(eps)
    return math.sqrt(stats.v) * stats.kappa * (b * b - 1.0) / 6.0


def hmin_constant(stats: DivergenceStats, eps: float) -> float:
    """Constant term of the smooth min-entropy expansion (lattice-aware).

    Equals F_1 minus the span/2 continuity correction: on a lattice the exact
    CDF places half of each atom's mass at the atom itself, which shifts the
    achievable threshold by d/2 relative to the smooth Edgeworth profile.
    The constant is the lim-sup of the exact residual over the lattice phase;
    at span 0 the correction vanishes and the value reduces to F_1.
    """
    return f_constant(1, stats, eps) - 0.5 * stats.span


def dh_constant(stats: DivergenceStats, eps: float) -> float:
    """Constant term of the optimal-test divergence expansion.

    The third-moment (Edgeworth) term enters with the skewness of
    +log(P/Q); ``stats.kappa`` is the skewness of the negated ratio, hence
    the minus sign relative to F_4.  The lattice correction combines the
    -v(d) density factor with the +d/2 half-atom continuity shift; both
    vanish at span 0.  As with ``hmin_constant`` this is the lim-sup of the
    exact residual over the lattice phase.
    """
    if stats.v <= 0:
        raise ValueError("degenerate pair: V = 0 has no expansion constant")
    b = gauss_inv(eps)
    return (
        -_skew_term(stats, eps)
        + 0.5 * math.log(2 * math.pi * stats.v)
        + 0.5 * b * b
        - v_of(stats.span)
        + 0.5 * stats.span
    )


def ddt_constant(stats: DivergenceStats, eps: float) -> float:
    """Constant term of the threshold-decoding divergence expansion.

    Same third-moment orientation as ``dh_constant``.  The Gaussian density
    prefactor cancels between the miss-mass budget and the exponential tail,
    so no log-variance term survives; the residual constant is
    -v(d) - 1 + d/2 (lim-sup over the lattice phase, reducing to -1 at
    span 0).
    """
    if stats.v <= 0:
        raise ValueError("degenerate pair: V = 0 has no expansion constant")
    return -_skew_term(stats, eps) - v_of(stats.span) - 1.0 + 0.5 * stats.span


def conditional_stats(j: JointMeasure, r: DiscreteMeasure) -> DivergenceStats:
    """DivergenceStats of the pair (joint, conditioning marginal lifted)."""
    ref = product_reference(r, j.row_labels)
    return divergence_stats(j, ref)
