"""Exact finite-blocklength bounds computed from LLR spectra.

The secrecy bounds work with the variable x = -log(P/Q) (the mirrored
orientation of the stored t = log(P/Q)); the testing bounds work with t
directly. All inner minimizations land on spectrum support points: the
objectives are a step part plus a smooth exponential whose only interior
stationary points are maxima, so the closed forms below are exact.

Large powers are handled without overflow by never forming linear Q masses:
terms like e^{-m} q_i are evaluated as p_i e^{-(m + t_i)}, which is bounded
by p_i on the relevant event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .measures import DiscreteMeasure, JointMeasure
from .spectrum import CgfView, LlrSpectrum, SpectrumError


@dataclass(frozen=True)
class BoundResult:
    value: float
    kind: str  # upper | lower | exact
    task: str
    n: int
    params: dict = field(default_factory=dict)


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")


def _mirrored(spec: LlrSpectrum):
    """Support of x = -t in ascending order with matching masses."""
    x = -spec.t[::-1]
    p = spec.p[::-1]
    log_q = spec.log_q[::-1]
    return x, p, log_q


def delta_min(m: float, spec: LlrSpectrum) -> float:
    """Minimal smoothing distance P{x <= m} - e^{-m} Q{x <= m}, x = -log(P/Q).

    Continuous and nondecreasing in m (the jump of the P part at each
    support point is cancelled exactly by the Q part).
    """
    t, p = spec.t, spec.p
    k = np.searchsorted(t, -m, side="left")
    p_part = float(p[k:].sum())
    with np.errstate(over="ignore"):
        q_part = float(np.sum(p[k:] * np.exp(-(m + t[k:]))))
    return p_part - q_part


def _delta_at_knots(spec: LlrSpectrum):
    """(x knots ascending, delta_min at each knot, cum P, cum log Q)."""
    x, p, log_q = _mirrored(spec)
    cum_p = np.cumsum(p)
    cum_log_q = np.logaddexp.accumulate(log_q)
    # log B_k - x_k <= log A_k <= 0, so the exponent never overflows
    delta = np.maximum.accumulate(np.maximum(cum_p - np.exp(cum_log_q - x), 0.0))
    return x, delta, cum_p, cum_log_q


def hmin_smooth_eps(spec: LlrSpectrum, eps: float) -> float:
    """Smooth min-entropy: sup{m : delta_min(m) <= eps}, exact inversion."""
    _check_eps(eps)
    x, delta, cum_p, cum_log_q = _delta_at_knots(spec)
    k = int(np.searchsorted(delta, eps, side="right")) - 1
    if k < 0:
        # delta at the first knot is exactly 0 up to rounding
        k = 0
    a, log_b = cum_p[k], cum_log_q[k]
    if k == x.size - 1:
        # beyond the last knot delta(m) = p_total - e^{-m} * Q(supp P)
        return float(log_b - math.log(a - eps))
    if a <= eps:
        return float(x[k + 1])
    m = float(log_b - math.log(a - eps))
    return min(max(m, float(x[k])), float(x[k + 1]))


def ell_min_eps(spec: LlrSpectrum, eps: float) -> float:
    """Key-length lower bound inverted from delta_min plus the hash penalty.

    max{m' : exists m with delta_min(m) + (1/2) e^{(m'-m)/2} <= eps}; the
    inner minimum over m is attained at support knots, giving a closed form
    per knot.
    """
    _check_eps(eps)
    x, delta, _, _ = _delta_at_knots(spec)
    ok = delta < eps
    if not np.any(ok):
        raise SpectrumError("no feasible smoothing point below eps")
    cand = x[ok] + 2.0 * np.log(2.0 * (eps - delta[ok]))
    return float(cand.max())


def ell_2_eps(spec: LlrSpectrum, eps: float) -> float:
    """Key-length lower bound via the order-2 squared-measure tail.

    Inverts P{x <= m} + (1/2) e^{m'/2} sqrt(S{x > m}) <= eps over support
    knots, where the squared measure S puts mass p^2/q = p e^{t} on each
    point.
    """
    _check_eps(eps)
    x, p, _ = _mirrored(spec)
    with np.errstate(divide="ignore"):
        log_sq = np.log(p) - x  # log of p^2/q mass per point
    # suffix[k] = log S{x > knot k-1}; index 0 is the full tail (empty P part)
    suffix = np.concatenate((np.logaddexp.accumulate(log_sq[::-1])[::-1], [-np.inf]))
    cum_p = np.concatenate(([0.0], np.cumsum(p)))  # cum_p[k] = P{x <= knot k-1}
    ok = (cum_p < eps) & (suffix > -np.inf)
    if not np.any(ok):
        raise SpectrumError("no feasible threshold below eps")
    cand = 2.0 * (math.log(2.0) + np.log(eps - cum_p[ok]) - 0.5 * suffix[ok])
    return float(cand.max())


def beta_eps(spec: LlrSpectrum, eps: float) -> tuple[float, float]:
    """Optimal randomized Neyman-Pearson type-II error at type-I level eps.

    Returns (beta, log_beta). The acceptance region keeps atoms of largest
    t = log(P/Q) first until the P budget p_total - eps is filled, with
    randomization on the boundary atom. Q-only atoms (and any +inf sentinel
    P-atoms) never enter / always enter at zero cost respectively.
    """
    _check_eps(eps)
    t_desc = spec.t[::-1]
    p_desc = spec.p[::-1]
    lq_desc = spec.log_q[::-1]
    if spec.p_total - eps <= 0:
        return 0.0, float("-inf")
    # suffix[j] = P-mass from atom j (descending t) to the end. The excluded
    # mass must equal eps exactly, so the boundary atom k satisfies
    # suffix[k] >= eps >= suffix[k+1]; working with the small suffix sums
    # instead of target = p_total - eps avoids cancellation near eps << 1.
    suffix = np.cumsum(p_desc[::-1])[::-1]
    k = int(np.searchsorted(-suffix, -eps, side="left")) - 1
    k = min(max(k, 0), p_desc.size - 1)
    frac = min(max((suffix[k] - eps) / p_desc[k], 0.0), 1.0)
    parts = [lq_desc[:k]]
    if frac > 0:
        parts.append(np.array([math.log(frac) + lq_desc[k]]))
    stacked = np.concatenate(parts) if parts else np.array([-np.inf])
    log_beta = float(logsumexp(stacked)) if stacked.size else float("-inf")
    with np.errstate(over="ignore"):
        return float(np.exp(log_beta)), log_beta


def d_h_eps(spec: LlrSpectrum, eps: float) -> float:
    """Hypothesis-testing divergence: -log of the optimal type-II error."""
    return -beta_eps(spec, eps)[1]


def d_dt_eps(spec: LlrSpectrum, eps: float) -> float:
    """Dependence-testing divergence.

    max{m' : min_m [P{t <= m} + e^{m'} Q{t > m}] <= eps} with the minimum
    over support knots of t plus the empty-event candidate.
    """
    _check_eps(eps)
    log_q = spec.log_q
    cum_p = np.concatenate(([0.0], np.cumsum(spec.p)))
    suffix = np.concatenate((np.logaddexp.accumulate(log_q[::-1])[::-1], [-np.inf]))
    ok = (cum_p < eps) & (suffix > -np.inf)
    if not np.any(ok):
        raise SpectrumError("no feasible threshold below eps")
    cand = np.log(eps - cum_p[ok]) - suffix[ok]
    return float(cand.max())


def h_sp_eps(spec: LlrSpectrum, eps: float) -> float:
    """Spectral entropy: the eps-quantile of x = -log(P/Q) under P.

    Left-continuous inverse of the exact CDF: the smallest support point m
    with P{x <= m} > eps.
    """
    _check_eps(eps)
    x, p, _ = _mirrored(spec)
    cum_p = np.cumsum(p)
    k = int(np.searchsorted(cum_p, eps, side="right"))
    if k >= x.size:
        return float("inf")
    return float(x[k])


def renyi_cond(j: JointMeasure, r: DiscreteMeasure, alpha: float) -> float:
    """Conditional Renyi entropy of order alpha = 1 + theta relative to r.

    -(1/theta) log sum j(a,b)^{1+theta} r(b)^{-theta}. The conditional form
    is not pinned down by the source material; this is the standard
    relative-measure variant consistent with the order-2 entropy.
    """
    theta = alpha - 1.0
    if not 0.0 < theta <= 1.0:
        raise ValueError("order must lie in (1, 2]")
    rw = r.weights[None, :]
    jw = j.weights
    on = jw > 0
    if np.any(on & (rw <= 0)):
        raise SpectrumError("conditioning measure vanishes where the joint has mass")
    ratio = np.where(on, jw / np.where(rw > 0, rw, 1.0), 0.0)
    return -math.log(float(np.sum(jw * ratio**theta))) / theta


def _renyi_from_base(base: LlrSpectrum, theta: float) -> float:
    """Order-(1+theta) entropy per letter, from the order-1 spectrum."""
    return -CgfView.from_spectrum(base).tau(theta) / theta


THETA_GRID = np.logspace(-8.0, 0.0, 1024)


def legacy_bounds_w(
    spec_n: LlrSpectrum,
    base: LlrSpectrum,
    eps: float,
    eta: float | None = None,
    zeta: float | None = None,
) -> dict[str, float]:
    """Reference key-length bounds from the earlier spectral/Renyi approach.

    Returns W1_lower, W1_upper, W2_lower, W3_lower for the n-fold spectrum.
    The Renyi term is additive across i.i.d. letters, so it comes from the
    order-1 spectrum scaled by n. The W2 combination uses coefficients
    theta / (1 - theta) on the Renyi / spectral terms (the convex split that
    the truncation argument produces); see the repository notes on the
    source display.
    """
    _check_eps(eps)
    if eta is None:
        eta = eps / 2.0
    if zeta is None:
        zeta = eps / 2.0
    if eps - eta <= 0 or eps - zeta <= 0:
        raise ValueError("splits must leave a positive smoothing budget")
    n = spec_n.n
    h_sp_eta = h_sp_eps(spec_n, eps - eta)
    h_sp_zeta = h_sp_eps(spec_n, eps - zeta)
    w1_lower = h_sp_eta + math.log(4.0 * eta * eta) - 1.0
    w1_upper = h_sp_zeta - math.log(zeta)
    renyi = np.array([n * _renyi_from_base(base, th) for th in THETA_GRID])
    w2 = THETA_GRID * renyi + (1.0 - THETA_GRID) * h_sp_eta + math.log(2.0 * eta * eta) - 1.0
    w3 = renyi + (1.0 + 1.0 / THETA_GRID) * math.log(2.0 * eps / 3.0) - 1.0
    return {
        "W1_lower": float(w1_lower),
        "W1_upper": float(w1_upper),
        "W2_lower": float(w2.max()),
        "W3_lower": float(w3.max()),
    }


def sacrifice(log_alphabet_size: float, ell_value: float) -> float:
    """Sacrifice bit-length in nats: log|A| minus an extractable key length."""
    return log_alphabet_size - ell_value
