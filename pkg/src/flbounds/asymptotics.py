"""Asymptotic machinery: Edgeworth correction, strong large deviations,
and the constant-order expansions of every supported coding task.

An Expansion holds the coefficients of a1*n + a2*sqrt(n) + a3*log(n) + a4.
Expansions always come as coefficient records so callers can truncate to the
second-order (sqrt-n) approximation exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .measures import DiscreteMeasure, JointMeasure, counting_measure, marginal
from .quantities import (
    DivergenceStats,
    conditional_stats,
    ddt_constant,
    dh_constant,
    divergence_stats,
    f_constant,
    hmin_constant,
    gauss_cdf,
    gauss_inv,
    v_of,
)
from .spectrum import CgfView, LatticeInfo, SpectrumError

EQUALITY = "equality-up-to-O(1/sqrt n)"


@dataclass(frozen=True)
class Expansion:
    """Coefficients of a1*n + a2*sqrt(n) + a3*log(n) + a4 with a direction tag."""

    a1: float
    a2: float
    a3: float
    a4: float
    direction: str = EQUALITY

    def at(self, n: float) -> float:
        return self.a1 * n + self.a2 * math.sqrt(n) + self.a3 * math.log(n) + self.a4

    def second_order_at(self, n: float) -> float:
        """Truncation to the sqrt-n term (the figures' dashed curves)."""
        return self.a1 * n + self.a2 * math.sqrt(n)


@dataclass(frozen=True)
class TailEstimate:
    log_value: float
    components: tuple[float, float, float]  # (chi0 * n, -log(n)/2, chi1)


def edgeworth_cdf(n: int, x: float, kappa: float) -> float:
    """Two-term Edgeworth approximation of the standardized i.i.d. CDF."""
    if n < 1:
        raise ValueError("n must be at least 1")
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return gauss_cdf(x) - pdf * kappa * (x * x - 1.0) / (6.0 * math.sqrt(n))


def bahadur_rao_log_tail(cgf: CgfView, lattice: LatticeInfo, r: float, n: int) -> TailEstimate:
    """Strong large-deviation estimate of log P{sum >= n r}.

    chi0 * n - log(n)/2 + chi1 with the lattice-aware constant; the lattice
    and non-lattice branches are unified by the two-argument correction
    v(d, s), which equals -log(s) at d = 0.
    """
    s = cgf.eta(r)
    if s <= 0:
        raise SpectrumError("tail rate point must exceed the mean slope")
    tau, _, tau2, _ = cgf.derivs(s)
    chi0 = -r * s + tau
    eta_prime = 1.0 / tau2
    chi1 = -0.5 * math.log(2.0 * math.pi) + 0.5 * math.log(eta_prime) + v_of(lattice.span, s)
    return TailEstimate(chi0 * n - 0.5 * math.log(n) + chi1, (chi0 * n, -0.5 * math.log(n), chi1))


def tilted_log_tail(
    cgf: CgfView, lattice: LatticeInfo, s0: float, r1: float, r2: float, n: int
) -> float:
    """Refined tail estimate at a drifting threshold.

    The threshold rate is R = tau'(s0) + r1/sqrt(n) + r2/n; returns
    n(-R s0 + tau(s0)) - log(2 pi tau''(s0) n)/2 + v(d, s0) - r1^2/(2 tau''(s0)).
    """
    if s0 <= 0:
        raise SpectrumError("tilt must be positive")
    tau, r0, tau2, _ = cgf.derivs(s0)
    r = r0 + r1 / math.sqrt(n) + r2 / n
    return (
        n * (-r * s0 + tau)
        - 0.5 * math.log(2.0 * math.pi * tau2 * n)
        + v_of(lattice.span, s0)
        - r1 * r1 / (2.0 * tau2)
    )


def _second_order(stats: DivergenceStats, eps: float) -> float:
    return math.sqrt(stats.v) * gauss_inv(eps)


def expand_srng(j: JointMeasure, eps: float) -> dict[str, Expansion]:
    """Secure-key-length expansions for a source/eavesdropper joint measure."""
    p_cond = marginal(j, 1)
    stats = conditional_stats(j, p_cond)
    if stats.v <= 0:
        raise SpectrumError("degenerate pair: V = 0")
    h = -stats.d
    a2 = _second_order(stats, eps)
    return {
        "gs1": Expansion(h, a2, 0.0, hmin_constant(stats, eps)),
        "gs2": Expansion(h, a2, -1.0, f_constant(2, stats, eps)),
        "gs3": Expansion(h, a2, -0.5, f_constant(3, stats, eps), direction="lower"),
    }


def expand_ht(p: DiscreteMeasure, q: DiscreteMeasure, eps: float) -> dict[str, Expansion]:
    """Hypothesis-testing divergence expansions (optimal test and DT bound)."""
    stats = divergence_stats(p, q)
    if stats.v <= 0:
        raise SpectrumError("degenerate pair: V = 0")
    a2 = _second_order(stats, eps)
    return {
        "dh": Expansion(stats.d, a2, 0.5, dh_constant(stats, eps)),
        "ddt": Expansion(stats.d, a2, 0.0, ddt_constant(stats, eps)),
    }


def expand_source(p_x: DiscreteMeasure, eps: float) -> Expansion:
    """Fixed-length source coding rate expansion (counting-measure reference)."""
    i = counting_measure(p_x.labels)
    stats = divergence_stats(p_x, i)
    if stats.v <= 0:
        raise SpectrumError("degenerate source: V = 0")
    a2 = _second_order(stats, eps)
    return Expansion(-stats.d, -a2, -0.5, -dh_constant(stats, eps))


def expand_source_side(j_xy: JointMeasure, eps: float) -> dict[str, Expansion]:
    """Source coding with decoder side information: both directions.

    The rate target is the conditional entropy; both directions come from
    the same divergence statistics so their first-order coefficients are
    identical by construction.
    """
    p_y = marginal(j_xy, 1)
    stats = conditional_stats(j_xy, p_y)
    if stats.v <= 0:
        raise SpectrumError("degenerate pair: V = 0")
    a2 = _second_order(stats, eps)
    return {
        "lower": Expansion(-stats.d, -a2, -0.5, -dh_constant(stats, eps), direction="lower"),
        "upper": Expansion(-stats.d, -a2, 0.0, -ddt_constant(stats, eps), direction="upper"),
    }


def expand_channel(ch, eps: float) -> dict[str, Expansion]:
    """Channel-coding expansions for a conditional-additive channel.

    ``ch`` supplies uniform_reference_pair() -> (joint, reference) for the
    pair whose divergence equals log|X| - H(input, noise-output | output).
    """
    joint, ref = ch.uniform_reference_pair()
    stats = divergence_stats(joint, ref)
    if stats.v <= 0:
        raise SpectrumError("degenerate channel: V = 0")
    a2 = _second_order(stats, eps)
    return {
        "lower": Expansion(stats.d, a2, 0.0, ddt_constant(stats, eps), direction="lower"),
        "upper": Expansion(stats.d, a2, 0.5, dh_constant(stats, eps), direction="upper"),
    }


def expand_wiretap(wp, eps: float, delta: float) -> dict[str, Expansion]:
    """Wire-tap secure-rate expansions.

    ``wp`` supplies y_stats()/z_stats() for the (joint || output-marginal)
    pairs of the legitimate and eavesdropper channels, and upper_stats() for
    the degraded-pair reference; upper_stats() raises when no degradedness
    witness is available. Both directions share the identical first-order
    coefficient object.
    """
    sy: DivergenceStats = wp.y_stats()
    sz: DivergenceStats = wp.z_stats()
    if sy.v <= 0 or sz.v <= 0:
        raise SpectrumError("degenerate wire-tap pair: V = 0")
    a1 = sy.d - sz.d  # H(. | Z-side) - H(. | Y-side)
    lower = Expansion(
        a1,
        math.sqrt(sy.v) * gauss_inv(eps) + math.sqrt(sz.v) * gauss_inv(delta),
        -0.5,
        ddt_constant(sy, eps) + f_constant(3, sz, delta),
        direction="lower",
    )
    su: DivergenceStats = wp.upper_stats()
    upper = Expansion(
        a1,
        math.sqrt(su.v) * gauss_inv(eps + delta),
        0.5,
        dh_constant(su, eps + delta),
        direction="upper",
    )
    return {"lower": lower, "upper": upper}
