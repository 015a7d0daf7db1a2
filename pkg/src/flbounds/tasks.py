"""Task adapters: conditional-additive channels, wire-tap pairs, the BPSK
Gaussian pair, and secure communication from correlated random variables.

Each adapter reduces its task to the single-letter distribution pair(s)
whose spectrum and divergence statistics drive the exact bounds and the
expansions. Upper/lower expansion pairs always share the identical
first-order coefficient object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .asymptotics import Expansion, expand_wiretap
from .measures import (
    ConditionalKernel,
    DiscreteMeasure,
    JointMeasure,
    MeasureError,
    marginal,
    product_reference,
)
from .quantities import (
    DivergenceStats,
    ddt_constant,
    dh_constant,
    divergence_stats,
    f_constant,
    gauss_inv,
)
from .spectrum import LlrSpectrum, SpectrumError, build_spectrum, convolve_iid


def _mixed_radix_sub(a: int, b: int, orders: tuple[int, ...]) -> int:
    """Componentwise difference a - b in a product of cyclic groups."""
    out = 0
    mult = 1
    for d in orders:
        out += ((a % d - b % d) % d) * mult
        a //= d
        b //= d
        mult *= d
    return out


@dataclass(frozen=True)
class ConditionalAdditiveChannel:
    """Channel W(x, y~ | x') = P(x - x', y~) on a product of cyclic groups.

    ``base`` is the probability measure P over (group element, auxiliary
    output); rows must be the group elements 0..|X|-1 in order. The uniform
    input is optimal for such channels, and every bound reduces to the pair
    (P, uniform x auxiliary-marginal).
    """

    orders: tuple[int, ...]
    base: JointMeasure

    def __post_init__(self) -> None:
        object.__setattr__(self, "orders", tuple(int(d) for d in self.orders))
        size = 1
        for d in self.orders:
            if d < 2:
                raise MeasureError("cyclic factors must have order >= 2")
            size *= d
        if self.base.row_labels != tuple(range(size)):
            raise MeasureError("base rows must be group elements 0..|X|-1")
        if abs(self.base.mass - 1.0) > 1e-12:
            raise MeasureError("base distribution must be a probability measure")

    @property
    def group_size(self) -> int:
        s = 1
        for d in self.orders:
            s *= d
        return s

    def uniform_reference_pair(self) -> tuple[JointMeasure, JointMeasure]:
        """(P, U_X x P_aux): divergence of this pair is log|X| - H(P | P_aux)."""
        p_aux = marginal(self.base, 1)
        ref = JointMeasure(
            self.base.row_labels,
            self.base.col_labels,
            np.tile(p_aux.weights / self.group_size, (self.group_size, 1)),
            "probability",
        )
        return self.base, ref

    def conditional_pair(self) -> tuple[JointMeasure, JointMeasure]:
        """(P, lift of P_aux): divergence is -H(P | P_aux)."""
        p_aux = marginal(self.base, 1)
        return self.base, product_reference(p_aux, self.base.row_labels)

    def conditional_stats(self) -> DivergenceStats:
        return divergence_stats(*self.conditional_pair())

    def output_kernel(self) -> ConditionalKernel:
        """W(y|x) for channels with a trivial auxiliary output."""
        if len(self.base.col_labels) != 1:
            raise MeasureError("output kernel is only defined for trivial auxiliary output")
        noise = self.base.weights[:, 0]
        size = self.group_size
        m = np.zeros((size, size))
        for x in range(size):
            for y in range(size):
                m[x, y] = noise[_mixed_radix_sub(y, x, self.orders)]
        return ConditionalKernel(tuple(range(size)), tuple(range(size)), m)


def bsc_channel(p: float) -> ConditionalAdditiveChannel:
    """Binary symmetric channel with crossover p as a conditional-additive channel."""
    if not 0.0 <= p <= 1.0:
        raise MeasureError("crossover must lie in [0, 1]")
    base = JointMeasure((0, 1), ("*",), np.array([[1.0 - p], [p]]), "probability")
    return ConditionalAdditiveChannel((2,), base)


def bsc_kernel(p: float) -> ConditionalKernel:
    return ConditionalKernel((0, 1), (0, 1), np.array([[1.0 - p, p], [p, 1.0 - p]]))


def channel_spectrum(ch: ConditionalAdditiveChannel, n: int) -> LlrSpectrum:
    """Spectrum of the channel's defining pair, convolved to blocklength n."""
    spec = build_spectrum(*ch.uniform_reference_pair())
    if spec.t.size < 2:
        raise SpectrumError("degenerate (deterministic or useless) channel: V = 0")
    return convolve_iid(spec, n)


@dataclass(frozen=True)
class WiretapPair:
    """Legitimate channel, eavesdropper channel, optional degradedness witness.

    The witness is the kernel mapping legitimate outputs to eavesdropper
    outputs; when present, composing it with the Y-channel must reproduce
    the Z-channel. The meta-converse-style upper expansion needs it.
    """

    y_channel: ConditionalAdditiveChannel
    z_channel: ConditionalAdditiveChannel
    witness: Optional[ConditionalKernel] = None

    def __post_init__(self) -> None:
        if self.y_channel.orders != self.z_channel.orders:
            raise MeasureError("wire-tap channels must share one input group")
        if self.witness is not None:
            wy = self.y_channel.output_kernel()
            wz = self.z_channel.output_kernel()
            if self.witness.input_labels != wy.output_labels:
                raise MeasureError("witness input must be the Y output alphabet")
            composed = wy.matrix @ self.witness.matrix
            if np.max(np.abs(composed - wz.matrix)) > 1e-10:
                raise MeasureError("witness does not degrade Y into Z")

    def y_stats(self) -> DivergenceStats:
        return self.y_channel.conditional_stats()

    def z_stats(self) -> DivergenceStats:
        return self.z_channel.conditional_stats()

    def upper_pair(self) -> tuple[JointMeasure, JointMeasure]:
        """(joint of (Y, Z) given input 0, reverse-conditional reference).

        The reference is P(y|z) under uniform input times the Z-channel law
        at input 0; requires the degradedness witness.
        """
        if self.witness is None:
            raise MeasureError("upper expansion needs a degradedness witness")
        wy = self.y_channel.output_kernel()
        wz = self.z_channel.output_kernel()
        wit = self.witness.matrix
        y0 = wy.matrix[0]
        z0 = wz.matrix[0]
        joint = JointMeasure.from_matrix(
            self.witness.input_labels, self.witness.output_labels, y0[:, None] * wit
        )
        # reverse conditional of the uniform-input (Y, Z) joint
        u = np.full(wy.matrix.shape[0], 1.0 / wy.matrix.shape[0])
        p_y = u @ wy.matrix
        j_yz = p_y[:, None] * wit
        p_z = j_yz.sum(axis=0)
        rev = j_yz / np.where(p_z > 0, p_z, 1.0)[None, :]
        ref = JointMeasure.from_matrix(
            self.witness.input_labels, self.witness.output_labels, rev * z0[None, :]
        )
        return joint, ref

    def upper_stats(self) -> DivergenceStats:
        return divergence_stats(*self.upper_pair())


def degraded_witness_bsc(p_y: float, p_z: float) -> ConditionalKernel:
    """The BSC kernel turning a BSC(p_y) into a BSC(p_z)."""
    if not 0.0 < p_y < p_z < 0.5:
        raise MeasureError("need 0 < p_y < p_z < 1/2")
    return bsc_kernel((p_z - p_y) / (1.0 - 2.0 * p_y))


def wiretap_bsc_pair(p_y: float, p_z: float) -> WiretapPair:
    return WiretapPair(bsc_channel(p_y), bsc_channel(p_z), degraded_witness_bsc(p_y, p_z))


def wiretap_bsc_tables(p_y: float, p_z: float) -> dict[str, JointMeasure]:
    """The two 2x2 comparison tables for the degraded BSC wire-tap pair.

    ``P_YZ_2`` follows the source display verbatim, whose second row repeats
    the first and therefore does not sum to one; ``P_YZ_2_corrected`` is the
    consistent reverse-factorized table actually used by the expansions.
    """
    if not 0.0 < p_y < p_z < 0.5:
        raise MeasureError("need 0 < p_y < p_z < 1/2")
    p = (p_z - p_y) / (1.0 - 2.0 * p_y)
    labels = (0, 1)
    table1 = np.array(
        [[(1 - p_y) * (1 - p), (1 - p_y) * p], [p_y * p, p_y * (1 - p)]]
    )
    table2_verbatim = np.array(
        [[(1 - p_z) * (1 - p), p_z * p], [(1 - p_z) * (1 - p), p_z * p]]
    )
    table2_corrected = np.array(
        [[(1 - p_z) * (1 - p), p_z * p], [(1 - p_z) * p, p_z * (1 - p)]]
    )
    return {
        "P_YZ_1": JointMeasure(labels, labels, table1, "probability"),
        "P_YZ_2": JointMeasure.from_matrix(labels, labels, table2_verbatim),
        "P_YZ_2_corrected": JointMeasure.from_matrix(labels, labels, table2_corrected),
    }


def wiretap_bsc_expansions(p_y: float, p_z: float, eps: float, delta: float) -> dict[str, Expansion]:
    """Secure-rate expansions for the degraded BSC wire-tap pair."""
    return expand_wiretap(wiretap_bsc_pair(p_y, p_z), eps, delta)


# --- BPSK Gaussian wire-tap pair -------------------------------------------


@dataclass(frozen=True)
class BpskPair:
    """Binary antipodal signaling over Gaussian noise, eavesdropper noisier."""

    sigma_y2: float
    sigma_z2: float

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma_y2 < self.sigma_z2:
            raise MeasureError("need 0 < sigma_y2 < sigma_z2")


def _bpsk_llr(w: np.ndarray, sigma2: float) -> np.ndarray:
    """log density ratio of N(+1, sigma2) against the even +-1 mixture."""
    return math.log(2.0) - np.logaddexp(0.0, -2.0 * w / sigma2)


_GH_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gh_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GH_CACHE:
        u, w = np.polynomial.hermite.hermgauss(n)
        _GH_CACHE[n] = (u, w / math.sqrt(math.pi))
    return _GH_CACHE[n]


def _moment_stats(values: np.ndarray, weights: np.ndarray) -> DivergenceStats:
    d = float(np.dot(weights, values))
    c = values - d
    v = float(np.dot(weights, c * c))
    kappa = float(np.dot(weights, (-c) ** 3)) / v**1.5 if v > 0 else 0.0
    return DivergenceStats(d, max(v, 0.0), kappa, 0.0)


def bpsk_stats(sigma2: float, nodes: int = 160) -> DivergenceStats:
    """D, V, kappa of the BPSK channel-law pair by Gauss-Hermite quadrature.

    The integrand is analytic, so the quadrature converges spectrally; the
    span is 0 (continuous, non-lattice).
    """
    if sigma2 <= 0:
        raise MeasureError("variance must be positive")
    u, w = _gh_nodes(nodes)
    y = 1.0 + math.sqrt(2.0 * sigma2) * u
    return _moment_stats(_bpsk_llr(y, sigma2), w)


def _bpsk_upper_stats(pair: BpskPair, nodes: int = 96) -> DivergenceStats:
    """Stats of the degraded-pair reference divergence, 2-D tensor quadrature.

    Under input +1: y ~ N(1, sigma_y2) and z = y + N(0, sigma_z2 - sigma_y2);
    the log ratio of the joint against (reverse conditional x Z-law) splits
    as llr_Y(y) - llr_Z(z).
    """
    u, w = _gh_nodes(nodes)
    gap = pair.sigma_z2 - pair.sigma_y2
    y = 1.0 + math.sqrt(2.0 * pair.sigma_y2) * u
    z = y[:, None] + math.sqrt(2.0 * gap) * u[None, :]
    vals = _bpsk_llr(y, pair.sigma_y2)[:, None] - _bpsk_llr(z, pair.sigma_z2)
    return _moment_stats(vals.ravel(), (w[:, None] * w[None, :]).ravel())


def bpsk_expansions(
    pair: BpskPair, eps: float, delta: float, nodes: int = 160
) -> dict[str, Expansion]:
    """Wire-tap secure-rate expansions for the BPSK Gaussian pair."""
    sy = bpsk_stats(pair.sigma_y2, nodes)
    sz = bpsk_stats(pair.sigma_z2, nodes)
    if sy.v <= 0 or sz.v <= 0:
        raise SpectrumError("degenerate BPSK pair: V = 0")
    a1 = sy.d - sz.d
    lower = Expansion(
        a1,
        math.sqrt(sy.v) * gauss_inv(eps) + math.sqrt(sz.v) * gauss_inv(delta),
        -0.5,
        ddt_constant(sy, eps) + f_constant(3, sz, delta),
        direction="lower",
    )
    su = _bpsk_upper_stats(pair, max(64, nodes // 2))
    upper = Expansion(
        a1,
        math.sqrt(su.v) * gauss_inv(eps + delta),
        0.5,
        dh_constant(su, eps + delta),
        direction="upper",
    )
    return {"lower": lower, "upper": upper}


# --- secure communication from correlated random variables ------------------


def _triple_measures(triple: np.ndarray):
    triple = np.asarray(triple, dtype=float)
    if triple.ndim != 3:
        raise MeasureError("correlated-variable input must be a 3-D array")
    if np.any(triple < 0) or abs(triple.sum() - 1.0) > 1e-12:
        raise MeasureError("triple must be a probability array")
    return triple


def correlated_rv_expansions(triple, eps: float, delta: float) -> dict[str, Expansion]:
    """Secure-communication expansions for a joint source P over (X, Y, Z).

    Lower direction only needs the two pair marginals; the upper direction
    additionally requires the Markov chain X - Y - Z (checked to 1e-10) and
    uses the reverse-factorized reference P(y|z) P(x,z).
    """
    p = _triple_measures(triple)
    nx, ny, nz = p.shape
    xy = p.sum(axis=2)
    xz = p.sum(axis=1)
    j_xy = JointMeasure.from_matrix(range(nx), range(ny), xy)
    j_xz = JointMeasure.from_matrix(range(nx), [f"z{k}" for k in range(nz)], xz)
    sy = divergence_stats(j_xy, product_reference(marginal(j_xy, 1), j_xy.row_labels))
    sz = divergence_stats(j_xz, product_reference(marginal(j_xz, 1), j_xz.row_labels))
    if sy.v <= 0 or sz.v <= 0:
        raise SpectrumError("degenerate correlated-variable pair: V = 0")
    a1 = sy.d - sz.d
    lower = Expansion(
        a1,
        math.sqrt(sy.v) * gauss_inv(eps) + math.sqrt(sz.v) * gauss_inv(delta),
        -0.5,
        ddt_constant(sy, eps) + f_constant(3, sz, delta),
        direction="lower",
    )
    # Markov X - Y - Z: P(x,y,z) P(y) = P(x,y) P(y,z) cellwise
    yz = p.sum(axis=0)
    py = xy.sum(axis=0)
    lhs = p * py[None, :, None]
    rhs = xy[:, :, None] * yz[None, :, :]
    if np.max(np.abs(lhs - rhs)) > 1e-10:
        raise MeasureError("upper expansion requires the Markov chain X - Y - Z")
    pz = yz.sum(axis=0)
    y_given_z = yz / np.where(pz > 0, pz, 1.0)[None, :]
    ref = y_given_z[None, :, :] * xz[:, None, :]
    labels = [(i, j, k) for i in range(nx) for j in range(ny) for k in range(nz)]
    pm = DiscreteMeasure(tuple(labels), p.ravel(), "probability")
    qm = DiscreteMeasure.from_pairs(zip(labels, ref.ravel()))
    su = divergence_stats(pm, qm)
    upper = Expansion(
        a1,
        math.sqrt(su.v) * gauss_inv(eps + delta),
        0.5,
        dh_constant(su, eps + delta),
        direction="upper",
    )
    return {"lower": lower, "upper": upper}
