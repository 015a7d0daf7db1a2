"""Exact log-likelihood-ratio spectra.

The central object is the exact distribution of t = log(P(x)/Q(x)) under P,
together with the induced masses under Q. Every exact bound in this package
is a functional of that distribution. Key numeric identity: the Q-mass of a
spectrum point always equals p_mass * exp(-t), so the Q column is kept in log
form and never materializes large counting-measure masses at high powers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .measures import DiscreteMeasure, JointMeasure, MeasureError

MERGE_TOL = 1e-10
POINT_CAP = 2_000_000
CONSISTENCY_RTOL = 1e-9

MeasureLike = Union[DiscreteMeasure, JointMeasure]


class SpectrumError(ValueError):
    """Invalid spectrum construction or query."""


@dataclass(frozen=True)
class LatticeInfo:
    """Lattice structure of a support set: span 0 means non-lattice.

    When span > 0, every difference of support points is an integer
    multiple of span (within detection tolerance); offset is the smallest
    support point.
    """

    span: float
    offset: float


@dataclass(frozen=True)
class LlrSpectrum:
    """Distribution of t = log(P/Q) with P-masses and log Q-masses.

    ``log_q_null`` is the log of the Q-mass sitting outside supp(P)
    (-inf when Q is absolutely continuous w.r.t. P). ``n`` records which
    i.i.d. power this spectrum represents; ``lattice`` is detected on the
    order-1 support and preserved by convolution.
    """

    t: np.ndarray
    p: np.ndarray
    log_q: np.ndarray
    log_q_null: float
    n: int
    lattice: LatticeInfo

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        p = np.asarray(self.p, dtype=float)
        log_q = np.asarray(self.log_q, dtype=float)
        if not (t.shape == p.shape == log_q.shape) or t.ndim != 1 or t.size == 0:
            raise SpectrumError("spectrum arrays must be equal-length 1-D and nonempty")
        finite = np.isfinite(t)
        if np.any(np.diff(t[finite]) <= 0):
            raise SpectrumError("t values must be strictly increasing")
        if np.any(p < 0):
            raise SpectrumError("negative p mass")
        # Change-of-measure consistency: q = p * exp(-t) pointwise. Points
        # whose p mass underflowed carry log_q = -inf and are exempt; their
        # contribution is below any tolerance used downstream.
        ok = (p > 0) & finite & np.isfinite(log_q)
        if np.any(np.abs(log_q[ok] - (np.log(p[ok]) - t[ok])) > 1e-6):
            raise SpectrumError("q column inconsistent with p * exp(-t)")
        for arr in (t, p, log_q):
            arr.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "log_q", log_q)

    @property
    def q(self) -> np.ndarray:
        """Linear Q masses; may overflow to inf for large powers of a counting measure."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_q)

    @property
    def q_null_mass(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_q_null))

    @property
    def p_total(self) -> float:
        return float(self.p.sum())

    def has_infinite_point(self) -> bool:
        return bool(np.isinf(self.t[-1]))

    # -- exact partial sums ------------------------------------------------

    def p_leq(self, m: float) -> float:
        """P{t <= m}."""
        k = np.searchsorted(self.t, m, side="right")
        return float(self.p[:k].sum())

    def p_geq(self, m: float) -> float:
        """P{t >= m}."""
        k = np.searchsorted(self.t, m, side="left")
        return float(self.p[k:].sum())

    def log_q_leq(self, m: float) -> float:
        """log Q{t <= m} over supp(P); excludes the off-support null mass."""
        k = np.searchsorted(self.t, m, side="right")
        return _lse(self.log_q[:k])

    def log_q_geq(self, m: float) -> float:
        k = np.searchsorted(self.t, m, side="left")
        return _lse(self.log_q[k:])

    def log_q_gt(self, m: float) -> float:
        k = np.searchsorted(self.t, m, side="right")
        return _lse(self.log_q[k:])

    def cdf_leq(self, m: float) -> tuple[float, float]:
        """(P{t <= m}, Q{t <= m}); the Q part is linear and may overflow."""
        with np.errstate(over="ignore"):
            return self.p_leq(m), float(np.exp(self.log_q_leq(m)))

    def tail_geq(self, m: float) -> tuple[float, float]:
        """(P{t >= m}, Q{t >= m}); the Q part is linear and may overflow."""
        with np.errstate(over="ignore"):
            return self.p_geq(m), float(np.exp(self.log_q_geq(m)))


def _lse(values: np.ndarray) -> float:
    if values.size == 0:
        return float("-inf")
    return float(logsumexp(values))


def _as_atoms(m: MeasureLike) -> DiscreteMeasure:
    if isinstance(m, JointMeasure):
        return m.flattened()
    return m


def build_spectrum(p: MeasureLike, q: MeasureLike, allow_infinite: bool = False) -> LlrSpectrum:
    """Order-1 spectrum of the pair (p, q) over a shared label set.

    Atoms where p > 0 but q = 0 are an absolute-continuity violation and
    rejected unless ``allow_infinite`` is set, in which case they form a
    single sentinel point at t = +inf (used only by the Neyman-Pearson
    routine, which accepts such atoms at zero type-II cost).
    """
    pm = _as_atoms(p)
    qm = _as_atoms(q)
    if pm.kind not in ("probability", "subnormalized"):
        raise SpectrumError("first measure must be probability or subnormalized")
    if set(pm.labels) != set(qm.labels):
        raise SpectrumError("measures must share one label set")
    qdict = qm.as_dict()
    pw = pm.weights
    qw = np.array([qdict[l] for l in pm.labels])

    on = pw > 0
    viol = on & (qw <= 0)
    inf_mass = 0.0
    if np.any(viol):
        if not allow_infinite:
            raise SpectrumError("absolute-continuity violation: p > 0 where q = 0")
        inf_mass = float(pw[viol].sum())
        on = on & ~viol

    off_q = qw[pw <= 0]
    off_q = off_q[off_q > 0]
    log_q_null = _lse(np.log(off_q)) if off_q.size else float("-inf")
    t_raw = np.log(pw[on]) - np.log(qw[on])
    p_raw = pw[on]
    lq_raw = np.log(qw[on])

    order = np.argsort(t_raw, kind="stable")
    t_raw, p_raw, lq_raw = t_raw[order], p_raw[order], lq_raw[order]
    t_u, start = np.unique(t_raw, return_index=True)
    p_u = np.add.reduceat(p_raw, start)
    lq_u = np.array([_lse(lq_raw[s:e]) for s, e in zip(start, np.append(start[1:], len(lq_raw)))])

    if inf_mass > 0:
        t_u = np.append(t_u, np.inf)
        p_u = np.append(p_u, inf_mass)
        lq_u = np.append(lq_u, -np.inf)

    lat = detect_lattice(t_u[np.isfinite(t_u)])
    return LlrSpectrum(t_u, p_u, lq_u, log_q_null, 1, lat)


def detect_lattice(support: np.ndarray, tol: float | None = None) -> LatticeInfo:
    """Real gcd of support differences via Euclid with a scale floor.

    Bounded to 64 iterations. Incommensurable supports (e.g. {0, 1, sqrt 2})
    drive the Euclid remainders toward zero without stabilizing, so any
    detected span below 1e-6 of the support range is reported as 0.
    """
    support = np.sort(np.asarray(support, dtype=float))
    offset = float(support[0])
    if support.size <= 1:
        return LatticeInfo(0.0, offset)
    rng = float(support[-1] - support[0])
    if tol is None:
        tol = 1e-9 * rng
    diffs = np.diff(support)
    g = float(diffs[0])
    for d in diffs[1:]:
        a, b = max(g, float(d)), min(g, float(d))
        for _ in range(64):
            if b <= tol:
                break
            a, b = b, a % b
        g = a
        if g <= tol:
            return LatticeInfo(0.0, offset)
    if g < 1e-6 * rng:
        return LatticeInfo(0.0, offset)
    # verify: every difference an integer multiple of g
    mults = (support - offset) / g
    if np.any(np.abs(mults - np.round(mults)) * g > max(tol, 1e-9 * rng)):
        return LatticeInfo(0.0, offset)
    return LatticeInfo(g, offset)


def _merge_close(t: np.ndarray, p: np.ndarray, merge_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Merge consecutive sorted points within merge_tol; t is mass-weighted."""
    if t.size <= 1:
        return t, p
    new_group = np.empty(t.size, dtype=bool)
    new_group[0] = True
    np.greater(np.diff(t), merge_tol, out=new_group[1:])
    idx = np.cumsum(new_group) - 1
    k = idx[-1] + 1
    pm = np.zeros(k)
    tm = np.zeros(k)
    np.add.at(pm, idx, p)
    np.add.at(tm, idx, p * t)
    with np.errstate(invalid="ignore"):
        tw = np.where(pm > 0, tm / np.where(pm > 0, pm, 1.0), 0.0)
    # zero-mass groups keep their raw first t so ordering survives
    firsts = np.zeros(k)
    firsts[idx[::-1]] = t[::-1]
    tw = np.where(pm > 0, tw, firsts)
    return tw, pm


def _conv_general(t1, p1, t2, p2, merge_tol):
    # Accumulate the outer sum in row blocks so peak memory stays bounded
    # even for supports near the point cap; each block is merged before the
    # cross-block merge so duplicates collapse early.
    block = max(1, int(4_000_000 // max(t2.size, 1)))
    t = np.empty(0)
    p = np.empty(0)
    for lo in range(0, t1.size, block):
        hi = min(lo + block, t1.size)
        tsum = (t1[lo:hi, None] + t2[None, :]).ravel()
        psum = (p1[lo:hi, None] * p2[None, :]).ravel()
        order = np.argsort(tsum, kind="stable")
        bt, bp = _merge_close(tsum[order], psum[order], merge_tol)
        tcat = np.concatenate([t, bt])
        pcat = np.concatenate([p, bp])
        order = np.argsort(tcat, kind="stable")
        t, p = _merge_close(tcat[order], pcat[order], merge_tol)
        if t.size > POINT_CAP:
            raise SpectrumError(
                f"convolution support exceeds {POINT_CAP} points; use a coarser merge_tol"
            )
    if t.size > POINT_CAP:
        raise SpectrumError(
            f"convolution support exceeds {POINT_CAP} points; use a coarser merge_tol"
        )
    return t, p


def _to_grid(t, p, span, offset):
    idx = np.rint((t - offset) / span).astype(np.int64)
    vec = np.zeros(int(idx.max()) + 1)
    np.add.at(vec, idx, p)
    return vec


def convolve_iid(s: LlrSpectrum, n: int, merge_tol: float = MERGE_TOL) -> LlrSpectrum:
    """Exact spectrum of the n-fold i.i.d. sum, by binary exponentiation.

    Lattice spectra are snapped to their grid so supports stay at
    (n * (points - 1) + 1) entries and the pairwise step is a dense
    ``np.convolve``; general spectra use outer-sum merging.
    """
    if n < 1 or int(n) != n:
        raise SpectrumError("n must be a positive integer")
    if s.n != 1:
        raise SpectrumError("convolve_iid expects an order-1 spectrum")
    if s.has_infinite_point():
        raise SpectrumError("cannot convolve a spectrum with a +inf sentinel point")
    n = int(n)
    if n == 1:
        return s

    span, offset = s.lattice.span, s.lattice.offset
    if span > 0 and s.t.size > 1:
        base = _to_grid(s.t, s.p, span, offset)
        if (base.size - 1) * n + 1 > POINT_CAP:
            raise SpectrumError("lattice convolution exceeds the point cap")
        acc = None
        power = base
        shift = 0
        k = n
        while k:
            if k & 1:
                acc = power if acc is None else np.convolve(acc, power)
            k >>= 1
            if k:
                power = np.convolve(power, power)
        t_out = n * offset + span * np.arange(acc.size)
        p_out = acc
    else:
        acc_t, acc_p = None, None
        pw_t, pw_p = s.t.copy(), s.p.copy()
        k = n
        while k:
            if k & 1:
                if acc_t is None:
                    acc_t, acc_p = pw_t, pw_p
                else:
                    acc_t, acc_p = _conv_general(acc_t, acc_p, pw_t, pw_p, merge_tol)
            k >>= 1
            if k:
                pw_t, pw_p = _conv_general(pw_t, pw_p, pw_t, pw_p, merge_tol)
        t_out, p_out = acc_t, acc_p

    keep = p_out > 0
    t_out, p_out = t_out[keep], p_out[keep]
    with np.errstate(divide="ignore"):
        log_q_out = np.log(p_out) - t_out

    log_q_on1 = _lse(s.log_q)
    log_q_tot1 = np.logaddexp(log_q_on1, s.log_q_null)
    if np.isneginf(s.log_q_null):
        log_q_null_n = float("-inf")
    else:
        a = n * log_q_tot1
        b = n * log_q_on1
        log_q_null_n = float(a + np.log1p(-np.exp(b - a))) if b < a else float("-inf")

    lat = LatticeInfo(span, n * offset) if span > 0 else LatticeInfo(0.0, float(t_out[0]))
    return LlrSpectrum(t_out, p_out, log_q_out, log_q_null_n, n, lat)


def lattice_span(s: LlrSpectrum, tol: float | None = None) -> LatticeInfo:
    """Lattice info of an order-1 spectrum's support under P."""
    if s.n != 1:
        raise SpectrumError("lattice_span expects an order-1 spectrum")
    return detect_lattice(s.t[np.isfinite(s.t) & (s.p > 0)], tol)


def dump_csv(s: LlrSpectrum, stream) -> None:
    """Debug dump: header comment with n/span/q_null, then t,p_mass,q_mass rows."""
    stream.write(f"# n={s.n} span={s.lattice.span:.12g} q_null_mass={s.q_null_mass:.12g}\n")
    stream.write("t,p_mass,q_mass\n")
    q = s.q
    for i in range(s.t.size):
        stream.write(f"{s.t[i]:.12g},{s.p[i]:.12g},{q[i]:.12g}\n")


class CgfView:
    """Cumulant generating function of a weighted point mass set.

    tau(s) = log sum_i w_i exp(s x_i), evaluated with max-shift
    stabilization; derivatives come from the tilted distribution. eta is
    the inverse of tau' (well defined by strict convexity on >= 2 points).
    """

    def __init__(self, x: np.ndarray, w: np.ndarray):
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        keep = w > 0
        x, w = x[keep], w[keep]
        if x.size == 0:
            raise SpectrumError("cgf needs at least one positive-mass point")
        if not np.all(np.isfinite(x)):
            raise SpectrumError("cgf points must be finite")
        self.x = x
        self.log_w = np.log(w)

    @classmethod
    def from_spectrum(cls, s: LlrSpectrum) -> "CgfView":
        return cls(s.t, s.p)

    def tau(self, s: float) -> float:
        return float(logsumexp(self.log_w + s * self.x))

    def derivs(self, s: float) -> tuple[float, float, float, float]:
        """(tau, tau', tau'', tau''') at s."""
        z = self.log_w + s * self.x
        zmax = z.max()
        g = np.exp(z - zmax)
        total = g.sum()
        g = g / total
        m1 = float(np.dot(g, self.x))
        c = self.x - m1
        m2 = float(np.dot(g, c * c))
        m3 = float(np.dot(g, c * c * c))
        return float(zmax + np.log(total)), m1, m2, m3

    def slope_range(self) -> tuple[float, float]:
        return float(self.x.min()), float(self.x.max())

    def eta(self, r: float, tol_scale: float = 1e-10) -> float:
        """Solve tau'(s) = r; safeguarded Newton with bisection fallback."""
        lo_slope, hi_slope = self.slope_range()
        if not (lo_slope < r < hi_slope):
            raise SpectrumError(f"slope {r!r} outside achievable range ({lo_slope}, {hi_slope})")
        # bracket by doubling outward from 0
        lo, hi = 0.0, 0.0
        step = 1.0
        while self.derivs(lo)[1] > r:
            lo -= step
            step *= 2
        step = 1.0
        while self.derivs(hi)[1] < r:
            hi += step
            step *= 2
        s = 0.5 * (lo + hi)
        tol = tol_scale * (1.0 + abs(r))
        for _ in range(200):
            _, d1, d2, _ = self.derivs(s)
            err = d1 - r
            if abs(err) <= tol:
                return s
            if err > 0:
                hi = s
            else:
                lo = s
            if d2 > 0:
                s_new = s - err / d2
            else:
                s_new = 0.5 * (lo + hi)
            if not (lo < s_new < hi):
                s_new = 0.5 * (lo + hi)
            s = s_new
        if abs(self.derivs(s)[1] - r) <= tol:
            return s
        raise SpectrumError("eta solver failed to converge")
