import math

import numpy as np
import pytest

from flbounds import (
    DiscreteMeasure,
    JointMeasure,
    cond_entropies,
    conditional_stats,
    counting_measure,
    ddt_constant,
    dh_constant,
    divergence_stats,
    f_constant,
    gauss_cdf,
    gauss_inv,
    hmin_constant,
    marginal,
    v_of,
)


def h2(p):
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def bernoulli(p):
    return DiscreteMeasure((0, 1), np.array([1 - p, p]), "probability")


def test_divergence_stats_hand_formulas():
    a, b = 0.11, 0.2
    st = divergence_stats(bernoulli(a), bernoulli(b))
    t0 = math.log((1 - a) / (1 - b))
    t1 = math.log(a / b)
    d = (1 - a) * t0 + a * t1
    v = (1 - a) * (t0 - d) ** 2 + a * (t1 - d) ** 2
    # kappa is the skewness of the negated log ratio
    kappa = ((1 - a) * (d - t0) ** 3 + a * (d - t1) ** 3) / v**1.5
    assert np.isclose(st.d, d, rtol=1e-14)
    assert np.isclose(st.v, v, rtol=1e-14)
    assert np.isclose(st.kappa, kappa, rtol=1e-12)
    assert np.isclose(st.span, t0 - t1, rtol=1e-12)


def test_entropy_from_counting_reference():
    q = 0.11
    st = divergence_stats(bernoulli(q), counting_measure((0, 1)))
    assert np.isclose(-st.d, h2(q), rtol=1e-14)


def test_cond_entropies_bsc_leakage():
    q = 0.11
    w = 0.5 * np.array([[1 - q, q], [q, 1 - q]])
    j = JointMeasure.from_matrix((0, 1), (0, 1), w)
    st = conditional_stats(j, marginal(j, 1))
    assert np.isclose(-st.d, h2(q), rtol=1e-12)
    h, h_min, h_2 = cond_entropies(j, marginal(j, 1))
    assert np.isclose(h, h2(q), rtol=1e-12)
    assert np.isclose(h_min, -math.log(1 - q), rtol=1e-12)
    assert np.isclose(h_2, -math.log((1 - q) ** 2 + q**2), rtol=1e-12)
    assert h_min <= h_2 <= h


def test_v_of_limits():
    assert v_of(0.0) == 0.0
    assert np.isclose(v_of(1e-9), 0.0, atol=1e-8)
    # two-argument form tends to -log(s) at span 0
    assert np.isclose(v_of(0.0, 2.0), -math.log(2.0))
    assert np.isclose(v_of(1e-9, 2.0), -math.log(2.0), atol=1e-8)
    assert np.isclose(v_of(0.7), math.log(0.7 / -math.expm1(-0.7)))
    with pytest.raises(ValueError):
        v_of(-1.0)


def test_gauss_inverse_roundtrip():
    for eps in (1e-8, 1e-3, 0.3, 0.97):
        assert abs(gauss_cdf(gauss_inv(eps)) - eps) <= 1e-12


def test_f_constant_validation():
    st = divergence_stats(bernoulli(0.11), bernoulli(0.2))
    with pytest.raises(ValueError):
        f_constant(0, st, 1e-3)
    with pytest.raises(ValueError):
        f_constant(1, st, 0.0)


def test_f_constants_continuous_in_eps():
    st = divergence_stats(bernoulli(0.11), bernoulli(0.2))
    for i in range(1, 6):
        a = f_constant(i, st, 1e-3)
        b = f_constant(i, st, 1e-3 * (1 + 1e-9))
        assert abs(a - b) < 1e-6


def _with_span(st, span):
    return type(st)(d=st.d, v=st.v, kappa=st.kappa, span=span)


def test_expansion_constants_reduce_at_span_zero():
    st = _with_span(divergence_stats(bernoulli(0.11), bernoulli(0.2)), 0.0)
    eps = 1e-3
    b = gauss_inv(eps)
    skew = math.sqrt(st.v) * st.kappa * (b * b - 1.0) / 6.0
    # non-lattice: hmin constant is exactly F1; the testing-direction
    # constants differ from F4/F5 only by the orientation of the skew term
    # (and by F5's log-variance term, which cancels exactly)
    assert np.isclose(hmin_constant(st, eps), f_constant(1, st, eps), rtol=1e-14)
    assert np.isclose(dh_constant(st, eps), f_constant(4, st, eps) - 2 * skew, rtol=1e-12)
    assert np.isclose(
        ddt_constant(st, eps),
        f_constant(5, st, eps) - 2 * skew + 0.5 * math.log(st.v),
        rtol=1e-12,
    )


def test_expansion_constants_lattice_corrections():
    st = divergence_stats(bernoulli(0.11), bernoulli(0.2))
    st0 = _with_span(st, 0.0)
    eps = 1e-3
    d = st.span
    assert np.isclose(
        hmin_constant(st, eps) - hmin_constant(st0, eps),
        math.exp(v_of(d)) - 1.0 - 0.5 * d,
        rtol=1e-12,
    )
    assert np.isclose(
        dh_constant(st, eps) - dh_constant(st0, eps), 0.5 * d - v_of(d), rtol=1e-12
    )
    assert np.isclose(
        ddt_constant(st, eps) - ddt_constant(st0, eps), 0.5 * d - v_of(d), rtol=1e-12
    )
