import math

import numpy as np
import pytest

from flbounds import (
    BpskPair,
    MeasureError,
    WiretapPair,
    bpsk_expansions,
    bpsk_stats,
    bsc_channel,
    bsc_kernel,
    channel_spectrum,
    correlated_rv_expansions,
    d_h_eps,
    degraded_witness_bsc,
    divergence_stats,
    wiretap_bsc_expansions,
    wiretap_bsc_pair,
    wiretap_bsc_tables,
)


def h2(p):
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def test_bsc_channel_first_order_is_capacity():
    p = 0.11
    st = divergence_stats(*bsc_channel(p).uniform_reference_pair())
    assert np.isclose(st.d, math.log(2) - h2(p), rtol=1e-12)
    # conditional_stats uses the entropy convention: d = -H(noise)
    assert np.isclose(bsc_channel(p).conditional_stats().d, -h2(p), rtol=1e-12)


def test_channel_spectrum_supports_exact_bounds():
    spec = channel_spectrum(bsc_channel(0.11), 100)
    v = d_h_eps(spec, 1e-3)
    st = divergence_stats(*bsc_channel(0.11).uniform_reference_pair())
    # exact meta-converse-style value sits near the first-order term
    assert abs(v - 100 * st.d) < 5 * math.sqrt(100 * st.v)


def test_degraded_witness_composes_exactly():
    p_y, p_z = 0.1, 0.2
    wit = degraded_witness_bsc(p_y, p_z)
    composed = bsc_kernel(p_y).matrix @ wit.matrix
    assert np.allclose(composed, bsc_kernel(p_z).matrix, atol=1e-14)


def test_witness_ordering_validated():
    with pytest.raises(MeasureError):
        degraded_witness_bsc(0.2, 0.1)
    with pytest.raises(MeasureError):
        WiretapPair(bsc_channel(0.2), bsc_channel(0.1), degraded_witness_bsc(0.1, 0.2))


def test_wiretap_tables_expose_inconsistent_display():
    t = wiretap_bsc_tables(0.1, 0.2)
    assert np.isclose(np.asarray(t["P_YZ_1"].weights).sum(), 1.0)
    assert np.isclose(np.asarray(t["P_YZ_2_corrected"].weights).sum(), 1.0)
    # the verbatim second table repeats its first row and is not a
    # probability table; keep it only as a record of the divergence
    w2 = np.asarray(t["P_YZ_2"].weights)
    assert np.allclose(w2[0], w2[1])
    assert not np.isclose(w2.sum(), 1.0)


def test_wiretap_upper_pair_matches_corrected_tables():
    t = wiretap_bsc_tables(0.1, 0.2)
    joint, ref = wiretap_bsc_pair(0.1, 0.2).upper_pair()
    assert np.allclose(np.asarray(joint.weights), np.asarray(t["P_YZ_1"].weights))
    assert np.allclose(np.asarray(ref.weights), np.asarray(t["P_YZ_2_corrected"].weights))


def test_wiretap_expansion_first_order():
    exp = wiretap_bsc_expansions(0.1, 0.2, 1e-3, 1e-3)
    a1 = h2(0.2) - h2(0.1)
    assert exp["lower"].a1 == exp["upper"].a1
    assert np.isclose(exp["lower"].a1, a1, rtol=1e-12)
    for n in (1000, 100000):
        assert exp["lower"].at(n) <= exp["upper"].at(n)


def test_bpsk_stats_quadrature_stability():
    for sigma2 in (1.0, 4.0, 16.0):
        a = bpsk_stats(sigma2, nodes=160)
        b = bpsk_stats(sigma2, nodes=320)
        assert abs(a.d - b.d) <= 1e-8 * abs(b.d)
        assert abs(a.v - b.v) <= 1e-8 * abs(b.v)
        assert abs(a.kappa - b.kappa) <= 1e-8 * max(1.0, abs(b.kappa))


def test_bpsk_mutual_information_decreasing_in_noise():
    d = [bpsk_stats(s2).d for s2 in (1.0, 4.0, 16.0)]
    assert d[0] > d[1] > d[2] > 0


def test_bpsk_expansion_orders_and_bracket():
    exp = bpsk_expansions(BpskPair(1.0, 4.0), 1e-3, 1e-3)
    assert exp["lower"].a1 == exp["upper"].a1
    assert exp["lower"].a3 == -0.5
    assert exp["upper"].a3 == 0.5
    for n in (1000, 100000):
        assert exp["lower"].at(n) <= exp["upper"].at(n)


def test_bpsk_requires_noisier_eavesdropper():
    with pytest.raises(MeasureError):
        BpskPair(4.0, 1.0)


def markov_triple(q1, q2):
    """X ~ Bern(1/2), Y = BSC(q1)(X), Z = BSC(q2)(Y)."""
    p = np.zeros((2, 2, 2))
    for x in range(2):
        for y in range(2):
            for z in range(2):
                p[x, y, z] = (
                    0.5
                    * (q1 if x != y else 1 - q1)
                    * (q2 if y != z else 1 - q2)
                )
    return p


def test_correlated_rv_expansions_markov():
    exp = correlated_rv_expansions(markov_triple(0.1, 0.15), 1e-3, 1e-3)
    assert exp["lower"].a1 == exp["upper"].a1
    # first order: H(X|Z) - H(X|Y) for the cascade
    q_xz = 0.1 * 0.85 + 0.9 * 0.15
    assert np.isclose(exp["lower"].a1, h2(q_xz) - h2(0.1), rtol=1e-12)


def test_correlated_rv_rejects_non_markov():
    p = markov_triple(0.1, 0.15)
    p[0, 0, 0] += 0.01
    p[1, 1, 1] -= 0.01
    with pytest.raises(MeasureError):
        correlated_rv_expansions(p, 1e-3, 1e-3)


def test_wiretap_upper_stats_positive_divergence():
    su = wiretap_bsc_pair(0.1, 0.2).upper_stats()
    assert su.d > 0
    assert su.v > 0
