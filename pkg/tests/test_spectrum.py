import io
import itertools
import math

import numpy as np
import pytest
from scipy import stats as sps

from flbounds import (
    CgfView,
    DiscreteMeasure,
    SpectrumError,
    build_spectrum,
    convolve_iid,
    counting_measure,
    detect_lattice,
    divergence_stats,
    dump_csv,
    lattice_span,
)
from flbounds.spectrum import dump_csv


def bernoulli_vs_counting(q):
    p = DiscreteMeasure((0, 1), np.array([1 - q, q]), "probability")
    return build_spectrum(p, counting_measure((0, 1)))


def bernoulli_pair(a, b):
    p = DiscreteMeasure((0, 1), np.array([1 - a, a]), "probability")
    q = DiscreteMeasure((0, 1), np.array([1 - b, b]), "probability")
    return build_spectrum(p, q)


def test_binomial_oracle_masses():
    q = 0.11
    s = convolve_iid(bernoulli_vs_counting(q), 64)
    # atoms of the 64-fold sum are indexed by the number of ones
    assert s.t.size == 65
    expected = sps.binom.pmf(np.arange(65), 64, q)
    # t ascending corresponds to ascending log((q)^k (1-q)^(n-k)) ordering
    got = np.sort(s.p)
    assert np.allclose(np.sort(expected), got, rtol=1e-12, atol=0)
    assert np.isclose(s.p.sum(), 1.0, rtol=1e-12)


def test_lattice_bookkeeping_under_convolution():
    base = bernoulli_pair(0.11, 0.2)
    info = lattice_span(base)
    s64 = convolve_iid(base, 64)
    assert np.isclose(s64.lattice.span, info.span, rtol=1e-12)
    assert np.isclose(s64.lattice.offset, 64 * info.offset, rtol=1e-12)
    # every support point sits on the lattice grid
    k = (s64.t - s64.lattice.offset) / info.span
    assert np.allclose(k, np.rint(k), atol=1e-8)


def test_convolution_statistics_are_additive():
    p = DiscreteMeasure((0, 1), np.array([0.89, 0.11]), "probability")
    q = DiscreteMeasure((0, 1), np.array([0.8, 0.2]), "probability")
    st = divergence_stats(p, q)
    s = build_spectrum(p, q)
    for n in (7, 32):
        sn = convolve_iid(s, n)
        assert np.isclose(float(np.dot(sn.p, sn.t)), n * st.d, rtol=1e-9)
        mean = float(np.dot(sn.p, sn.t))
        var = float(np.dot(sn.p, (sn.t - mean) ** 2))
        assert np.isclose(var, n * st.v, rtol=1e-9)


def test_small_n_matches_sequence_enumeration():
    pw = np.array([0.6, 0.3, 0.1])
    qw = np.array([0.2, 0.5, 0.3])
    p = DiscreteMeasure((0, 1, 2), pw, "probability")
    q = DiscreteMeasure((0, 1, 2), qw, "probability")
    s = convolve_iid(build_spectrum(p, q), 3)
    atoms = {}
    for seq in itertools.product(range(3), repeat=3):
        t = sum(math.log(pw[i] / qw[i]) for i in seq)
        mass = np.prod([pw[i] for i in seq])
        key = round(t, 9)
        atoms[key] = atoms.get(key, 0.0) + mass
    assert s.t.size == len(atoms)
    for t, mass in zip(s.t, s.p):
        assert np.isclose(atoms[round(float(t), 9)], float(mass), rtol=1e-12)


def test_q_side_mass_is_consistent():
    s = convolve_iid(bernoulli_pair(0.3, 0.6), 9)
    q_mass = float(np.exp(s.log_q).sum())
    assert np.isclose(q_mass, 1.0, rtol=1e-12)
    assert s.log_q_null == -math.inf


def test_non_lattice_general_convolution():
    t = np.array([0.1, 1.1, 0.1 + math.sqrt(2.0)])
    pw = np.array([0.5, 0.3, 0.2])
    qw = pw * np.exp(-t)
    p = DiscreteMeasure((0, 1, 2), pw, "probability")
    q = DiscreteMeasure((0, 1, 2), qw / qw.sum(), "probability")
    s = build_spectrum(p, q)
    assert s.lattice.span == 0.0
    sn = convolve_iid(s, 12)
    assert np.isclose(sn.p.sum(), 1.0, rtol=1e-12)
    # pairwise-distinct sums: support grows like the number of multisets
    assert sn.t.size == math.comb(12 + 2, 2)


def test_detect_lattice_basic():
    info = detect_lattice(np.array([0.5, 1.25, 2.0]))
    assert np.isclose(info.span, 0.75)
    assert np.isclose(info.offset, 0.5)
    assert detect_lattice(np.array([0.0, 1.0, math.sqrt(2.0)])).span == 0.0


def test_cgf_derivatives_match_direct_moments():
    s = bernoulli_pair(0.11, 0.2)
    cgf = CgfView.from_spectrum(s)
    for tilt in (0.3, 1.0, 2.5):
        w = s.p * np.exp(tilt * s.t)
        z = w.sum()
        tau = math.log(z)
        w = w / z
        m1 = float(np.dot(w, s.t))
        m2 = float(np.dot(w, (s.t - m1) ** 2))
        got = cgf.derivs(tilt)
        assert np.isclose(got[0], tau, rtol=1e-12)
        assert np.isclose(got[1], m1, rtol=1e-12)
        assert np.isclose(got[2], m2, rtol=1e-12)


def test_cgf_eta_inverts_slope():
    cgf = CgfView.from_spectrum(bernoulli_pair(0.11, 0.2))
    for tilt in (0.2, 1.0, 3.0):
        r = cgf.derivs(tilt)[1]
        assert np.isclose(cgf.eta(r), tilt, rtol=1e-9)


def test_convolve_rejects_bad_n():
    s = bernoulli_pair(0.3, 0.6)
    with pytest.raises(SpectrumError):
        convolve_iid(s, 0)
    with pytest.raises(SpectrumError):
        convolve_iid(convolve_iid(s, 2), 2)


def test_dump_csv_has_header_and_rows():
    s = bernoulli_pair(0.3, 0.6)
    buf = io.StringIO()
    dump_csv(s, buf)
    lines = buf.getvalue().strip().splitlines()
    # comment line, header, one row per support point
    assert len(lines) == 2 + s.t.size
    assert lines[1] == "t,p_mass,q_mass"
