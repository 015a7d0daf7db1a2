"""Acceptance gate: the eight package-level criteria.

Each test prints a single PASS/FAIL line (bypassing capture) so the
criterion outcomes are visible in any test run.
"""

import math
import time

import numpy as np
import pytest

from flbounds import (
    bpsk_stats,
    wiretap_bsc_expansions,
)
from flbounds.cli import (
    _check_bahadur_rao,
    _check_chain,
    _check_edgeworth,
    _check_enumeration,
    _check_expansion_convergence,
    cmd_figure,
)


def report(capsys, name, ok, detail):
    with capsys.disabled():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")


def test_criterion_1_oracle_equivalence(capsys):
    start = time.monotonic()
    ok, detail = _check_enumeration()
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 10.0
    report(capsys, "criterion-1 oracle-equivalence", ok, f"{detail} ({elapsed:.1f}s)")
    assert ok


def test_criterion_2_chain_inequalities(capsys):
    ok, detail = _check_chain()
    report(capsys, "criterion-2 chain-inequalities", ok, detail)
    assert ok


def test_criterion_3_edgeworth_rate(capsys):
    start = time.monotonic()
    ok, detail = _check_edgeworth()
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 5.0
    report(capsys, "criterion-3 edgeworth-rate", ok, f"{detail} ({elapsed:.1f}s)")
    assert ok


def test_criterion_4_strong_large_deviation(capsys):
    start = time.monotonic()
    ok, detail = _check_bahadur_rao()
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 5.0
    report(capsys, "criterion-4 strong-large-deviation", ok, f"{detail} ({elapsed:.1f}s)")
    assert ok


def test_criterion_5_theorem_convergence(capsys):
    start = time.monotonic()
    ok, detail = _check_expansion_convergence(full=True)
    elapsed = time.monotonic() - start
    ok = ok and elapsed < 120.0
    report(capsys, "criterion-5 theorem-convergence", ok, f"{detail} ({elapsed:.1f}s)")
    assert ok


def test_criterion_6_figure_reproduction(capsys):
    problems = []
    rows = [r.split(",") for r in cmd_figure("srng-rate-vs-n", bits=False)]
    header, data = rows[0], rows[1:]
    idx = {name: k for k, name in enumerate(header)}
    for row in data:
        n = float(row[idx["n"]])
        if n < 3000:
            continue
        for new in ("hmin_eps_rate", "ell_2_rate", "ell_min_rate"):
            for old in ("w1_lower_rate", "w2_lower_rate", "w3_lower_rate"):
                if float(row[idx[new]]) < float(row[idx[old]]) - 1e-12:
                    problems.append(f"n={n:g}: {new} < {old}")
    for name in ("srng-rate-vs-eps-3000", "srng-rate-vs-eps-100000"):
        out = cmd_figure(name, bits=False)
        if len(out) != 16:  # header + 15 epsilon grid points
            problems.append(f"{name}: wrong row count")
    wrows = [r.split(",") for r in cmd_figure("wiretap-bsc", bits=False)]
    for row in wrows[1:]:
        if float(row[1]) > float(row[2]) + 1e-12:
            problems.append(f"wiretap lower > upper at n={row[0]}")
    exp = wiretap_bsc_expansions(0.1, 0.2, 1e-3, 1e-3)

    def h2(p):
        return -p * math.log(p) - (1 - p) * math.log(1 - p)

    if abs(exp["lower"].a1 - (h2(0.2) - h2(0.1))) > 1e-12:
        problems.append("wiretap first-order coefficient mismatch")
    ok = not problems
    report(
        capsys,
        "criterion-6 figure-reproduction",
        ok,
        "all qualitative figure claims hold" if ok else "; ".join(problems),
    )
    assert ok, problems


def test_criterion_7_matched_first_order(capsys):
    import numpy as np

    from flbounds import (
        BpskPair,
        JointMeasure,
        bpsk_expansions,
        bsc_channel,
        correlated_rv_expansions,
        expand_channel,
        expand_source_side,
    )

    q = 0.11
    j = JointMeasure.from_matrix((0, 1), (0, 1), 0.5 * np.array([[1 - q, q], [q, 1 - q]]))
    triple = np.zeros((2, 2, 2))
    for x in range(2):
        for y in range(2):
            for z in range(2):
                triple[x, y, z] = (
                    0.5 * (0.1 if x != y else 0.9) * (0.15 if y != z else 0.85)
                )
    cases = {
        "source-side": expand_source_side(j, 1e-3),
        "channel": expand_channel(bsc_channel(q), 1e-3),
        "wiretap-bsc": wiretap_bsc_expansions(0.1, 0.2, 1e-3, 1e-3),
        "bpsk": bpsk_expansions(BpskPair(1.0, 4.0), 1e-3, 1e-3),
        "correlated-rv": correlated_rv_expansions(triple, 1e-3, 1e-3),
    }
    bad = [name for name, e in cases.items() if e["lower"].a1 != e["upper"].a1]
    ok = not bad
    report(
        capsys,
        "criterion-7 matched-first-order",
        ok,
        "a1(lower) == a1(upper) bit-identical for all task adapters"
        if ok
        else f"mismatch in {bad}",
    )
    assert ok, bad


def test_criterion_8_bpsk_self_consistency(capsys):
    problems = []
    d_values = []
    for sigma2 in (1.0, 4.0, 16.0):
        a = bpsk_stats(sigma2, nodes=160)
        b = bpsk_stats(sigma2, nodes=320)
        for field in ("d", "v", "kappa"):
            x, y = getattr(a, field), getattr(b, field)
            if abs(x - y) > 1e-8 * max(1.0, abs(y)):
                problems.append(f"sigma2={sigma2}: {field} unstable under node doubling")
        d_values.append(a.d)
    if not (d_values[0] > d_values[1] > d_values[2]):
        problems.append("D(sigma2) not strictly decreasing")
    ok = not problems
    report(
        capsys,
        "criterion-8 bpsk-self-consistency",
        ok,
        "quadrature stable to 1e-8 and D strictly decreasing" if ok else "; ".join(problems),
    )
    assert ok, problems
