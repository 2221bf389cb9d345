"""Acceptance gates, one test per criterion, at their stated tolerances.

Each test prints a criterion line (run pytest -s to see them all inline;
the verify CLI prints the same table).  The measurements come from the
session-scoped verification bundle so the reference runs execute once.
"""

import math

import numpy as np
import pytest


def _take(rows, cid_prefix):
    sub = [r for r in rows if r.cid.startswith(cid_prefix)]
    assert sub, f"no verification rows for criterion {cid_prefix}"
    for r in sub:
        status = "PASS" if r.passed else "FAIL"
        print(f"[criterion {r.cid}] {r.name}: {r.measured} "
              f"(bound {r.bound}) -> {status}")
    return sub


def test_criterion_1_reaction_oracles(verification):
    rows, bundle = verification
    sub = _take(rows, "1")
    assert bundle["reaction_worst_rel"] <= 5e-3
    assert all(r.passed for r in sub)


def test_criterion_2_dirichlet_rate(verification):
    rows, bundle = verification
    sub = _take(rows, "2")
    runs = bundle["runs"]
    for label in ("d200", "d400"):
        rate = runs[label][1].data["rate"]
        assert 0.4 <= rate["slope"] <= 0.6, label
        assert math.isfinite(rate["log_c_envelope"])
    b200 = runs["d200"][1].data["rate"]["slope"]
    b400 = runs["d400"][1].data["rate"]["slope"]
    assert abs(b200 - b400) <= 0.05
    assert all(r.passed for r in sub)


def test_criterion_3_single_point_blowup(verification):
    rows, _ = verification
    sub = _take(rows, "3")
    assert all(r.passed for r in sub)


def test_criterion_4_pointwise_tail_bound(verification):
    rows, bundle = verification
    sub = _take(rows, "4")
    for label in ("d200", "d400"):
        frac = bundle["runs"][label][1].data["monitors"]["pointwise_bound"][
            "satisfied_fraction"]
        assert frac >= 0.99, label
    assert all(r.passed for r in sub)


def test_criterion_5_gradient_functional(verification):
    rows, bundle = verification
    sub = _take(rows, "5")
    for label in ("d200", "d400"):
        frac = bundle["runs"][label][1].data["monitors"]["gradient_bound"][
            "satisfied_fraction"]
        assert frac >= 0.99, label
    assert all(r.passed for r in sub)


def test_criterion_6_neumann_rate_and_set(verification):
    rows, bundle = verification
    sub = _take(rows, "6")
    runs = bundle["runs"]
    for label in ("n200", "n400"):
        rate = runs[label][1].data["rate"]
        assert 0.175 <= rate["slope"] <= 0.325, label
    nb200 = runs["n200"][1].data["rate"]["slope"]
    nb400 = runs["n400"][1].data["rate"]["slope"]
    assert abs(nb200 - nb400) <= 0.05
    assert all(r.passed for r in sub)


def test_criterion_7_monotonicity_monitors(verification):
    rows, bundle = verification
    sub = _take(rows, "7")
    for label in ("d200", "d400", "n200", "n400"):
        frac = bundle["runs"][label][1].data["monitors"]["monotonicity"][
            "satisfied_fraction"]
        assert frac == 1.0, label
    assert all(r.passed for r in sub)


def test_criterion_8_growth_functionals(verification):
    rows, bundle = verification
    sub = _take(rows, "8")
    assert all(r.passed for r in sub)


def test_criterion_9a_stencil_exact_on_quadratics(verification):
    rows, _ = verification
    assert all(r.passed for r in _take(rows, "9a"))


def test_criterion_9b_tail_integral_gamma_identity(verification):
    rows, _ = verification
    assert all(r.passed for r in _take(rows, "9b"))


def test_criterion_9c_synthetic_law_recovery(verification):
    rows, _ = verification
    assert all(r.passed for r in _take(rows, "9c"))


def test_criterion_9d_estimator_spread(verification):
    # Faithful gate: spread <= 2% of the window span on every reference run.
    # The interior references measure ~2.2-2.3%: the same estimator bias
    # that keeps the measured slope inside its band (criterion 2) exceeds
    # this bound, and no recording cadence satisfies both; see the rate
    # tests for the trade-off surface.
    rows, bundle = verification
    sub = _take(rows, "9d")
    assert max(bundle["spreads"].values()) <= 0.02
    assert all(r.passed for r in sub)


def test_criterion_9e_determinism(verification):
    rows, _ = verification
    assert all(r.passed for r in _take(rows, "9e"))


def test_criterion_9f_runtime_budget(verification):
    rows, bundle = verification
    assert bundle["elapsed_s"] <= 600.0
    assert all(r.passed for r in _take(rows, "9f"))
