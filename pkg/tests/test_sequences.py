"""Sequence-level constructors, transforms and growth predicates."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sectorext import (
    FAILS,
    HOLDS,
    SequenceError,
    WeightSequence,
    check_property,
    compare_sequences,
    gevrey_sequence,
    growth_exponent,
    mixed_gamma_statistic,
    sequence_from_quotients,
    tail_sum,
    transform_sequence,
)

P = 1024


def quotient_arrays(min_size=17, max_size=60):
    """Nondecreasing positive log-quotients starting at 0 (log-convex)."""
    return st.lists(st.floats(0.0, 2.0), min_size=min_size - 1,
                    max_size=max_size - 1).map(
        lambda inc: np.concatenate(([0.0], np.cumsum(inc))))


def test_gevrey_quotients_closed_form():
    G = gevrey_sequence(2.0, P)
    p = np.arange(1, P + 1)
    assert np.allclose(G.log_quotients[1:], 2.0 * np.log(p), atol=0, rtol=0)
    assert G.is_normalized and G.is_log_convex


def test_hat_of_gevrey_shifts_order_exactly():
    for r in (1.0, 1.5, 2.0):
        left = transform_sequence(gevrey_sequence(r, P), "hat")
        right = gevrey_sequence(r + 1.0, P)
        assert np.allclose(left.log_quotients, right.log_quotients,
                           atol=1e-12)


@given(quotient_arrays())
@settings(max_examples=50, deadline=None)
def test_hat_unhat_roundtrip(lq):
    M = sequence_from_quotients(lq)
    back = transform_sequence(transform_sequence(M, "hat"), "unhat")
    assert np.allclose(back.log_quotients, M.log_quotients, atol=1e-12)


@given(quotient_arrays(), st.floats(0.25, 3.0))
@settings(max_examples=50, deadline=None)
def test_power_transform_scales_quotients(lq, rho):
    M = sequence_from_quotients(lq)
    Mr = transform_sequence(M, "power", rho=rho)
    assert np.allclose(Mr.log_quotients, rho * M.log_quotients, atol=1e-12)


@given(quotient_arrays())
@settings(max_examples=50, deadline=None)
def test_json_roundtrip(lq):
    M = sequence_from_quotients(lq, label="probe")
    back = WeightSequence.from_json(M.to_json())
    assert back.label == "probe"
    assert np.array_equal(back.log_quotients, M.log_quotients)


def test_growth_exponent_gevrey_exact():
    for r in (1.0, 1.5, 2.0, 3.0):
        assert growth_exponent(gevrey_sequence(r, P)) == pytest.approx(
            r, abs=1e-9)


def test_tail_sum_gevrey2_matches_exact_tail():
    # sum_{k>P} k^-2 = 1/P + O(1/P^2); the power model gives exactly 1/P
    tail, divergent, e = tail_sum(gevrey_sequence(2.0, P), 1.0)
    assert not divergent
    assert e == pytest.approx(2.0)
    assert tail == pytest.approx(1.0 / P, rel=0.05)


def test_nq_gevrey2_sums_to_pi_squared_over_six():
    rep = check_property(gevrey_sequence(2.0, P), "nq_r", r=1.0)
    assert rep.verdict == HOLDS
    assert rep.witness == pytest.approx(math.pi ** 2 / 6.0, abs=1e-3)


def test_nq_r_divergence_edge():
    G = gevrey_sequence(2.0, P)
    assert check_property(G, "nq_r", r=1.9).verdict == HOLDS
    assert check_property(G, "nq_r", r=2.0).verdict == FAILS
    assert check_property(G, "nq_r", r=4.0).verdict == FAILS


def test_mg_and_gamma_r_on_gevrey():
    G1 = gevrey_sequence(1.0, P)
    G2 = gevrey_sequence(2.0, P)
    assert check_property(G1, "mg").verdict == HOLDS
    assert check_property(G2, "mg").verdict == HOLDS
    # strong nonquasianalyticity at level 1: fails for G^1, holds for G^2
    assert check_property(G1, "gamma_r", r=1.0).verdict == FAILS
    assert check_property(G2, "gamma_r", r=1.0).verdict == HOLDS


def test_beta_conditions_on_gevrey():
    G1 = gevrey_sequence(1.0, P)
    G2 = gevrey_sequence(2.0, P)
    # mu_{2p}/mu_p = 2^r: beta1 needs liminf > 2, beta3 needs > 1
    assert check_property(G1, "beta1").verdict == FAILS
    assert check_property(G2, "beta1").verdict == HOLDS
    assert check_property(G1, "beta3").verdict == HOLDS
    assert check_property(G2, "beta3").verdict == HOLDS


def test_mixed_gamma_statistic_closed_form_entry():
    # s_2 for (G^2, G^2) at r=1: mu_2/2 * sum_{k>=2} k^-2 = 2 (pi^2/6 - 1)
    trace = mixed_gamma_statistic(gevrey_sequence(2.0, P),
                                  gevrey_sequence(2.0, P), 1.0)
    assert trace.values[1] == pytest.approx(2.0 * (math.pi ** 2 / 6 - 1.0),
                                            abs=2e-3)
    assert trace.verdict == HOLDS


def test_compare_sequences_ordering():
    G1 = gevrey_sequence(1.0, P)
    G2 = gevrey_sequence(2.0, P)
    rep = compare_sequences(G1, G2)
    assert rep.leq.verdict == HOLDS
    assert rep.quotient_leq.verdict == HOLDS
    back = compare_sequences(G2, G1)
    assert back.leq.verdict == FAILS
    same = compare_sequences(G2, G2)
    assert same.equivalent.verdict == HOLDS


def test_invalid_inputs_rejected():
    with pytest.raises(SequenceError):
        WeightSequence(np.array([1.0, 2.0]))        # log mu_0 != 0
    with pytest.raises(SequenceError):
        WeightSequence(np.array([0.0, np.nan]))
    with pytest.raises(SequenceError):
        gevrey_sequence(0.0)
    with pytest.raises(SequenceError):
        transform_sequence(gevrey_sequence(1.0, 32), "power", rho=-1.0)
    with pytest.raises(SequenceError):
        check_property(gevrey_sequence(1.0, 32), "no-such-property")
