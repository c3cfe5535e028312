"""Growth-index estimators: brackets, bisection behavior, cross-checks."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sectorext import (
    IndexEstimate,
    builtin_weight,
    gamma_mixed_sequences,
    gamma_mixed_weights,
    gevrey_sequence,
    mixed_pair_example,
    mu_of_sequence,
    mu_of_weight,
    omega_from_sequence,
    transform_sequence,
)

P = 1024


def test_bracket_invariants():
    est = IndexEstimate(1.0, 0.9, 1.1)
    assert est.contains(1.0) and not est.contains(1.2)
    assert est.width == pytest.approx(0.2)
    with pytest.raises(ValueError):
        IndexEstimate(2.0, 0.9, 1.1)


def test_mu_of_gevrey():
    for r in (1.0, 1.5, 2.0, 3.0):
        est = mu_of_sequence(gevrey_sequence(r, P))
        assert abs(est.estimate - r) <= 0.02
        assert est.contains(r)


def test_mu_of_hat_gevrey():
    est = mu_of_sequence(transform_sequence(gevrey_sequence(2.0, P), "hat"))
    assert abs(est.estimate - 3.0) <= 0.05


def test_mu_of_power_weight():
    # omega(t) = t^(1/3): integral t^(1/3 - 1 - 1/r) converges iff r < 3
    est = mu_of_weight(builtin_weight("power", 3.0))
    assert est.contains(3.0) or abs(est.estimate - 3.0) <= 0.05
    assert est.width <= 0.2


def test_mu_of_logpower_weight_unbounded():
    est = mu_of_weight(builtin_weight("logpower", 2.0))
    assert est.unbounded


def test_gamma_gevrey_pair():
    est = gamma_mixed_sequences(gevrey_sequence(1.0, P),
                                gevrey_sequence(2.0, P))
    assert est.contains(2.0)
    assert est.width <= 0.2


def test_gamma_single_gevrey2():
    est = gamma_mixed_sequences(gevrey_sequence(2.0, P),
                                gevrey_sequence(2.0, P))
    assert est.contains(2.0)


def test_gamma_appendix_pair_self_is_degenerate():
    M, _ = mixed_pair_example(1.2, 2.0, "mg", P)
    est = gamma_mixed_sequences(M, M)
    assert est.r_hi <= 0.2      # bracket pinned at the grid minimum


def test_gamma_weights_matches_sequences_for_gevrey():
    seq = gamma_mixed_sequences(gevrey_sequence(1.0, P),
                                gevrey_sequence(2.0, P))
    wt = gamma_mixed_weights(omega_from_sequence(gevrey_sequence(1.0, P)),
                             omega_from_sequence(gevrey_sequence(2.0, P)))
    assert max(seq.r_lo, wt.r_lo) <= min(seq.r_hi, wt.r_hi)
    assert wt.contains(2.0) or abs(wt.estimate - 2.0) <= 0.1


def test_trace_records_probes():
    est = gamma_mixed_sequences(gevrey_sequence(1.0, 256),
                                gevrey_sequence(2.0, 256))
    assert len(est.trace) >= 4
    rs = [r for r, _, _ in est.trace]
    assert all(r > 0 for r in rs)
