"""Descendant, heir, and the block example generators."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sectorext import (
    FAILS,
    HOLDS,
    SequenceError,
    WeightError,
    WeightSequence,
    builtin_weight,
    check_property,
    descendant,
    descendant_mg_check,
    factorial_block_example,
    gevrey_sequence,
    heir_pair_for_sector,
    langenbruch_example,
    mixed_pair_example,
)

FULL_BLOCK_P = math.factorial(9) - 1    # ends exactly at a block boundary


def test_factorial_block_closed_form():
    N = factorial_block_example(1024)
    # block p: quotient 2^p p! p, reciprocals summing to 2^-p per block
    inv = np.exp(-N.log_quotients[1:])
    for p in (1, 2, 3, 4, 5):
        lo, hi = math.factorial(p), math.factorial(p + 1)
        block = inv[lo - 1:min(hi, 1025) - 1]
        if hi <= 1025:
            assert block.sum() == pytest.approx(2.0 ** -p, rel=1e-12)
    assert N.log_quotients[1] == pytest.approx(math.log(2.0))


def test_factorial_block_fails_mg():
    N = factorial_block_example(FULL_BLOCK_P)
    assert check_property(N, "mg").verdict == FAILS


def test_langenbruch_recursion_oracle():
    # gamma=2 mg variant: alpha=3, beta=4; c_1=1, d_1=2, c_2=5, d_2=12
    L = langenbruch_example(2.0, "mg", 1024)
    mu = np.exp(L.log_quotients)
    assert mu[1] == pytest.approx(1.0)
    assert mu[2] == pytest.approx(4.0)          # 2^4 / 2^2
    assert mu[3] == pytest.approx(20.25)        # 3^4 / 4
    assert mu[4] == pytest.approx(64.0)         # 4^4 / 4
    assert mu[5] == pytest.approx(125.0)        # flat block at c_2^3
    assert mu[11] == pytest.approx(125.0)
    assert mu[12] == pytest.approx(12.0 ** 4 / 144.0)


def test_langenbruch_quotients_dominate_k_gamma():
    for variant in ("mg", "no-mg"):
        L = langenbruch_example(2.0, variant, 4096)
        k = np.arange(1, 4097)
        assert np.all(L.log_quotients[1:] >= 2.0 * np.log(k) - 1e-9)


def test_langenbruch_mg_verdicts():
    # block boundaries are factorially sparse; the no-mg divergence only
    # enters the trace once d_3 ~ 4.6e5 is inside the horizon
    assert check_property(langenbruch_example(2.0, "mg", 10 ** 6),
                          "mg").verdict == HOLDS
    assert check_property(langenbruch_example(2.0, "no-mg", 10 ** 6),
                          "mg").verdict == FAILS


def test_langenbruch_beta3_fails_both_variants():
    for variant in ("mg", "no-mg"):
        L = langenbruch_example(2.0, variant, 4096)
        assert check_property(L, "beta3").verdict == FAILS, variant


def test_mixed_pair_constraint_enforced():
    with pytest.raises(SequenceError):
        mixed_pair_example(1.5, 2.0, "mg", 256)     # 1.5 * 2 = 3 > 2
    with pytest.raises(SequenceError):
        mixed_pair_example(2.5, 2.0, "mg", 256)     # needs gamma' < gamma
    M, N = mixed_pair_example(1.2, 2.0, "mg", 1024)
    assert np.all(M.log_quotients <= N.log_quotients + 1e-12)


def test_descendant_gevrey2_structure():
    d = descendant(gevrey_sequence(2.0, 1024), 1.0)
    sigma = d.sigma
    assert np.exp(sigma.log_quotients[1]) == pytest.approx(1.0)
    assert sigma.is_log_convex
    assert check_property(sigma, "slc").verdict == HOLDS
    assert math.isfinite(d.domination_constant)
    assert d.mixed_statistic_verdict == HOLDS
    # sigma_k <= C nu_k^(1/r) realized by the reported constant
    gap = sigma.log_quotients[1:] - d.source.log_quotients[1:]
    assert np.exp(gap.max()) <= d.domination_constant * (1 + 1e-12)


def test_descendant_requires_nq():
    with pytest.raises(SequenceError):
        descendant(gevrey_sequence(1.0, 1024), 1.0)    # harmonic tail


def test_descendant_repairs_moderate_growth():
    src = factorial_block_example(FULL_BLOCK_P)
    d = descendant(src, 1.0)
    assert check_property(src, "mg").verdict == FAILS
    assert check_property(d.sigma, "mg").verdict == HOLDS
    assert d.tail_relative_error < 0.05


def test_descendant_mg_check_gevrey2():
    main, alt = descendant_mg_check(gevrey_sequence(2.0, 1024))
    assert main.verdict == HOLDS
    assert alt.verdict == HOLDS
    assert math.isfinite(main.constants["C"])


def test_heir_pair_power_weight():
    om = builtin_weight("power", 3.0)
    sigma, certificate = heir_pair_for_sector(om, 2.0)
    assert certificate.r_lo >= 2.0
    # the heir of t^(1/3) is comparable to the weight itself: the pair's
    # index sits at the full order 3
    assert certificate.contains(3.0) or abs(certificate.estimate - 3.0) < 0.1
    t = np.array([1e2, 1e4, 1e6])
    ref = 3.0 * t ** (1.0 / 3.0) - 3.0
    assert np.allclose(np.asarray(sigma(t)), ref, rtol=0.05)


def test_heir_pair_refuses_wide_sector():
    with pytest.raises(WeightError):
        heir_pair_for_sector(builtin_weight("power", 3.0), 3.5)
