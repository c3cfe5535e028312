"""Outer functions, flat functions, moments and the extension operator."""

from __future__ import annotations

import math

import numpy as np
import pytest

from sectorext import (
    ExtensionError,
    SectorSpec,
    choose_ramification,
    extend,
    flat_sandwich,
    flat_sandwich_sequences,
    gamma_mixed_sequences,
    gevrey_sequence,
    kernel_bound,
    make_handle,
    moment_table,
    omega_from_sequence,
    outer_function,
    outer_sandwich,
    recover_coefficients,
    remainder_report,
)

P = 512


@pytest.fixture(scope="module")
def pair():
    return gevrey_sequence(1.0, P), gevrey_sequence(2.0, P)


@pytest.fixture(scope="module")
def bracket(pair):
    return gamma_mixed_sequences(*pair)


@pytest.fixture(scope="module")
def handle(pair, bracket):
    params = choose_ramification(1.0, bracket, a=4.0)
    return make_handle(pair, params)


@pytest.fixture(scope="module")
def result(pair, bracket):
    lam = [math.factorial(p) for p in range(13)]
    return extend(lam, pair, gamma=1.0, h=1.0, x=0.125,
                  index_bracket=bracket)


def test_sector_spec_rejects_outside_samples():
    with pytest.raises(ExtensionError):
        SectorSpec(1.0, (1.0,), (0.6 * math.pi,))
    spec = SectorSpec.log_ray(1.0, 0.1, 10.0, 5)
    assert spec.samples().shape == (5,)


def test_ramification_midpoint_rule(bracket):
    params = choose_ramification(1.0, bracket, a=2.0)
    G = bracket.r_lo
    assert params.delta == pytest.approx(0.5 * (1.0 + G))
    assert params.s * params.delta < 1.0 < params.s * G
    with pytest.raises(ExtensionError):
        choose_ramification(G + 0.1, bracket, a=2.0)


def test_outer_function_real_on_ray(pair):
    om = omega_from_sequence(pair[1])
    w = np.linspace(0.05, 20.0, 10)
    vals = outer_function(om, 0.5, w.astype(complex))
    assert np.all(np.abs(vals.imag) <= 1e-8 * np.abs(vals))


def test_outer_function_power_identity(pair):
    om = omega_from_sequence(pair[1])
    rng = np.random.default_rng(3)
    w = rng.uniform(0.1, 5.0, 10) + 1j * rng.uniform(-2.0, 2.0, 10)
    w = np.where(w.real > 0, w, w + 1.0)
    for a in (0.5, 2.0):
        lhs = outer_function(om, a, w)
        rhs = outer_function(om, 1.0, w) ** a
        assert np.allclose(lhs, rhs, rtol=1e-6)


def test_outer_function_rejects_left_half_plane(pair):
    om = omega_from_sequence(pair[1])
    with pytest.raises(ExtensionError):
        outer_function(om, 1.0, -1.0 + 0.0j)


def test_outer_sandwich_held_out(handle):
    rep = outer_sandwich(handle)
    assert rep.passes
    assert rep.constants["A"] >= 1.0 and rep.constants["B"] >= 1.0


def test_flat_sandwich_held_out(handle):
    rep = flat_sandwich(handle)
    assert rep.passes
    assert np.all(rep.log_lower <= rep.log_value + 1e-9)


def test_flat_sandwich_sequences_held_out(handle, pair):
    rep = flat_sandwich_sequences(handle, *pair)
    assert rep.passes


def test_flat_function_beats_every_power(handle):
    xi = np.geomspace(1e-4, 1.0, 30)
    logG = handle.log_flat(xi.astype(complex)).real
    for p in (1, 2, 5):
        vals = logG - p * np.log(xi)
        # flat at the origin: the ratio collapses toward small xi
        assert vals[0] < vals[-1] - 100.0


def test_kernel_bound_held_out(handle):
    rep = kernel_bound(handle, 0.125)
    assert rep.upper_pass


def test_moments_positive_log_convex(result):
    table = result.moments
    assert table.depth >= 20
    assert np.all(np.isfinite(table.log_m))
    assert np.all(table.second_differences() >= -1e-6)


def test_moment_sandwich_from_fitted_constants(result):
    from sectorext import moment_sandwich_rows
    row_lo, row_hi = moment_sandwich_rows(result)
    c = result.constants
    p = np.arange(result.moments.depth + 1)
    lower = c["log_C1"] + p * math.log(c["K2"] / 2.0) + row_lo
    upper = c["log_C2"] + p * math.log(c["K3"]) + row_hi
    assert np.all(lower <= result.moments.log_m + 1e-9)
    assert np.all(result.moments.log_m <= upper + 1e-9)


def test_extension_slope_one_with_linear_term(pair, bracket):
    # lambda = (1, 1, 0, ...): remainder after the constant term is
    # lambda_1 z + o(z), so the log-log slope on the ray is exactly 1
    res = extend([1.0, 1.0, 0.0], pair, 1.0, 1.0, 0.125, bracket)
    z = np.geomspace(res.R0 / 300.0, res.R0 / 30.0, 12)
    f = res.sampler(z.astype(complex)).real
    rem = np.abs(f - 1.0)
    slope = float(np.polyfit(np.log(z), np.log(rem), 1)[0])
    assert slope == pytest.approx(1.0, abs=0.1)


def test_extension_linearity(pair, bracket):
    lam = [1.0, 2.0, 0.5]
    res1 = extend(lam, pair, 1.0, 1.0, 0.125, bracket)
    res2 = extend([2 * v for v in lam], pair, 1.0, 1.0, 0.125, bracket)
    z = np.geomspace(res1.R0 / 100.0, res1.R0 / 2.0, 8).astype(complex)
    f1, f2 = res1.sampler(z), res2.sampler(z)
    assert np.allclose(f2, 2.0 * f1, rtol=1e-9, atol=1e-12)


def test_remainder_envelope(result):
    z = np.geomspace(result.R0 / 300.0, result.R0 / 2.0, 24).astype(complex)
    rep = remainder_report(result, z)
    assert all(rep.passes.values())
    assert math.isfinite(rep.front_constant)


def test_recover_low_coefficients(result):
    lam_hat = recover_coefficients(result, p_max=1)
    assert lam_hat[0] == pytest.approx(result.lam[0], rel=0.01)
    assert lam_hat[1] == pytest.approx(result.lam[1], rel=0.01)


def test_borel_series_radius_guard(result):
    with pytest.raises(ExtensionError):
        result.series(result.series.radius * 2.0)
