"""Quadrature helpers: panel Gauss-Legendre on geometric grids and
power-law tail extrapolation for improper integrals.

The integrands in this package are smooth (or piecewise smooth with mild
kinks) on logarithmic scales and eventually power-decaying, so a fixed-order
Gauss rule per geometric panel with an embedded half-order error estimate is
both fast and vectorizable; genuinely adaptive refinement is rarely needed
but available through panel doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureConfig:
    rtol: float = 1e-9
    atol: float = 1e-300
    panels_per_decade: int = 4
    order: int = 24
    max_doublings: int = 6

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_QUAD = QuadratureConfig()


class QuadratureError(RuntimeError):
    pass


def _panel_nodes(edges: np.ndarray, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    wts = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), wts.ravel()


def integrate_geometric(f, a: float, b: float,
                        cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integral of f over [a, b], panels spaced geometrically (needs a > 0).

    Error control: panel count is doubled until two successive estimates
    agree to cfg.rtol (embedded estimate), up to cfg.max_doublings.
    """
    if not 0 < a < b:
        raise QuadratureError("need 0 < a < b")
    decades = math.log10(b / a)
    n = max(2, int(math.ceil(decades * cfg.panels_per_decade)))
    prev = None
    for _ in range(cfg.max_doublings + 1):
        edges = np.geomspace(a, b, n + 1)
        nodes, wts = _panel_nodes(edges, cfg.order)
        val = float(np.dot(wts, f(nodes)))
        if prev is not None and abs(val - prev) <= cfg.rtol * abs(val) + cfg.atol:
            return val
        prev = val
        n *= 2
    return prev


def integrate_linear(f, a: float, b: float,
                     cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integral over [a, b] with uniformly spaced panels (a may be 0)."""
    if not a < b:
        raise QuadratureError("empty interval")
    n = 8
    prev = None
    for _ in range(cfg.max_doublings + 1):
        edges = np.linspace(a, b, n + 1)
        nodes, wts = _panel_nodes(edges, cfg.order)
        val = float(np.dot(wts, f(nodes)))
        if prev is not None and abs(val - prev) <= cfg.rtol * abs(val) + cfg.atol:
            return val
        prev = val
        n *= 2
    return prev


def power_tail(f, U: float, span: float = 4.0):
    """Tail integral of f over [U, inf) from a two-point power-law fit.

    Fits f(u) ~ c u^q between U/span and U; returns (tail, q, divergent).
    Divergent when q >= -1 (within 1e-9).
    """
    fU = float(f(np.array([U]))[0] if np.ndim(f(np.array([U]))) else f(U))
    fL = float(f(np.array([U / span]))[0] if np.ndim(f(np.array([U / span]))) else f(U / span))
    if fU <= 0 or fL <= 0:
        return 0.0, -math.inf, False
    q = math.log(fU / fL) / math.log(span)
    if q >= -1.0 - 1e-9:
        return math.inf, q, True
    return fU * U / (-1.0 - q), q, False


def integrate_with_tail(f, a: float, U: float,
                        cfg: QuadratureConfig = DEFAULT_QUAD):
    """Integral of f over [a, inf): quadrature to U plus fitted power tail.

    Returns (value, tail, divergent).  The two contributions are reported
    separately so callers can judge truncation quality.
    """
    body = integrate_geometric(f, a, U, cfg)
    tail, _, divergent = power_tail(f, U)
    if divergent:
        return math.inf, math.inf, True
    return body + tail, tail, False
