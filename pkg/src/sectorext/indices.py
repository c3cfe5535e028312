"""Empirical estimators for the growth indices gamma(M,N), gamma(sigma,omega),
mu(N) and mu(omega).

All indices are suprema over r of a boundedness condition, so every estimate
is an interval [r_lo, r_hi]: the condition verdict is "holds" at r_lo and
"fails" (or the search-grid edge) at r_hi.  Point estimates are midpoints.
Bisection resolution is 0.02 in r with at most 12 iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sequences import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    SequenceError,
    WeightSequence,
    growth_exponent,
    mixed_gamma_statistic,
)
from . import weights as wf

BISECTION_RESOLUTION = 0.02
BISECTION_MAX_ITER = 12
R_GRID_MIN = 0.05
R_GRID_MAX = 64.0


@dataclass(frozen=True)
class IndexEstimate:
    estimate: float
    r_lo: float
    r_hi: float
    trace: tuple = ()          # (r, verdict, witness) triples
    notes: str = ""
    unbounded: bool = False

    def __post_init__(self):
        if not self.unbounded and not (self.r_lo <= self.estimate <= self.r_hi):
            raise ValueError("estimate outside bracket")

    @property
    def width(self) -> float:
        return self.r_hi - self.r_lo

    def contains(self, r: float) -> bool:
        return self.r_lo <= r <= self.r_hi


def _bisect_index(verdict_at, notes: str = "") -> IndexEstimate:
    """Generic supremum-of-holds search over r with a dual bisection.

    verdict_at(r) -> (verdict, witness).  The bracket is [last holds,
    first fails]: the holds-boundary and the fails-boundary are bisected
    separately, so an inconclusive band between them widens the bracket
    instead of silently shrinking it.  That matters for finite-horizon
    weights whose tail exponent is only known up to an interval.
    """
    trace = []
    cache = {}

    def probe(r):
        key = round(r, 9)
        if key not in cache:
            v, w = verdict_at(r)
            cache[key] = v
            trace.append((r, v, w))
        return cache[key]

    r_lo, r_hi = None, None      # last holds / first fails on the ladder
    first_nonholds, last_nonfails = None, None
    r = R_GRID_MIN
    while r <= R_GRID_MAX:
        v = probe(r)
        if v == HOLDS and first_nonholds is None:
            r_lo = r
        elif first_nonholds is None:
            first_nonholds = r
        if v == FAILS:
            r_hi = r
            break
        last_nonfails = r
        r *= 2
    if r_lo is None:
        hi = first_nonholds if first_nonholds is not None else R_GRID_MIN
        return IndexEstimate(0.0, 0.0, hi, tuple(trace),
                             notes=notes + " no r holds; estimate at grid minimum")
    if r_hi is None:
        return IndexEstimate(R_GRID_MAX, R_GRID_MAX, math.inf, tuple(trace),
                             notes=notes + " holds at grid maximum", unbounded=True)

    # boundary of the holds region
    lo, hi = r_lo, (first_nonholds if first_nonholds is not None else r_hi)
    for _ in range(BISECTION_MAX_ITER):
        if hi - lo <= BISECTION_RESOLUTION:
            break
        mid = 0.5 * (lo + hi)
        if probe(mid) == HOLDS:
            lo = mid
        else:
            hi = mid
    holds_edge = lo

    # boundary of the fails region
    lo2, hi2 = (last_nonfails if last_nonfails is not None else r_lo), r_hi
    lo2 = max(lo2, holds_edge)
    for _ in range(BISECTION_MAX_ITER):
        if hi2 - lo2 <= BISECTION_RESOLUTION:
            break
        mid = 0.5 * (lo2 + hi2)
        if probe(mid) == FAILS:
            hi2 = mid
        else:
            lo2 = mid
    fails_edge = hi2

    gap = fails_edge - holds_edge
    if gap > 2 * BISECTION_RESOLUTION:
        notes = notes + f" inconclusive band of width {gap:.3g} inside bracket;"
    return IndexEstimate(0.5 * (holds_edge + fails_edge), holds_edge,
                         fails_edge, tuple(trace), notes=notes)


# ---------------------------------------------------------------------------
# sequence level
# ---------------------------------------------------------------------------

def mu_of_sequence(N: WeightSequence) -> IndexEstimate:
    """Order of quasianalyticity: liminf of log(nu_p)/log(p).

    Estimated by the windowed minimum of `growth_exponent`; exact for the
    Gevrey family and for the block examples once the window straddles a
    block transition.
    """
    if not N.is_log_convex:
        raise SequenceError("mu is defined for log-convex sequences")
    e = growth_exponent(N)
    half = 0.01 if N.horizon >= 64 else 0.25
    notes = "windowed liminf of log nu_p / log p"
    return IndexEstimate(e, max(0.0, e - half), e + half, notes=notes)


def gamma_mixed_sequences(M: WeightSequence, N: WeightSequence) -> IndexEstimate:
    """gamma(M,N) = sup of r with the mixed statistic bounded."""
    C = float(np.exp(np.max(M.log_quotients - N.log_quotients)))
    if not math.isfinite(C):
        bad = int(np.argmax(M.log_quotients - N.log_quotients))
        raise SequenceError(f"mu_p <= C nu_p violated at p={bad}")

    def verdict_at(r):
        t = mixed_gamma_statistic(M, N, r)
        return t.verdict, t.sup

    return _bisect_index(verdict_at, notes=f"comparability C={C:.3g};")


# ---------------------------------------------------------------------------
# weight-function level
# ---------------------------------------------------------------------------

def mu_of_weight(omega: "wf.WeightFunction") -> IndexEstimate:
    """sup of r with integral(omega(u) u^(-1-1/r), u=1..inf) finite."""

    def verdict_at(r):
        rep = wf.weight_condition_report(omega, "omega_nq_r", r=r)
        return rep.verdict, rep.witness

    est = _bisect_index(verdict_at, notes="omega_nq_r bisection;")
    if est.unbounded:
        return IndexEstimate(est.estimate, est.r_lo, est.r_hi, est.trace,
                             notes=est.notes + " (integral converges for "
                                               "every sampled r)",
                             unbounded=True)
    return est


def gamma_mixed_weights(sigma: "wf.WeightFunction",
                        omega: "wf.WeightFunction") -> IndexEstimate:
    """gamma(sigma, omega): sup r with I_r(t) <= C sigma(t) + C.

    I_r(t) = integral of omega(t u) u^(-1-1/r) over u >= 1, evaluated on a
    geometric t-grid; C is fitted by least squares and the verdict demands a
    bounded, non-increasing residual trend over the grid.
    """
    grid = wf.weight_t_grid(omega)
    grid = grid[grid < wf._truncation_radius(omega) / 4.0]
    if math.isfinite(sigma.t_max):
        grid = grid[grid <= sigma.t_max / 10.0]
    if grid.size < 8:
        raise SequenceError("validity radii too small for a common t-grid")
    sig = np.asarray(sigma(grid))
    om = np.asarray(omega(grid))
    # precondition omega = O(sigma + 1) on the grid (the target inequality
    # carries an additive constant, so a normalized sigma is admissible)
    domination = float(np.max(om / (sig + 1.0)))
    q_lo, q_hi, slow = wf.tail_exponent_interval(omega)

    def verdict_at(r):
        # the truncated integral cannot see divergence at the radius, so the
        # convergence question is settled by the tail-exponent interval first
        if not slow and 1.0 / r <= q_lo + 1e-12:
            return FAILS, math.inf
        if not slow and 1.0 / r <= q_hi:
            return INCONCLUSIVE, math.nan
        vals = np.array([wf.gamma_r_integral(omega, t, r) for t in grid])
        if not np.all(np.isfinite(vals)):
            return FAILS, math.inf
        resid = vals / (sig + 1.0)
        C = float(resid.max())
        # bounded means the residual does not climb toward the grid edge
        k = max(4, grid.size // 4)
        x = np.log(grid[-k:])
        y = np.log(np.maximum(resid[-k:], 1e-300))
        slope = float(np.polyfit(x, y, 1)[0])
        if slope <= 0.05:
            return HOLDS, C
        if slope >= 0.3:
            return FAILS, C
        return INCONCLUSIVE, C

    return _bisect_index(
        verdict_at,
        notes=f"omega<=C sigma with C={domination:.3g}; tail exponent in "
              f"[{q_lo:.3g}, {q_hi:.3g}];")
