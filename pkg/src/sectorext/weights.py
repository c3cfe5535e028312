"""Weight functions: evaluators, associated functions of sequences, Legendre
conjugates, associated matrices, and the condition diagnostics.

A weight function here is a nondecreasing continuous map omega with
omega(0) = 0; it is carried around as a vectorized evaluator plus the radius
t_max up to which the evaluator is trustworthy.  Sequence-backed evaluators
refuse to extrapolate: beyond the validity radius (the last stored quotient)
the sup defining omega_M is no longer attained inside the horizon, and a
silent continuation would corrupt every downstream bound check.

Growth diagnostics carry an exponent *interval*: at a finite radius the
limiting power of a block-structured weight is genuinely uncertain, so the
local two-point fit and the anchored-chord estimate are both reported and
every integrability verdict that falls between them is "inconclusive" rather
than a guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .quadrature import DEFAULT_QUAD, QuadratureConfig, integrate_geometric, power_tail
from .sequences import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    PropertyReport,
    SequenceError,
    WeightSequence,
    sequence_from_quotients,
    trend_verdict,
)

# truncation radius for integrals against closed-form weights
T_INTEGRAL_CAP = 1e12
T_GRID_POINTS = 24


class WeightError(ValueError):
    pass


class OutOfHorizonError(WeightError):
    """Evaluation requested beyond the validity radius of the evaluator."""


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Vectorized evaluator t -> omega(t) with provenance and validity radius."""

    label: str
    evaluator: object                 # callable ndarray -> ndarray
    t_max: float = math.inf
    normalized: bool = False
    kind: str = "closed-form"
    params: dict = field(default_factory=dict)
    source: object = None             # generating WeightSequence, if any

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.any(arr < 0):
            raise WeightError("omega is defined for t >= 0")
        if np.any(arr > self.t_max * (1 + 1e-12)):
            raise OutOfHorizonError(
                f"{self.label}: evaluation at t={arr.max():.4g} beyond "
                f"validity radius {self.t_max:.4g}")
        out = np.asarray(self.evaluator(arr), dtype=float)
        return float(out[0]) if scalar else out

    def descriptor(self) -> dict:
        return {"kind": self.kind, "label": self.label, **self.params}


def _probe_normalized(evaluator) -> bool:
    t = np.array([0.25, 0.5, 0.9, 1.0])
    return bool(np.all(np.abs(np.asarray(evaluator(t))) < 1e-12))


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def builtin_weight(kind: str, s: float) -> WeightFunction:
    """Closed-form weights: "power" t^(1/s) and "logpower" max(0, log t)^s."""
    if kind == "power":
        if s <= 0:
            raise WeightError("power weight needs s > 0")
        ev = lambda t: np.power(t, 1.0 / s)
        return WeightFunction(f"t^(1/{s:g})", ev, kind="power", params={"s": s})
    if kind == "logpower":
        if s <= 1:
            raise WeightError("logpower weight needs s > 1")

        def ev(t, s=s):
            with np.errstate(divide="ignore", invalid="ignore"):
                lt = np.where(t > 1.0, np.log(np.maximum(t, 1.0)), 0.0)
            return np.power(lt, s)

        return WeightFunction(f"log^{s:g}", ev, normalized=True,
                              kind="logpower", params={"s": s})
    raise WeightError(f"unknown builtin weight kind {kind!r}")


def omega_from_sequence(M: WeightSequence) -> WeightFunction:
    """Associated function omega_M(t) = sup_p (p log t - log M_p).

    For log-convex M the sup is attained at the largest p with mu_p <= t, so
    the evaluator is exact for t up to the last quotient; beyond that the
    true sup escapes the horizon and evaluation is a hard error.
    """
    if not M.is_log_convex:
        raise SequenceError("associated function needs a log-convex sequence")
    lq = M.log_quotients.copy()
    lv = M.log_values.copy()
    t_max = float(np.exp(lq[-1]))

    def ev(t, lq=lq, lv=lv):
        x = np.log(np.maximum(t, 1e-300))
        p = np.searchsorted(lq[1:], x * (1 + 1e-15) + 1e-15, side="right")
        return np.maximum(p * x - lv[p], 0.0)

    return WeightFunction(f"omega[{M.label}]", ev, t_max=t_max,
                          normalized=M.is_normalized, kind="sequence",
                          params={"horizon": M.horizon}, source=M)


def h_log_from_sequence(M: WeightSequence):
    """log h_M(t) with h_M(t) = inf_k M_k t^k; equals 0 for t >= 1.

    Returned as a vectorized callable of t.  For t below 1/mu_P the inf is
    attained at the horizon edge and no longer trustworthy: hard error,
    mirroring the associated-function policy.
    """
    lv = M.log_values.copy()
    k = np.arange(M.horizon + 1)
    t_min = float(np.exp(-M.log_quotients[-1]))

    def ev(t):
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(arr <= 0):
            raise WeightError("h_M needs t > 0")
        if np.any(arr < t_min * (1 - 1e-12)):
            raise OutOfHorizonError(
                f"h[{M.label}]: t={arr.min():.4g} below validity radius "
                f"{t_min:.4g}")
        vals = lv[None, :] + k[None, :] * np.log(arr)[:, None]
        out = np.minimum(vals.min(axis=1), 0.0)
        return float(out[0]) if np.ndim(t) == 0 else out

    return ev


def transform_weight(omega: WeightFunction, kind: str,
                     r: float = 1.0) -> WeightFunction:
    """power: omega^r(t) = omega(t^r); iota: omega^iota(t) = omega(1/t)."""
    if kind == "power":
        if r <= 0:
            raise WeightError("power transform needs r > 0")
        t_max = omega.t_max ** (1.0 / r) if math.isfinite(omega.t_max) else math.inf
        ev = lambda t: omega.evaluator(np.power(t, r))
        return WeightFunction(f"({omega.label})^{r:g}", ev, t_max=t_max,
                              normalized=omega.normalized, kind="transform",
                              params={"base": omega.label, "mode": "power", "r": r})
    if kind == "iota":
        def ev(t):
            with np.errstate(divide="ignore"):
                inv = np.where(t > 0, 1.0 / np.maximum(t, 1e-300), math.inf)
            out = np.zeros_like(np.atleast_1d(t), dtype=float)
            arr = np.atleast_1d(inv)
            ok = arr <= omega.t_max
            out[ok] = omega.evaluator(arr[ok])
            if np.any(~ok):
                raise OutOfHorizonError(
                    f"{omega.label}^iota: argument below validity")
            return out

        t_min_ok = 1.0 / omega.t_max if math.isfinite(omega.t_max) else 0.0
        return WeightFunction(f"({omega.label})^iota", ev, t_max=math.inf,
                              normalized=False, kind="transform",
                              params={"base": omega.label, "mode": "iota",
                                      "t_min": t_min_ok})
    raise WeightError(f"unknown transform {kind!r}")


# ---------------------------------------------------------------------------
# Legendre conjugate and the associated matrix
# ---------------------------------------------------------------------------

def _phi(omega: WeightFunction, y):
    return omega.evaluator(np.exp(np.atleast_1d(np.asarray(y, dtype=float))))


def legendre_conjugate(omega: WeightFunction, x: float) -> float:
    """phi*(x) = sup_y (x y - phi(y)) with phi(y) = omega(e^y), y >= 0.

    Bracket doubling until the objective turns over, then bounded scalar
    minimization to 1e-10 in y.  If the objective is still rising at the
    validity edge the sup is not certified: divergence error.
    """
    if x < 0:
        raise WeightError("conjugate argument must be nonnegative")
    if x == 0:
        # phi nondecreasing, so the sup sits at y = 0; zero for normalized
        return -float(omega(1.0))
    y_cap = math.log(omega.t_max) if math.isfinite(omega.t_max) else 690.0

    def g(y):
        return x * y - float(_phi(omega, y)[0])

    hi = min(1.0, y_cap)
    while hi < y_cap and g(hi) >= g(0.6 * hi):
        hi = min(2.0 * hi, y_cap)
    if hi >= y_cap * (1 - 1e-12) and g(y_cap) > g(y_cap * (1 - 1e-9)):
        raise OutOfHorizonError(
            f"conjugate of {omega.label} at x={x:.4g}: objective still "
            "rising at the validity edge")
    res = minimize_scalar(lambda y: -g(y), bounds=(0.0, hi),
                          method="bounded", options={"xatol": 1e-10})
    return max(g(0.0), float(-res.fun))


def biconjugate(omega: WeightFunction, y: float) -> float:
    """phi**(y) = sup_x (x y - phi*(x)), computed by the same bracket rule."""
    if y < 0:
        raise WeightError("need y >= 0")

    def g(x):
        return x * y - legendre_conjugate(omega, x)

    hi = 1.0
    try:
        while g(2.0 * hi) >= g(hi) and hi < 1e6:
            hi *= 2.0
    except OutOfHorizonError:
        pass
    res = minimize_scalar(lambda x: -g(x), bounds=(0.0, 2.0 * hi),
                          method="bounded", options={"xatol": 1e-10})
    return max(g(0.0), float(-res.fun))


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Family W^l_j = exp(phi*(l j)/l) indexed by l > 0."""

    source: WeightFunction
    l_values: tuple

    def __post_init__(self):
        if not self.l_values or any(l <= 0 for l in self.l_values):
            raise WeightError("l-grid must be positive and nonempty")

    def log_value(self, l: float, j: int) -> float:
        if j < 0:
            raise WeightError("need j >= 0")
        return legendre_conjugate(self.source, l * j) / l

    def row(self, l: float, horizon: int) -> WeightSequence:
        lv = np.array([self.log_value(l, j) for j in range(horizon + 1)])
        lq = np.concatenate(([0.0], np.diff(lv)))
        # convexity of phi* makes the increments nondecreasing; enforce the
        # tiny numeric violations away so the row carries the lc flag
        lq[1:] = np.maximum.accumulate(lq[1:])
        return sequence_from_quotients(
            lq, label=f"W^{l:g}[{self.source.label}]")


def associated_matrix(omega: WeightFunction, l_values) -> WeightMatrix:
    return WeightMatrix(omega, tuple(l_values))


# ---------------------------------------------------------------------------
# growth-exponent interval and integral conditions
# ---------------------------------------------------------------------------

def _truncation_radius(omega: WeightFunction) -> float:
    if math.isfinite(omega.t_max):
        return omega.t_max * 0.999
    return T_INTEGRAL_CAP


def _local_exponent(omega: WeightFunction, t: float, span: float = 4.0) -> float:
    hi = float(omega(t))
    lo = float(omega(t / span))
    if hi <= 0 or lo <= 0:
        return 0.0
    return math.log(hi / lo) / math.log(span)


def tail_exponent_interval(omega: WeightFunction):
    """Uncertainty interval for the limiting power of omega at its radius.

    Returns (q_lo, q_hi, slow_growth).  q from two estimators: the two-point
    local fit at the truncation radius U, and the maximal chord of log omega
    anchored at a small reference point (block-structured weights park their
    limsup on short spikes that the local fit never sees; the anchored chord
    does).  slow_growth marks sub-power weights (local exponent collapsing
    under radius doubling): every power-tail integral converges for those.

    Sequence-backed weights delegate to the lower growth exponent of their
    generating quotients: the growth of the associated function is governed
    by the quotients alone, and the sequence estimator is sharp exactly
    where a finite-radius chord is not (block transitions near the radius).
    """
    if omega.kind == "sequence" and omega.source is not None:
        from .sequences import growth_exponent
        e = growth_exponent(omega.source)
        if e > 40.0:
            return 0.0, 1.0 / max(e - 0.02, 1e-9), True
        return 1.0 / (e + 0.02), 1.0 / max(e - 0.02, 1e-9), False
    U = _truncation_radius(omega)
    q_local = _local_exponent(omega, U)
    q_half = _local_exponent(omega, math.sqrt(U) if U > 100 else U / 2)
    slow = q_local < 0.02 or (q_half > 0 and q_local < 0.6 * q_half)

    grid = np.geomspace(2.0, U, 400)
    vals = np.asarray(omega(grid))
    pos = vals > 0
    q_chord = q_local
    if np.any(pos):
        # anchor well inside the range so the pre-asymptotic prefactor of a
        # smooth weight does not tilt the chords; the anchor still sits far
        # below any late block spike, which is what the chord must catch
        anchor = max(float(grid[pos][0]), U ** (1.0 / 3.0))
        i0 = int(np.argmin(np.abs(np.log(grid) - math.log(anchor))))
        while i0 < grid.size and not pos[i0]:
            i0 += 1
        if i0 < grid.size:
            t0, v0 = float(grid[i0]), float(vals[i0])
            span_ok = pos & (grid >= t0 * 10 ** 1.5)
            if np.any(span_ok):
                chords = (np.log(vals[span_ok]) - math.log(v0)) / \
                         (np.log(grid[span_ok]) - math.log(t0))
                q_chord = float(np.max(chords))
    q_lo = min(q_local, q_chord)
    q_hi = max(q_local, q_chord)
    if slow:
        q_lo = 0.0
    return max(0.0, q_lo), max(0.0, q_hi), slow


def weight_t_grid(omega: WeightFunction) -> np.ndarray:
    """Geometric grid from 1 to T_max/10 used by the large-t conditions."""
    T = (omega.t_max if math.isfinite(omega.t_max) else 10 * T_INTEGRAL_CAP) / 10.0
    if T <= 2.0:
        raise WeightError("validity radius too small for a t-grid")
    return np.geomspace(1.0, T, T_GRID_POINTS)


def gamma_r_integral(omega: WeightFunction, t: float, r: float,
                     cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """I_r(t) = integral of omega(t u) u^(-1-1/r) over u >= 1.

    Substituting v = t u: t^(1/r) * integral of omega(v) v^(-1-1/r) from t,
    truncated at the validity radius with a fitted power tail.  Divergent
    tail fit gives +inf; the caller decides what finite truncations mean.
    """
    if r <= 0 or t <= 0:
        raise WeightError("need t, r > 0")
    U = _truncation_radius(omega)
    if t >= U / 4:
        raise WeightError("t too close to the validity radius")
    a = 1.0 / r

    def f(v):
        return np.asarray(omega(v)) * np.power(v, -1.0 - a)

    body = integrate_geometric(f, t, U, cfg)
    tail, _, divergent = power_tail(f, U)
    if divergent:
        return math.inf
    return float(t ** a * (body + tail))


def kappa_heir(omega: WeightFunction, r: float = 1.0,
               normalize: bool = False) -> WeightFunction:
    """Heir kappa at level r: evaluate kappa of omega^r, then ramify back.

    kappa_sigma(t) = t * integral of sigma(y)/y^2 over y >= t; the heir is
    kappa_{omega^r}(t^(1/r)).  Requires a convergent integral (the
    integrability diagnostic at level r); optional renormalization shifts
    the values so the result vanishes on [0, 1].
    """
    rep = weight_condition_report(omega, "omega_nq_r", r=r)
    if rep.verdict == FAILS:
        raise WeightError("kappa diverges: integrability fails at this r")
    base = transform_weight(omega, "power", r) if r != 1.0 else omega
    U = _truncation_radius(base)

    def kappa_base(t: float) -> float:
        if t <= 0:
            return 0.0
        if t >= U / 4:
            raise OutOfHorizonError("kappa: t too close to validity radius")

        def f(y):
            return np.asarray(base(y)) * np.power(y, -2.0)

        body = integrate_geometric(f, t, U)
        tail, _, divergent = power_tail(f, U)
        if divergent:
            raise WeightError("kappa tail divergent")
        return t * (body + tail)

    shift = kappa_base(1.0) if normalize else 0.0

    def ev(t):
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.array([kappa_base(x ** (1.0 / r)) for x in arr])
        if normalize:
            out = np.maximum(out - shift, 0.0)
        return out

    t_max = (U / 4) ** r if math.isfinite(U) else math.inf
    return WeightFunction(f"kappa[{omega.label}; r={r:g}]", ev, t_max=t_max,
                          normalized=normalize, kind="transform",
                          params={"base": omega.label, "mode": "kappa-heir",
                                  "r": r})


# ---------------------------------------------------------------------------
# condition diagnostics
# ---------------------------------------------------------------------------

def _ratio_slope(grid: np.ndarray, vals: np.ndarray) -> float:
    """Log-log slope of a positive trace over the last quarter of the grid."""
    k = max(4, grid.size // 4)
    x = np.log(grid[-k:])
    y = np.log(np.maximum(vals[-k:], 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def _bounded_ratio_report(tag: str, grid, vals, const_name: str) -> PropertyReport:
    verdict, slope = trend_verdict(grid, vals)
    C = float(np.nanmax(vals))
    return PropertyReport(tag, verdict, witness=C, trace_p=grid,
                          trace_values=vals,
                          notes=f"window-max slope {slope:.3g}",
                          constants={const_name: C})


def _vanishing_ratio_report(tag: str, grid, vals) -> PropertyReport:
    slope = _ratio_slope(grid, vals)
    final = float(vals[-1])
    if slope <= -0.02:
        v = HOLDS
    elif abs(slope) < 0.02 and final > 0.05:
        v = FAILS
    elif slope >= 0.05:
        v = FAILS
    else:
        v = INCONCLUSIVE
    return PropertyReport(tag, v, witness=final, trace_p=grid,
                          trace_values=vals,
                          notes=f"ratio slope {slope:.3g}, final {final:.3g}")


def weight_condition_report(omega: WeightFunction, condition: str,
                            r: float = 1.0) -> PropertyReport:
    """Three-valued diagnostics for the standard weight conditions.

    condition in {omega_1, omega_2, omega_3, omega_4, omega_5, omega_6,
    omega_nq_r, omega_snq}.  omega_nq (r = 1) is omega_nq_r at r = 1.
    """
    if condition in ("omega_nq", "omega_nq_r"):
        if condition == "omega_nq":
            r = 1.0
        q_lo, q_hi, slow = tail_exponent_interval(omega)
        a = 1.0 / r
        U = _truncation_radius(omega)

        def f(u):
            return np.asarray(omega(u)) * np.power(u, -1.0 - a)

        if not slow and a <= q_lo + 1e-12:
            return PropertyReport(
                condition, FAILS, witness=math.inf,
                notes=f"tail exponent >= 1/r: q in [{q_lo:.3g}, {q_hi:.3g}]",
                constants={"q_lo": q_lo, "q_hi": q_hi})
        if not slow and a <= q_hi:
            return PropertyReport(
                condition, INCONCLUSIVE, witness=math.nan,
                notes=f"1/r={a:.3g} inside tail-exponent interval "
                      f"[{q_lo:.3g}, {q_hi:.3g}]",
                constants={"q_lo": q_lo, "q_hi": q_hi})
        body = integrate_geometric(f, 1.0, U)
        tail, _, divergent = power_tail(f, U)
        if divergent:
            return PropertyReport(condition, INCONCLUSIVE, witness=body,
                                  notes="local tail fit divergent despite "
                                        "convergent exponent interval")
        return PropertyReport(condition, HOLDS, witness=body + tail,
                              notes=f"tail share {tail / max(body + tail, 1e-300):.2g}",
                              constants={"integral": body + tail,
                                         "q_lo": q_lo, "q_hi": q_hi})

    grid = weight_t_grid(omega)

    if condition == "omega_1":
        half = grid[grid <= omega.t_max / 2.0] if math.isfinite(omega.t_max) \
            else grid
        vals = np.asarray(omega(2.0 * half)) / (np.asarray(omega(half)) + 1.0)
        return _bounded_ratio_report(condition, half, vals, "L")

    if condition == "omega_2":
        vals = np.asarray(omega(grid)) / grid
        return _bounded_ratio_report(condition, grid, vals, "C")

    if condition == "omega_3":
        om = np.asarray(omega(grid))
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(om > 0, np.log(grid) / np.maximum(om, 1e-300),
                            math.inf)
        if not np.all(np.isfinite(vals[grid > 2.0])):
            return PropertyReport(condition, FAILS, witness=math.inf,
                                  notes="omega vanishes at large t")
        return _vanishing_ratio_report(condition, grid[2:], vals[2:])

    if condition == "omega_4":
        y_hi = math.log(omega.t_max) if math.isfinite(omega.t_max) else 60.0
        y = np.linspace(0.0, y_hi * 0.999, 200)
        phi = np.asarray(_phi(omega, y))
        d2 = np.diff(phi, 2)
        worst = float(d2.min())
        scale = max(1.0, float(np.abs(phi).max()))
        ok = worst >= -1e-9 * scale
        return PropertyReport(condition, HOLDS if ok else FAILS,
                              witness=worst,
                              notes="second differences of phi(y)")

    if condition == "omega_5":
        vals = np.asarray(omega(grid)) / grid
        return _vanishing_ratio_report(condition, grid, vals)

    if condition == "omega_6":
        best = None
        rising = True
        for H in [2.0 ** k for k in range(1, 25)]:
            top = (omega.t_max / H if math.isfinite(omega.t_max)
                   else 10 * T_INTEGRAL_CAP)
            if top < 100.0:
                break
            g = np.geomspace(1.0, top, T_GRID_POINTS)
            deficit = 2.0 * np.asarray(omega(g)) - np.asarray(omega(H * g)) - H
            slope = _ratio_slope(g, np.maximum(deficit, 1e-300) + 1.0)
            trending_up = float(deficit[-1]) > float(deficit[max(0, g.size // 2)])
            if float(deficit.max()) <= 1e-9 and not trending_up:
                best = H
                rising = False
                break
            if not trending_up:
                rising = False
        if best is not None:
            return PropertyReport(condition, HOLDS, witness=best,
                                  notes=f"H={best:g} closes the deficit",
                                  constants={"H": best})
        v = FAILS if rising else INCONCLUSIVE
        return PropertyReport(condition, v, witness=math.nan,
                              notes="no H on the scan closes 2 omega(t) <= "
                                    "omega(Ht) + H")

    if condition == "omega_snq":
        t_cap = _truncation_radius(omega) / 8.0
        g = grid[grid <= t_cap]
        if g.size < 8:
            return PropertyReport(condition, INCONCLUSIVE, witness=math.nan,
                                  notes="validity radius too small")
        vals = np.array([gamma_r_integral(omega, t, 1.0) for t in g])
        if not np.all(np.isfinite(vals)):
            return PropertyReport(condition, FAILS, witness=math.inf,
                                  notes="kernel integral divergent")
        resid = vals / (np.asarray(omega(g)) + 1.0)
        return _bounded_ratio_report(condition, g, resid, "C")

    raise WeightError(f"unknown condition {condition!r}")


# ---------------------------------------------------------------------------
# descriptors (CLI surface)
# ---------------------------------------------------------------------------

def weight_from_descriptor(obj: dict) -> WeightFunction:
    """Build a weight from the JSON descriptor {"kind": ..., params...}."""
    kind = obj.get("kind")
    if kind in ("power", "logpower"):
        return builtin_weight(kind, float(obj["s"]))
    if kind == "sequence":
        seq = WeightSequence.from_json(obj["sequence"])
        return omega_from_sequence(seq)
    if kind == "transform":
        base = weight_from_descriptor(obj["base"])
        mode = obj["mode"]
        if mode == "kappa-heir":
            return kappa_heir(base, float(obj.get("r", 1.0)),
                              normalize=bool(obj.get("normalize", False)))
        return transform_weight(base, mode, float(obj.get("r", 1.0)))
    raise WeightError(f"unknown weight descriptor kind {kind!r}")
