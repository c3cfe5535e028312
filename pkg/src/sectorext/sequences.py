"""Finite-horizon weight sequences and the sequence-level growth predicates.

A weight sequence M = (M_p)_{p<=P} is stored through the logarithms of its
quotients mu_p = M_p / M_{p-1} (mu_0 = 1 by convention).  Everything downstream
reads log-domain data only: values such as (p!)^3 overflow float64 near
p = 170, while their logarithms stay tame for any horizon we care about.

Boundedness predicates ("does this statistic stay bounded as p -> infinity?")
are undecidable from a finite table, so every check returns a three-valued
verdict: "holds", "fails", or "inconclusive".  The heuristics behind the
verdicts are documented on `trend_verdict` and `growth_exponent`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

DEFAULT_HORIZON = 1024

# Trend thresholds for boundedness verdicts: log-log slope of the running
# maxima of a statistic, per unit of log p.  Below SLOPE_HOLDS the trace is
# treated as bounded, above SLOPE_FAILS as divergent.
SLOPE_HOLDS = 0.05
SLOPE_FAILS = 0.15


class SequenceError(ValueError):
    """Invalid weight-sequence input or an unsatisfied precondition."""


def _log_factorials(P: int) -> np.ndarray:
    return np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, P + 1)))))


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Log-domain weight sequence on the index range 0..P."""

    log_quotients: np.ndarray
    label: str = ""
    log_values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lq = np.asarray(self.log_quotients, dtype=float)
        if lq.ndim != 1 or lq.size < 2:
            raise SequenceError("need at least two quotient entries")
        if not np.all(np.isfinite(lq)):
            raise SequenceError("non-finite log-quotient entries")
        if lq[0] != 0.0:
            raise SequenceError("log mu_0 must be 0 (mu_0 = 1 by convention)")
        object.__setattr__(self, "log_quotients", lq)
        object.__setattr__(self, "log_values", np.cumsum(lq))

    @property
    def horizon(self) -> int:
        return self.log_quotients.size - 1

    @property
    def is_normalized(self) -> bool:
        # 1 = M_0 <= M_1
        return self.log_quotients[1] >= -1e-12

    @property
    def is_log_convex(self) -> bool:
        return bool(np.all(np.diff(self.log_quotients[1:]) >= -1e-12))

    def to_json(self) -> str:
        return json.dumps(
            {
                "label": self.label,
                "horizon": self.horizon,
                "log_quotients": self.log_quotients.tolist(),
            }
        )

    @staticmethod
    def from_json(text: str) -> "WeightSequence":
        doc = json.loads(text)
        return WeightSequence(np.asarray(doc["log_quotients"], dtype=float),
                              label=str(doc.get("label", "")))


@dataclass(frozen=True)
class PropertyReport:
    property: str
    verdict: str
    witness: float
    trace_p: np.ndarray = field(repr=False, default=None)
    trace_values: np.ndarray = field(repr=False, default=None)
    notes: str = ""
    constants: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS


@dataclass(frozen=True)
class MixedGammaTrace:
    p: np.ndarray
    values: np.ndarray
    sup: float
    slope: float
    verdict: str
    comparability_constant: float
    tail: float
    tail_divergent: bool
    notes: str = ""


@dataclass(frozen=True)
class ComparisonReport:
    leq: PropertyReport
    quotient_leq: PropertyReport
    precedes: PropertyReport   # sup (M_p/N_p)^{1/p} < infinity
    equivalent: PropertyReport


# ---------------------------------------------------------------------------
# constructors and transforms
# ---------------------------------------------------------------------------

def sequence_from_quotients(log_mu, label: str = "") -> WeightSequence:
    return WeightSequence(np.asarray(log_mu, dtype=float), label=label)


def gevrey_sequence(r: float, P: int = DEFAULT_HORIZON) -> WeightSequence:
    """Gevrey sequence of order r: M_p = (p!)^r, mu_p = p^r."""
    if r <= 0:
        raise SequenceError("Gevrey order must be positive")
    lq = np.zeros(P + 1)
    lq[1:] = r * np.log(np.arange(1, P + 1))
    return WeightSequence(lq, label=f"gevrey[{r}]")


def transform_sequence(M: WeightSequence, mode: str, rho: float = None) -> WeightSequence:
    """power (M^rho), hat (p! M_p) or unhat (M_p / p!)."""
    P = M.horizon
    logp = np.zeros(P + 1)
    logp[1:] = np.log(np.arange(1, P + 1))
    if mode == "power":
        if rho is None or rho <= 0:
            raise SequenceError("power transform needs rho > 0")
        return WeightSequence(M.log_quotients * rho, label=f"{M.label}^{rho}")
    if mode == "hat":
        return WeightSequence(M.log_quotients + logp, label=f"hat({M.label})")
    if mode == "unhat":
        return WeightSequence(M.log_quotients - logp, label=f"unhat({M.label})")
    raise SequenceError(f"unknown transform mode {mode!r}")


# ---------------------------------------------------------------------------
# tails and trends
# ---------------------------------------------------------------------------

def growth_exponent(M: WeightSequence) -> float:
    """Lower growth exponent of the quotients: min of log mu_p / log p.

    This estimates liminf_p log(mu_p)/log(p).  The window starts at
    max(8, sqrt(P)) rather than P/2: the block-structured examples attain
    their liminf exactly at block transitions, and a window anchored at P/2
    can miss every transition while [sqrt(P), P] straddles at least one for
    the horizons we use.  For smooth families (Gevrey) the quotient exponent
    is constant, so the wider window changes nothing.
    """
    P = M.horizon
    lo = max(8, int(math.isqrt(P)))
    if lo >= P:
        lo = max(1, P // 2)
    p = np.arange(lo, P + 1)
    return float(np.min(M.log_quotients[lo:] / np.log(p)))


def tail_sum(M: WeightSequence, r: float = 1.0):
    """Estimate of sum_{k>P} mu_k^(-1/r).

    Models mu_k ~ k^e beyond the horizon with e the lower growth exponent,
    anchored at mu_P; the tail is then the integral of k^(-e/r) from P.
    Returns (tail, divergent, e).  Divergent when e/r <= 1.
    """
    e = growth_exponent(M)
    P = M.horizon
    if e / r <= 1.0 + 1e-12:
        return math.inf, True, e
    tail = math.exp(-M.log_quotients[P] / r) * P / (e / r - 1.0)
    return tail, False, e


def _record_signal(centers: list, maxima: list, p_lo: float,
                   p_hi: float) -> Optional[bool]:
    """Classify the record structure of the window maxima.

    Block-structured statistics can diverge so slowly (record heights growing
    like log of the position) that the window-max slope tends to zero.  The
    records still tell the story: a divergent trace keeps setting records
    deep into the range with non-shrinking increments, while a trace
    converging to a finite sup sets late records only with dying increments.
    Works on per-window maxima so that the gradual ramp inside a single
    block hump does not count as many records.

    Returns True (diverging records), False (records present but saturating:
    increments decay geometrically), or None (too few records to judge).
    """
    rec_p, rec_v = [], []
    best = -math.inf
    for c, v in zip(centers, maxima):
        if v > best * (1 + 1e-6):
            best = v
            rec_p.append(c)
            rec_v.append(v)
    if len(rec_v) < 3:
        return None
    inc = np.diff(np.array(rec_v))
    inc = inc[inc > 0]
    if inc.size < 2:
        return None
    # decaying increments mean convergence to a sup: either geometric decay
    # against a recent reference, or a strictly decreasing run (statistics
    # approaching their sup along sparse blocks shed increment size every
    # block; log-divergent traces set records with non-decreasing steps)
    ref = inc[-3] if inc.size >= 3 else inc[-2]
    decreasing_run = inc.size >= 3 and inc[-1] < inc[-2] < inc[-3]
    saturating = inc[-1] < 0.5 * ref or decreasing_run
    if saturating:
        return False
    # records must keep occurring: last record inside the final log-third
    span = math.log(p_hi) - math.log(max(p_lo, 1.0))
    if span <= 0 or math.log(rec_p[-1]) < math.log(p_hi) - span / 3.0:
        return None
    return True


def trend_verdict(p: np.ndarray, values: np.ndarray) -> tuple[str, float]:
    """Boundedness verdict for a positive statistic trace.

    Two signals.  (1) Dyadic-window maxima: oscillating-but-bounded traces
    have flat window maxima, divergent ones push them up at a definite
    log-log slope.  (2) Running records: catches divergence too slow for a
    slope test (see `_record_divergence`).  Returns (verdict, slope).
    """
    mask = np.isfinite(values) & (values > 0)
    if np.count_nonzero(mask) < 8:
        return INCONCLUSIVE, math.nan
    p = p[mask]
    values = values[mask]
    lo, hi = p[0], p[-1]
    edges = [lo]
    while edges[-1] * 2 < hi:
        edges.append(edges[-1] * 2)
    edges.append(hi + 1)
    if len(edges) < 4:
        return INCONCLUSIVE, math.nan
    centers, maxima = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (p >= a) & (p < b)
        if np.any(sel):
            centers.append(math.sqrt(a * b))
            maxima.append(values[sel].max())
    if len(centers) < 3:
        return INCONCLUSIVE, math.nan
    k = min(len(centers), 4)   # last dyadic windows cover the final ~94% of p
    x = np.log(np.array(centers[-k:]))
    y = np.log(np.array(maxima[-k:]))
    slope = float(np.polyfit(x, y, 1)[0])
    records = _record_signal(centers, maxima, lo, hi)
    if records is True:
        return FAILS, slope
    # a rising slope only counts as divergence when the late maxima exceed
    # everything seen before; otherwise the trace is oscillating inside its
    # historical range (block sequences do this with huge periods).  When
    # the record increments are demonstrably dying the sup is being
    # approached, not escaped, and the slope signal is overruled: block
    # boundary peaks creep upward by O(1/block) toward a finite sup, which
    # a window-max slope over factorially sparse boundaries cannot see.
    gate = math.log(hi) - (math.log(hi) - math.log(max(lo, 1))) / 3.0
    late = [m for c, m in zip(centers, maxima) if math.log(c) >= gate]
    early = [m for c, m in zip(centers, maxima) if math.log(c) < gate]
    new_high = bool(late) and bool(early) and max(late) > 1.02 * max(early)
    if slope >= SLOPE_FAILS and new_high and records is not False:
        return FAILS, slope
    if records is False or slope <= SLOPE_HOLDS or not new_high:
        return HOLDS, slope
    return INCONCLUSIVE, slope


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------

def check_property(M: WeightSequence, prop: str, r: float = 1.0,
                   Q: int = 2) -> PropertyReport:
    """Sequence-level condition check with three-valued verdict.

    prop in {normalized, lc, slc, mg, nq_r, gamma_r, beta1, beta3}.
    r parametrizes nq_r/gamma_r, Q the beta conditions.
    """
    P = M.horizon
    if P < 16:
        return PropertyReport(prop, INCONCLUSIVE, math.nan,
                              notes="horizon too small")
    lq = M.log_quotients

    if prop == "normalized":
        ok = M.is_normalized
        return PropertyReport(prop, HOLDS if ok else FAILS,
                              witness=float(np.exp(lq[1])))

    if prop in ("lc", "slc"):
        q = lq[1:].copy()
        if prop == "slc":
            q = q - np.log(np.arange(1, P + 1))
        worst = float(np.min(np.diff(q)))
        ok = worst >= -1e-12
        return PropertyReport(prop, HOLDS if ok else FAILS, witness=worst)

    if prop == "mg":
        p = np.arange(1, P // 2 + 1)
        ratio = np.exp(M.log_quotients[2 * p] - M.log_quotients[p])
        verdict, slope = trend_verdict(p, ratio)
        return PropertyReport(prop, verdict, witness=float(ratio.max()),
                              trace_p=p, trace_values=ratio,
                              notes=f"window-max slope {slope:.3g}")

    if prop == "nq_r":
        if r <= 0:
            raise SequenceError("nq_r needs r > 0")
        partial = float(np.sum(np.exp(-lq[1:] / r)))
        tail, divergent, e = tail_sum(M, r)
        verdict = FAILS if divergent else HOLDS
        total = partial + (0.0 if divergent else tail)
        return PropertyReport(prop, verdict, witness=total,
                              notes=f"partial {partial:.6g}, tail {tail:.3g}, "
                                    f"exponent {e:.3g}",
                              constants={"partial_sum": partial, "tail": tail,
                                         "exponent": e})

    if prop == "gamma_r":
        trace = mixed_gamma_statistic(M, M, r)
        return PropertyReport(prop, trace.verdict, witness=trace.sup,
                              trace_p=trace.p, trace_values=trace.values,
                              notes=trace.notes)

    if prop in ("beta1", "beta3"):
        if Q < 2:
            raise SequenceError("beta conditions need integer Q >= 2")
        hi = P // Q
        lo = 4
        if hi - lo < 4:
            return PropertyReport(prop, INCONCLUSIVE, math.nan,
                                  notes="horizon too small for this Q")
        p = np.arange(lo, hi + 1)
        ratio = np.exp(M.log_quotients[Q * p] - M.log_quotients[p])
        liminf = float(ratio.min())
        threshold = float(Q) if prop == "beta1" else 1.0
        margin = 0.05
        verdict = HOLDS if liminf > threshold * (1 + margin) else FAILS
        return PropertyReport(prop, verdict, witness=liminf,
                              trace_p=p, trace_values=ratio,
                              notes=f"Q={Q}, threshold {threshold}")

    raise SequenceError(f"unknown property {prop!r}")


def mixed_gamma_statistic(M: WeightSequence, N: WeightSequence,
                          r: float) -> MixedGammaTrace:
    """Trace of s_p = mu_p^(1/r)/p * sum_{k>=p} nu_k^(-1/r), p <= P/2.

    The suffix sums carry the tail estimate of `tail_sum`; if that tail is
    divergent the statistic is unbounded and the verdict is "fails".  The
    comparability constant C = max_p mu_p/nu_p is computed, never assumed.
    """
    if M.horizon != N.horizon:
        raise SequenceError("common horizon required")
    if r <= 0:
        raise SequenceError("r must be positive")
    P = N.horizon
    C = float(np.exp(np.max(M.log_quotients - N.log_quotients)))
    tail, divergent, e = tail_sum(N, r)
    p = np.arange(1, P // 2 + 1)
    if divergent:
        values = np.full(p.shape, math.inf)
        return MixedGammaTrace(p, values, math.inf, math.nan, FAILS, C,
                               tail, True,
                               notes=f"tail divergent (exponent {e:.3g} <= r)")
    terms = np.exp(-N.log_quotients[1:] / r)
    suffix = np.cumsum(terms[::-1])[::-1] + tail
    values = np.exp(M.log_quotients[p] / r) / p * suffix[p - 1]
    verdict, slope = trend_verdict(p, values)
    return MixedGammaTrace(p, values, float(values.max()), slope, verdict, C,
                           tail, False,
                           notes=f"window-max slope {slope:.3g}, "
                                 f"tail exponent {e:.3g}")


def compare_sequences(M: WeightSequence, N: WeightSequence) -> ComparisonReport:
    """Pointwise <=, quotient <=, rooted domination and equivalence."""
    if M.horizon != N.horizon:
        raise SequenceError("common horizon required")
    P = M.horizon
    p = np.arange(1, P + 1)
    diff = M.log_values - N.log_values

    gap = float(np.max(diff))
    leq = PropertyReport("leq", HOLDS if gap <= 1e-12 else FAILS, witness=gap)

    qgap = float(np.max(M.log_quotients - N.log_quotients))
    quotient_leq = PropertyReport("quotient_leq",
                                  HOLDS if qgap <= 1e-12 else FAILS,
                                  witness=qgap)

    # sup (M_p/N_p)^{1/p}: finite iff log(M_p/N_p)/p is bounded above
    rooted = diff[1:] / p
    verdict, slope = trend_verdict(p, np.exp(rooted))
    precedes = PropertyReport("precedes", verdict,
                              witness=float(np.exp(rooted.max())),
                              trace_p=p, trace_values=np.exp(rooted),
                              notes=f"window-max slope {slope:.3g}")

    verdict2, slope2 = trend_verdict(p, np.exp(np.abs(rooted)))
    equivalent = PropertyReport("equivalent", verdict2,
                                witness=float(np.exp(np.abs(rooted).max())),
                                notes=f"window-max slope {slope2:.3g}")
    return ComparisonReport(leq, quotient_leq, precedes, equivalent)
