"""Descendant construction, block-example generators, and the heir wiring.

The block examples are generated exactly from their closed formulas: block
boundaries (factorials, the integer recursion c_n / d_n) are computed in
Python integers, only the final log-quotient values are floats.  Floating
recursion on M_p values would smear block boundaries and the whole point of
these sequences lives at the boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sequences import (
    DEFAULT_HORIZON,
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    PropertyReport,
    SequenceError,
    WeightSequence,
    check_property,
    mixed_gamma_statistic,
    tail_sum,
    transform_sequence,
    trend_verdict,
)


@dataclass(frozen=True)
class DescendantResult:
    source: WeightSequence
    r: float
    tau: np.ndarray                # tau^r_k for k = 1..P
    sigma: WeightSequence          # S^{N,r} stored through quotients sigma_k
    L: WeightSequence              # (S^{N,r})^r
    domination_constant: float     # C with sigma_k <= C nu_k^{1/r}
    tail: float
    tail_relative_error: float
    mixed_statistic_verdict: str
    notes: str = ""


def descendant(N: WeightSequence, r: float = 1.0) -> DescendantResult:
    """Descendant S^{N,r}: quotients sigma_k = tau_1 * k / tau_k.

    tau^r_k = k / nu_k^{1/r} + sum_{j>=k} nu_j^{-1/r}, with the suffix sum
    carrying the standard power-law tail estimate.  Requires (nq_r) for N;
    a divergent tail is a hard error.  Strong log-convexity of s = S/k! is
    asserted (it is what makes the construction work), not merely reported.
    """
    if r <= 0:
        raise SequenceError("r must be positive")
    nq = check_property(N, "nq_r", r=r)
    if nq.verdict != HOLDS:
        raise SequenceError(f"(nq_r) fails for r={r}: descendant undefined")
    P = N.horizon
    tail, divergent, _ = tail_sum(N, r)
    if divergent:
        raise SequenceError("divergent quotient tail")
    k = np.arange(1, P + 1)
    terms = np.exp(-N.log_quotients[1:] / r)
    suffix = np.cumsum(terms[::-1])[::-1] + tail
    tau = k * terms + suffix
    log_sigma = np.concatenate(([0.0], np.log(tau[0]) + np.log(k) - np.log(tau)))
    sigma = WeightSequence(log_sigma, label=f"descendant({N.label}; r={r})")

    # s^{N,r} = S / k! strongly log-convex: quotient sigma_k / k nondecreasing.
    slc = check_property(sigma, "slc")
    if slc.verdict != HOLDS:
        raise AssertionError(
            f"descendant lost strong log-convexity (worst gap {slc.witness:.3g})")

    L = transform_sequence(sigma, "power", rho=r)
    dom = float(np.exp(np.max(log_sigma[1:] - N.log_quotients[1:] / r)))
    # tail uncertainty: the estimate enters tau_1 (hence every sigma_k)
    # multiplicatively through tau_1/tau_k; bound its relative effect by the
    # tail share of tau_1.
    tail_rel = tail / tau[0]
    mixed = mixed_gamma_statistic(sigma, transform_sequence(N, "power", rho=1.0 / r), 1.0)
    return DescendantResult(N, r, tau, sigma, L, dom, tail, tail_rel,
                            mixed.verdict,
                            notes=f"mixed statistic sup {mixed.sup:.4g}")


def descendant_mg_check(N: WeightSequence):
    """Moderate-growth test for the descendant, straight from the source.

    Returns (main, alternative): the fitted-constant form
    nu_{2k}/nu_k <= C + C (nu_{2k}/2k) sum_{j>=2k} nu_j^{-1}, and the
    sufficient liminf statistic (nu_k/k) sum_{j>=2k} nu_j^{-1} > 0.
    """
    nq = check_property(N, "nq_r", r=1.0)
    if nq.verdict != HOLDS:
        raise SequenceError("(nq) fails: check undefined")
    P = N.horizon
    if P < 64:
        raise SequenceError("horizon too small for 2k indexing")
    tail, _, _ = tail_sum(N, 1.0)
    terms = np.exp(-N.log_quotients[1:])
    suffix = np.cumsum(terms[::-1])[::-1] + tail   # suffix[j-1] = sum_{i>=j}
    k = np.arange(1, P // 2 + 1)
    ratio = np.exp(N.log_quotients[2 * k] - N.log_quotients[k])
    rhs_core = 1.0 + np.exp(N.log_quotients[2 * k]) / (2 * k) * suffix[2 * k - 1]
    stat = ratio / rhs_core
    C = float(stat.max())
    verdict, slope = trend_verdict(k, stat)
    main = PropertyReport("descendant-mg", verdict, witness=C,
                          trace_p=k, trace_values=stat,
                          notes=f"fitted C, window-max slope {slope:.3g}",
                          constants={"C": C})

    alt_vals = np.exp(N.log_quotients[k]) / k * suffix[2 * k - 1]
    lo = max(4, len(k) // 8)
    liminf = float(alt_vals[lo:].min())
    alt = PropertyReport("descendant-mg-liminf",
                         HOLDS if liminf > 1e-6 else FAILS,
                         witness=liminf, trace_p=k, trace_values=alt_vals,
                         notes="sufficient condition: liminf > 0")
    return main, alt


def heir_pair_for_sector(omega, r: float):
    """Companion weight sigma for extensions on a sector of opening r.

    sigma is the normalized level-r heir kappa of omega, the minimal weight
    with gamma(sigma, omega) >= r; the returned certificate is the
    gamma(sigma, omega) bracket, which must contain r.  Requires the order
    of quasianalyticity of omega to exceed r, otherwise no such companion
    exists and the construction is refused.
    """
    from . import weights as wf
    from .indices import gamma_mixed_weights, mu_of_weight

    if r <= 0:
        raise SequenceError("sector opening must be positive")
    mu = mu_of_weight(omega)
    if not mu.unbounded and mu.r_lo <= r:
        raise wf.WeightError(
            f"order of quasianalyticity bracket [{mu.r_lo:.4g}, "
            f"{mu.r_hi:.4g}] does not exceed r={r:g}: no heir companion")
    sigma = wf.kappa_heir(omega, r, normalize=True)
    certificate = gamma_mixed_weights(sigma, omega)
    # the pair must admit the opening r; for weights comparable to their
    # heir the bracket sits at the full order, strictly above r
    if not certificate.unbounded and certificate.r_hi < r:
        raise wf.WeightError(
            f"heir certificate bracket [{certificate.r_lo:.4g}, "
            f"{certificate.r_hi:.4g}] excludes r={r:g}")
    return sigma, certificate


# ---------------------------------------------------------------------------
# example generators
# ---------------------------------------------------------------------------

def factorial_block_example(P: int = DEFAULT_HORIZON) -> WeightSequence:
    """Quotients nu_k = 2^p * p! * p on the block p! <= k < (p+1)!.

    The reciprocal quotients then sum to exactly 2^{-p} per complete block,
    so sum 1/nu_j = 1: non-quasianalytic, but moderate growth fails at the
    block boundaries.
    """
    lq = np.zeros(P + 1)
    p = 1
    block_lo = 1   # p! for p = 1
    while block_lo <= P:
        block_hi = block_lo * (p + 1)   # (p+1)!
        hi = min(block_hi - 1, P)
        val = p * math.log(2.0) + math.lgamma(p + 1) + math.log(p)
        lq[block_lo:hi + 1] = val
        p += 1
        block_lo = block_hi
    return WeightSequence(lq, label=f"factorial-block[P={P}]")


def langenbruch_example(gamma: float, variant: str = "mg",
                        P: int = DEFAULT_HORIZON) -> WeightSequence:
    """Block recursion c_1=1, d_n=floor(c_n^(alpha/gamma))+1, c_{n+1}=floor(d_n^gamma)+1.

    Quotients: mu_k = c_n^alpha on c_n <= k <= d_n - 1 (flat block) and
    mu_k = k^beta / d_n^gamma on d_n <= k <= c_{n+1} - 1 (growth block).
    variant "mg" uses beta = 2*gamma, alpha = 2*gamma - 1 (moderate growth
    holds); variant "no-mg" uses beta = 2*gamma + 1, alpha = 2*gamma.
    """
    if gamma <= 1:
        raise SequenceError("gamma must exceed 1")
    if variant == "mg":
        alpha, beta = 2 * gamma - 1, 2 * gamma
    elif variant == "no-mg":
        alpha, beta = 2 * gamma, 2 * gamma + 1
    else:
        raise SequenceError(f"unknown variant {variant!r}")

    lq = np.zeros(P + 1)
    c = 1
    while c <= P:
        d = math.floor(c ** (alpha / gamma)) + 1
        c_next = math.floor(d ** gamma) + 1
        flat_hi = min(d - 1, P)
        if c <= flat_hi:
            lq[c:flat_hi + 1] = alpha * math.log(c)
        if d <= P:
            hi = min(c_next - 1, P)
            k = np.arange(d, hi + 1)
            lq[d:hi + 1] = beta * np.log(k) - gamma * math.log(d)
        c = c_next
    return WeightSequence(
        lq, label=f"langenbruch[gamma={gamma},{variant},P={P}]")


def mixed_pair_example(gamma_prime: float, gamma: float, variant: str = "mg",
                       P: int = DEFAULT_HORIZON):
    """Pair (M, N) of block sequences with gamma(M,N) = gamma, gamma(M) = 0.

    Admissibility: gamma'(2*gamma'-1) <= gamma for the mg variant, or
    2*gamma'^2 <= gamma for the no-mg variant; additionally 1 < gamma' < gamma.
    The quotient domination mu_p <= nu_p is verified, not assumed.
    """
    if not 1 < gamma_prime < gamma:
        raise SequenceError("need 1 < gamma' < gamma")
    bound = gamma_prime * (2 * gamma_prime - 1) if variant == "mg" \
        else 2 * gamma_prime ** 2
    if bound > gamma + 1e-12:
        raise SequenceError(
            f"constraint violated: {bound:.4g} > gamma = {gamma}")
    M = langenbruch_example(gamma_prime, variant, P)
    N = langenbruch_example(gamma, variant, P)
    gap = np.max(M.log_quotients - N.log_quotients)
    if gap > 1e-12:
        bad = int(np.argmax(M.log_quotients - N.log_quotients))
        raise SequenceError(f"mu_p <= nu_p fails first at p={bad}")
    return M, N
