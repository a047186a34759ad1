"""Closed-form accuracy bounds and estimates for uniform bins.

Covers the classical empty-bin and twice-optimal-error bounds, their
combination, the exact expected accuracy ``1 - p + (2p - 1) G(m, 1/B, p)``,
and a lower bound on ``G`` that avoids ``m!`` entirely and stays cheap for
very large training sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp, xlogy

from .core_math import AccuracyEstimate, Method, _check_count, _check_prob, g_exact, log_factorials
from .exceptions import DomainError, ParameterError, UnreachableTargetError

__all__ = [
    "GApproxParams",
    "choose_truncation",
    "ea_g_lower_bound",
    "ea_uniform",
    "empty_bin_log_prob_bound",
    "empty_bin_log_prob_exact",
    "empty_bin_prob_bound",
    "empty_bin_prob_exact",
    "g_lower_bound",
    "min_training_size",
    "nonempty_ea_bound",
    "old_overall_bound",
]

# Beyond this the bracketing search gives up rather than build huge tables.
MAX_SEARCH_M = 10**9


def _check_bins(num_bins: int) -> int:
    if isinstance(num_bins, bool) or int(num_bins) != num_bins or num_bins < 1:
        raise DomainError(f"num_bins must be a positive integer, got {num_bins!r}")
    return int(num_bins)


def empty_bin_log_prob_exact(bin_prob: float, m: int) -> float:
    """``m * ln(1 - bin_prob)``; stays finite where the probability underflows."""
    if not (0.0 < bin_prob < 1.0):
        raise DomainError(f"bin_prob must be in (0, 1), got {bin_prob!r}")
    m = _check_count("m", m)
    return m * math.log1p(-bin_prob)


def empty_bin_prob_exact(bin_prob: float, m: int) -> float:
    """Probability that a bin with hit chance ``bin_prob`` gets no training data."""
    return math.exp(empty_bin_log_prob_exact(bin_prob, m))


def empty_bin_log_prob_bound(num_bins: int, m: int) -> float:
    num_bins = _check_bins(num_bins)
    m = _check_count("m", m)
    return -m / num_bins


def empty_bin_prob_bound(num_bins: int, m: int) -> float:
    """Upper bound ``exp(-m / B)`` on the empty-bin probability."""
    return math.exp(empty_bin_log_prob_bound(num_bins, m))


def nonempty_ea_bound(oa: float) -> float:
    """Accuracy floor when every bin is non-empty: error at most twice optimal."""
    oa = _check_prob("oa", oa, 0.5, 1.0)
    return 1.0 - 2.0 * (1.0 - oa)


def old_overall_bound(m: int, num_bins: int, p: float) -> float:
    """Combine the empty-bin and non-empty bounds into one accuracy floor.

    Empty bins are credited with coin-flip accuracy, the rest with
    ``2p - 1``, weighted by the bound ``exp(-m / B)`` on emptiness.
    """
    p = _check_prob("p", p, 0.5, 1.0)
    e = empty_bin_prob_bound(num_bins, m)
    return (1.0 - e) * (2.0 * p - 1.0) + 0.5 * e


def ea_uniform(m: int, num_bins: int, p: float, trunc_eps: float = 1e-12) -> AccuracyEstimate:
    """Exact expected accuracy of the mode-based learner with uniform bins.

    The absolute error is at most ``(2p - 1) * trunc_eps / 2``.
    """
    num_bins = _check_bins(num_bins)
    p = _check_prob("p", p, 0.5, 1.0)
    g = g_exact(m, 1.0 / num_bins, p, trunc_eps)
    value = min(1.0, max(0.0, 1.0 - p + (2.0 * p - 1.0) * g))
    return AccuracyEstimate(value, Method.EXACT, f"trunc_eps={trunc_eps:g}")


@dataclass(frozen=True)
class GApproxParams:
    """Truncation controls for :func:`g_lower_bound`.

    Attributes
    ----------
    outer_terms : int or None
        Index ``g`` of the last outer term kept; ``None`` chooses it
        adaptively from ``term_eps``.
    k_margin : float
        Inner sums run to ``c`` binomial standard deviations above ``m r``.
    term_eps : float
        Adaptive stop once an outer term drops below this fraction of the
        running sum.
    include_ties : bool
        Add the half-weighted even-count tie terms (including the empty bin).
        Without them the bound ignores ties entirely and sits roughly
        ``0.5 (1 - r)**m`` below ``G``.
    """

    outer_terms: int | None = None
    k_margin: float = 12.0
    term_eps: float = 1e-12
    include_ties: bool = True

    def __post_init__(self):
        if not (0.0 < self.term_eps <= 1e-3):
            raise ParameterError(f"term_eps must be in (0, 1e-3], got {self.term_eps!r}")
        if not self.k_margin > 0:
            raise ParameterError(f"k_margin must be positive, got {self.k_margin!r}")
        if self.outer_terms is not None and (int(self.outer_terms) != self.outer_terms or self.outer_terms < 0):
            raise ParameterError(f"outer_terms must be a non-negative integer, got {self.outer_terms!r}")


def _max_outer(m: int, include_ties: bool) -> int:
    return m // 2 if include_ties else (m - 1) // 2


def _inner_limit(m: int, r: float, j: int, c: float) -> int:
    mean = m * r
    return min(m, math.ceil(mean + c * math.sqrt(mean * (1.0 - r))) + 2 * j + 1)


def _log_outer_term(m: int, r: float, p: float, j: int, k: int, include_ties: bool) -> float:
    # (1-r)^m ((1-p)/p)^j sum_n C(n,j) x^n / n!, with C(n,j)/n! = 1/(j! (n-j)!).
    start = 2 * j if include_ties else 2 * j + 1
    if k < start:
        return -math.inf
    x = r * p * (m - k) / (1.0 - r)
    n = np.arange(start, k + 1)
    lf = log_factorials(k)
    inner = xlogy(n, x) - lf[j] - lf[n - j]
    if include_ties:
        inner[0] += math.log(0.5)
    return m * math.log1p(-r) + float(xlogy(j, (1.0 - p) / p)) + float(logsumexp(inner))


def _truncate(m, r, p, params):
    gmax = _max_outer(m, params.include_ties)
    if params.outer_terms is not None and params.outer_terms > gmax:
        raise ParameterError(f"outer_terms={params.outer_terms} exceeds the largest index {gmax} for m={m}")
    ks: list[int] = []
    log_terms: list[float] = []
    log_acc = -math.inf
    stop = gmax if params.outer_terms is None else params.outer_terms
    log_eps = math.log(params.term_eps)
    for j in range(stop + 1):
        k = _inner_limit(m, r, j, params.k_margin)
        t = _log_outer_term(m, r, p, j, k, params.include_ties)
        ks.append(k)
        log_terms.append(t)
        if params.outer_terms is None and j > 0 and t <= log_eps + log_acc:
            break
        log_acc = np.logaddexp(log_acc, t)
    return len(ks) - 1, ks, log_terms


def _check_g_args(m, r, p):
    m = _check_count("m", m)
    r = float(r)
    if not (0.0 < r < 1.0):
        raise DomainError(f"r must be in (0, 1), got {r!r}")
    p = float(p)
    if not (0.5 < p <= 1.0):
        raise DomainError(f"p must be in (0.5, 1], got {p!r}")
    return m, r, p


def choose_truncation(m: int, r: float, p: float, params: GApproxParams = GApproxParams()) -> tuple[int, list[int]]:
    """Pick the outer cutoff ``g`` and inner limits ``k_j`` for the lower bound.

    ``k_j = min(m, ceil(m r + c sqrt(m r (1 - r))) + 2j + 1)``. With adaptive
    ``g``, outer terms are generated until one falls below ``term_eps`` of the
    running total; the geometric factor ``((1 - p) / p)**j`` makes that quick
    for ``p`` well above one half.
    """
    m, r, p = _check_g_args(m, r, p)
    g, ks, _ = _truncate(m, r, p, params)
    return g, ks


def g_lower_bound(
    m: int,
    r: float,
    p: float,
    params: GApproxParams = GApproxParams(),
    inner_limits: Sequence[int] | None = None,
) -> float:
    """Lower bound on ``G(m, r, p)`` that never evaluates ``m!``.

    The binomial ``C(m, n) r**n (1 - r)**(m - n)`` is rewritten around
    ``m! / (m - n)!`` and then bounded below by ``(m - k_j)**n`` for every
    ``n <= k_j``. With ``x_j = r p (m - k_j) / (1 - r)`` this leaves

        sum_{j=0}^{g} (1 - r)**m ((1 - p) / p)**j sum_n C(n, j) x_j**n / n!

    with ``n`` running from ``2j + 1`` to ``k_j`` (from ``2j``, at half
    weight, when ties are included). Each dropped term is non-negative, so
    any ``g`` and ``k_j <= m`` give a valid bound.

    Parameters
    ----------
    m, r, p
        Training size, bin hit probability in (0, 1), majority probability
        in (0.5, 1].
    params
        Truncation controls; see :class:`GApproxParams`.
    inner_limits
        Explicit ``k_0 .. k_g``. Overrides ``params`` for both ``g`` and ``k``.
    """
    m, r, p = _check_g_args(m, r, p)
    if inner_limits is None:
        _, _, log_terms = _truncate(m, r, p, params)
    else:
        ks = [int(k) for k in inner_limits]
        if any(k > m for k in ks):
            raise ParameterError(f"every k_j must be <= m={m}, got {ks}")
        if len(ks) - 1 > _max_outer(m, params.include_ties):
            raise ParameterError(f"{len(ks)} outer terms is too many for m={m}")
        log_terms = [_log_outer_term(m, r, p, j, k, params.include_ties) for j, k in enumerate(ks)]
    if not log_terms:
        return 0.0
    return float(min(1.0, math.exp(logsumexp(log_terms))))


def ea_g_lower_bound(
    m: int, num_bins: int, p: float, params: GApproxParams = GApproxParams()
) -> AccuracyEstimate:
    """Expected accuracy with the ``G`` lower bound in place of exact ``G``."""
    num_bins = _check_bins(num_bins)
    p = _check_prob("p", p, 0.5, 1.0)
    if p == 0.5:
        return AccuracyEstimate(0.5, Method.G_LOWER_BOUND, "p=0.5")
    if num_bins == 1:
        # r = 1 leaves no room for the (1 - r) rewrite; G is just T(m, p).
        g = g_exact(m, 1.0, p)
        detail = "single bin, exact"
    else:
        g = g_lower_bound(m, 1.0 / num_bins, p, params)
        detail = f"k_margin={params.k_margin:g}, term_eps={params.term_eps:g}"
    value = min(1.0, max(0.0, 1.0 - p + (2.0 * p - 1.0) * g))
    return AccuracyEstimate(value, Method.G_LOWER_BOUND, detail)


def min_training_size(target_ea: float, num_bins: int, p: float, trunc_eps: float = 1e-12) -> int:
    """Smallest training size whose exact expected accuracy reaches ``target_ea``.

    Relies on expected accuracy being non-decreasing in ``m``: doubles an
    upper bracket until the target is met, then bisects.

    Raises
    ------
    UnreachableTargetError
        If ``target_ea >= p``; accuracy only approaches ``p`` from below.
    """
    target_ea = _check_prob("target_ea", target_ea, 0.5, 1.0)
    num_bins = _check_bins(num_bins)
    p = _check_prob("p", p, 0.5, 1.0)
    if target_ea >= p:
        raise UnreachableTargetError(target_ea, p)

    def reached(m: int) -> bool:
        return ea_uniform(m, num_bins, p, trunc_eps).value >= target_ea

    if reached(0):
        return 0
    lo, hi = 0, 1
    while not reached(hi):
        lo, hi = hi, 2 * hi
        if hi > MAX_SEARCH_M:
            raise ParameterError(f"target {target_ea:g} needs more than {MAX_SEARCH_M} training instances")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reached(mid):
            hi = mid
        else:
            lo = mid
    return hi
