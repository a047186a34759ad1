"""Exact probability kernels for the mode-based learner.

A learner sees instances that fall into *bins*; each bin has a majority value
occurring with probability ``p``. After training it predicts the most frequent
value seen in each bin, flipping a fair coin on ties and on empty bins.

Everything here is computed in log space on top of a shared table of log
factorials, so training sizes in the millions neither overflow nor underflow.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .exceptions import DomainError, ValidationError

__all__ = [
    "AccuracyEstimate",
    "BinTable",
    "Method",
    "ProblemSpec",
    "bin_accuracy",
    "binomial_pmf_window",
    "expected_accuracy_table",
    "g_exact",
    "log_binomial_pmf",
    "log_factorials",
    "majority_win_prob",
    "majority_win_table",
    "optimal_accuracy",
]


class _LogFactorialTable:
    """Grow-only table of ``ln(n!)``.

    The published array is never mutated; growing replaces it wholesale, so
    readers on other threads always see a consistent snapshot.
    """

    def __init__(self, initial: int = 1024):
        self._lock = threading.Lock()
        self._table = self._build(initial)

    @staticmethod
    def _build(n: int) -> np.ndarray:
        table = gammaln(np.arange(n + 1, dtype=np.float64) + 1.0)
        table.setflags(write=False)
        return table

    def upto(self, n: int) -> np.ndarray:
        table = self._table
        if n < len(table):
            return table
        with self._lock:
            if n >= len(self._table):
                size = max(n, 2 * (len(self._table) - 1))
                self._table = self._build(size)
            return self._table


_LOG_FACTORIALS = _LogFactorialTable()
# Larger arguments go straight to gammaln instead of growing the table.
_TABLE_CAP = 1 << 24


def log_factorials(n: int) -> np.ndarray:
    """Read-only array whose entry ``k`` is ``ln(k!)``, valid for ``k <= n``."""
    return _LOG_FACTORIALS.upto(int(n))


def _check_prob(name: str, q: float, lo: float = 0.0, hi: float = 1.0) -> float:
    q = float(q)
    if not (lo <= q <= hi):
        raise DomainError(f"{name} must be in [{lo:g}, {hi:g}], got {q!r}")
    return q


def _check_count(name: str, n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {n!r}")
    return int(n)


def _log_pmf_array(ks: np.ndarray, n: int, q: float) -> np.ndarray:
    ks = np.asarray(ks, dtype=np.int64)
    if n <= _TABLE_CAP:
        lf = log_factorials(n)
        log_comb = lf[n] - lf[ks] - lf[n - ks]
    else:
        log_comb = gammaln(n + 1.0) - gammaln(ks + 1.0) - gammaln(n - ks + 1.0)
    # xlogy / xlog1py give 0 * log(0) = 0, i.e. the 0**0 = 1 convention.
    return log_comb + xlogy(ks, q) + xlog1py(n - ks, -q)


def log_binomial_pmf(k: int, n: int, q: float) -> float:
    """Natural log of ``C(n, k) q**k (1 - q)**(n - k)``.

    Returns ``-inf`` for impossible outcomes (e.g. ``k > 0`` with ``q == 0``).

    Examples
    --------
    >>> log_binomial_pmf(0, 0, 0.3)
    0.0
    >>> round(log_binomial_pmf(1, 1, 0.9), 5)
    -0.10536
    """
    k = _check_count("k", k)
    n = _check_count("n", n)
    q = _check_prob("q", q)
    if k > n:
        raise DomainError(f"k must not exceed n (k={k}, n={n})")
    return float(_log_pmf_array(np.array([k]), n, q)[0])


def majority_win_prob(n: int, p: float) -> float:
    """Probability the learner picks the majority value after ``n`` draws.

    This is the binomial mass strictly above ``n/2`` plus half the mass of an
    exact tie when ``n`` is even. An empty bin (``n == 0``) is a pure tie, so
    the result is 0.5 for every ``p``. Evaluated through
    :func:`majority_win_table`, which is exactly monotone in ``n`` and
    symmetric under ``p -> 1 - p``.
    """
    n = _check_count("n", n)
    p = _check_prob("p", p)
    return float(majority_win_table(n, p)[n])


def majority_win_table(n_max: int, p: float) -> np.ndarray:
    """``majority_win_prob(n, p)`` for every ``n`` in ``0..n_max`` at once.

    Adding two draws to an odd sample of size ``2k - 1`` changes the win
    probability by ``(2p - 1) C(2k - 1, k) (p (1 - p))**k``; an even sample
    ``2k`` ties the odd sample ``2k - 1``. Accumulating those increments costs
    O(n_max) instead of O(n_max**2).
    """
    n_max = _check_count("n_max", n_max)
    p = _check_prob("p", p)
    out = np.empty(n_max + 1)
    out[0] = 0.5
    if n_max == 0:
        return out
    k = np.arange(1, (n_max - 1) // 2 + 1)
    lf = log_factorials(n_max)
    log_inc = lf[2 * k - 1] - lf[k] - lf[k - 1] + xlogy(k, p * (1.0 - p))
    odd = p + (2.0 * p - 1.0) * np.concatenate(([0.0], np.cumsum(np.exp(log_inc))))
    np.clip(odd, 0.0, 1.0, out=odd)
    out[1::2] = odd
    out[2::2] = odd[: len(out[2::2])]
    return out


def bin_accuracy(n: int, p: float) -> float:
    """Chance a fresh test instance matches the mode learned from ``n`` draws."""
    t = majority_win_prob(n, p)
    return p * t + (1.0 - p) * (1.0 - t)


def binomial_pmf_window(m: int, r: float, eps: float) -> tuple[int, np.ndarray, float]:
    """Smallest run of counts holding all but ``eps`` of ``Binomial(m, r)``.

    Returns ``(lo, pmf, discarded)`` where ``pmf[i]`` is the mass at count
    ``lo + i`` and ``discarded`` is the mass outside the run. The binomial is
    unimodal, so keeping the largest masses until only ``eps`` remains always
    yields a contiguous run around the mode.
    """
    mean = m * r
    sd = math.sqrt(mean * (1.0 - r))
    # Beyond ~40 sd the mass is far below double precision.
    lo = max(0, int(math.floor(mean - 40.0 * sd - 10.0)))
    hi = min(m, int(math.ceil(mean + 40.0 * sd + 10.0)))
    ks = np.arange(lo, hi + 1)
    logp = _log_pmf_array(ks, m, r)
    # Normalizing cancels the rounding shared through ln(m!) at large m.
    pmf = np.exp(logp - logp.max())
    pmf /= pmf.sum()

    order = np.argsort(pmf, kind="stable")
    dropped = np.cumsum(pmf[order])
    n_drop = int(np.searchsorted(dropped, eps, side="right"))
    keep = order[n_drop:]
    first, last = int(keep.min()), int(keep.max())
    window = pmf[first : last + 1]
    discarded = max(0.0, 1.0 - float(window.sum()))
    return lo + first, window, discarded


def g_exact(m: int, r: float, p: float, trunc_eps: float = 1e-12) -> float:
    """Probability that a bin hit with chance ``r`` ends up with a correct mode.

    ``G(m, r, p) = sum_n Binomial(n; m, r) * T(n, p)`` where ``T`` is
    :func:`majority_win_prob` (ties counted as half). Only the count window
    carrying all but ``trunc_eps`` of the binomial mass is summed; the
    discarded mass is credited at 0.5, the midpoint of its possible
    contribution, so the absolute error is at most ``trunc_eps / 2``.
    """
    m = _check_count("m", m)
    r = float(r)
    if not (0.0 < r <= 1.0):
        raise DomainError(f"r must be in (0, 1], got {r!r}")
    p = _check_prob("p", p)
    if not (0.0 < trunc_eps <= 1e-6):
        raise DomainError(f"trunc_eps must be in (0, 1e-6], got {trunc_eps!r}")
    if m == 0:
        return 0.5

    lo, pmf, discarded = binomial_pmf_window(m, r, trunc_eps)
    hi = lo + len(pmf) - 1
    wins = majority_win_table(hi, p)[lo : hi + 1]
    g = float(np.dot(pmf, wins)) + 0.5 * discarded
    return min(1.0, max(0.0, g))


@dataclass(frozen=True)
class ProblemSpec:
    """Uniform-bin learning problem: ``num_bins`` bins, majority probability, ``m``."""

    num_bins: int
    majority_prob: float
    training_size: int

    def __post_init__(self):
        if isinstance(self.num_bins, bool) or int(self.num_bins) != self.num_bins or self.num_bins < 1:
            raise ValidationError(f"num_bins must be a positive integer, got {self.num_bins!r}")
        if not (0.5 <= self.majority_prob <= 1.0):
            raise ValidationError(f"p must be in [0.5, 1], got {self.majority_prob!r}")
        _check_count("training_size", self.training_size)


@dataclass(frozen=True)
class BinTable:
    """Per-bin probabilities ``Pr(b)`` and majority probabilities ``Pr(v_b | b)``."""

    bin_probs: np.ndarray
    majority_probs: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.bin_probs, dtype=np.float64)
        mp = np.asarray(self.majority_probs, dtype=np.float64)
        if bp.ndim != 1 or mp.ndim != 1 or bp.shape != mp.shape or bp.size == 0:
            raise ValidationError("bin_probs and majority_probs must be non-empty vectors of equal length")
        if np.any(bp < 0) or abs(math.fsum(bp) - 1.0) > 1e-12:
            raise ValidationError("bin_probs must be non-negative and sum to 1")
        if np.any(mp < 0.5) or np.any(mp > 1.0):
            raise ValidationError("majority_probs must lie in [0.5, 1]")
        bp.setflags(write=False)
        mp.setflags(write=False)
        object.__setattr__(self, "bin_probs", bp)
        object.__setattr__(self, "majority_probs", mp)


class Method(str, enum.Enum):
    EXACT = "exact"
    OLD_BOUND = "old_bound"
    G_LOWER_BOUND = "g_lower_bound"
    SIMULATED = "simulated"
    OPTIMAL = "optimal"


@dataclass(frozen=True)
class AccuracyEstimate:
    value: float
    method: Method
    detail: str = field(default="")

    def __post_init__(self):
        if not (0.0 <= self.value <= 1.0):
            raise ValidationError(f"accuracy must be in [0, 1], got {self.value!r}")
        object.__setattr__(self, "method", Method(self.method))


def optimal_accuracy(table: BinTable) -> float:
    """Accuracy of always predicting each bin's true majority value."""
    return float(np.dot(table.bin_probs, table.majority_probs))


def expected_accuracy_table(table: BinTable, learn_probs) -> float:
    """Expected accuracy given per-bin probabilities of learning the majority value."""
    learn = np.asarray(learn_probs, dtype=np.float64)
    if learn.shape != table.bin_probs.shape:
        raise ValidationError(
            f"learn_probs has length {learn.size}, table has {table.bin_probs.size} bins"
        )
    if np.any(learn < 0) or np.any(learn > 1):
        raise ValidationError("learn_probs entries must lie in [0, 1]")
    q = table.majority_probs
    per_bin = learn * q + (1.0 - learn) * (1.0 - q)
    return float(min(1.0, max(0.0, np.dot(table.bin_probs, per_bin))))
