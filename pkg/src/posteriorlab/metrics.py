"""Precision metrics between true and predicted posterior vectors.

Natural logarithm throughout.  A posterior vector is a 1-D float array
with entries in [0, 1] summing to 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KL_EPS = 1e-12


def _check_pair(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"posterior vectors must be 1-D and equal length, got {p.shape} vs {q.shape}")
    return p, q


def kl_divergence(p, q, weights=None) -> float:
    """sum_k p_k log(p_k / q_k) with q clamped below at ``KL_EPS``.

    Terms with p_k = 0 contribute 0.  ``weights`` optionally replaces the
    leading factor p_k (keeping the log ratio), for comparison against the
    variant that weights terms by the prior instead of the conditional; the
    default is the standard divergence.
    """
    kl, _ = kl_divergence_detailed(p, q, weights)
    return kl


def kl_divergence_detailed(p, q, weights=None) -> tuple[float, int]:
    """Like :func:`kl_divergence` but also reports how many q entries were clamped.

    A trained network can emit exact zeros after softmax underflow; the
    clamp bounds the metric instead of producing infinities, and callers
    can surface how often it fired.
    """
    p, q = _check_pair(p, q)
    if weights is None:
        lead = p
    else:
        lead = np.asarray(weights, dtype=np.float64)
        if lead.shape != p.shape:
            raise ValueError(f"weights must match posterior length, got {lead.shape}")
    active = lead != 0.0
    clamped = int(np.count_nonzero(active & (q < KL_EPS)))
    q_safe = np.maximum(q, KL_EPS)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(active, lead * (np.log(np.maximum(p, KL_EPS)) - np.log(q_safe)), 0.0)
    # p entries of exactly 0 are skipped above, so the p-clamp never binds.
    return float(np.sum(terms)), clamped


def abs_difference(p, q) -> float:
    """First-category absolute gap at K=2; half the L1 distance otherwise.

    The K>2 form is the total variation distance, which reduces to the
    two-category form exactly: |p_0 - q_0| = |p_1 - q_1| when both vectors
    sum to 1.
    """
    p, q = _check_pair(p, q)
    if p.shape[0] == 2:
        return float(abs(p[0] - q[0]))
    return float(0.5 * np.sum(np.abs(p - q)))


@dataclass(frozen=True)
class BinnedSeries:
    """Per-bin means of a value over equal-width bins of a factor.

    ``edges`` has ``num_bins + 1`` entries; empty bins carry count 0 and a
    NaN mean.
    """

    edges: np.ndarray
    means: np.ndarray
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def bin_average(factors, values, num_bins: int) -> BinnedSeries:
    """Average ``values`` in equal-width bins over the range of ``factors``."""
    factors = np.asarray(factors, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if factors.size == 0:
        raise ValueError("bin_average needs at least one point")
    if factors.shape != values.shape or factors.ndim != 1:
        raise ValueError("factors and values must be equal-length 1-D arrays")
    if num_bins < 1:
        raise ValueError(f"num_bins must be >= 1, got {num_bins}")
    lo, hi = float(factors.min()), float(factors.max())
    edges = np.linspace(lo, hi, num_bins + 1)
    if lo == hi:
        idx = np.zeros(factors.shape, dtype=np.int64)
    else:
        idx = np.clip(((factors - lo) / (hi - lo) * num_bins).astype(np.int64), 0, num_bins - 1)
    counts = np.bincount(idx, minlength=num_bins)
    sums = np.bincount(idx, weights=values, minlength=num_bins)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return BinnedSeries(edges=edges, means=means, counts=counts)


def _average_ranks(xs: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; ties receive the average of their rank block."""
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs), dtype=np.float64)
    sorted_xs = xs[order]
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and sorted_xs[j + 1] == sorted_xs[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def rank_correlation(xs, ys) -> float:
    """Spearman rank correlation in [-1, 1]; NaN if either input is constant."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("rank_correlation needs equal-length 1-D arrays")
    if xs.size < 2:
        raise ValueError("rank_correlation needs at least two points")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = np.sqrt(np.sum(rx * rx) * np.sum(ry * ry))
    if denom == 0.0:
        return float("nan")
    return float(np.sum(rx * ry) / denom)
