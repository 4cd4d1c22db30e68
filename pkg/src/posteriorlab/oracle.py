"""Exact ground-truth quantities of a prescribed mixture.

Given the generative model, the category posterior has the closed form

    p(y=k | x) = w_k phi_k(x) / sum_j w_j phi_j(x)

All ratios here are evaluated in log space.  The interesting regime for
classifier assessment is exactly where naive products underflow (low
density, far tails), so log densities are combined with the max-subtracted
softmax / log-sum-exp pattern throughout; posteriors stay well-defined for
any finite location because only log-density *differences* enter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mixtures import Mixture1D, Mixture2D, pdf_1d, pdf_2d


class TwoClusterRequiredError(ValueError):
    """Raised when the two-cluster sparsity is asked of a K != 2 mixture."""


def _softmax_last(logs: np.ndarray) -> np.ndarray:
    m = np.max(logs, axis=-1, keepdims=True)
    e = np.exp(logs - m)
    return e / np.sum(e, axis=-1, keepdims=True)


def _check_finite_location(x, dim_name: str):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{dim_name} must be finite, got {x!r}")
    return arr


def posterior_1d(model: Mixture1D, x) -> np.ndarray:
    """True posterior over categories at ``x`` (scalar -> (K,), (n,) -> (n, K))."""
    x = _check_finite_location(x, "x")
    return _softmax_last(model.log_weighted_densities(x))


def posterior_2d(model: Mixture2D, v) -> np.ndarray:
    """True posterior at a 2-D location ``v`` ((2,) -> (K,), (n, 2) -> (n, K))."""
    v = _check_finite_location(v, "v")
    return _softmax_last(model.log_weighted_densities(v))


def sparsity_two_cluster(model: Mixture1D, x):
    """|w1 phi1 - w2 phi2| / (w1 phi1 + w2 phi2), in [0, 1].

    With a = log(w1 phi1) and b = log(w2 phi2) this ratio is
    tanh(|a - b| / 2), which stays exact when one side underflows
    (|a - b| -> inf gives 1).
    """
    if model.num_categories != 2:
        raise TwoClusterRequiredError(
            f"two-cluster sparsity needs K=2, got K={model.num_categories}; "
            "use sparsity_hg for multi-component mixtures"
        )
    x = _check_finite_location(x, "x")
    logs = model.log_weighted_densities(x)
    a, b = logs[..., 0], logs[..., 1]
    with np.errstate(invalid="ignore"):
        diff = np.abs(a - b)  # inf - inf only if both weights are 0 (impossible)
    return np.tanh(0.5 * diff)


def sparsity_hg(model, x):
    """Multi-cluster sparsity: -sum_k log(w_k phi_k(x)).

    Unbounded; may be negative where weighted densities exceed 1.  Computed
    from analytic log densities, so the result is finite for any finite
    location as long as every weight is strictly positive.
    """
    x = _check_finite_location(x, "x")
    return -np.sum(model.log_weighted_densities(x), axis=-1)


@dataclass(frozen=True)
class FactorReport:
    """Ground truth at one location: density, sparsity, posterior."""

    x: tuple
    density: float
    sparsity: float
    posterior: np.ndarray


def factor_report(model, x) -> FactorReport:
    """Bundle density, the applicable sparsity, and the posterior at ``x``.

    Two-cluster mixtures report the bounded contribution ratio; anything
    else reports the unbounded multi-cluster measure.
    """
    if isinstance(model, Mixture1D):
        density = float(pdf_1d(model, x))
        post = posterior_1d(model, x)
        loc = (float(x),)
    elif isinstance(model, Mixture2D):
        density = float(pdf_2d(model, x))
        post = posterior_2d(model, x)
        loc = tuple(float(a) for a in np.asarray(x).reshape(2))
    else:
        raise TypeError(f"not a mixture model: {type(model).__name__}")
    if model.num_categories == 2:
        sparsity = float(sparsity_two_cluster(model, x))
    else:
        sparsity = float(sparsity_hg(model, x))
    return FactorReport(x=loc, density=density, sparsity=sparsity, posterior=post)
