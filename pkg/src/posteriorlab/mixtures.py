"""Prescribed Gaussian-mixture generative models and labeled sampling.

A mixture couples prior category weights ``p(y=k)`` with one Gaussian
component per category.  The mixture is the ground-truth generative model:
everything downstream (exact posteriors, trained classifiers, sweeps)
derives from these objects.  Models are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import standard_normals, stream

_LOG_2PI = float(np.log(2.0 * np.pi))

WEIGHT_SUM_TOL = 1e-12


def _as_float_array(value, shape, name) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Gaussian1D:
    """Normal component with location ``mu`` and standard deviation ``sigma``."""

    mu: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def log_pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - np.log(self.sigma) - 0.5 * _LOG_2PI

    def pdf(self, x):
        return np.exp(self.log_pdf(x))


@dataclass(frozen=True, eq=False)
class Gaussian2D:
    """Bivariate normal with mean 2-vector and symmetric positive-definite cov."""

    mu: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mu = _as_float_array(self.mu, (2,), "mu")
        cov = _as_float_array(self.cov, (2, 2), "cov")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise ValueError("cov must be symmetric")
        eigvals = np.linalg.eigvalsh(cov)
        if np.min(eigvals) <= 0:
            raise ValueError(f"cov must be positive definite, eigenvalues {eigvals}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)
        # Cached factorizations; cov is 2x2 so closed forms are exact enough.
        chol = np.linalg.cholesky(cov)
        det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
        inv = np.array(
            [[cov[1, 1], -cov[0, 1]], [-cov[1, 0], cov[0, 0]]], dtype=np.float64
        ) / det
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_inv", inv)
        object.__setattr__(self, "_log_norm", -0.5 * (2.0 * _LOG_2PI + np.log(det)))

    @property
    def cholesky(self) -> np.ndarray:
        return self._chol

    def log_pdf(self, v):
        v = np.asarray(v, dtype=np.float64)
        d = v - self.mu
        q = np.einsum("...i,ij,...j->...", d, self._inv, d)
        return self._log_norm - 0.5 * q

    def pdf(self, v):
        return np.exp(self.log_pdf(v))


def _validate_weights(weights, k):
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (k,):
        raise ValueError(f"need one weight per component, got {w.shape} for K={k}")
    if np.any(w < 0) or np.any(w > 1):
        raise ValueError(f"weights must lie in [0, 1], got {w}")
    if abs(float(w.sum()) - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got sum {w.sum()!r}")
    w = w.copy()
    w.flags.writeable = False
    return w


class _MixtureBase:
    """Shared mixture behavior; subclasses fix the component type and dim."""

    @property
    def num_categories(self) -> int:
        return len(self.components)

    def log_weights(self) -> np.ndarray:
        # Degenerate zero weights are tolerated: log 0 -> -inf drops the
        # component from posteriors and densities without special cases.
        with np.errstate(divide="ignore"):
            return np.log(self.weights)

    def log_weighted_densities(self, x) -> np.ndarray:
        """log(w_k * phi_k(x)) for all k; last axis indexes components."""
        logs = np.stack([c.log_pdf(x) for c in self.components], axis=-1)
        return logs + self.log_weights()


@dataclass(frozen=True, eq=False)
class Mixture1D(_MixtureBase):
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise ValueError("mixture needs at least one component")
        if not all(isinstance(c, Gaussian1D) for c in comps):
            raise TypeError("Mixture1D components must be Gaussian1D")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", _validate_weights(self.weights, len(comps)))

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True, eq=False)
class Mixture2D(_MixtureBase):
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) < 1:
            raise ValueError("mixture needs at least one component")
        if not all(isinstance(c, Gaussian2D) for c in comps):
            raise TypeError("Mixture2D components must be Gaussian2D")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", _validate_weights(self.weights, len(comps)))

    @property
    def dim(self) -> int:
        return 2


def pdf_1d(model: Mixture1D, x):
    """Marginal density: sum_k w_k phi_k(x)."""
    dens = np.stack([c.pdf(x) for c in model.components], axis=-1)
    return dens @ model.weights


def pdf_2d(model: Mixture2D, v):
    """Marginal density of a 2-D mixture at ``v`` (a 2-vector or (n, 2) array)."""
    dens = np.stack([c.pdf(v) for c in model.components], axis=-1)
    return dens @ model.weights


# ---------------------------------------------------------------------------
# Labeled sampling


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Sampled (x, y) pairs: ``xs`` is (n, dim) float64, ``ys`` is (n,) int64."""

    xs: np.ndarray
    ys: np.ndarray
    num_categories: int

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.int64)
        if xs.ndim != 2:
            raise ValueError(f"xs must be 2-D (n, dim), got shape {xs.shape}")
        if ys.shape != (xs.shape[0],):
            raise ValueError(f"ys must have shape ({xs.shape[0]},), got {ys.shape}")
        if self.num_categories < 1:
            raise ValueError("num_categories must be >= 1")
        if ys.size and (ys.min() < 0 or ys.max() >= self.num_categories):
            raise ValueError(
                f"labels must lie in [0, {self.num_categories}), got range "
                f"[{ys.min()}, {ys.max()}]"
            )
        if not np.all(np.isfinite(xs)):
            raise ValueError("sample vectors must be finite")
        xs = xs.copy()
        ys = ys.copy()
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self) -> int:
        return self.xs.shape[0]

    @property
    def dim(self) -> int:
        return self.xs.shape[1]


def _sample_labels(weights: np.ndarray, n: int, gen) -> np.ndarray:
    edges = np.cumsum(weights)
    u = gen.random(n)
    labels = np.searchsorted(edges, u, side="right")
    return np.minimum(labels, len(weights) - 1).astype(np.int64)


def sample_labeled_1d(
    model: Mixture1D, n: int, seed: int, stream_id: int = 0
) -> LabeledDataset:
    """Draw ``n`` labeled samples: y ~ categorical(weights), x ~ phi_y.

    Deterministic for fixed ``(model, n, seed, stream_id)``.  The stream
    consumes ``n`` uniforms for labels, then the Box-Muller draws for the
    normals, in that order.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    gen = stream(seed, stream_id)
    ys = _sample_labels(model.weights, n, gen)
    z = standard_normals(gen, n)
    mus = np.array([c.mu for c in model.components])
    sigmas = np.array([c.sigma for c in model.components])
    xs = mus[ys] + sigmas[ys] * z
    return LabeledDataset(xs[:, None], ys, model.num_categories)


def sample_labeled_2d(
    model: Mixture2D, n: int, seed: int, stream_id: int = 0
) -> LabeledDataset:
    """2-D analogue of :func:`sample_labeled_1d`.

    Component draws apply the Cholesky factor of the component covariance
    to a pair of independent standard normals.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    gen = stream(seed, stream_id)
    ys = _sample_labels(model.weights, n, gen)
    z = standard_normals(gen, 2 * n).reshape(n, 2) if n else np.empty((0, 2))
    xs = np.empty((n, 2), dtype=np.float64)
    for k, comp in enumerate(model.components):
        mask = ys == k
        if np.any(mask):
            xs[mask] = comp.mu + z[mask] @ comp.cholesky.T
    return LabeledDataset(xs, ys, model.num_categories)


# ---------------------------------------------------------------------------
# Presets

# The two-cluster presets quote their sources' "variance" figures as
# standard deviations: the companion parameter grid draws sigma_1, sigma_2
# from [1, 10] and the model is written N(mu(y), sigma(y)), so the single
# published number per cluster is a sigma.
_TEN_DIGIT_LAYOUT = [
    # Synthetic stand-ins for a fitted ten-category 2-D mixture (no
    # published parameters exist): a jittered ring of radius ~18 with
    # varied anisotropic covariances.
    ((18.5, 0.5), ((9.0, 2.0), (2.0, 4.0))),
    ((14.6, 10.4), ((4.0, -1.5), (-1.5, 6.0))),
    ((5.4, 17.1), ((7.0, 0.0), (0.0, 3.0))),
    ((-5.8, 16.4), ((5.0, 1.0), (1.0, 5.0))),
    ((-15.2, 10.6), ((3.0, -1.0), (-1.0, 8.0))),
    ((-18.4, -0.7), ((6.0, 2.5), (2.5, 4.0))),
    ((-14.1, -11.3), ((8.0, -2.0), (-2.0, 5.0))),
    ((-5.2, -17.6), ((4.0, 0.5), (0.5, 7.0))),
    ((6.1, -16.8), ((5.0, 1.5), (1.5, 3.0))),
    ((15.3, -10.2), ((6.5, -1.0), (-1.0, 6.5))),
]


def _build_presets():
    return {
        "large-error-1d": Mixture1D(
            weights=(0.6, 0.4),
            components=(Gaussian1D(-7.0, 1.0), Gaussian1D(7.0, 8.0)),
        ),
        "small-error-1d": Mixture1D(
            weights=(0.5, 0.5),
            components=(Gaussian1D(-2.0, 5.0), Gaussian1D(2.0, 5.0)),
        ),
        "ten-digit-2d": Mixture2D(
            weights=(0.1,) * 10,
            components=tuple(Gaussian2D(mu, cov) for mu, cov in _TEN_DIGIT_LAYOUT),
        ),
    }


PRESET_NAMES = ("large-error-1d", "small-error-1d", "ten-digit-2d")


def preset(name: str):
    """Return a named example configuration.

    ``large-error-1d``: weights (0.6, 0.4), N(-7, 1) and N(7, 8) -- the
    setting whose left tail defeats the trained classifier.
    ``small-error-1d``: weights (0.5, 0.5), N(-2, 5) and N(2, 5).
    ``ten-digit-2d``: ten components with uniform 0.1 priors on a
    documented synthetic layout (see ``_TEN_DIGIT_LAYOUT``).
    """
    presets = _build_presets()
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; valid presets: {', '.join(PRESET_NAMES)}")
    return presets[name]


# ---------------------------------------------------------------------------
# Serialization


def mixture_to_json(model) -> dict:
    if isinstance(model, Mixture1D):
        return {
            "weights": [float(w) for w in model.weights],
            "components": [
                {"mu": c.mu, "sigma": c.sigma} for c in model.components
            ],
        }
    if isinstance(model, Mixture2D):
        return {
            "weights": [float(w) for w in model.weights],
            "components": [
                {"mu": [float(a) for a in c.mu], "cov": c.cov.tolist()}
                for c in model.components
            ],
        }
    raise TypeError(f"not a mixture model: {type(model).__name__}")


def mixture_from_json(doc: dict):
    try:
        weights = doc["weights"]
        comps = doc["components"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"mixture document missing field: {exc}") from exc
    if not comps:
        raise ValueError("mixture document has no components")
    if "sigma" in comps[0]:
        return Mixture1D(
            weights=weights,
            components=tuple(Gaussian1D(c["mu"], c["sigma"]) for c in comps),
        )
    return Mixture2D(
        weights=weights,
        components=tuple(Gaussian2D(c["mu"], c["cov"]) for c in comps),
    )


def save_mixture(model, path) -> None:
    Path(path).write_text(json.dumps(mixture_to_json(model), indent=2, sort_keys=True) + "\n")


def load_mixture(path):
    return mixture_from_json(json.loads(Path(path).read_text()))


class DatasetSchemaError(ValueError):
    """Raised when a dataset CSV violates the `y,x0[,x1,...]` schema."""


def dataset_to_csv(ds: LabeledDataset, path) -> None:
    """Write `y,x0[,...]` rows; floats use shortest round-trip repr."""
    header = "y," + ",".join(f"x{i}" for i in range(ds.dim))
    lines = [header]
    for y, x in zip(ds.ys, ds.xs):
        lines.append(str(int(y)) + "," + ",".join(repr(float(v)) for v in x))
    Path(path).write_text("\n".join(lines) + "\n")


def dataset_from_csv(path, num_categories: int | None = None) -> LabeledDataset:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise DatasetSchemaError(f"{path}: empty file, expected a header row")
    header = lines[0].split(",")
    expected = ["y"] + [f"x{i}" for i in range(len(header) - 1)]
    if header != expected or len(header) < 2:
        raise DatasetSchemaError(
            f"{path}: header must be 'y,x0[,x1,...]', got {lines[0]!r}"
        )
    dim = len(header) - 1
    ys, xs = [], []
    for row_no, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != dim + 1:
            raise DatasetSchemaError(
                f"{path}: row {row_no} has {len(fields)} fields, expected {dim + 1}"
            )
        try:
            ys.append(int(fields[0]))
        except ValueError:
            raise DatasetSchemaError(
                f"{path}: row {row_no}, column y: not an integer: {fields[0]!r}"
            ) from None
        vec = []
        for col, field in zip(header[1:], fields[1:]):
            try:
                vec.append(float(field))
            except ValueError:
                raise DatasetSchemaError(
                    f"{path}: row {row_no}, column {col}: not a number: {field!r}"
                ) from None
        xs.append(vec)
    xs_arr = np.array(xs, dtype=np.float64).reshape(len(ys), dim)
    ys_arr = np.array(ys, dtype=np.int64)
    if num_categories is None:
        num_categories = int(ys_arr.max()) + 1 if ys_arr.size else 1
    try:
        return LabeledDataset(xs_arr, ys_arr, num_categories)
    except ValueError as exc:
        raise DatasetSchemaError(f"{path}: {exc}") from exc
