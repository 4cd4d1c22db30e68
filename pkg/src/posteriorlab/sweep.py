"""Grid-sweep harness for the two-path comparison.

One sweep enumerates a grid of two-cluster generative models, runs
generate -> train -> evaluate per grid point, and emits one record per
(grid point, evaluation location) pairing exact and predicted posteriors
with the local density and sparsity.

Determinism contract: the output bytes are a pure function of
(grid spec, eval spec); grid points get independent RNG streams keyed by
(master seed, point index), and records are written in grid order no
matter how the worker pool schedules completions.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from pathlib import Path

import numpy as np

from ._version import __version__
from .embedding import ReconstructiveMap, embed
from .metrics import abs_difference, kl_divergence_detailed
from .mixtures import Gaussian1D, Mixture1D, Mixture2D, pdf_1d, pdf_2d
from .mlp import MLPConfig, MLPModel, forward_batch, train
from .oracle import posterior_1d, posterior_2d, sparsity_hg, sparsity_two_cluster
from .rng import mix64
from .mixtures import sample_labeled_1d

# Published evaluation range: half-open [start, stop) with the given step,
# i.e. numpy.arange semantics, which yields the canonical 142 locations.
PAPER_EVAL_START = -35.0
PAPER_EVAL_STOP = 36.0
PAPER_EVAL_STEP = 0.5

DEFAULT_MASTER_SEED = 2024
DEFAULT_SWEEP_SAMPLES = 2000
DEFAULT_SWEEP_EPOCHS = 15

MANIFEST_FORMAT_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    """Axes of the parametric grid over two-cluster models.

    Each grid point is (prior p1, mu1, sigma1, sigma2) with the second
    cluster mean pinned to -mu1.
    """

    priors: tuple
    mu1_values: tuple
    sigma1_values: tuple
    sigma2_values: tuple

    def __post_init__(self):
        for name in ("priors", "mu1_values", "sigma1_values", "sigma2_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"grid dimension {name} must be nonempty")
            object.__setattr__(self, name, vals)
        if any(not (0.0 < p < 1.0) for p in self.priors):
            raise ValueError(f"priors must lie in (0, 1), got {self.priors}")
        for name in ("sigma1_values", "sigma2_values"):
            if any(s <= 0 for s in getattr(self, name)):
                raise ValueError(f"{name} must be positive")

    @property
    def size(self) -> int:
        return (
            len(self.priors)
            * len(self.mu1_values)
            * len(self.sigma1_values)
            * len(self.sigma2_values)
        )

    @classmethod
    def paper_scale(cls) -> "GridSpec":
        """The published 9 x 10 x 10 x 10 grid (9000 points)."""
        return cls(
            priors=tuple(i / 10 for i in range(1, 10)),
            mu1_values=tuple(float(m) for m in range(0, 10)),
            sigma1_values=tuple(float(s) for s in range(1, 11)),
            sigma2_values=tuple(float(s) for s in range(1, 11)),
        )

    @classmethod
    def reduced(cls) -> "GridSpec":
        """Desk-scale 3 x 3 x 3 x 3 subset (81 points) of the published axes."""
        return cls(
            priors=(0.2, 0.5, 0.8),
            mu1_values=(1.0, 4.0, 8.0),
            sigma1_values=(1.0, 5.0, 9.0),
            sigma2_values=(1.0, 5.0, 9.0),
        )

    def to_dict(self) -> dict:
        return {
            "priors": list(self.priors),
            "mu1_values": list(self.mu1_values),
            "sigma1_values": list(self.sigma1_values),
            "sigma2_values": list(self.sigma2_values),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GridSpec":
        return cls(
            priors=doc["priors"],
            mu1_values=doc["mu1_values"],
            sigma1_values=doc["sigma1_values"],
            sigma2_values=doc["sigma2_values"],
        )


def default_mlp_config(input_dim: int = 1, num_categories: int = 2, **overrides) -> MLPConfig:
    """Sweep-default classifier: 1 -> 64 -> 64 -> K, adam, shortened epochs."""
    base = dict(
        input_dim=input_dim,
        hidden_layers=(64, 64),
        num_categories=num_categories,
        activation="softplus",
        learning_rate=1e-3,
        batch_size=128,
        epochs=DEFAULT_SWEEP_EPOCHS,
        seed=0,
        optimizer="adam",
    )
    base.update(overrides)
    return MLPConfig(**base)


@dataclass(frozen=True)
class EvalSpec:
    """Where and how one grid point is evaluated.

    Locations are ``start + k*step`` for k while below ``stop`` (half-open,
    numpy.arange semantics) unless an explicit ``points`` tuple is given.
    """

    start: float = PAPER_EVAL_START
    stop: float = PAPER_EVAL_STOP
    step: float = PAPER_EVAL_STEP
    points: tuple | None = None
    n_samples: int = DEFAULT_SWEEP_SAMPLES
    mlp: MLPConfig = None
    master_seed: int = DEFAULT_MASTER_SEED

    def __post_init__(self):
        if self.mlp is None:
            object.__setattr__(self, "mlp", default_mlp_config())
        if self.points is None:
            if not (self.step > 0):
                raise ValueError(f"step must be positive, got {self.step}")
            if not (self.stop > self.start):
                raise ValueError("stop must exceed start")
        else:
            pts = tuple(
                tuple(float(a) for a in p) if np.ndim(p) else (float(p),)
                for p in self.points
            )
            if not pts:
                raise ValueError("points must be nonempty when given")
            object.__setattr__(self, "points", pts)
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")

    def locations(self) -> np.ndarray:
        if self.points is not None:
            arr = np.asarray(self.points, dtype=np.float64)
            return arr[:, 0] if arr.shape[1] == 1 else arr
        return np.arange(self.start, self.stop, self.step, dtype=np.float64)

    def to_dict(self) -> dict:
        doc = {
            "start": self.start,
            "stop": self.stop,
            "step": self.step,
            "n_samples": self.n_samples,
            "master_seed": self.master_seed,
        }
        if self.points is not None:
            doc["points"] = [list(p) for p in self.points]
        return doc


@dataclass(frozen=True)
class EvalRecord:
    """One evaluation point of one configuration.

    Grid parameters are NaN for records that do not come from the 1-D grid
    (e.g. plane-path evaluations).  ``x`` holds the location as a tuple of
    length 1 (line) or 2 (plane).
    """

    p1: float
    mu1: float
    sigma1: float
    sigma2: float
    x: tuple
    density: float
    sparsity: float
    p_true: tuple
    q_pred: tuple
    kl: float
    abs_diff: float


@dataclass(frozen=True)
class PathSpec:
    """Straight plane path, sampled uniformly including both endpoints."""

    start: tuple
    end: tuple
    num_samples: int

    def __post_init__(self):
        start = tuple(float(a) for a in self.start)
        end = tuple(float(a) for a in self.end)
        if len(start) != 2 or len(end) != 2:
            raise ValueError("path endpoints must be 2-vectors")
        if self.num_samples < 2:
            raise ValueError(f"num_samples must be >= 2, got {self.num_samples}")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)

    def sample_points(self) -> np.ndarray:
        t = np.linspace(0.0, 1.0, self.num_samples)[:, None]
        a = np.asarray(self.start)
        b = np.asarray(self.end)
        return (1.0 - t) * a + t * b


def enumerate_grid(spec: GridSpec) -> list:
    """All grid models, ordered lexicographically by (prior, mu1, sigma1,
    sigma2) with sigma2 varying fastest."""
    models = []
    for p1, mu1, s1, s2 in product(
        spec.priors, spec.mu1_values, spec.sigma1_values, spec.sigma2_values
    ):
        models.append(
            Mixture1D(
                weights=(p1, 1.0 - p1),
                components=(Gaussian1D(mu1, s1), Gaussian1D(-mu1, s2)),
            )
        )
    return models


def grid_params(model: Mixture1D) -> tuple:
    """(p1, mu1, sigma1, sigma2) of a two-cluster model; NaNs otherwise."""
    if isinstance(model, Mixture1D) and model.num_categories == 2:
        return (
            float(model.weights[0]),
            model.components[0].mu,
            model.components[0].sigma,
            model.components[1].sigma,
        )
    return (float("nan"),) * 4


def _evaluate_1d(model: Mixture1D, nn_model: MLPModel | None, xs: np.ndarray, params):
    """Records over locations; missing classifier yields NaN prediction fields."""
    k = model.num_categories
    density = np.atleast_1d(pdf_1d(model, xs))
    if k == 2:
        sparsity = np.atleast_1d(sparsity_two_cluster(model, xs))
    else:
        sparsity = np.atleast_1d(sparsity_hg(model, xs))
    p_true = np.atleast_2d(posterior_1d(model, xs))
    if nn_model is not None:
        q_pred = forward_batch(nn_model, xs[:, None])
    else:
        q_pred = np.full((len(xs), k), np.nan)
    records = []
    clamped = 0
    nan_pred = (float("nan"),) * k
    for i, x in enumerate(xs):
        if nn_model is not None:
            kl, nclamp = kl_divergence_detailed(p_true[i], q_pred[i])
            clamped += nclamp
            ad = abs_difference(p_true[i], q_pred[i])
            q_row = tuple(float(v) for v in q_pred[i])
        else:
            kl, ad = float("nan"), float("nan")
            q_row = nan_pred
        records.append(
            EvalRecord(
                p1=params[0],
                mu1=params[1],
                sigma1=params[2],
                sigma2=params[3],
                x=(float(x),),
                density=float(density[i]),
                sparsity=float(sparsity[i]),
                p_true=tuple(float(v) for v in p_true[i]),
                q_pred=q_row,
                kl=kl,
                abs_diff=ad,
            )
        )
    return records, clamped


def _train_for_point(model: Mixture1D, eval_spec: EvalSpec, point_index: int):
    data = sample_labeled_1d(
        model, eval_spec.n_samples, eval_spec.master_seed, stream_id=point_index
    )
    config = replace(
        eval_spec.mlp,
        input_dim=1,
        num_categories=model.num_categories,
        seed=mix64(eval_spec.master_seed, point_index),
    )
    nn_model, report = train(config, data)
    return nn_model, report


def run_grid_point(model: Mixture1D, eval_spec: EvalSpec, point_index: int) -> list:
    """Sample, train, and evaluate one grid point; raises on training failure."""
    nn_model, _ = _train_for_point(model, eval_spec, point_index)
    records, _ = _evaluate_1d(model, nn_model, eval_spec.locations(), grid_params(model))
    return records


def _grid_point_task(task):
    model, eval_spec, index = task
    try:
        nn_model, _ = _train_for_point(model, eval_spec, index)
        records, clamped = _evaluate_1d(
            model, nn_model, eval_spec.locations(), grid_params(model)
        )
        return index, records, clamped, None
    except Exception as exc:  # failure is data, the sweep must go on
        return index, None, 0, f"{type(exc).__name__}: {exc}"


@dataclass(frozen=True)
class SweepResult:
    """In-memory handle on a finished sweep (records are in grid order)."""

    grid: GridSpec
    eval_spec: EvalSpec
    records: tuple
    failures: tuple  # (point_index, message) pairs
    kl_clamp_events: int

    def manifest(self) -> dict:
        return {
            "format_version": MANIFEST_FORMAT_VERSION,
            "tool_version": __version__,
            "grid": self.grid.to_dict(),
            "eval": self.eval_spec.to_dict(),
            "mlp": self.eval_spec.mlp.to_dict(),
            "grid_points": self.grid.size,
            "locations": int(len(self.eval_spec.locations())),
            "record_count": len(self.records),
            "failure_count": len(self.failures),
            "kl_clamp_events": self.kl_clamp_events,
        }


class SweepFailedError(RuntimeError):
    """Every grid point failed; there is no sweep to report."""


def run_sweep(
    grid: GridSpec,
    eval_spec: EvalSpec,
    parallelism: int = 1,
    out_dir=None,
) -> SweepResult:
    """Execute every grid point, optionally writing artifacts to ``out_dir``.

    Failed points contribute sentinel records (exact-path fields filled,
    prediction fields NaN) and a line in the failures sidecar.  Output is
    identical for any ``parallelism``.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    models = enumerate_grid(grid)
    tasks = [(model, eval_spec, i) for i, model in enumerate(models)]

    all_records = []
    failures = []
    clamp_events = 0
    xs = eval_spec.locations()

    def collect(results):
        nonlocal clamp_events
        for index, records, clamped, error in results:
            if error is not None:
                failures.append((index, error))
                records, _ = _evaluate_1d(models[index], None, xs, grid_params(models[index]))
            clamp_events += clamped
            all_records.extend(records)

    if parallelism == 1:
        collect(map(_grid_point_task, tasks))
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as executor:
            chunk = max(1, len(tasks) // (parallelism * 4))
            collect(executor.map(_grid_point_task, tasks, chunksize=chunk))

    if failures and len(failures) == len(models):
        raise SweepFailedError(f"all {len(models)} grid points failed; first: {failures[0][1]}")

    result = SweepResult(
        grid=grid,
        eval_spec=eval_spec,
        records=tuple(all_records),
        failures=tuple(failures),
        kl_clamp_events=clamp_events,
    )
    if out_dir is not None:
        write_sweep_artifacts(result, out_dir)
    return result


# ---------------------------------------------------------------------------
# Aggregations

FACTORS = ("prior", "mu1", "sigma_pair")


def _finite_metric_records(records):
    return [r for r in records if np.isfinite(r.kl) and np.isfinite(r.abs_diff)]


def marginalize(records, factor: str) -> list:
    """Mean metrics per distinct factor value, all other factors pooled.

    Returns (value, mean_kl, mean_abs_diff, count) tuples sorted by value;
    for ``sigma_pair`` the value is the (sigma1, sigma2) pair.  Sentinel
    records from failed points are excluded.
    """
    if factor not in FACTORS:
        raise ValueError(f"unknown factor {factor!r}; choose from {FACTORS}")
    usable = _finite_metric_records(records)
    if not usable:
        raise ValueError("no records with finite metrics to marginalize")
    groups = {}
    for r in usable:
        if factor == "prior":
            key = r.p1
        elif factor == "mu1":
            key = r.mu1
        else:
            key = (r.sigma1, r.sigma2)
        kl_sum, abs_sum, count = groups.get(key, (0.0, 0.0, 0))
        groups[key] = (kl_sum + r.kl, abs_sum + r.abs_diff, count + 1)
    out = []
    for key in sorted(groups):
        kl_sum, abs_sum, count = groups[key]
        out.append((key, kl_sum / count, abs_sum / count, count))
    return out


def scatter_factors(records) -> list:
    """(density, sparsity, kl, abs_diff) projection of every record."""
    return [(r.density, r.sparsity, r.kl, r.abs_diff) for r in records]


def run_path(
    model: Mixture2D,
    rmap: ReconstructiveMap,
    trained: MLPModel,
    path: PathSpec,
) -> list:
    """Evaluate both paths along a straight line on the plane.

    Plane points are embedded before prediction, so the classifier sees the
    d-dimensional coordinates it was trained on while the exact path works
    directly on the plane.
    """
    vs = path.sample_points()
    xs = np.stack([embed(rmap, v) for v in vs])
    q_pred = forward_batch(trained, xs)
    p_true = np.atleast_2d(posterior_2d(model, vs))
    density = np.atleast_1d(pdf_2d(model, vs))
    sparsity = np.atleast_1d(sparsity_hg(model, vs))
    records = []
    for i, v in enumerate(vs):
        kl, _ = kl_divergence_detailed(p_true[i], q_pred[i])
        records.append(
            EvalRecord(
                p1=float("nan"),
                mu1=float("nan"),
                sigma1=float("nan"),
                sigma2=float("nan"),
                x=(float(v[0]), float(v[1])),
                density=float(density[i]),
                sparsity=float(sparsity[i]),
                p_true=tuple(float(a) for a in p_true[i]),
                q_pred=tuple(float(a) for a in q_pred[i]),
                kl=kl,
                abs_diff=abs_difference(p_true[i], q_pred[i]),
            )
        )
    return records


# ---------------------------------------------------------------------------
# Artifact files


def _fmt(v: float) -> str:
    return repr(float(v))


def records_csv_header(num_categories: int) -> str:
    fields = ["p1", "mu1", "sigma1", "sigma2", "x", "density", "sparsity"]
    fields += [f"p_true_{i}" for i in range(num_categories)]
    fields += [f"q_pred_{i}" for i in range(num_categories)]
    fields += ["kl", "abs_diff"]
    return ",".join(fields)


def record_csv_line(r: EvalRecord) -> str:
    vals = [r.p1, r.mu1, r.sigma1, r.sigma2, r.x[0], r.density, r.sparsity]
    vals += list(r.p_true) + list(r.q_pred) + [r.kl, r.abs_diff]
    return ",".join(_fmt(v) for v in vals)


def write_records_csv(records, path) -> None:
    if not records:
        raise ValueError("no records to write")
    k = len(records[0].p_true)
    with open(path, "w", newline="") as fh:
        fh.write(records_csv_header(k) + "\n")
        for r in records:
            fh.write(record_csv_line(r) + "\n")


def read_records_csv(path) -> list:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty records file")
    header = lines[0].split(",")
    k = sum(1 for h in header if h.startswith("p_true_"))
    if header != records_csv_header(k).split(","):
        raise ValueError(f"{path}: unexpected records header {lines[0]!r}")
    records = []
    for line in lines[1:]:
        f = [float(v) for v in line.split(",")]
        records.append(
            EvalRecord(
                p1=f[0],
                mu1=f[1],
                sigma1=f[2],
                sigma2=f[3],
                x=(f[4],),
                density=f[5],
                sparsity=f[6],
                p_true=tuple(f[7 : 7 + k]),
                q_pred=tuple(f[7 + k : 7 + 2 * k]),
                kl=f[7 + 2 * k],
                abs_diff=f[8 + 2 * k],
            )
        )
    return records


def write_path_csv(records, path) -> None:
    """Plane-path records: `v0,v1` location columns, no grid parameters."""
    if not records:
        raise ValueError("no records to write")
    k = len(records[0].p_true)
    fields = ["v0", "v1", "density", "sparsity"]
    fields += [f"p_true_{i}" for i in range(k)]
    fields += [f"q_pred_{i}" for i in range(k)]
    fields += ["kl", "abs_diff"]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(fields) + "\n")
        for r in records:
            vals = [r.x[0], r.x[1], r.density, r.sparsity]
            vals += list(r.p_true) + list(r.q_pred) + [r.kl, r.abs_diff]
            fh.write(",".join(_fmt(v) for v in vals) + "\n")


def write_marginal_csv(table, factor: str, path) -> None:
    if factor == "sigma_pair":
        lines = ["sigma1,sigma2,mean_kl,mean_abs_diff,count"]
        for (s1, s2), mean_kl, mean_abs, count in table:
            lines.append(f"{_fmt(s1)},{_fmt(s2)},{_fmt(mean_kl)},{_fmt(mean_abs)},{count}")
    else:
        lines = [f"{factor},mean_kl,mean_abs_diff,count"]
        for value, mean_kl, mean_abs, count in table:
            lines.append(f"{_fmt(value)},{_fmt(mean_kl)},{_fmt(mean_abs)},{count}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_scatter_csv(points, path) -> None:
    lines = ["density,sparsity,kl,abs_diff"]
    for density, sparsity, kl, ad in points:
        lines.append(f"{_fmt(density)},{_fmt(sparsity)},{_fmt(kl)},{_fmt(ad)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_sweep_artifacts(result: SweepResult, out_dir) -> None:
    """records.csv, manifest.json, and failures.csv under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_records_csv(list(result.records), out / "records.csv")
    (out / "manifest.json").write_text(
        json.dumps(result.manifest(), indent=2, sort_keys=True) + "\n"
    )
    lines = ["point_index,error"]
    for index, message in result.failures:
        lines.append(f"{index},{json.dumps(message)}")
    (out / "failures.csv").write_text("\n".join(lines) + "\n")
