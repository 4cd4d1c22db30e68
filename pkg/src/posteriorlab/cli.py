"""Command-line pipeline: generate, train, eval, sweep, path, report.

Configuration precedence is flags > config file (JSON) > defaults.  Every
command validates its full configuration before touching the filesystem,
and all randomness descends from the single --seed value, so re-running a
command with the same inputs reproduces its output files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ._version import __version__
from . import embedding, metrics, mixtures, mlp, sweep
from .oracle import posterior_2d, sparsity_hg
from .rng import mix64


class CliError(Exception):
    """User-facing command failure; maps to exit status 1."""


def _load_config_file(path) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise CliError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"config file {p} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CliError(f"config file {p} must hold a JSON object")
    return doc


def _pick(flag_value, config: dict, key: str, default):
    """flags > config file > defaults."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _resolve_model(args, config):
    preset_name = _pick(getattr(args, "preset", None), config, "preset", None)
    model_path = _pick(getattr(args, "model", None), config, "model", None)
    if preset_name and model_path:
        raise CliError("give either a preset name or a model file, not both")
    if preset_name:
        try:
            return mixtures.preset(preset_name)
        except KeyError as exc:
            raise CliError(str(exc.args[0])) from exc
    if model_path:
        if not Path(model_path).exists():
            raise CliError(f"model file not found: {model_path}")
        try:
            return mixtures.load_mixture(model_path)
        except (ValueError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot parse model file {model_path}: {exc}") from exc
    raise CliError("no generative model given: use --preset or --model")


def _parse_hidden(text):
    if text is None:
        return None
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(w) for w in text.split(","))
    except ValueError as exc:
        raise CliError(f"--hidden must be comma-separated integers, got {text!r}") from exc


def _mlp_config_from(args, config: dict, input_dim: int, num_categories: int) -> mlp.MLPConfig:
    mlp_cfg = config.get("mlp", {})
    try:
        return mlp.MLPConfig(
            input_dim=input_dim,
            hidden_layers=_parse_hidden(args.hidden)
            or tuple(mlp_cfg.get("hidden_layers", (64, 64))),
            num_categories=num_categories,
            activation=_pick(args.activation, mlp_cfg, "activation", "softplus"),
            learning_rate=_pick(args.learning_rate, mlp_cfg, "learning_rate", 1e-3),
            batch_size=_pick(args.batch_size, mlp_cfg, "batch_size", 128),
            epochs=_pick(args.epochs, mlp_cfg, "epochs", 30),
            seed=_pick(args.seed, config, "seed", sweep.DEFAULT_MASTER_SEED),
            optimizer=_pick(args.optimizer, mlp_cfg, "optimizer", "adam"),
        )
    except ValueError as exc:
        raise CliError(f"invalid classifier configuration: {exc}") from exc


def _out_dir(args, config) -> Path:
    out = _pick(args.out, config, "out", None)
    if out is None:
        raise CliError("no output directory given: use --out")
    return Path(out)


def _build_map(model_dim_2: bool, args, config, seed: int):
    """Reconstructive map from --map file, or seeded construction."""
    map_path = _pick(getattr(args, "map", None), config, "map", None)
    if map_path:
        if not Path(map_path).exists():
            raise CliError(f"map file not found: {map_path}")
        return embedding.load_map(map_path)
    embed_dim = _pick(getattr(args, "embed_dim", None), config, "embed_dim", None)
    if embed_dim is None:
        return None
    if not model_dim_2:
        raise CliError("--embed-dim only applies to 2-D generative models")
    if embed_dim < 2:
        raise CliError(f"--embed-dim must be >= 2, got {embed_dim}")
    warp_kind = _pick(getattr(args, "warp", None), config, "warp", "identity")
    try:
        warp = embedding.ComponentWarp(
            kind=warp_kind,
            scale=_pick(getattr(args, "warp_scale", None), config, "warp_scale", 1.0),
            rate=_pick(getattr(args, "warp_rate", None), config, "warp_rate", 1.0),
        )
        bij = embedding.PlanarBijection(warp=warp)
        lift = embedding.make_lift(int(embed_dim), mix64(seed, 0x6D6170))
    except ValueError as exc:
        raise CliError(f"invalid embedding configuration: {exc}") from exc
    return embedding.ReconstructiveMap(bijection=bij, lift=lift)


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Commands


def cmd_generate(args) -> int:
    config = _load_config_file(args.config)
    model = _resolve_model(args, config)
    n = _pick(args.n, config, "n", 1000)
    if n < 0:
        raise CliError(f"--n must be non-negative, got {n}")
    seed = _pick(args.seed, config, "seed", sweep.DEFAULT_MASTER_SEED)
    stream_id = _pick(args.stream, config, "stream", 0)
    out = _out_dir(args, config)

    rmap = _build_map(isinstance(model, mixtures.Mixture2D), args, config, seed)
    if isinstance(model, mixtures.Mixture1D):
        ds = mixtures.sample_labeled_1d(model, n, seed, stream_id)
    else:
        ds = mixtures.sample_labeled_2d(model, n, seed, stream_id)
        if rmap is not None:
            xs = embedding.embed(rmap, ds.xs) if n else np.empty((0, rmap.dim))
            ds = mixtures.LabeledDataset(xs, ds.ys, ds.num_categories)

    out.mkdir(parents=True, exist_ok=True)
    mixtures.dataset_to_csv(ds, out / "dataset.csv")
    meta = {
        "model": mixtures.mixture_to_json(model),
        "n": int(n),
        "seed": int(seed),
        "stream": int(stream_id),
        "num_categories": model.num_categories,
        "embedding": embedding.map_to_json(rmap) if rmap is not None else None,
    }
    _write_json(out / "generate_meta.json", meta)
    if rmap is not None:
        embedding.save_map(rmap, out / "map.json")
    print(f"wrote {len(ds)} samples (dim {ds.dim}) to {out / 'dataset.csv'}")
    return 0


def cmd_train(args) -> int:
    config = _load_config_file(args.config)
    data_path = _pick(args.data, config, "data", None)
    if data_path is None:
        raise CliError("no dataset given: use --data")
    if not Path(data_path).exists():
        raise CliError(f"dataset not found: {data_path}")
    out = _out_dir(args, config)
    try:
        ds = mixtures.dataset_from_csv(data_path)
    except mixtures.DatasetSchemaError as exc:
        raise CliError(str(exc)) from exc

    if args.input_dim is not None and args.input_dim != ds.dim:
        raise CliError(
            f"--input-dim {args.input_dim} does not match dataset dimension {ds.dim}"
        )
    num_categories = _pick(args.num_categories, config, "num_categories", None)
    if num_categories is None:
        num_categories = max(2, ds.num_categories)
    elif num_categories < ds.num_categories:
        raise CliError(
            f"--num-categories {num_categories} is below the dataset's label range "
            f"({ds.num_categories})"
        )
    cfg = _mlp_config_from(args, config, ds.dim, int(num_categories))
    if len(ds) == 0:
        raise CliError("cannot train on an empty dataset")

    try:
        model, report = mlp.train(cfg, ds)
    except mlp.TrainingDivergedError as exc:
        raise CliError(str(exc)) from exc
    out.mkdir(parents=True, exist_ok=True)
    mlp.save_checkpoint(model, out / "checkpoint.json")
    mlp.report_to_csv(report, out / "train_report.csv")
    print(
        f"trained {cfg.epochs} epochs in {report.wall_time_s:.2f}s; "
        f"final loss {report.final_loss:.6f} ({report.note})"
    )
    return 0


def _eval_records_2d(model, rmap, net, points):
    records = []
    for v in points:
        v = np.asarray(v, dtype=np.float64)
        x = embedding.embed(rmap, v)
        q = mlp.forward(net, x)
        p = posterior_2d(model, v)
        kl, _ = metrics.kl_divergence_detailed(p, q)
        records.append(
            sweep.EvalRecord(
                p1=float("nan"),
                mu1=float("nan"),
                sigma1=float("nan"),
                sigma2=float("nan"),
                x=(float(v[0]), float(v[1])),
                density=float(mixtures.pdf_2d(model, v)),
                sparsity=float(sparsity_hg(model, v)),
                p_true=tuple(float(a) for a in p),
                q_pred=tuple(float(a) for a in q),
                kl=kl,
                abs_diff=metrics.abs_difference(p, q),
            )
        )
    return records


def cmd_eval(args) -> int:
    config = _load_config_file(args.config)
    model = _resolve_model(args, config)
    ckpt_path = _pick(args.checkpoint, config, "checkpoint", None)
    if ckpt_path is None or not Path(ckpt_path).exists():
        raise CliError(f"checkpoint not found: {ckpt_path}")
    try:
        net = mlp.load_checkpoint(ckpt_path)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot load checkpoint {ckpt_path}: {exc}") from exc
    out = _out_dir(args, config)

    if isinstance(model, mixtures.Mixture1D):
        if net.config.input_dim != 1:
            raise CliError(
                f"checkpoint input_dim {net.config.input_dim} does not match 1-D model"
            )
        if net.config.num_categories != model.num_categories:
            raise CliError(
                f"checkpoint categories {net.config.num_categories} do not match "
                f"model categories {model.num_categories}"
            )
        spec = sweep.EvalSpec(
            start=_pick(args.start, config, "start", sweep.PAPER_EVAL_START),
            stop=_pick(args.stop, config, "stop", sweep.PAPER_EVAL_STOP),
            step=_pick(args.step, config, "step", sweep.PAPER_EVAL_STEP),
        )
        records, _ = sweep._evaluate_1d(
            model, net, spec.locations(), sweep.grid_params(model)
        )
        out.mkdir(parents=True, exist_ok=True)
        sweep.write_records_csv(records, out / "eval.csv")
    else:
        seed = _pick(args.seed, config, "seed", sweep.DEFAULT_MASTER_SEED)
        rmap = _build_map(True, args, config, seed)
        if rmap is None:
            raise CliError("2-D evaluation needs --map or --embed-dim")
        if net.config.input_dim != rmap.dim:
            raise CliError(
                f"checkpoint input_dim {net.config.input_dim} does not match "
                f"map dimension {rmap.dim}"
            )
        points_file = _pick(args.points_file, config, "points_file", None)
        if points_file is None:
            raise CliError("2-D evaluation needs --points-file with a JSON list of [v0, v1]")
        try:
            points = json.loads(Path(points_file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read points file {points_file}: {exc}") from exc
        records = _eval_records_2d(model, rmap, net, points)
        out.mkdir(parents=True, exist_ok=True)
        sweep.write_path_csv(records, out / "eval.csv")
    print(f"wrote {len(records)} evaluation rows to {out / 'eval.csv'}")
    return 0


def _grid_from(args, config) -> sweep.GridSpec:
    if args.paper_scale:
        return sweep.GridSpec.paper_scale()
    grid_cfg = config.get("grid")
    if grid_cfg:
        try:
            return sweep.GridSpec.from_dict(grid_cfg)
        except (KeyError, ValueError) as exc:
            raise CliError(f"invalid grid in config file: {exc}") from exc
    return sweep.GridSpec.reduced()


def cmd_sweep(args) -> int:
    config = _load_config_file(args.config)
    grid = _grid_from(args, config)
    master_seed = _pick(args.seed, config, "seed", sweep.DEFAULT_MASTER_SEED)
    n = _pick(args.n, config, "n", sweep.DEFAULT_SWEEP_SAMPLES)
    mlp_cfg = config.get("mlp", {})
    base = sweep.default_mlp_config(
        hidden_layers=_parse_hidden(args.hidden)
        or tuple(mlp_cfg.get("hidden_layers", (64, 64))),
        activation=_pick(args.activation, mlp_cfg, "activation", "softplus"),
        learning_rate=_pick(args.learning_rate, mlp_cfg, "learning_rate", 1e-3),
        batch_size=_pick(args.batch_size, mlp_cfg, "batch_size", 128),
        epochs=_pick(args.epochs, mlp_cfg, "epochs", sweep.DEFAULT_SWEEP_EPOCHS),
        optimizer=_pick(args.optimizer, mlp_cfg, "optimizer", "adam"),
    )
    try:
        spec = sweep.EvalSpec(
            start=_pick(args.start, config, "start", sweep.PAPER_EVAL_START),
            stop=_pick(args.stop, config, "stop", sweep.PAPER_EVAL_STOP),
            step=_pick(args.step, config, "step", sweep.PAPER_EVAL_STEP),
            n_samples=n,
            mlp=base,
            master_seed=master_seed,
        )
    except ValueError as exc:
        raise CliError(f"invalid evaluation spec: {exc}") from exc
    out = _out_dir(args, config)
    bins = _pick(args.bins, config, "bins", 30)
    if bins < 1:
        raise CliError(f"--bins must be >= 1, got {bins}")

    n_locations = len(spec.locations())
    if args.paper_scale and not args.yes:
        print(
            f"paper-scale sweep: {grid.size} grid points x {n_locations} locations "
            f"({grid.size * n_locations} records); this trains {grid.size} classifiers.\n"
            f"Pass --yes to execute."
        )
        return 0

    result = sweep.run_sweep(grid, spec, parallelism=args.parallelism, out_dir=out)
    _write_aggregates(result.records, out, bins)
    print(
        f"sweep complete: {len(result.records)} records over {grid.size} grid points, "
        f"{len(result.failures)} failures, {result.kl_clamp_events} clamped KL terms"
    )
    return 0


def _write_aggregates(records, out: Path, bins: int) -> None:
    for factor in sweep.FACTORS:
        table = sweep.marginalize(records, factor)
        sweep.write_marginal_csv(table, factor, out / f"marginal_{factor}.csv")
    sweep.write_scatter_csv(sweep.scatter_factors(records), out / "scatter.csv")
    finite = [
        r for r in records if np.isfinite(r.kl) and np.isfinite(r.abs_diff)
    ]
    axes = {
        "density": np.array([r.density for r in finite]),
        "sparsity": np.array([r.sparsity for r in finite]),
    }
    values = {
        "kl": np.array([r.kl for r in finite]),
        "abs_diff": np.array([r.abs_diff for r in finite]),
    }
    for metric_name, vals in values.items():
        for factor_name, factor_vals in axes.items():
            series = metrics.bin_average(factor_vals, vals, bins)
            _write_binned_csv(series, out / f"binned_{metric_name}_{factor_name}.csv")


def _write_binned_csv(series: metrics.BinnedSeries, path: Path) -> None:
    lines = ["bin_left,bin_right,bin_center,mean,count"]
    for i in range(len(series.counts)):
        lines.append(
            f"{repr(float(series.edges[i]))},{repr(float(series.edges[i + 1]))},"
            f"{repr(float(series.centers[i]))},{repr(float(series.means[i]))},"
            f"{int(series.counts[i])}"
        )
    path.write_text("\n".join(lines) + "\n")


def cmd_path(args) -> int:
    config = _load_config_file(args.config)
    model = _resolve_model(args, config)
    if not isinstance(model, mixtures.Mixture2D):
        raise CliError("path evaluation needs a 2-D generative model")
    seed = _pick(args.seed, config, "seed", sweep.DEFAULT_MASTER_SEED)
    rmap = _build_map(True, args, config, seed)
    if rmap is None:
        raise CliError("path evaluation needs --map or --embed-dim")
    ckpt_path = _pick(args.checkpoint, config, "checkpoint", None)
    if ckpt_path is None or not Path(ckpt_path).exists():
        raise CliError(f"checkpoint not found: {ckpt_path}")
    net = mlp.load_checkpoint(ckpt_path)
    if net.config.input_dim != rmap.dim:
        raise CliError(
            f"checkpoint input_dim {net.config.input_dim} does not match map "
            f"dimension {rmap.dim}"
        )
    if net.config.num_categories != model.num_categories:
        raise CliError(
            f"checkpoint categories {net.config.num_categories} do not match model "
            f"categories {model.num_categories}"
        )

    def parse_point(text, name):
        try:
            a, b = (float(v) for v in text.split(","))
            return (a, b)
        except (ValueError, TypeError) as exc:
            raise CliError(f"{name} must be 'v0,v1', got {text!r}") from exc

    start = _pick(args.start, config, "path_start", None)
    end = _pick(args.end, config, "path_end", None)
    if start is None or end is None:
        raise CliError("path evaluation needs --start and --end plane points")
    try:
        path_spec = sweep.PathSpec(
            start=parse_point(start, "--start") if isinstance(start, str) else start,
            end=parse_point(end, "--end") if isinstance(end, str) else end,
            num_samples=_pick(args.num_samples, config, "num_samples", 16),
        )
    except ValueError as exc:
        raise CliError(f"invalid path: {exc}") from exc
    records = sweep.run_path(model, rmap, net, path_spec)
    out = _out_dir(args, config)
    out.mkdir(parents=True, exist_ok=True)
    sweep.write_path_csv(records, out / "path.csv")
    print(f"wrote {len(records)} path rows to {out / 'path.csv'}")
    return 0


_FIGURES = {
    "fig2a.csv": ("prior", "mean_kl"),
    "fig2b.csv": ("prior", "mean_abs_diff"),
    "fig2c.csv": ("mu1", "mean_kl"),
    "fig2d.csv": ("mu1", "mean_abs_diff"),
    "fig2e.csv": ("sigma_pair", "mean_kl"),
    "fig2f.csv": ("sigma_pair", "mean_abs_diff"),
    "fig3a.csv": ("density", "kl"),
    "fig3b.csv": ("density", "abs_diff"),
    "fig3c.csv": ("sparsity", "kl"),
    "fig3d.csv": ("sparsity", "abs_diff"),
}


def cmd_report(args) -> int:
    config = _load_config_file(args.config)
    sweep_dir = Path(_pick(args.sweep_dir, config, "sweep_dir", "."))
    missing = [
        str(sweep_dir / name)
        for name in ("records.csv", "manifest.json")
        if not (sweep_dir / name).exists()
    ]
    if missing:
        raise CliError(f"sweep directory is incomplete, missing: {', '.join(missing)}")
    out = _out_dir(args, config)
    bins = _pick(args.bins, config, "bins", 30)
    if bins < 1:
        raise CliError(f"--bins must be >= 1, got {bins}")
    records = sweep.read_records_csv(sweep_dir / "records.csv")
    if not records:
        raise CliError(f"{sweep_dir / 'records.csv'} holds no records")
    out.mkdir(parents=True, exist_ok=True)

    marginals = {f: sweep.marginalize(records, f) for f in sweep.FACTORS}
    finite = [r for r in records if np.isfinite(r.kl) and np.isfinite(r.abs_diff)]
    cols = {
        "density": np.array([r.density for r in finite]),
        "sparsity": np.array([r.sparsity for r in finite]),
        "kl": np.array([r.kl for r in finite]),
        "abs_diff": np.array([r.abs_diff for r in finite]),
    }
    for name, (axis, metric_name) in _FIGURES.items():
        target = out / name
        if axis in ("prior", "mu1"):
            col = 1 if metric_name == "mean_kl" else 2
            lines = [f"{axis},{metric_name}"]
            for row in marginals[axis]:
                lines.append(f"{repr(float(row[0]))},{repr(float(row[col]))}")
            target.write_text("\n".join(lines) + "\n")
        elif axis == "sigma_pair":
            col = 1 if metric_name == "mean_kl" else 2
            lines = [f"sigma1,sigma2,{metric_name}"]
            for row in marginals[axis]:
                (s1, s2), value = row[0], row[col]
                lines.append(f"{repr(float(s1))},{repr(float(s2))},{repr(float(value))}")
            target.write_text("\n".join(lines) + "\n")
        else:
            lines = [f"{axis},{metric_name}"]
            for a, v in zip(cols[axis], cols[metric_name]):
                lines.append(f"{repr(float(a))},{repr(float(v))}")
            target.write_text("\n".join(lines) + "\n")
            series = metrics.bin_average(cols[axis], cols[metric_name], bins)
            _write_binned_csv(series, out / (name[:-4] + "_binned.csv"))
            if args.svg:
                _write_scatter_svg(
                    out / (name[:-4] + ".svg"), cols[axis], cols[metric_name], series,
                    xlabel=axis, ylabel=metric_name,
                )
    if args.svg:
        for fig, factor in (("fig2a", "prior"), ("fig2c", "mu1")):
            rows = marginals[factor]
            _write_line_svg(
                out / (fig + ".svg"),
                [float(r[0]) for r in rows],
                [float(r[1]) for r in rows],
                xlabel=factor,
                ylabel="mean_kl",
            )
    print(f"wrote {len(_FIGURES)} figure data files to {out}")
    return 0


def _write_scatter_svg(path, xs, ys, series, xlabel, ylabel):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(xs, ys, s=2, alpha=0.25, linewidths=0)
    keep = series.counts > 0
    ax.plot(series.centers[keep], series.means[keep], color="crimson", lw=1.5)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _write_line_svg(path, xs, ys, xlabel, ylabel):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(xs, ys, marker="o")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_presets(args) -> int:
    for name in mixtures.PRESET_NAMES:
        model = mixtures.preset(name)
        kind = "1-D" if isinstance(model, mixtures.Mixture1D) else "2-D"
        print(f"{name} ({kind}, K={model.num_categories})")
        for w, comp in zip(model.weights, model.components):
            if isinstance(model, mixtures.Mixture1D):
                print(f"  weight {w:.3f}  mu {comp.mu:+.3f}  sigma {comp.sigma:.3f}")
            else:
                print(
                    f"  weight {w:.3f}  mu ({comp.mu[0]:+.2f}, {comp.mu[1]:+.2f})  "
                    f"cov {comp.cov.tolist()}"
                )
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--seed", type=int, help="master seed (default 2024)")
    p.add_argument("--out", help="output directory")


def _add_model_args(p):
    p.add_argument("--preset", help="named generative model (see `presets`)")
    p.add_argument("--model", help="mixture JSON file")


def _add_mlp_args(p):
    p.add_argument("--hidden", help="comma-separated hidden widths, e.g. 64,64")
    p.add_argument("--activation", choices=mlp.ACTIVATIONS)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--optimizer", choices=mlp.OPTIMIZERS)


def _add_map_args(p):
    p.add_argument("--map", help="reconstructive map JSON file")
    p.add_argument("--embed-dim", type=int, help="build a seeded map into this dimension")
    p.add_argument("--warp", choices=embedding.WARP_KINDS, help="plane warp for a built map")
    p.add_argument("--warp-scale", type=float)
    p.add_argument("--warp-rate", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posteriorlab",
        description="Assess a trained classifier against the exact posterior of "
        "its prescribed Gaussian-mixture training distribution.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a labeled dataset from a mixture")
    _add_common(p)
    _add_model_args(p)
    _add_map_args(p)
    p.add_argument("--n", type=int, help="number of samples (default 1000)")
    p.add_argument("--stream", type=int, help="RNG stream id (default 0)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a classifier on a dataset CSV")
    _add_common(p)
    _add_mlp_args(p)
    p.add_argument("--data", help="dataset CSV from `generate`")
    p.add_argument("--input-dim", type=int, help="expected input dimension (validated)")
    p.add_argument("--num-categories", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="compare a checkpoint against the exact posterior")
    _add_common(p)
    _add_model_args(p)
    _add_map_args(p)
    p.add_argument("--checkpoint", help="checkpoint JSON from `train`")
    p.add_argument("--start", type=float, help="first evaluation location")
    p.add_argument("--stop", type=float, help="end of the half-open location range")
    p.add_argument("--step", type=float, help="location spacing")
    p.add_argument("--points-file", help="JSON list of [v0,v1] plane points (2-D models)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="run the parametric grid sweep")
    _add_common(p)
    _add_mlp_args(p)
    p.add_argument("--n", type=int, help="samples per grid point (default 2000)")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--paper-scale", action="store_true", help="use the full 9000-point grid")
    p.add_argument("--yes", action="store_true", help="confirm paper-scale execution")
    p.add_argument("--bins", type=int, help="bins for the binned overlays (default 30)")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("path", help="evaluate both paths along a plane segment")
    _add_common(p)
    _add_model_args(p)
    _add_map_args(p)
    p.add_argument("--checkpoint")
    p.add_argument("--start", help="plane start point 'v0,v1'")
    p.add_argument("--end", help="plane end point 'v0,v1'")
    p.add_argument("--num-samples", type=int, help="samples along the path (default 16)")
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("report", help="emit plot-ready figure data from a sweep directory")
    _add_common(p)
    p.add_argument("--sweep-dir", help="directory produced by `sweep`")
    p.add_argument("--bins", type=int)
    p.add_argument("--svg", action="store_true", help="also render static SVG plots")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("presets", help="list named generative models")
    p.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
