"""Command-line interface.

Subcommands:

``bound``
    Evaluate the estimation-error bounds for one (n, m, model, sigma)
    configuration and print the report as JSON.
``experiment``
    Run one experiment described by a JSON config file and write CSV,
    SVG, and a JSON summary into an output directory.
``reproduce-paper``
    Run the three reference Monte Carlo experiments (scale-factor
    models, Toeplitz models, and log-error divergence) and write the
    corresponding figures, per-model CSVs, a summary, and a bound
    comparison grid.

Exit codes: 0 success, 2 usage or config error, 3 domain error
(for example requesting closed-form norms from a model that has none).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .bounds import build_report, inputs_from_model, soloveychik_expectation
from .errors import CorrcovError, InvalidInputs, NoAnalyticForm
from .experiments import (
    LOG_ERROR,
    MIN_SAMPLE,
    ExperimentConfig,
    run_log_error_experiment,
    run_min_sample_experiment,
)
from .io import PlotSpec, Series, render_svg, result_to_dict, write_csv, write_json
from .linalg import SpdMatrix
from .sampling import split
from .shape_models import ModelFamily, parse_model

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3

SEED_ENV_VAR = "CORRCOV_SEED"

_CONFIG_KEYS = {
    "experiment",
    "models",
    "n_range",
    "m_range",
    "eta",
    "trials",
    "master_seed",
    "sigma",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrcov",
        description="Covariance estimation from correlated Gaussian samples: "
        "bound evaluation and Monte Carlo experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", help="evaluate error bounds for one configuration")
    p_bound.add_argument("--n", type=int, required=True, help="signal dimension")
    p_bound.add_argument("--m", type=int, required=True, help="sample count")
    p_bound.add_argument(
        "--model",
        required=True,
        help="model descriptor: identity | toeplitz:<theta> | all_ones | "
        "random_diag:<mu>,<sigma>",
    )
    p_bound.add_argument(
        "--sigma", default=None, help="path to a JSON file holding the covariance matrix"
    )
    p_bound.add_argument(
        "--delta", type=float, default=None, help="tail parameter; adds tail fields"
    )
    p_bound.add_argument(
        "--analytic",
        action="store_true",
        help="use the model's closed-form norms instead of numeric ones",
    )
    p_bound.add_argument(
        "--model-seed",
        type=int,
        default=0,
        help="seed for the random_diag scale factors (default 0)",
    )
    p_bound.add_argument(
        "--paulin-l", type=float, default=None, help="entry bound L for the Paulin comparison"
    )
    p_bound.add_argument(
        "--paulin-sigma",
        type=float,
        default=None,
        help="entry standard deviation for the Paulin comparison",
    )
    p_bound.set_defaults(func=cmd_bound)

    p_exp = sub.add_parser("experiment", help="run one experiment from a config file")
    p_exp.add_argument("--config", required=True, help="path to a JSON experiment config")
    p_exp.add_argument("--out", required=True, help="output directory")
    p_exp.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_exp.add_argument("--trials", type=int, default=None, help="override the trial count")
    p_exp.add_argument(
        "--threads", type=int, default=None, help="worker process cap (default: all cores)"
    )
    p_exp.set_defaults(func=cmd_experiment)

    p_rep = sub.add_parser(
        "reproduce-paper", help="run the three reference experiments end to end"
    )
    p_rep.add_argument("--out", required=True, help="output directory")
    p_rep.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p_rep.add_argument(
        "--scale",
        type=float,
        default=1.0,
        help="trial-count multiplier in (0, 1]; 1 runs the full 500 trials",
    )
    p_rep.add_argument(
        "--threads", type=int, default=None, help="worker process cap (default: all cores)"
    )
    p_rep.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoAnalyticForm as exc:
        print(f"corrcov: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except InvalidInputs as exc:
        print(f"corrcov: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"corrcov: bad input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorrcovError as exc:
        print(f"corrcov: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"corrcov: I/O failure: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    """Console-script entry point."""
    sys.exit(main())


def _resolve_seed(flag_value, fallback: int) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        return int(env)
    return fallback


def _load_sigma(path: str | None, n: int) -> SpdMatrix:
    if path is None:
        return SpdMatrix.identity(n)
    with open(path) as handle:
        data = json.load(handle)
    mat = np.asarray(data, dtype=np.float64)
    if mat.ndim != 2 or mat.shape != (n, n):
        raise InvalidInputs(f"sigma file must hold an {n}x{n} matrix, got {mat.shape}")
    return SpdMatrix(mat)


def cmd_bound(args) -> int:
    if args.n < 1 or args.m < 1:
        raise InvalidInputs("n and m must be positive")
    family = parse_model(args.model)
    sigma = _load_sigma(args.sigma, args.n)
    model = family.instantiate(args.m, seed=args.model_seed if family.needs_seed else None)
    inputs = inputs_from_model(model, sigma, use_analytic=args.analytic)
    report = build_report(
        inputs,
        delta=args.delta,
        paulin_l=args.paulin_l,
        paulin_entry_sigma=args.paulin_sigma,
    )
    report.metadata["model"] = family.label()
    report.metadata["n"] = args.n
    report.metadata["m"] = args.m
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from the flat JSON schema."""
    if not isinstance(data, dict):
        raise InvalidInputs("config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise InvalidInputs(f"unknown config keys: {sorted(unknown)}")
    if "experiment" not in data or "models" not in data:
        raise InvalidInputs("config needs 'experiment' and 'models'")
    models = tuple(parse_model(text) for text in data["models"])
    sigma = data.get("sigma", "identity")
    if sigma != "identity":
        sigma = tuple(tuple(float(v) for v in row) for row in sigma)
    return ExperimentConfig(
        experiment=data["experiment"],
        models=models,
        trials=int(data.get("trials", 500)),
        n_range=tuple(int(v) for v in data["n_range"]),
        m_range=tuple(int(v) for v in data["m_range"]) if "m_range" in data else None,
        eta=float(data["eta"]) if "eta" in data else None,
        master_seed=int(data.get("master_seed", 0)),
        sigma=sigma,
    )


def _safe_name(label: str) -> str:
    return label.replace(":", "_").replace(",", "_")


def _progress(stream=sys.stderr):
    def emit(label: str) -> None:
        print(f"corrcov: finished {label}", file=stream)

    return emit


def _run_config(cfg: ExperimentConfig, threads: int | None):
    if cfg.experiment == MIN_SAMPLE:
        return run_min_sample_experiment(cfg, threads=threads, progress=_progress())
    return run_log_error_experiment(cfg, threads=threads, progress=_progress())


def _min_sample_plot(result, title: str, path: Path) -> PlotSpec:
    series = []
    for label in result.metadata["models"]:
        pts = tuple(
            (rec.n, rec.mean_min_m)
            for rec in result.records
            if rec.model == label and math.isfinite(rec.mean_min_m)
        )
        series.append(Series(label=label, points=pts))
    return PlotSpec(
        title=title,
        x_label="signal dimension n",
        y_label="mean minimal sample size m",
        series=tuple(series),
        output_path=str(path),
    )


def _log_error_plot(result, title: str, path: Path) -> PlotSpec:
    series = []
    for label in result.metadata["models"]:
        recs = [rec for rec in result.records if rec.model == label]
        series.append(
            Series(label=label, points=tuple((rec.m, rec.log10_mean_error) for rec in recs))
        )
        series.append(
            Series(
                label=f"{label} (bound)",
                points=tuple((rec.m, math.log10(rec.theoretical_bound)) for rec in recs),
                style="dashed",
            )
        )
    return PlotSpec(
        title=title,
        x_label="sample size m",
        y_label="log10 mean spectral error",
        series=tuple(series),
        output_path=str(path),
    )


def _write_experiment_outputs(result, out_dir: Path, stem: str) -> None:
    for label in result.metadata["models"]:
        write_csv(result, out_dir / f"{stem}_{_safe_name(label)}.csv", model=label)
    if result.experiment == MIN_SAMPLE:
        spec = _min_sample_plot(
            result, "Sample size vs signal dimension", out_dir / f"{stem}.svg"
        )
    else:
        spec = _log_error_plot(
            result, "Log estimation error vs sample size", out_dir / f"{stem}.svg"
        )
    render_svg(spec)
    for warning in result.warnings:
        print(f"corrcov: warning: {warning}", file=sys.stderr)


def cmd_experiment(args) -> int:
    with open(args.config) as handle:
        data = json.load(handle)
    if args.trials is not None:
        data["trials"] = args.trials
    data["master_seed"] = _resolve_seed(args.seed, int(data.get("master_seed", 0)))
    cfg = config_from_dict(data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = _run_config(cfg, args.threads)
    _write_experiment_outputs(result, out_dir, cfg.experiment)
    write_json(result_to_dict(result), out_dir / "summary.json")
    return EXIT_OK


# Reference experiment configurations: scale-factor models with unit mean
# square, the geometric-decay models, and the log-error divergence study.
_FIG1_MODELS = (
    "identity",
    f"random_diag:{math.sqrt(3.0) / 2.0!r},0.5",
    f"random_diag:{math.sqrt(2.0) / 2.0!r},{math.sqrt(2.0) / 2.0!r}",
    "random_diag:0.0,1.0",
)
_FIG2_MODELS = ("identity", "toeplitz:0.25", "toeplitz:0.5", "toeplitz:0.75")
_FULL_TRIALS = 500

_DOMINANCE_GRID_N = (10, 50, 100, 500)
_DOMINANCE_MODELS = ("identity", "toeplitz:0.5")


def _dominance_grid() -> list[dict]:
    """Expectation bound vs the Soloveychik comparison on a fixed grid."""
    rows = []
    for label in _DOMINANCE_MODELS:
        family = parse_model(label)
        for n in _DOMINANCE_GRID_N:
            m = 10 * n
            inputs = inputs_from_model(
                family.instantiate(m), SpdMatrix.identity(n), use_analytic=True
            )
            report = build_report(inputs)
            rows.append(
                {
                    "model": label,
                    "n": n,
                    "m": m,
                    "expectation_bound": report.expectation_bound,
                    "comparison_soloveychik": report.comparison_soloveychik,
                    "dominates": report.expectation_bound
                    < report.comparison_soloveychik,
                }
            )
    return rows


def cmd_reproduce(args) -> int:
    if not (0.0 < args.scale <= 1.0):
        raise InvalidInputs("scale must lie in (0, 1]")
    seed = _resolve_seed(args.seed, 0)
    trials = max(1, round(_FULL_TRIALS * args.scale))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    # Per-figure seeds derived from a dedicated stream so the figures do
    # not share trial randomness.
    seed_source = split(seed, 2**32)
    fig_seeds = [seed_source.derive_seed() for _ in range(3)]

    fig1_cfg = ExperimentConfig(
        experiment=MIN_SAMPLE,
        models=tuple(parse_model(t) for t in _FIG1_MODELS),
        trials=trials,
        n_range=(1, 30, 1),
        eta=0.2,
        master_seed=fig_seeds[0],
    )
    fig2_cfg = ExperimentConfig(
        experiment=MIN_SAMPLE,
        models=tuple(parse_model(t) for t in _FIG2_MODELS),
        trials=trials,
        n_range=(1, 30, 1),
        eta=0.2,
        master_seed=fig_seeds[1],
    )
    fig3_cfg = ExperimentConfig(
        experiment=LOG_ERROR,
        models=tuple(parse_model(t) for t in _FIG2_MODELS),
        trials=trials,
        n_range=(15, 15, 1),
        m_range=(50, 1000, 50),
        master_seed=fig_seeds[2],
    )

    summary = {"seed": seed, "scale": args.scale, "trials": trials, "figures": {}}
    for stem, cfg in (("fig1", fig1_cfg), ("fig2", fig2_cfg), ("fig3", fig3_cfg)):
        result = _run_config(cfg, args.threads)
        _write_experiment_outputs(result, out_dir, stem)
        summary["figures"][stem] = result_to_dict(result)

    dominance = _dominance_grid()
    summary["bound_dominance"] = dominance
    write_json(summary, out_dir / "summary.json")
    write_json({"comparison_grid": dominance}, out_dir / "bounds.json")
    return EXIT_OK
