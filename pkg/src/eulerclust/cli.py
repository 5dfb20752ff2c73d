"""Command-line benchmark runner.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .bench import (
    ALGORITHMS,
    ExperimentConfig,
    alpha_sweep,
    default_alpha_grid,
    emit_boundary_grid,
    kappa_vs_k_study,
    load_dataset,
    run_experiment,
)
from .data import HalfmoonSpec, normalize, save_result
from .errors import ConfigError, DataParseError, InvalidDataError, InvalidParameterError

log = logging.getLogger("eulerclust")

EXIT_CONFIG = 2
EXIT_DATA = 3


def _float_list(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eulerclust", description=__doc__.splitlines()[0])
    p.add_argument("--algo", choices=ALGORITHMS, default="eulerk")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", metavar="PATH", help="CSV file with one point per row")
    src.add_argument("--generate", choices=["halfmoon"], help="use a synthetic dataset")
    p.add_argument("--n", type=int, default=1000, help="half-moon size (default 1000)")
    p.add_argument("--noise", type=float, default=0.1, help="half-moon noise std (default 0.1)")
    p.add_argument("--data-seed", type=int, default=0, help="half-moon generator seed")
    p.add_argument("--label-col", metavar="NAME|INDEX", help="label column of the CSV input")
    p.add_argument("--delimiter", default=",", help="CSV delimiter; 'whitespace' splits on blanks")
    p.add_argument("--k", type=int, default=2)
    alpha = p.add_mutually_exclusive_group()
    alpha.add_argument("--alpha", type=float, default=1.0)
    alpha.add_argument("--alpha-grid", metavar="default|LIST",
                       help="sweep alpha over the default grid or a comma-separated list")
    p.add_argument("--select-by", choices=["nmi", "acc"], default="nmi",
                   help="metric used to pick the best alpha of a sweep")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="base seed; restart r uses seed+r")
    p.add_argument("--normalize", choices=["none", "minmax01", "zscore"], default="minmax01")
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-8, help="relative objective decrease tolerance")
    p.add_argument("--init", choices=["sample", "sphere"], default="sample")
    p.add_argument("--empty-cluster", choices=["reseed", "error"], default="reseed")
    p.add_argument("--no-metrics", action="store_true", help="skip ACC/NMI (no labels needed)")
    p.add_argument("--out", metavar="PATH.json", help="write the full report as JSON")
    p.add_argument("--emit-boundaries", metavar="PATH.csv", help="write a decision-surface grid (2-D data)")
    p.add_argument("--grid-res", type=int, default=101)
    p.add_argument("--grid-bounds", type=_float_list, metavar="X1LO,X1HI,X2LO,X2HI",
                   help="grid bounds in normalized feature space (default: data range)")
    p.add_argument("--kappa-study", type=_int_list, metavar="K1,K2,...",
                   help="mean deviation degree for each k instead of a single run")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def config_from_args(args) -> ExperimentConfig:
    delimiter = None if args.delimiter == "whitespace" else args.delimiter
    return ExperimentConfig(
        algorithm=args.algo,
        k=args.k,
        alpha=args.alpha,
        restarts=args.restarts,
        base_seed=args.seed,
        normalize=args.normalize,
        max_iter=args.max_iter,
        rel_tol=args.tol,
        init={"sample": "sample-points", "sphere": "sphere-uniform"}[args.init],
        empty_cluster={"reseed": "reseed-farthest", "error": "drop-error"}[args.empty_cluster],
        input_path=args.input,
        label_column=args.label_col,
        delimiter=delimiter,
        halfmoon=None if args.input else HalfmoonSpec(args.n, args.noise, args.data_seed),
        metrics=not args.no_metrics,
        select_by=args.select_by,
    )


def _run(args) -> int:
    say = (lambda *_: None) if args.quiet else print
    config = config_from_args(args)
    dataset = load_dataset(config)

    if args.kappa_study:
        study = kappa_vs_k_study(config, args.kappa_study, dataset)
        say(study.table())
        if args.out:
            save_result(args.out, study)
        return 0

    if args.alpha_grid:
        grid = default_alpha_grid() if args.alpha_grid == "default" else _float_list(args.alpha_grid)
        sweep = alpha_sweep(config, grid, dataset)
        for rep in sweep.reports:
            say(rep.table())
        for metric in ("nmi", "acc"):
            b = sweep.best(metric)
            say(f"best alpha by {metric.upper()}: {b['alpha']:g} "
                f"({100 * b['mean']:.2f} +- {100 * b['std']:.2f})")
        report = sweep.selected
        if args.out:
            save_result(args.out, sweep)
    else:
        report = run_experiment(config, dataset)
        say(report.table())
        if args.out:
            save_result(args.out, report)

    if args.emit_boundaries:
        result = report.results[report.best_restart]
        if args.grid_bounds:
            if len(args.grid_bounds) != 4:
                raise ConfigError("--grid-bounds needs four numbers")
            b = args.grid_bounds
            bounds = ((b[0], b[1]), (b[2], b[3]))
        else:
            data, _ = normalize(dataset, config.normalize)
            lo, hi = data.values.min(axis=0), data.values.max(axis=0)
            if data.d != 2:
                raise InvalidParameterError(f"boundary grids need 2-D data, got d={data.d}")
            bounds = ((lo[0], hi[0]), (lo[1], hi[1]))
        emit_boundary_grid(result, bounds, args.grid_res, args.emit_boundaries)
        say(f"boundary grid written to {args.emit_boundaries}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (ConfigError, InvalidParameterError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (DataParseError, InvalidDataError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
