"""
Experiment grid runner: config → solves → results.csv, SVG plots, PGM images.

Grid points only share the immutable problem instance, so they may run on a
thread pool; records are always written in grid order.
"""
import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from django.conf import settings
from PIL import Image

from .analysis import relative_error, relative_residual, semiconvergence_curve
from .charts import line_chart, stacked_chart
from .exceptions import ArgumentError, ExperimentError
from .linalg import as_vector, operator_svd
from .models import CSV_HEADER, ExperimentRecord
from .problems import add_noise, build_problem
from .serializers import ExperimentConfigSerializer
from .solvers import SolveResult, StoppingRule, run_solver

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridRun:
    point: object
    record: ExperimentRecord
    result: SolveResult


def load_config(source):
    """Validate a config given as a dict or as the path of a JSON document."""
    if isinstance(source, dict):
        data = source
    else:
        try:
            with open(source, encoding="utf-8") as handle:
                data = json.load(handle)
        except OSError as exc:
            raise ExperimentError(f"cannot read config {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ExperimentError(f"config {source} is not valid JSON: {exc}") from exc
    serializer = ExperimentConfigSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def _run_point(problem, config, point, svd):
    noisy = add_noise(problem, point.noise_percent, point.seed)
    b_exact_norm = float(np.linalg.norm(problem.b_exact))
    stop = StoppingRule(
        epsilon=point.assumed_noise_percent / 100.0 * b_exact_norm,
        eta=config.eta,
        max_iter=config.max_iter,
    )
    result = run_solver(
        point.solver.name, problem.A, noisy.b, point.solver.ell, stop,
        x_true=problem.x_true, svd=svd,
    )

    if result.iterations:
        summary = semiconvergence_curve(result)
        min_iteration, min_error = summary.argmin, summary.min_error
    else:
        min_iteration, min_error = 0, relative_error(result.solution, problem.x_true)

    record = ExperimentRecord(
        problem=problem.name,
        solver=point.solver.name,
        shift=point.solver.ell,
        noise_percent=point.noise_percent,
        assumed_noise_percent=point.assumed_noise_percent,
        seed=point.seed,
        iterations=result.iterations,
        stop_reason=result.stop_reason.value,
        relative_error=relative_error(result.solution, problem.x_true),
        relative_residual=relative_residual(problem.A, result.solution, noisy.b, problem.b_exact),
        min_error_iteration=min_iteration,
        min_error=min_error,
    )
    logger.info(
        f"[{point.index}] {point.run_id}: {record.stop_reason} at m={record.iterations}, "
        f"error={record.relative_error:.3e}"
    )
    return GridRun(point=point, record=record, result=result)


def execute_grid(config):
    """Run every grid point of ``config``; returns (problem, runs) in grid order."""
    problem = build_problem(config.problem.name, **config.problem.params)
    svd = None
    if any(solver.name == "tsvd" for solver in config.solvers):
        logger.info(f"computing SVD of {problem.name} ({problem.n} unknowns) for tsvd")
        svd = operator_svd(problem.A)

    points = config.grid()
    workers = max(1, settings.KRR_WORKERS)
    logger.info(f"running {len(points)} grid points for {config.problem} on {workers} worker(s)")
    if workers == 1:
        runs = [_run_point(problem, config, point, svd) for point in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            runs = list(executor.map(lambda point: _run_point(problem, config, point, svd), points))
    return problem, runs


def write_results_csv(records, path):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record.as_row())
    return path


def emit_pgm(image, dims, path):
    """
    Write a binary (P5) PGM with maxval 255 and round-half-up quantization.

    ``image`` is a column-major flattened h×w image, as blur2d produces them.
    """
    image = as_vector(image, "image")
    height, width = dims
    if image.shape[0] != height * width:
        raise ArgumentError(f"image has {image.shape[0]} pixels, dims {dims} need {height * width}")
    pixels = np.floor(255.0 * np.clip(image, 0.0, 1.0) + 0.5).astype(np.uint8)
    Image.fromarray(pixels.reshape((height, width), order="F")).save(path, format="PPM")
    return path


def write_convergence_svg(run, path):
    result = run.result
    series = [("residual ||b - Ax||", list(result.residual_history))]
    if result.error_history is not None:
        series.append(("relative error", list(result.error_history)))
    title = f"{run.record.problem}: {run.record.solver} (shift {run.record.shift})"
    path.write_text(line_chart(series, title, "iteration", "norm (log scale)"), encoding="utf-8")
    return path


def write_comparison_svg(runs, path):
    """Error and residual histories of every (solver, shift) for one noise realization."""
    labels = [f"{run.record.solver} (ell={run.record.shift})" for run in runs]
    errors = [
        (label, list(run.result.error_history))
        for label, run in zip(labels, runs)
        if run.result.error_history is not None
    ]
    residuals = [(label, list(run.result.residual_history)) for label, run in zip(labels, runs)]
    first = runs[0].record
    title = f"{first.problem}: v={first.noise_percent:g}%, assumed {first.assumed_noise_percent:g}%, seed {first.seed}"
    path.write_text(
        stacked_chart([
            (errors, f"{title}, relative error", "iteration", "relative error"),
            (residuals, f"{title}, residual", "iteration", "residual ||b - Ax||"),
        ]),
        encoding="utf-8",
    )
    return path


def _comparison_groups(runs):
    groups = {}
    for run in runs:
        key = (run.point.noise_percent, run.point.assumed_noise_percent, run.point.seed)
        groups.setdefault(key, []).append(run)
    return groups


def resolve_output_dir(config, override=None):
    directory = Path(override or settings.KRR_OUT or config.output_dir)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ExperimentError(f"cannot create output directory {directory}: {exc}") from exc
    return directory


def run_experiment(config, output_dir=None):
    """Run the grid and write its artifacts; returns the list of written paths."""
    directory = resolve_output_dir(config, output_dir)
    problem, runs = execute_grid(config)

    written = []
    try:
        written.append(write_results_csv([run.record for run in runs], directory / "results.csv"))
        if config.write_plots:
            for run in runs:
                written.append(write_convergence_svg(run, directory / f"convergence_{run.point.run_id}.svg"))
            for (noise, assumed, seed), group in _comparison_groups(runs).items():
                name = f"comparison_v{noise:g}_a{assumed:g}_s{seed}.svg"
                written.append(write_comparison_svg(group, directory / name))
        if problem.image_dims is not None:
            written.append(emit_pgm(problem.x_true, problem.image_dims, directory / "truth.pgm"))
            observed = {}
            for run in runs:
                key = (run.point.noise_percent, run.point.seed)
                if key not in observed:
                    noisy = add_noise(problem, *key)
                    observed[key] = emit_pgm(
                        noisy.b, problem.image_dims, directory / f"observed_v{key[0]:g}_s{key[1]}.pgm"
                    )
                    written.append(observed[key])
                written.append(emit_pgm(
                    run.result.solution, problem.image_dims, directory / f"recon_{run.point.run_id}.pgm"
                ))
    except OSError as exc:
        raise ExperimentError(f"cannot write results to {directory}: {exc}") from exc

    logger.info(f"wrote {len(written)} files to {directory}")
    return written


def write_spectra(reports, directory):
    """spectra.csv (method, shift, index, sigma) and a log-scale spectra.svg."""
    directory = Path(directory)
    csv_path = directory / "spectra.csv"
    try:
        with open(csv_path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(("method", "shift", "index", "sigma"))
            for report in reports:
                for index, value in enumerate(report.singular_values, start=1):
                    writer.writerow((report.method, report.ell, index, f"{value:.5e}"))
        svg_path = directory / "spectra.svg"
        series = [(report.label, list(report.singular_values)) for report in reports]
        svg_path.write_text(
            line_chart(series, "Singular values of projected matrices", "index", "singular value"),
            encoding="utf-8",
        )
    except OSError as exc:
        raise ExperimentError(f"cannot write spectra to {directory}: {exc}") from exc
    return [csv_path, svg_path]


def demo_config(name, n=512, N=32, seeds=5):
    """Builtin grids reproducing the comparison tables at desk scale."""
    seed_list = list(range(1, seeds + 1))
    phillips = {"name": "phillips", "n": n}
    configs = {
        "table1": {
            "problem": phillips,
            "solvers": [
                "gmres", "qmr",
                {"name": "rrgmres", "shifts": [1, 2]},
                {"name": "rrqmr", "shifts": [1, 2]},
            ],
            "noise_levels_percent": [0.1, 0.5, 1.0],
        },
        "table2": {
            "problem": phillips,
            "solvers": ["qmr", {"name": "rrqmr", "shifts": [1, 2, 3]}],
            "noise_levels_percent": [0.5, 1.0, 5.0],
        },
        "table3": {
            "problem": {"name": "blur2d", "N": N, "band": 6, "sigma": 1.5},
            "solvers": ["gmres", "qmr", {"name": "rrgmres", "shifts": [1]}, {"name": "rrqmr", "shifts": [1]}],
            "noise_levels_percent": [0.5, 1.0, 5.0],
        },
        "underestimate": {
            "problem": phillips,
            "solvers": ["gmres", "qmr", {"name": "rrgmres", "shifts": [1]}, {"name": "rrqmr", "shifts": [1]}],
            "noise_levels_percent": [1.0],
            "assumed_noise_levels_percent": [0.01],
            "max_iter": 60,
        },
    }
    if name not in configs:
        raise ArgumentError(f'unknown demo "{name}"; choose from {", ".join(sorted(configs))}')
    config = {"seeds": seed_list, "eta": 1.01, "max_iter": 100, "output_dir": name}
    config.update(configs[name])
    return config


DEMO_NAMES = ("table1", "table2", "table3", "underestimate")
