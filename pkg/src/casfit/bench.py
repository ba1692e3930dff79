"""Benchmark harness: error metrics, residuals, experiment grids, CSV reports.

A grid crosses method variants with dataset recipes.  Instances are shared
across variants (their synthesis depends only on the dataset seed and the
instance index) and every run of a given (dataset, instance, run) cell uses
the same fit seed for all variants, so comparisons between variants are
paired.  Everything except the wall-clock columns is deterministic for a
fixed grid seed.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .consensus import FitConfig, fit
from .distances import MetricKind, axial_distance, orthogonal_distance, sampson_distance
from .errors import ParseError
from .quadric import EllipsoidModel, validate_ellipsoid
from .synth import DatasetSpec, Instance, make_instance

CSV_COLUMNS = (
    "variant", "dataset_kind", "noise_level", "outlier_fraction", "instance",
    "run", "param_err", "semiaxis_err", "center_err", "sampson_res",
    "orth_res", "axial_res", "iterations", "lo_count", "is_ellipsoid", "wall_ms",
)

# Columns aggregated as mean +/- std in the per-(variant, dataset) rows.
AGGREGATE_COLUMNS = (
    "param_err", "semiaxis_err", "center_err", "sampson_res", "orth_res",
    "axial_res", "iterations", "lo_count", "is_ellipsoid", "wall_ms",
)


@dataclass(frozen=True)
class ErrorTriple:
    """L1 discrepancies between an estimate and the generating truth."""

    parameter_error: float
    semiaxis_error: float
    center_error: float


@dataclass(frozen=True)
class ResidualTriple:
    """Mean point distances under the three geometric metrics."""

    sampson_residual: float
    orthogonal_residual: float
    axial_residual: float


def fitting_errors(estimated: EllipsoidModel, truth: EllipsoidModel) -> ErrorTriple:
    """Coefficient, semiaxis and center discrepancies (all L1 norms).

    Coefficients are compared in their normalized form, semiaxes as
    descending-sorted triples, so the values do not depend on axis order
    or on the q / -q ambiguity.
    """
    param = float(np.abs(estimated.coeffs - truth.coeffs).sum())
    axes_est = np.sort(estimated.semiaxes)[::-1]
    axes_true = np.sort(truth.semiaxes)[::-1]
    semiaxis = float(np.abs(axes_est - axes_true).sum())
    center = float(np.abs(estimated.center - truth.center).sum())
    return ErrorTriple(param, semiaxis, center)


def residuals(model: EllipsoidModel, points) -> ResidualTriple:
    """Mean Sampson / orthogonal / axial distance of ``points`` to ``model``."""
    return ResidualTriple(
        sampson_residual=float(np.mean(sampson_distance(points, model))),
        orthogonal_residual=float(np.mean(orthogonal_distance(points, model))),
        axial_residual=float(np.mean(axial_distance(points, model))),
    )


@dataclass(frozen=True)
class GridVariant:
    """A named method configuration inside an experiment grid.

    The inlier threshold is either ``epsilon`` (absolute) or
    ``epsilon_rel_sigma`` (a multiple of each instance's planted noise
    level, mirroring per-dataset threshold tuning).
    """

    name: str
    score_metric: str = "cas:0.5"
    weight_metric: Optional[str] = None
    local_opt: bool = True
    lo_steps: int = 5
    epsilon: Optional[float] = None
    epsilon_rel_sigma: Optional[float] = 2.0
    mu: float = 0.95
    sample_size: int = 9
    min_iterations: int = 50
    max_iterations: int = 100_000

    def __post_init__(self):
        if (self.epsilon is None) == (self.epsilon_rel_sigma is None):
            raise ValueError("set exactly one of epsilon and epsilon_rel_sigma")
        MetricKind.parse(self.score_metric)
        if self.weight_metric is not None:
            MetricKind.parse(self.weight_metric)

    def make_config(self, sigma: float, seed: int) -> FitConfig:
        if self.epsilon is not None:
            eps = self.epsilon
        else:
            eps = self.epsilon_rel_sigma * sigma
            if not eps > 0.0:
                raise ValueError(
                    f"variant {self.name!r} needs a noisy dataset to derive epsilon from")
        score = MetricKind.parse(self.score_metric)
        weight = MetricKind.parse(self.weight_metric) if self.weight_metric else score
        return FitConfig(
            epsilon=eps, mu=self.mu, sample_size=self.sample_size,
            score_metric=score, weight_metric=weight,
            local_opt=self.local_opt, lo_steps=self.lo_steps,
            max_iterations=self.max_iterations, min_iterations=self.min_iterations,
            seed=seed)


@dataclass(frozen=True)
class ExperimentGrid:
    """Variants x datasets x instances x repeated runs."""

    variants: tuple
    datasets: tuple
    runs_per_instance: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variants", tuple(self.variants))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        if not self.variants or not self.datasets:
            raise ValueError("grid needs at least one variant and one dataset")
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ValueError("variant names must be unique")
        if self.runs_per_instance < 1:
            raise ValueError("runs_per_instance must be positive")


def grid_from_json(doc) -> ExperimentGrid:
    """Build a grid from a parsed JSON document (see README for the schema)."""
    if not isinstance(doc, dict):
        raise ParseError("grid document must be a JSON object")
    try:
        variants = tuple(GridVariant(**v) for v in doc["variants"])
        datasets = tuple(DatasetSpec(**d) for d in doc["datasets"])
        return ExperimentGrid(
            variants=variants, datasets=datasets,
            runs_per_instance=int(doc.get("runs_per_instance", 100)),
            seed=int(doc.get("seed", 0)))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad grid document: {exc}") from exc


def load_grid(path) -> ExperimentGrid:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    return grid_from_json(doc)


def _instance_rng(dataset: DatasetSpec, instance_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([dataset.seed, instance_index])))


def _fit_seed(grid_seed: int, dataset_index: int, instance_index: int, run_index: int) -> int:
    ss = np.random.SeedSequence([grid_seed, dataset_index, instance_index, run_index])
    return int(ss.generate_state(1, np.uint64)[0])


def _grid_instances(grid: ExperimentGrid) -> list:
    per_dataset = []
    for dataset in grid.datasets:
        per_dataset.append([
            make_instance(dataset, _instance_rng(dataset, i))
            for i in range(dataset.instance_count)
        ])
    return per_dataset


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def run_grid(grid: ExperimentGrid, out_path=None, progress=None):
    """Run every cell of the grid; returns (data_rows, aggregate_rows).

    Rows are dicts keyed by CSV_COLUMNS, in canonical (variant, dataset,
    instance, run) order.  When ``out_path`` is given the report is written
    there as CSV, with each (variant, dataset) block followed by its
    aggregate row (instance 'all', run 'aggregate', cells 'mean±std').
    """
    instances = _grid_instances(grid)
    blocks = []
    for variant in grid.variants:
        for di, dataset in enumerate(grid.datasets):
            block = []
            for ii in range(dataset.instance_count):
                inst: Instance = instances[di][ii]
                for ri in range(grid.runs_per_instance):
                    cfg = variant.make_config(inst.sigma, _fit_seed(grid.seed, di, ii, ri))
                    start = time.perf_counter()
                    report = fit(inst.points, cfg)
                    wall_ms = 1e3 * (time.perf_counter() - start)
                    err = fitting_errors(report.model, inst.truth)
                    res = residuals(report.model, inst.points)
                    row = {
                        "variant": variant.name,
                        "dataset_kind": dataset.kind,
                        "noise_level": _fmt(dataset.sigma_rel),
                        "outlier_fraction": _fmt(dataset.outlier_fraction),
                        "instance": str(ii),
                        "run": str(ri),
                        "param_err": _fmt(err.parameter_error),
                        "semiaxis_err": _fmt(err.semiaxis_error),
                        "center_err": _fmt(err.center_error),
                        "sampson_res": _fmt(res.sampson_residual),
                        "orth_res": _fmt(res.orthogonal_residual),
                        "axial_res": _fmt(res.axial_residual),
                        "iterations": str(report.iterations),
                        "lo_count": str(report.lo_invocations),
                        "is_ellipsoid": str(int(validate_ellipsoid(report.model.coeffs))),
                        "wall_ms": f"{wall_ms:.3f}",
                    }
                    block.append(row)
                    if progress is not None:
                        progress(row)
            blocks.append((block, _aggregate(variant.name, dataset, block)))
    data_rows = [row for block, _ in blocks for row in block]
    aggregate_rows = [agg for _, agg in blocks]
    if out_path is not None:
        _write_csv(out_path, blocks)
    return data_rows, aggregate_rows


def _aggregate(variant_name: str, dataset: DatasetSpec, block: Sequence[dict]) -> dict:
    agg = {
        "variant": variant_name,
        "dataset_kind": dataset.kind,
        "noise_level": _fmt(dataset.sigma_rel),
        "outlier_fraction": _fmt(dataset.outlier_fraction),
        "instance": "all",
        "run": "aggregate",
    }
    for col in AGGREGATE_COLUMNS:
        vals = np.array([float(row[col]) for row in block])
        agg[col] = f"{vals.mean():.15g}±{vals.std():.15g}"
    return agg


def _write_csv(out_path, blocks) -> None:
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for block, aggregate in blocks:
            writer.writerows(block)
            writer.writerow(aggregate)


def read_report(path):
    """Read a report CSV back into (data_rows, aggregate_rows)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ParseError(f"{path}: unexpected columns {reader.fieldnames}")
        data_rows, aggregate_rows = [], []
        for row in reader:
            (aggregate_rows if row["run"] == "aggregate" else data_rows).append(row)
    return data_rows, aggregate_rows
