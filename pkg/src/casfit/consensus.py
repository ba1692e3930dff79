"""Sample-consensus ellipsoid fitting with optional local optimization.

The engine repeatedly fits a quadric to a minimal point sample, keeps the
candidate whose Gaussian-kernel score over all points is highest, and runs
a short weighted-refit cascade whenever the sample-consensus best improves.
The number of iterations adapts to the inlier ratio of the best model so
far, with a confidence target ``mu``.

Scoring uses soft per-point energies exp(-d^2 / (2 eps^2)) rather than a
hard inlier count, so models are rewarded for being close to many points,
not just for clearing the threshold.

Everything is deterministic for a fixed seed: the generator is PCG64 and
samples are drawn in a fixed order, single threaded.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distances import MetricKind, cas, evaluate_metric
from .errors import (DegenerateQuadric, InsufficientSupport, NoModelFound,
                     NotAnEllipsoid, RankDeficient, TooFewPoints)
from .leastsq import gaussian_weights, lls_fit, wls_fit
from .quadric import EllipsoidModel, as_points

RNG_ALGORITHM = "PCG64"

# Annealing range of the refit kernel width, as multiples of eps.
LO_EPS_START = 1.5
LO_EPS_END = 0.5


@dataclass(frozen=True)
class FitConfig:
    """Knobs for one fitting run.

    ``score_metric`` and ``weight_metric`` default to the combined
    axial/Sampson metric with blend ratio ``lam``; pass explicit kinds to
    reproduce plain sample consensus under a single distance (no local
    optimization) or refits driven by another metric.
    """

    epsilon: float
    lam: float = 0.5
    mu: float = 0.95
    sample_size: int = 9
    score_metric: Optional[MetricKind] = None
    weight_metric: Optional[MetricKind] = None
    local_opt: bool = True
    lo_steps: int = 5
    max_iterations: int = 100_000
    min_iterations: int = 50
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie strictly between 0 and 1")
        if self.sample_size < 9:
            raise ValueError("sample_size must be at least 9")
        if self.lo_steps < 1:
            raise ValueError("lo_steps must be at least 1")
        if self.min_iterations < 1 or self.max_iterations < self.min_iterations:
            raise ValueError("iteration bounds must satisfy 1 <= min <= max")

    def resolved_score_metric(self) -> MetricKind:
        return self.score_metric if self.score_metric is not None else cas(self.lam)

    def resolved_weight_metric(self) -> MetricKind:
        return self.weight_metric if self.weight_metric is not None else cas(self.lam)


@dataclass(frozen=True)
class FitReport:
    """Result of one fitting run."""

    model: EllipsoidModel
    score: float
    inlier_mask: np.ndarray
    inlier_ratio: float
    iterations: int
    lo_invocations: int
    wall_time: float
    rng_algorithm: str = RNG_ALGORITHM

    def __post_init__(self):
        mask = np.array(self.inlier_mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "inlier_mask", mask)


def point_energy(distance, epsilon: float):
    """Gaussian kernel exp(-d^2 / (2 eps^2)); 1 on the surface, 0 at +inf."""
    if not epsilon > 0.0:
        raise ValueError("epsilon must be positive")
    d = np.asarray(distance, dtype=float)
    with np.errstate(over="ignore"):
        out = np.exp(-np.square(d) / (2.0 * epsilon * epsilon))
    return float(out) if out.ndim == 0 else out


def model_score(model: EllipsoidModel, points, epsilon: float,
                metric: MetricKind | None = None) -> float:
    """Sum of point energies under ``metric`` (default: combined metric)."""
    if metric is None:
        metric = cas()
    d = evaluate_metric(metric, points, model)
    return float(np.sum(point_energy(d, epsilon)))


def required_iterations(v: float, mu: float, n: int,
                        min_iterations: int = 1,
                        max_iterations: int = 100_000) -> int:
    """Adaptive iteration budget ceil(log(1 - mu) / log(1 - v^n)), clamped.

    ``v`` is the inlier ratio of the best model so far.  v == 0 (or an
    underflowing v^n) yields the upper clamp, v == 1 the lower clamp.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError("inlier ratio must lie in [0, 1]")
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie strictly between 0 and 1")
    if n < 1:
        raise ValueError("sample size must be positive")
    vn = v ** n
    if vn >= 1.0:
        return min_iterations
    if vn <= 0.0:
        return max_iterations
    denom = math.log1p(-vn)
    raw = math.log1p(-mu) / denom
    if raw >= max_iterations:
        return max_iterations
    return max(min_iterations, math.ceil(raw))


def classify(points, model: EllipsoidModel, epsilon: float,
             metric: MetricKind | None = None) -> np.ndarray:
    """Boolean inlier mask: distance strictly below epsilon."""
    if metric is None:
        metric = cas()
    d = np.atleast_1d(evaluate_metric(metric, points, model))
    return d < epsilon


def sample_minimal(point_count: int, sample_size: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Uniform minimal sample of distinct point indices."""
    if point_count < sample_size:
        raise TooFewPoints(f"need at least {sample_size} points, got {point_count}")
    return rng.choice(point_count, size=sample_size, replace=False)


def _lo_schedule(epsilon: float, steps: int) -> np.ndarray:
    if steps == 1:
        return np.array([epsilon])
    return np.linspace(LO_EPS_START * epsilon, LO_EPS_END * epsilon, steps)


def local_optimize(model: EllipsoidModel, points, cfg: FitConfig) -> Optional[EllipsoidModel]:
    """Weighted-refit cascade around ``model``; None when nothing validates.

    Each step reweights all points against the current model with a
    shrinking kernel width, refits, and keeps the refit as the new current
    model when it is a valid ellipsoid.  The best-scoring step output is
    returned; steps whose refit fails or degenerates are skipped.
    """
    pts = as_points(points)
    weight_metric = cfg.resolved_weight_metric()
    score_metric = cfg.resolved_score_metric()
    current = model
    best: Optional[EllipsoidModel] = None
    best_score = -math.inf
    for eps_lo in _lo_schedule(cfg.epsilon, cfg.lo_steps):
        w = gaussian_weights(pts, current, eps_lo, weight_metric)
        try:
            q = wls_fit(pts, w)
            candidate = EllipsoidModel.from_coeffs(q)
        except (RankDeficient, InsufficientSupport, NotAnEllipsoid, DegenerateQuadric):
            continue
        score = model_score(candidate, pts, cfg.epsilon, score_metric)
        if score > best_score:
            best, best_score = candidate, score
        current = candidate
    return best


ProgressHook = Callable[[int, float, int], None]


def fit(points, cfg: FitConfig, progress: Optional[ProgressHook] = None) -> FitReport:
    """Robustly fit an ellipsoid to ``points``.

    Runs adaptive sample consensus with the configured score metric and,
    when ``cfg.local_opt`` is set, a weighted-refit cascade each time the
    sample-consensus best improves.  Raises NoModelFound when no candidate
    validates within the iteration budget and TooFewPoints when fewer than
    ``cfg.sample_size`` points are supplied.

    The optional ``progress`` hook receives (iteration, best_score,
    required_iterations) after every iteration.
    """
    pts = as_points(points)
    n = cfg.sample_size
    if len(pts) < n:
        raise TooFewPoints(f"need at least {n} points, got {len(pts)}")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    score_metric = cfg.resolved_score_metric()

    start = time.perf_counter()
    best_model: Optional[EllipsoidModel] = None
    best_score = -math.inf
    best_sample_score = -math.inf  # best among raw minimal-sample models
    required = cfg.max_iterations
    lo_invocations = 0
    iteration = 0

    while iteration < required:
        iteration += 1
        idx = sample_minimal(len(pts), n, rng)
        try:
            candidate = EllipsoidModel.from_coeffs(lls_fit(pts[idx]))
        except (RankDeficient, NotAnEllipsoid, DegenerateQuadric):
            if progress is not None:
                progress(iteration, best_score, required)
            continue
        score = model_score(candidate, pts, cfg.epsilon, score_metric)

        improved = False
        if score > best_sample_score:
            best_sample_score = score
            if score > best_score:
                best_model, best_score = candidate, score
                improved = True
            if cfg.local_opt:
                lo_invocations += 1
                refined = local_optimize(candidate, pts, cfg)
                if refined is not None:
                    refined_score = model_score(refined, pts, cfg.epsilon, score_metric)
                    if refined_score > best_score:
                        best_model, best_score = refined, refined_score
                        improved = True
        if improved:
            ratio = float(classify(pts, best_model, cfg.epsilon, score_metric).mean())
            required = required_iterations(ratio, cfg.mu, n,
                                           cfg.min_iterations, cfg.max_iterations)
        if progress is not None:
            progress(iteration, best_score, required)

    if best_model is None:
        raise NoModelFound(f"no valid ellipsoid in {iteration} iterations")
    labels = classify(pts, best_model, cfg.epsilon, score_metric)
    return FitReport(
        model=best_model,
        score=best_score,
        inlier_mask=labels,
        inlier_ratio=float(labels.mean()),
        iterations=iteration,
        lo_invocations=lo_invocations,
        wall_time=time.perf_counter() - start,
    )
