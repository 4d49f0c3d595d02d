"""Bounded one-dimensional particle swarm optimizer and the threshold fitness.

The swarm is fully deterministic: every random number comes from a
splitmix64 stream in a fixed order, so (fitness, config) pins the whole
trajectory.

Draw order
----------
Initialisation, for particle ``i = 0 .. n-1``: one unit ``u`` for the
position ``lo + u*(hi-lo)``, then one unit ``u`` for the velocity
``(2u-1) * init_velocity_fraction * (hi-lo)``.

Each iteration, before any fitness call: for particle ``i = 0 .. n-1``,
``r1`` then ``r2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .edges import CannyParams, canny, edge_sum
from .imaging import as_gray, binarize, foreground_fraction
from .rng import SplitMix64

__all__ = [
    "PsoConfig",
    "PsoResult",
    "FitnessParams",
    "NonFiniteFitnessError",
    "round_threshold",
    "fitness_edges",
    "pso_optimize",
    "optimize_threshold",
    "exhaustive_threshold_search",
]


class NonFiniteFitnessError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PsoConfig:
    swarm_size: int = 30
    max_iterations: int = 100
    bounds: tuple[float, float] = (50.0, 200.0)
    inertia: float = 0.7298
    c1: float = 1.49618
    c2: float = 1.49618
    velocity_clamp_fraction: float = 0.2
    init_velocity_fraction: float = 0.1
    seed: int = 42

    def __post_init__(self):
        lo, hi = self.bounds
        if not lo < hi:
            raise ValueError(f"bounds must satisfy lo < hi, got {self.bounds}")
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if not 0 < self.inertia < 1:
            raise ValueError("inertia must lie in (0, 1)")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("c1 and c2 must be positive")
        if not self.velocity_clamp_fraction > 0:
            raise ValueError("velocity_clamp_fraction must be positive")


@dataclass
class PsoResult:
    best_threshold: float
    best_fitness: float
    history: list[float] = field(default_factory=list)
    evaluations: int = 0


@dataclass(frozen=True)
class FitnessParams:
    """Edge-count fitness settings.

    ``penalty_value`` of ``None`` means "the image's pixel count", which is
    larger than any achievable edge count.
    """

    canny: CannyParams = field(default_factory=CannyParams)
    penalty_low: float = 0.05
    penalty_high: float = 0.95
    penalty_value: float | None = None

    def __post_init__(self):
        if not 0 < self.penalty_low < self.penalty_high < 1:
            raise ValueError("need 0 < penalty_low < penalty_high < 1")
        if self.penalty_value is not None and not self.penalty_value > 0:
            raise ValueError("penalty_value must be positive")


def round_threshold(t: float) -> int:
    """Round half away from zero, the rounding used for every threshold."""
    return int(math.floor(abs(t) + 0.5)) * (1 if t >= 0 else -1)


def fitness_edges(image, t: float, params: FitnessParams | None = None) -> float:
    """Canny edge count of the image binarized at ``round(t)``, plus a penalty
    when the foreground fraction falls outside ``(penalty_low, penalty_high)``.
    """
    params = params or FitnessParams()
    arr = as_gray(image)
    mask = binarize(arr, round_threshold(t))
    w = foreground_fraction(mask)
    score = float(edge_sum(canny(mask, params.canny)))
    if w < params.penalty_low or w > params.penalty_high:
        score += params.penalty_value if params.penalty_value is not None else float(arr.size)
    return score


def _evaluate(fitness: Callable[[float], float], x: np.ndarray) -> np.ndarray:
    out = np.empty(len(x), dtype=np.float64)
    for i, xi in enumerate(x):
        f = float(fitness(float(xi)))
        if not math.isfinite(f):
            raise NonFiniteFitnessError(f"fitness returned {f!r} at position {float(xi)!r} (particle {i})")
        out[i] = f
    return out


def pso_optimize(fitness: Callable[[float], float], config: PsoConfig | None = None) -> PsoResult:
    """Minimise ``fitness`` over ``config.bounds`` with a global-best swarm.

    Velocity update per particle::

        v = inertia*v + c1*r1*(pbest - x) + c2*r2*(gbest - x)

    with ``|v|`` clamped to ``velocity_clamp_fraction * (hi - lo)`` and the
    new position clamped to the bounds. Personal and global bests only move
    on strict improvement; ties go to the lowest particle index.
    ``history[k]`` is the global best after iteration ``k + 1``.
    """
    cfg = config or PsoConfig()
    lo, hi = float(cfg.bounds[0]), float(cfg.bounds[1])
    span = hi - lo
    vmax = cfg.velocity_clamp_fraction * span
    n = cfg.swarm_size
    rng = SplitMix64(cfg.seed)

    init = rng.units(2 * n).reshape(n, 2)
    x = lo + init[:, 0] * span
    v = (2.0 * init[:, 1] - 1.0) * cfg.init_velocity_fraction * span

    fx = _evaluate(fitness, x)
    pbest = x.copy()
    pbest_f = fx.copy()
    g = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[g], pbest_f[g]
    evaluations = n
    history: list[float] = []

    for _ in range(cfg.max_iterations):
        r = rng.units(2 * n).reshape(n, 2)
        v = cfg.inertia * v + cfg.c1 * r[:, 0] * (pbest - x) + cfg.c2 * r[:, 1] * (gbest - x)
        v = np.clip(v, -vmax, vmax)
        x = np.clip(x + v, lo, hi)
        fx = _evaluate(fitness, x)
        evaluations += n
        improved = fx < pbest_f
        pbest[improved] = x[improved]
        pbest_f[improved] = fx[improved]
        g = int(np.argmin(pbest_f))
        if pbest_f[g] < gbest_f:
            gbest, gbest_f = pbest[g], pbest_f[g]
        history.append(float(gbest_f))

    return PsoResult(
        best_threshold=float(gbest),
        best_fitness=float(gbest_f),
        history=history,
        evaluations=evaluations,
    )


def optimize_threshold(image, config: PsoConfig | None = None,
                       params: FitnessParams | None = None) -> PsoResult:
    """Search the segmentation threshold that minimises :func:`fitness_edges`.

    Fitness depends only on the rounded threshold, so values are cached per
    integer; the trajectory is identical to an uncached run. The returned
    ``best_threshold`` is that integer.
    """
    arr = as_gray(image)
    params = params or FitnessParams()
    cache: dict[int, float] = {}

    def fitness(t: float) -> float:
        key = round_threshold(t)
        if key not in cache:
            cache[key] = fitness_edges(arr, key, params)
        return cache[key]

    result = pso_optimize(fitness, config)
    result.best_threshold = float(round_threshold(result.best_threshold))
    return result


def exhaustive_threshold_search(image, lo: int, hi: int,
                                params: FitnessParams | None = None) -> dict[int, float]:
    """Fitness at every integer threshold in ``[lo, hi]``."""
    arr = as_gray(image)
    return {t: fitness_edges(arr, t, params) for t in range(int(lo), int(hi) + 1)}
