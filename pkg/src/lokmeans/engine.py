"""The clustering engine: seeding, assignment sweeps, and the outer loop.

``run`` is plain weighted K-means when ``variant`` is "none". The other
variants behave identically until the assignment stops changing, then
invoke an escape step at the fixed point:

* c-lo      break one cross-cluster nearest-center tie
* d-lo      first single-point move that strictly lowers the loss
* min-d-lo  best single-point move
* pnx       no sweeps at all; single adjacent moves only (see localopt)

Every run is a deterministic function of (dataset, config).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .divergence import DivergenceSpec, DomainError, domain_contains, pairwise
from .model import Dataset, ClusterStats, cluster_stats, clustering_loss

VARIANTS = ("none", "c-lo", "d-lo", "min-d-lo", "pnx")
INITS = ("uniform", "kmeans++")

TERMINATION_CONVERGED = "converged"
TERMINATION_ITERATION_CAP = "iteration-cap"


@dataclass
class EngineConfig:
    k: int
    divergence: DivergenceSpec
    variant: str = "none"
    init: str = "uniform"
    seed: int = 0
    max_iterations: int = 10000
    tie_tolerance: float = 1e-9
    decrease_threshold: float = 0.0
    initial_centers: np.ndarray | None = None  # overrides sampled seeding

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.init not in INITS:
            raise ValueError(f"unknown init {self.init!r}; expected one of {INITS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.tie_tolerance < 0.0 or self.decrease_threshold < 0.0:
            raise ValueError("tolerances must be non-negative")
        if self.initial_centers is not None:
            centers = np.asarray(self.initial_centers, dtype=np.float64)
            if centers.ndim != 2 or centers.shape[0] != self.k:
                raise ValueError(f"initial_centers must have shape ({self.k}, d)")
            self.initial_centers = centers


@dataclass
class RunReport:
    """Everything observable about one run.

    ``new_step_invocations`` counts escape steps that changed the
    assignment; the final invocation that certifies nothing improves is
    not counted.
    """

    final_labels: np.ndarray
    final_centers: np.ndarray
    final_loss: float
    loss_trajectory: np.ndarray
    iterations: int
    new_step_invocations: int
    empty_cluster_repairs: int
    wall_time: float
    termination: str


def validate_run_inputs(dataset: Dataset, config: EngineConfig) -> None:
    if config.k > dataset.n:
        raise ValueError(
            f"k = {config.k} exceeds the {dataset.n} distinct points in the dataset"
        )
    if not domain_contains(config.divergence, dataset.points, require_interior=True):
        raise DomainError(
            f"dataset lies outside the interior domain of {config.divergence.kind};"
            " filter or preprocess it first"
        )
    if (
        config.divergence.matrix is not None
        and config.divergence.matrix.shape[0] != dataset.dim
    ):
        raise ValueError(
            f"Mahalanobis matrix is {config.divergence.matrix.shape[0]}-dimensional,"
            f" dataset is {dataset.dim}-dimensional"
        )


def init_centers(
    dataset: Dataset,
    k: int,
    init: str,
    spec: DivergenceSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample k distinct data points as starting centers.

    "uniform" ignores weights. "kmeans++" draws the first center with
    probability proportional to weight, then each next one proportional to
    weight times divergence to the nearest chosen center; chosen points
    have zero divergence, so the draw is without replacement automatically.
    """
    if k > dataset.n:
        raise ValueError(f"cannot choose {k} distinct centers from {dataset.n} points")
    if init == "uniform":
        chosen = rng.choice(dataset.n, size=k, replace=False)
        return dataset.points[chosen].copy()
    if init != "kmeans++":
        raise ValueError(f"unknown init {init!r}")
    weights = dataset.weights
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.choice(dataset.n, p=weights / weights.sum())
    nearest = pairwise(spec, dataset.points, dataset.points[chosen[:1]])[:, 0]
    for j in range(1, k):
        mass = weights * nearest
        chosen[j] = rng.choice(dataset.n, p=mass / mass.sum())
        fresh = pairwise(spec, dataset.points, dataset.points[chosen[j : j + 1]])[:, 0]
        nearest = np.minimum(nearest, fresh)
    return dataset.points[chosen].copy()


def assign_step(
    dataset: Dataset,
    centers: np.ndarray,
    spec: DivergenceSpec,
    tie_tolerance: float = 1e-9,
) -> np.ndarray:
    """Assign each point to its nearest center, smallest index on ties."""
    labels, _ = _assign_with_divergences(dataset, centers, spec, tie_tolerance)
    return labels


def _assign_with_divergences(
    dataset: Dataset,
    centers: np.ndarray,
    spec: DivergenceSpec,
    tie_tolerance: float,
) -> tuple[np.ndarray, np.ndarray]:
    divs = pairwise(spec, dataset.points, centers)
    undefined = ~np.isfinite(centers).all(axis=1)
    if undefined.any():
        divs[:, undefined] = np.inf
    dmin = divs.min(axis=1)
    band = dmin + tie_tolerance * (1.0 + np.abs(dmin))
    labels = np.argmax(divs <= band[:, None], axis=1).astype(np.int64)
    return labels, divs


def repair_empty_clusters(
    dataset: Dataset,
    labels: np.ndarray,
    stats: ClusterStats,
    centers: np.ndarray,
) -> int:
    """Refill each empty cluster with a point whose move strictly helps.

    For each empty cluster (ascending) the first point g, in index order,
    whose source cluster keeps positive weight (s_b > w_g) and which does
    not sit exactly on its current center (x_g != c_b) is moved in. Both
    conditions together guarantee a strict loss decrease once centers are
    recomputed. Deterministic; consumes no randomness. Mutates labels and
    stats; centers are the caller's current ones and are left untouched.
    """
    repaired = 0
    for empty in np.flatnonzero(stats.member_count == 0):
        moved = False
        for g in range(dataset.n):
            source = int(labels[g])
            if stats.weight_sum[source] > dataset.weights[g] and np.any(
                dataset.points[g] != centers[source]
            ):
                stats.move(dataset, g, source, int(empty))
                labels[g] = empty
                repaired += 1
                moved = True
                break
        if not moved:
            raise RuntimeError(
                f"cluster {int(empty)} cannot be repaired; dataset has too few points for k"
            )
    return repaired


def run(dataset: Dataset, config: EngineConfig) -> RunReport:
    """Cluster ``dataset`` per ``config`` and report the full run.

    Outer loop per iteration: assignment sweep, empty-cluster repair,
    weighted-mean center update. When the assignment stops changing the
    configured escape step runs; the loop ends when it finds nothing (or
    immediately for variant "none"). The loss trajectory records one value
    per iteration and is strictly decreasing: an iteration that changes
    nothing terminates the run instead of logging a repeat entry.
    """
    if config.variant == "pnx":
        from .localopt import pnx_run

        return pnx_run(dataset, config)
    from . import localopt

    validate_run_inputs(dataset, config)
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    if config.initial_centers is not None:
        centers = np.array(config.initial_centers, dtype=np.float64)
    else:
        centers = init_centers(dataset, config.k, config.init, config.divergence, rng)

    spec = config.divergence
    labels: np.ndarray | None = None
    trajectory: list[float] = []
    iterations = 0
    invocations = 0
    repairs = 0
    termination = TERMINATION_ITERATION_CAP

    while iterations < config.max_iterations:
        iterations += 1
        fresh, divs = _assign_with_divergences(dataset, centers, spec, config.tie_tolerance)
        stats = cluster_stats(dataset, fresh, config.k)
        repaired = repair_empty_clusters(dataset, fresh, stats, centers)
        repairs += repaired
        centers = stats.centers()

        if labels is not None and repaired == 0 and np.array_equal(fresh, labels):
            # Fixed point of the sweep; centers (and the cached divergence
            # matrix) are unchanged from the previous iteration.
            if config.variant == "none":
                termination = TERMINATION_CONVERGED
                break
            if config.variant == "c-lo":
                changed = localopt.c_lo_step(
                    dataset, fresh, stats, centers, spec, config.tie_tolerance, divs
                )
            elif config.variant == "d-lo":
                changed = localopt.d_lo_step(
                    dataset, fresh, stats, centers, spec, config.decrease_threshold, divs
                )
            else:
                changed = localopt.min_d_lo_step(
                    dataset, fresh, stats, centers, spec, config.decrease_threshold, divs
                )
            if not changed:
                termination = TERMINATION_CONVERGED
                labels = fresh
                break
            invocations += 1
        labels = fresh
        trajectory.append(clustering_loss(dataset, labels, centers, spec))

    return RunReport(
        final_labels=labels,
        final_centers=centers,
        final_loss=trajectory[-1],
        loss_trajectory=np.asarray(trajectory),
        iterations=iterations,
        new_step_invocations=invocations,
        empty_cluster_repairs=repairs,
        wall_time=time.perf_counter() - start,
        termination=termination,
    )
