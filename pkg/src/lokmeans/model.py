"""Weighted point sets, assignments, cluster statistics, and the loss.

The clustering objective is

    f(P, C) = sum_k sum_n p_{k,n} w_n D(x_n, c_k)

over hard assignments P and centers C. For every divergence supported
here the optimal center of a cluster is its weighted mean, so center
updates never depend on the divergence choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import DivergenceSpec, DomainError, domain_contains, rowwise


class EmptyClusterError(ValueError):
    def __init__(self, cluster: int):
        super().__init__(f"cluster {cluster} is empty; its center is undefined")
        self.cluster = int(cluster)


@dataclass(frozen=True)
class Dataset:
    """Immutable weighted point set with pairwise-distinct rows."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        points = np.ascontiguousarray(self.points, dtype=np.float64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise ValueError(f"points must be a non-empty 2-D array, got shape {points.shape}")
        if weights.shape != (points.shape[0],):
            raise ValueError(
                f"weights shape {weights.shape} does not match {points.shape[0]} points"
            )
        if not np.isfinite(points).all():
            raise ValueError("points contain non-finite values")
        if not np.isfinite(weights).all() or (weights <= 0.0).any():
            raise ValueError("weights must be finite and strictly positive")
        if np.unique(points, axis=0).shape[0] != points.shape[0]:
            raise ValueError("points must be pairwise distinct; merge duplicates first")
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def check_labels(labels: np.ndarray, n: int, k: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ValueError(f"labels shape {labels.shape} does not match {n} points")
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError("labels must be integers")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    return labels.astype(np.int64, copy=False)


@dataclass
class ClusterStats:
    """Per-cluster weight sums, weighted coordinate sums, and member counts."""

    weight_sum: np.ndarray
    coord_sum: np.ndarray
    member_count: np.ndarray

    @property
    def k(self) -> int:
        return self.weight_sum.shape[0]

    def centers(self) -> np.ndarray:
        """Optimal (weighted-mean) centers; every cluster must be non-empty."""
        empty = np.flatnonzero(self.member_count == 0)
        if empty.size:
            raise EmptyClusterError(int(empty[0]))
        return self.coord_sum / self.weight_sum[:, None]

    def move(self, dataset: Dataset, point: int, src: int, dst: int) -> None:
        """Shift one point's weight and coordinate mass between clusters."""
        w = dataset.weights[point]
        wx = w * dataset.points[point]
        self.weight_sum[src] -= w
        self.weight_sum[dst] += w
        self.coord_sum[src] -= wx
        self.coord_sum[dst] += wx
        self.member_count[src] -= 1
        self.member_count[dst] += 1


def cluster_stats(dataset: Dataset, labels: np.ndarray, k: int) -> ClusterStats:
    labels = check_labels(labels, dataset.n, k)
    weight_sum = np.bincount(labels, weights=dataset.weights, minlength=k)
    member_count = np.bincount(labels, minlength=k).astype(np.int64)
    coord_sum = np.empty((k, dataset.dim), dtype=np.float64)
    weighted = dataset.weights[:, None] * dataset.points
    for j in range(dataset.dim):
        coord_sum[:, j] = np.bincount(labels, weights=weighted[:, j], minlength=k)
    return ClusterStats(weight_sum, coord_sum, member_count)


def optimal_centers(dataset: Dataset, labels: np.ndarray, k: int) -> np.ndarray:
    """Weighted mean of each cluster; raises EmptyClusterError on empty ones."""
    return cluster_stats(dataset, labels, k).centers()


def clustering_loss(
    dataset: Dataset, labels: np.ndarray, centers: np.ndarray, spec: DivergenceSpec
) -> float:
    """Exact weighted sum of divergences from each point to its center."""
    centers = np.asarray(centers, dtype=np.float64)
    labels = check_labels(labels, dataset.n, centers.shape[0])
    if centers.ndim != 2 or centers.shape[1] != dataset.dim:
        raise ValueError(f"centers shape {centers.shape} does not match dimension {dataset.dim}")
    if not domain_contains(spec, dataset.points):
        raise DomainError(f"points outside the domain of {spec.kind}")
    if not domain_contains(spec, centers, require_interior=True):
        raise DomainError(f"centers outside the interior domain of {spec.kind}")
    per_point = rowwise(spec, dataset.points, centers[labels])
    return float(per_point @ dataset.weights)


def incremental_center_update(
    stats: ClusterStats,
    centers: np.ndarray,
    point: int,
    src: int,
    dst: int,
    dataset: Dataset,
) -> None:
    """Move one point between clusters, updating stats and centers in O(d).

    Centers are adjusted by the rank-one mean updates

        c_src <- c_src - w (x - c_src) / (s_src - w)
        c_dst <- c_dst + w (x - c_dst) / (s_dst + w)

    which reproduce the recomputed weighted means exactly. When the point
    is the sole member of ``src`` the cluster becomes empty and its center
    is flagged undefined (NaN) rather than divided by zero.
    """
    if src == dst:
        raise ValueError("source and destination clusters must differ")
    if stats.member_count[src] < 1:
        raise ValueError(f"cluster {src} has no members to move")
    x = dataset.points[point]
    w = dataset.weights[point]
    if stats.member_count[src] == 1:
        centers[src] = np.nan
    else:
        remaining = stats.weight_sum[src] - w
        if remaining <= 0.0:
            raise ArithmeticError(
                f"cluster {src} weight {stats.weight_sum[src]} inconsistent with member weight {w}"
            )
        centers[src] -= w * (x - centers[src]) / remaining
    centers[dst] += w * (x - centers[dst]) / (stats.weight_sum[dst] + w)
    stats.move(dataset, point, src, dst)
