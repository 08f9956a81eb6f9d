"""Move costs and the new-step procedures that escape non-local fixed points.

The cost of moving a fraction ``alpha`` of point ``g`` from cluster ``a``
to cluster ``b`` (with optimal centers before and after) has the closed
form

    delta = alpha w_g (D(x_g, c_b) - D(x_g, c_a))
            - (s_a - alpha w_g) D(c_a', c_a)
            - (s_b + alpha w_g) D(c_b', c_b)

where c_a', c_b' are the post-move weighted means, obtained in O(d) by
rank-one updates. The source term is zero when the move empties cluster
``a``. Evaluating this instead of recomputing the full loss is what makes
the local-optimality steps cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import DivergenceSpec, pairwise, rowwise
from .model import ClusterStats, Dataset, clustering_loss, cluster_stats, incremental_center_update

# Row-chunk bound on the (rows, K, d) scratch tensor used by move_cost_matrix.
_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class MoveDelta:
    """Outcome of evaluating one candidate move."""

    point: int
    from_cluster: int
    to_cluster: int
    delta: float
    source_empties: bool


def delta_move(
    dataset: Dataset,
    labels: np.ndarray,
    stats: ClusterStats,
    centers: np.ndarray,
    spec: DivergenceSpec,
    point: int,
    src: int,
    dst: int,
    alpha: float = 1.0,
) -> MoveDelta:
    """Closed-form loss change for moving weight ``alpha * w`` of one point.

    ``centers`` must be optimal for the current assignment. ``alpha`` in
    (0, 1] covers the continuous relaxation; alpha = 1 is the hard move.
    """
    if src == dst:
        raise ValueError("source and destination clusters must differ")
    if labels[point] != src:
        raise ValueError(f"point {point} is assigned to cluster {labels[point]}, not {src}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    x = dataset.points[point]
    w = dataset.weights[point]
    moved = alpha * w
    delta = moved * (rowwise(spec, x, centers[dst]) - rowwise(spec, x, centers[src]))

    source_empties = bool(alpha == 1.0 and stats.member_count[src] == 1)
    if not source_empties and moved > 0.0:
        remaining = stats.weight_sum[src] - moved
        if remaining <= 0.0:
            raise ArithmeticError(
                f"cluster {src} weight {stats.weight_sum[src]} inconsistent with move of {moved}"
            )
        src_new = centers[src] - moved * (x - centers[src]) / remaining
        delta -= remaining * rowwise(spec, src_new, centers[src])
    if moved > 0.0:
        grown = stats.weight_sum[dst] + moved
        dst_new = centers[dst] + moved * (x - centers[dst]) / grown
        delta -= grown * rowwise(spec, dst_new, centers[dst])
    return MoveDelta(int(point), int(src), int(dst), float(delta), source_empties)


def move_cost_matrix(
    dataset: Dataset,
    labels: np.ndarray,
    stats: ClusterStats,
    centers: np.ndarray,
    spec: DivergenceSpec,
    divs: np.ndarray | None = None,
) -> np.ndarray:
    """(N, K) matrix of hard-move costs; the own-cluster column is +inf.

    ``divs`` may carry the point-to-center divergence matrix already
    computed by the caller's assignment step; centers must not have
    changed since.
    """
    points = dataset.points
    weights = dataset.weights
    n, k = points.shape[0], centers.shape[0]
    if divs is None:
        divs = pairwise(spec, points, centers)

    rows = np.arange(n)
    own = divs[rows, labels]
    delta = weights[:, None] * (divs - own[:, None])

    # Source term: depends on the point only. Singleton sources contribute
    # zero and their rank-one formula is skipped entirely, since its
    # intermediate value could leave the divergence domain.
    src_centers = centers[labels]
    remaining = stats.weight_sum[labels] - weights
    multi = stats.member_count[labels] > 1
    if ((remaining <= 0.0) & multi).any():
        raise ArithmeticError("cluster weights inconsistent with member weights")
    src_term = np.zeros(n, dtype=np.float64)
    if multi.any():
        idx = np.flatnonzero(multi)
        shifted = src_centers[idx] - (
            (weights[idx] / remaining[idx])[:, None] * (points[idx] - src_centers[idx])
        )
        src_term[idx] = remaining[idx] * rowwise(spec, shifted, src_centers[idx])
    delta -= src_term[:, None]

    # Destination term: (N, K, d) scratch, chunked over rows to bound memory.
    step = max(1, _CHUNK_ELEMENTS // max(1, k * points.shape[1]))
    for start in range(0, n, step):
        stop = min(n, start + step)
        w_block = weights[start:stop, None]
        grown = stats.weight_sum[None, :] + w_block
        shifted = centers[None, :, :] + (w_block / grown)[:, :, None] * (
            points[start:stop, None, :] - centers[None, :, :]
        )
        delta[start:stop] -= grown * rowwise(spec, shifted, centers[None, :, :])

    delta[rows, labels] = np.inf
    return delta


def _apply_hard_move(
    dataset: Dataset,
    labels: np.ndarray,
    stats: ClusterStats,
    centers: np.ndarray,
    point: int,
    dst: int,
) -> None:
    """Reassign one point; rank-one center updates, destination always.

    A singleton source is left empty with its stored center untouched; the
    caller's outer loop repairs empty clusters before the next assignment.
    """
    src = int(labels[point])
    x = dataset.points[point]
    w = dataset.weights[point]
    centers[dst] += w * (x - centers[dst]) / (stats.weight_sum[dst] + w)
    if stats.member_count[src] > 1:
        centers[src] -= w * (x - centers[src]) / (stats.weight_sum[src] - w)
    stats.move(dataset, point, src, dst)
    labels[point] = dst


def c_lo_step(
    dataset: Dataset,
    labels: np.ndarray,
    stats: ClusterStats,
    centers: np.ndarray,
    spec: DivergenceSpec,
    tie_tolerance: float = 1e-9,
    divs: np.ndarray | None = None,
) -> bool:
    """Break one cross-cluster tie by moving the point to the largest tied index.

    Scans points in index order for a nearest-center tie (at least two
    centers within the relative tie band). Returns False when no tie
    exists, which certifies the fixed point cannot be escaped this way.
    Mutates labels, stats, and centers in place when a move is made.
    """
    if divs is None:
        divs = pairwise(spec, dataset.points, centers)
    dmin = divs.min(axis=1)
    band = (dmin + tie_tolerance * (1.0 + np.abs(dmin)))[:, None]
    within = divs <= band
    candidates = np.flatnonzero(within.sum(axis=1) >= 2)
    if candidates.size == 0:
        return False
    point = int(candidates[0])
    tied = np.flatnonzero(within[point])
    src, dst = int(tied[0]), int(tied[-1])
    if labels[point] != src:
        raise ValueError(
            f"point {point} assigned to cluster {labels[point]} but its nearest tied cluster is {src}"
        )
    incremental_center_update(stats, centers, point, src, dst, dataset)
    labels[point] = dst
    return True


def d_lo_step(
    dataset: Dataset,
    labels: np.ndarray,
    stats: ClusterStats,
    centers: np.ndarray,
    spec: DivergenceSpec,
    threshold: float = 0.0,
    divs: np.ndarray | None = None,
) -> bool:
    """Apply the first single-point move that lowers the loss beyond ``threshold``.

    Candidates are scanned point-major, destination-minor. Returns False
    when no move improves, i.e. the assignment is locally optimal over
    single-point moves.
    """
    delta = move_cost_matrix(dataset, labels, stats, centers, spec, divs)
    improving = np.flatnonzero((delta < -threshold).ravel())
    if improving.size == 0:
        return False
    point, dst = divmod(int(improving[0]), delta.shape[1])
    _apply_hard_move(dataset, labels, stats, centers, point, dst)
    return True


def min_d_lo_step(
    dataset: Dataset,
    labels: np.ndarray,
    stats: ClusterStats,
    centers: np.ndarray,
    spec: DivergenceSpec,
    threshold: float = 0.0,
    divs: np.ndarray | None = None,
) -> bool:
    """Apply the single best improving move (ties: smallest point, then cluster)."""
    delta = move_cost_matrix(dataset, labels, stats, centers, spec, divs)
    flat = int(np.argmin(delta.ravel()))
    if not delta.ravel()[flat] < -threshold:
        return False
    point, dst = divmod(flat, delta.shape[1])
    _apply_hard_move(dataset, labels, stats, centers, point, dst)
    return True


def pnx_run(dataset: Dataset, config) -> "RunReport":
    """Local search by single adjacent moves only, without reassignment sweeps.

    Starts from sampled centers and one assignment pass, then repeatedly
    recomputes optimal centers and applies the first adjacent move that
    lowers the loss, until no move improves. Slower than the sweep-based
    variants but terminates at the same notion of local optimality.
    ``iterations`` counts applied moves.
    """
    from time import perf_counter

    from . import engine  # deferred: engine imports this module

    engine.validate_run_inputs(dataset, config)
    start = perf_counter()
    rng = np.random.default_rng(config.seed)
    if config.initial_centers is not None:
        centers = np.array(config.initial_centers, dtype=np.float64)
    else:
        centers = engine.init_centers(dataset, config.k, config.init, config.divergence, rng)
    labels = engine.assign_step(dataset, centers, config.divergence, config.tie_tolerance)
    stats = cluster_stats(dataset, labels, config.k)
    repairs = engine.repair_empty_clusters(dataset, labels, stats, centers)
    centers = stats.centers()
    trajectory = [clustering_loss(dataset, labels, centers, config.divergence)]

    moves = 0
    termination = "iteration-cap"
    while moves < config.max_iterations:
        delta = move_cost_matrix(dataset, labels, stats, centers, config.divergence)
        # A singleton source cannot improve (its optimal center is the point
        # itself), so mask those rows rather than risk emptying a cluster on
        # rounding noise.
        delta[stats.member_count[labels] == 1] = np.inf
        improving = np.flatnonzero((delta < -config.decrease_threshold).ravel())
        if improving.size == 0:
            termination = "converged"
            break
        point, dst = divmod(int(improving[0]), config.k)
        stats.move(dataset, point, int(labels[point]), dst)
        labels[point] = dst
        centers = stats.centers()
        trajectory.append(clustering_loss(dataset, labels, centers, config.divergence))
        moves += 1

    return engine.RunReport(
        final_labels=labels,
        final_centers=centers,
        final_loss=trajectory[-1],
        loss_trajectory=np.asarray(trajectory),
        iterations=moves,
        new_step_invocations=moves,
        empty_cluster_repairs=repairs,
        wall_time=perf_counter() - start,
        termination=termination,
    )
