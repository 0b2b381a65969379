"""
Vertex hunting: estimate the K vertices of the simplex enclosing a point cloud.

`sp` is successive projection. `knn_sp` first replaces every point by the mean of its
ball-restricted nearest neighbours (pruning points with too few of them) and then runs SP on
the survivors.
"""
from dataclasses import dataclass, field

import numpy as np
from loguru import logger
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from netgof.core.enums import VhMethod
from netgof.core.env_config import config
from netgof.core.exceptions import VertexHuntingError
from netgof.schemas.config import VertexHuntingConfig
from netgof.services.graph import knnsp_tuning_from_degrees


MIN_KEPT_NEIGHBORHOOD = 3
_BLOCK = 1024


@dataclass(frozen=True)
class VertexSet:
    """K estimated vertices as rows; `indices` are the input points they came from."""
    vertices: np.ndarray
    indices: np.ndarray
    flags: list[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.vertices.shape[0]


def _check_cloud(points: np.ndarray, k: int) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if k < 1:
        raise ValueError("k must be positive")
    if points.shape[0] < k:
        raise VertexHuntingError(f"need at least {k} points, got {points.shape[0]}")
    if points.shape[1] < k - 1:
        raise VertexHuntingError(f"points of dimension {points.shape[1]} cannot span {k} vertices")
    return points


def _fill_degenerate(chosen: list[int], n: int, k: int) -> list[int]:
    rest = [i for i in range(n) if i not in chosen]
    return chosen + rest[: k - len(chosen)]


def sp(points: np.ndarray, k: int) -> VertexSet:
    """
    Successive projection. Each step picks the point with the largest residual norm after
    projecting out the vertices chosen so far; ties go to the lowest index.

    When the residuals collapse onto a line (k = d = K−1), the last two vertices are the two
    end points of that line.
    """
    points = _check_cloud(points, k)
    n, d = points.shape
    residual = points.copy()
    chosen: list[int] = []
    flags: list[str] = []

    step = 1
    while step <= k:
        norms = np.linalg.norm(residual, axis=1)
        if step == d == k - 1:
            direction = residual[int(np.argmax(norms))]
            if norms.max() == 0:
                flags.append("sp_degenerate")
                break
            coords = residual @ direction
            chosen += [int(np.argmin(coords)), int(np.argmax(coords))]
            break

        if norms.max() == 0:
            flags.append("sp_degenerate")
            break
        index = int(np.argmax(norms))
        chosen.append(index)
        u = residual[index] / norms[index]
        residual = residual - np.outer(residual @ u, u)
        step += 1

    if len(chosen) < k or len(set(chosen)) < k:
        if "sp_degenerate" not in flags:
            flags.append("sp_degenerate")
        chosen = _fill_degenerate(list(dict.fromkeys(chosen)), n, k)
        logger.warning("Degenerate point cloud in SP; padded vertices with the first unused points")

    indices = np.asarray(chosen[:k], dtype=np.int64)
    return VertexSet(vertices=points[indices], indices=indices, flags=flags)


def max_pairwise_distance(points: np.ndarray, rng: np.random.Generator | None = None) -> tuple[float, bool]:
    """
    Diameter of the cloud, exact up to KNN_EXACT_SMAX_MAX_N points and computed on a
    uniform sample above that. Returns (s_max, sampled).
    """
    sampled = False
    if points.shape[0] > config.KNN_EXACT_SMAX_MAX_N:
        rng = rng or np.random.default_rng(0)
        pick = rng.choice(points.shape[0], size=config.KNN_EXACT_SMAX_MAX_N, replace=False)
        points = points[pick]
        sampled = True

    best = 0.0
    for start in range(0, points.shape[0], _BLOCK):
        block = cdist(points[start:start + _BLOCK], points)
        best = max(best, float(block.max()))
    return best, sampled


def knn_sp(points: np.ndarray, k: int, n_neighbors: int, alpha: float) -> VertexSet:
    """
    KNN-denoised successive projection.

    S_i is the set of the `n_neighbors` nearest points (x_i included) lying within
    s_max/alpha of x_i. Points with |S_i| <= 2 are pruned; the rest are replaced by the
    mean of S_i before SP.
    """
    points = _check_cloud(points, k)
    if n_neighbors < 1:
        raise ValueError("n_neighbors must be at least 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    n = points.shape[0]
    s_max, sampled = max_pairwise_distance(points)
    radius = np.nextafter(s_max / alpha, np.inf)

    m = min(n_neighbors, n)
    _, neighbors = cKDTree(points).query(points, k=list(range(1, m + 1)), distance_upper_bound=radius)
    valid = neighbors < n
    sizes = valid.sum(axis=1)
    kept = np.flatnonzero(sizes >= MIN_KEPT_NEIGHBORHOOD)

    if kept.size == 0:
        raise VertexHuntingError(
            f"KNN-SP pruned all {n} points (N={n_neighbors}, alpha={alpha}); use a smaller alpha"
        )
    if kept.size < k:
        raise VertexHuntingError(
            f"KNN-SP kept {kept.size} point(s), fewer than K={k}; use a smaller alpha"
        )

    safe = np.where(valid, neighbors, 0)
    sums = (points[safe] * valid[..., None]).sum(axis=1)
    denoised = sums[kept] / sizes[kept, None]

    logger.debug("KNN-SP kept {}/{} points (N={}, alpha={}, s_max={:.4g})", kept.size, n, n_neighbors, alpha, s_max)
    inner = sp(denoised, k)
    flags = list(inner.flags)
    if sampled:
        flags.append("knn_sampled_smax")
    return VertexSet(vertices=inner.vertices, indices=kept[inner.indices], flags=flags)


def hunt_vertices(
        points: np.ndarray,
        k: int,
        vh: VertexHuntingConfig,
        degrees: np.ndarray | None = None,
) -> VertexSet:
    """
    Dispatch on the configured method. KNN-SP parameters left unset are tuned from `degrees`;
    an auto-tuned run that cannot keep enough points falls back to SP with a flag.
    """
    if vh.method == VhMethod.SP:
        return sp(points, k)

    n_neighbors, alpha = vh.n_neighbors, vh.alpha
    auto = n_neighbors is None or alpha is None
    if auto:
        if degrees is None:
            raise ValueError("KNN-SP auto-tuning needs node degrees")
        tuning = knnsp_tuning_from_degrees(degrees, k)
        n_neighbors = n_neighbors or tuning.n_neighbors
        alpha = alpha or tuning.alpha

    if not auto:
        return knn_sp(points, k, n_neighbors, alpha)

    if n_neighbors < MIN_KEPT_NEIGHBORHOOD:
        logger.warning("Auto-tuned N={} cannot survive pruning; using SP", n_neighbors)
        result = sp(points, k)
        return VertexSet(result.vertices, result.indices, result.flags + ["knn_fallback_sp"])
    try:
        return knn_sp(points, k, n_neighbors, alpha)
    except VertexHuntingError as exc:
        logger.warning("KNN-SP failed with auto-tuned parameters ({}); using SP", exc)
        result = sp(points, k)
        return VertexSet(result.vertices, result.indices, result.flags + ["knn_fallback_sp"])
