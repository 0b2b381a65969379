"""
Community membership estimators: MSCORE and the MMSBM initial estimate for mixed memberships,
SCORE and spectral k-means for hard labels, and net-rounding between the two.

Labels are 0-based throughout.
"""
from dataclasses import dataclass, field

import numpy as np
from loguru import logger
from sklearn.cluster import KMeans

from netgof.core.exceptions import EmptyClusterError
from netgof.schemas.config import VertexHuntingConfig
from netgof.services.graph import Matrix, Network, as_matrix, row_sums
from netgof.services.spectral import score_ratio, top_k_eigs
from netgof.services.utils.linalg import is_singular, normalize_rows
from netgof.services.vertex_hunting import hunt_vertices


KMEANS_RESTARTS = 10
KMEANS_INIT = 10
KMEANS_MAX_ITER = 100


@dataclass(frozen=True)
class MembershipMatrix:
    pi: np.ndarray
    flags: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.pi.shape[0]

    @property
    def k(self) -> int:
        return self.pi.shape[1]


@dataclass(frozen=True)
class HardLabeling:
    labels: np.ndarray
    k: int
    flags: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(np.unique(self.labels)) < self.k and "empty_community" not in self.flags:
            self.flags.append("empty_community")

    @property
    def matrix(self) -> np.ndarray:
        """The n×K indicator matrix Π̂_0."""
        out = np.zeros((len(self.labels), self.k))
        out[np.arange(len(self.labels)), self.labels] = 1.0
        return out

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    @classmethod
    def single(cls, n: int) -> "HardLabeling":
        return cls(labels=np.zeros(n, dtype=np.int64), k=1)


def _seed(rng: np.random.Generator | None) -> int:
    rng = rng if rng is not None else np.random.default_rng(0)
    return int(rng.integers(2**31 - 1))


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel so communities are numbered by first occurrence."""
    values, first = np.unique(labels, return_index=True)
    rank = np.empty(len(values), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(values))
    return rank[np.searchsorted(values, labels)]


def kmeans_labels(points: np.ndarray, k: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """
    k-means with 10 inits of at most 100 iterations. Runs that leave a cluster empty are
    re-seeded up to 10 times before giving up.
    """
    n = points.shape[0]
    if n < k:
        raise EmptyClusterError(f"cannot form {k} clusters from {n} points")
    if k == 1:
        return np.zeros(n, dtype=np.int64)

    for attempt in range(1, KMEANS_RESTARTS + 1):
        model = KMeans(n_clusters=k, n_init=KMEANS_INIT, max_iter=KMEANS_MAX_ITER, random_state=_seed(rng))
        labels = model.fit_predict(points)
        if len(np.unique(labels)) == k:
            return canonical_labels(labels)
        logger.warning("k-means attempt {} produced an empty cluster; re-seeding", attempt)

    raise EmptyClusterError(f"k-means left a cluster empty after {KMEANS_RESTARTS} restarts (K={k})")


def net_round(pi_hat: "MembershipMatrix | np.ndarray") -> HardLabeling:
    """Row i goes to the community of its largest entry, ties to the smallest index."""
    pi = pi_hat.pi if isinstance(pi_hat, MembershipMatrix) else np.asarray(pi_hat)
    return HardLabeling(labels=np.argmax(pi, axis=1).astype(np.int64), k=pi.shape[1])


def truncate_and_normalize(weights: np.ndarray) -> tuple[np.ndarray, int]:
    """Zero negative entries, then rescale rows to unit ℓ1 norm."""
    truncated = np.maximum(weights, 0.0)
    empty = truncated.sum(axis=1) == 0
    if empty.any():
        truncated[np.flatnonzero(empty), np.argmax(weights[empty], axis=1)] = 1.0
    normalized, _ = normalize_rows(truncated)
    return normalized, int(empty.sum())


def _identity_simplex(k: int) -> np.ndarray:
    """Vertices {0, e_1, ..., e_{K-1}} of the standard simplex in ℝ^{K-1}."""
    return np.vstack([np.zeros(k - 1), np.eye(k - 1)])


def mscore(
        data: "Network | Matrix",
        k: int,
        vh: VertexHuntingConfig | None = None,
        threshold: float | None = None,
) -> MembershipMatrix:
    """
    Mixed-membership estimate from the SCORE ratios.

    Vertex hunting on the ratio rows gives the simplex. Barycentric coordinates ŵ_i come from
    [1'; V'] ŵ_i = [1; r̂_i]. Each coordinate is reweighted by b̂_1(k), then negatives are
    truncated and rows renormalized.
    """
    matrix = as_matrix(data)
    n = matrix.shape[0]
    if k == 1:
        return MembershipMatrix(pi=np.ones((n, 1)))

    vh = vh or VertexHuntingConfig.data()
    flags: list[str] = []

    emb = top_k_eigs(matrix, k)
    ratio = score_ratio(emb, threshold)
    if ratio.zero_rows:
        flags.append("zero_ratio_rows")

    found = hunt_vertices(ratio.ratios, k, vh, degrees=row_sums(matrix))
    flags += found.flags
    vertices = found.vertices

    system = np.vstack([np.ones(k), vertices.T])
    if is_singular(system):
        logger.warning("MSCORE vertex matrix is singular; using the identity simplex")
        flags.append("vh_identity_reset")
        vertices = _identity_simplex(k)
        system = np.vstack([np.ones(k), vertices.T])

    targets = np.vstack([np.ones(n), ratio.ratios.T])
    weights = np.linalg.solve(system, targets).T

    b1_arg = emb.eigenvalues[0] + np.einsum("kj,j,kj->k", vertices, emb.eigenvalues[1:], vertices)
    if np.any(b1_arg <= 0):
        flags.append("b1_abs_guard")
        logger.warning("Non-positive b1 argument for communities {}", np.flatnonzero(b1_arg <= 0).tolist())
    b1_arg = np.abs(b1_arg)
    b1_arg[b1_arg == 0] = 1.0
    b1 = b1_arg ** -0.5

    pi, empty = truncate_and_normalize(weights / b1)
    if empty:
        flags.append("mscore_empty_rows")
    return MembershipMatrix(pi=pi, flags=flags)


def mmsbm_initial_pi(
        data: "Network | Matrix",
        k: int,
        vh: VertexHuntingConfig | None = None,
) -> MembershipMatrix:
    """Vertex hunting on the eigenvector rows Ξ̂; π̃ = Ξ̂ V̂*⁻¹, truncated and renormalized."""
    matrix = as_matrix(data)
    n = matrix.shape[0]
    if k == 1:
        return MembershipMatrix(pi=np.ones((n, 1)))

    vh = vh or VertexHuntingConfig.data()
    flags: list[str] = []
    emb = top_k_eigs(matrix, k)
    found = hunt_vertices(emb.eigenvectors, k, vh, degrees=row_sums(matrix))
    flags += found.flags

    vertices = found.vertices
    if is_singular(vertices):
        logger.warning("Eigenvector vertex matrix is singular; resetting it to the identity")
        flags.append("vh_identity_reset")
        vertices = np.eye(k)

    pi, empty = truncate_and_normalize(np.linalg.solve(vertices.T, emb.eigenvectors.T).T)
    if empty:
        flags.append("mscore_empty_rows")
    return MembershipMatrix(pi=pi, flags=flags)


def score_cluster(
        data: "Network | Matrix",
        k: int,
        threshold: float | None = None,
        rng: np.random.Generator | None = None,
) -> HardLabeling:
    """SCORE: k-means on the clamped ratio rows."""
    matrix = as_matrix(data)
    if k == 1:
        return HardLabeling.single(matrix.shape[0])
    ratio = score_ratio(top_k_eigs(matrix, k), threshold)
    flags = ["zero_ratio_rows"] if ratio.zero_rows else []
    return HardLabeling(labels=kmeans_labels(ratio.ratios, k, rng), k=k, flags=flags)


def spectral_kmeans(
        data: "Network | Matrix",
        k: int,
        rng: np.random.Generator | None = None,
) -> HardLabeling:
    """k-means on the rows of the leading K eigenvectors."""
    matrix = as_matrix(data)
    if k == 1:
        return HardLabeling.single(matrix.shape[0])
    emb = top_k_eigs(matrix, k)
    return HardLabeling(labels=kmeans_labels(emb.eigenvectors, k, rng), k=k)
