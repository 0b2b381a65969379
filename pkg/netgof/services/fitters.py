"""
Estimators of Ω for the four block models.

    DCMM   GoF-MSCORE      MSCORE → net-rounding → simplex on D⁻¹AĤ → (Θ̂, Π̂, P̂)
    MMSBM  GoF-MSCORE-rev  eigenvector simplex → net-rounding → simplex on AĤ → Π̂, α_nP̂
    DCBM   GoF-SCORE       SCORE clusters → M = Π̂'AΠ̂ → (Θ̂, P̂)
    SBM    GoF-SCORE-rev   spectral k-means → blockwise densities

Every fitter returns Ω̂ in factored form Θ̂Π̂P̂Π̂'Θ̂; it is only materialized as a dense matrix
when the regularization clip actually changes an entry.
"""
from dataclasses import dataclass, field, replace

import numpy as np
from loguru import logger
from scipy.spatial import ConvexHull

from netgof.core.enums import ModelTag
from netgof.core.exceptions import FitError, NonIdentifiableError
from netgof.schemas.config import GofConfig, VertexHuntingConfig
from netgof.schemas.reports import FitReport
from netgof.services.graph import Matrix, Network, as_matrix, row_sums
from netgof.services.membership import (
    HardLabeling,
    mmsbm_initial_pi,
    mscore,
    net_round,
    score_cluster,
    spectral_kmeans,
    truncate_and_normalize,
)
from netgof.services.utils.linalg import guarded_inverse, is_singular, normalize_rows
from netgof.services.vertex_hunting import hunt_vertices


_CLIP_BLOCK = 2048


@dataclass(frozen=True)
class ProbMatrix:
    """Ω̂ = ΘΠPΠ'Θ. `omega` holds the dense matrix when the factors no longer describe it."""
    model: ModelTag
    theta: np.ndarray | None = None
    pi: np.ndarray | None = None
    p: np.ndarray | None = None
    omega: np.ndarray | None = None
    clipped: bool = False

    @classmethod
    def from_dense(cls, omega: np.ndarray, model: ModelTag = ModelTag.DCMM) -> "ProbMatrix":
        return cls(model=model, omega=np.asarray(omega, dtype=np.float64))

    @property
    def n(self) -> int:
        return self.omega.shape[0] if self.omega is not None else self.pi.shape[0]

    def factors(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(F, B) with Ω̂ = F·B·F', or None for a dense-only matrix."""
        if self.omega is not None:
            return None
        return self.theta[:, None] * self.pi, self.p

    def dense(self) -> np.ndarray:
        if self.omega is not None:
            return self.omega
        left, core = self.factors()
        return left @ core @ left.T

    def diagonal(self) -> np.ndarray:
        if self.omega is not None:
            return np.diag(self.omega).copy()
        left, core = self.factors()
        return np.sum((left @ core) * left, axis=1)


@dataclass
class FitResult:
    """A fitted Ω̂ plus the intermediate quantities of the fitting procedure."""
    model: ModelTag
    k: int
    omega: ProbMatrix
    labels: HardLabeling | None = None
    vertices: np.ndarray | None = None
    weights: np.ndarray | None = None
    z_h: np.ndarray | None = None
    p_eta: np.ndarray | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def theta_max(self) -> float:
        """sqrt(max_i Ω̂_ii); equals max θ̂ whenever P̂ has unit diagonal and Π̂ is pure."""
        return float(np.sqrt(max(self.omega.diagonal().max(), 0.0)))

    def to_report(self) -> FitReport:
        """Communities reordered by estimated size, largest first."""
        pi, p = self.omega.pi, self.omega.p
        order = np.argsort(-pi.sum(axis=0), kind="stable")
        return FitReport(
            model=self.model,
            k=self.k,
            theta=self.omega.theta.tolist(),
            pi=pi[:, order].tolist(),
            p=p[np.ix_(order, order)].tolist(),
            flags=list(self.flags),
        )


def _positive_degrees(matrix: Matrix, model: ModelTag) -> np.ndarray:
    degrees = row_sums(matrix)
    isolated = np.flatnonzero(degrees <= 0)
    if isolated.size:
        raise FitError(model.value, f"{isolated.size} node(s) with zero degree, e.g. {isolated[:10].tolist()}")
    return degrees


def _check_labels(labels: HardLabeling, n: int, k: int, model: ModelTag) -> None:
    if labels.k != k or len(labels.labels) != n:
        raise ValueError(f"labels describe {len(labels.labels)} nodes in {labels.k} communities; expected {n} and {k}")
    if "empty_community" in labels.flags:
        raise FitError(model.value, "a community has no members")


def clip_to_unit(prob: ProbMatrix) -> tuple[ProbMatrix, bool]:
    """Clip Ω̂ into [0, 1]; the dense form is only built if some entry falls outside."""
    factors = prob.factors()
    if factors is None:
        clipped = np.clip(prob.omega, 0.0, 1.0)
        changed = bool(np.any(clipped != prob.omega))
        return replace(prob, omega=clipped, clipped=prob.clipped or changed), changed

    left, core = factors
    lc = left @ core
    outside = False
    for start in range(0, left.shape[0], _CLIP_BLOCK):
        block = lc[start:start + _CLIP_BLOCK] @ left.T
        if block.min() < 0.0 or block.max() > 1.0:
            outside = True
            break
    if not outside:
        return prob, False
    return replace(prob, omega=np.clip(prob.dense(), 0.0, 1.0), clipped=True), True


def _gof_mscore_core(
        matrix: Matrix,
        labels: HardLabeling,
        degrees: np.ndarray,
        vertices: np.ndarray,
        regularize: bool,
        flags: list[str],
) -> FitResult:
    """Simplex stage of GoF-MSCORE, given Ĥ and the vertex matrix V̂_H (rows are vertices)."""
    k = labels.k
    h = labels.matrix
    ah = np.asarray(matrix @ h)
    r_h = ah / degrees[:, None]

    weights = np.linalg.solve(vertices.T, r_h.T).T
    if regularize:
        weights, _ = truncate_and_normalize(weights)

    gram_inv, pinv_used = guarded_inverse(h.T @ ah)
    if pinv_used:
        logger.warning("H'AH is singular; using a pseudo-inverse")
        flags.append("gram_pinv")
    z_h = vertices @ gram_inv @ vertices.T
    z_h = (z_h + z_h.T) / 2.0

    z_diag = np.diag(z_h)
    p_eta = np.ones(k)
    nonzero = z_diag != 0
    p_eta[nonzero] = np.abs(z_diag[nonzero]) ** -0.5
    if np.any(z_diag <= 0):
        logger.warning("Non-positive diagonal in Z_H at {}", np.flatnonzero(z_diag <= 0).tolist())
        flags.append("p_eta_guard")

    pi, zero_rows = normalize_rows(weights / p_eta)
    if zero_rows:
        flags.append("pi_zero_rows")

    p = p_eta[:, None] * z_h * p_eta[None, :]
    if regularize:
        p = np.maximum(p, 0.0)

    denominators = pi @ p_eta
    theta = np.zeros_like(degrees, dtype=np.float64)
    usable = denominators != 0
    theta[usable] = degrees[usable] / denominators[usable]
    if not usable.all():
        flags.append("theta_guard")

    prob = ProbMatrix(model=ModelTag.DCMM, theta=theta, pi=pi, p=p)
    if regularize:
        prob, changed = clip_to_unit(prob)
        if changed:
            flags.append("clipped_omega")

    return FitResult(
        model=ModelTag.DCMM, k=k, omega=prob, labels=labels, vertices=vertices,
        weights=weights, z_h=z_h, p_eta=p_eta, flags=flags,
    )


def fit_dcmm(
        data: "Network | Matrix",
        k: int,
        vh: VertexHuntingConfig | None = None,
        regularize: bool = True,
        labels: HardLabeling | None = None,
        threshold: float | None = None,
) -> FitResult:
    """
    GoF-MSCORE fit of the DCMM.

    With `labels` given, the MSCORE and net-rounding steps are skipped (generic GoF-MSCORE).
    Regularization zeroes negative barycentric weights, negative P̂ entries and clips Ω̂ to [0, 1].
    """
    matrix = as_matrix(data)
    n = matrix.shape[0]
    vh = vh or VertexHuntingConfig.data()
    logger.info("Fitting DCMM: n={} K={} vh={}", n, k, vh.method.value)
    degrees = _positive_degrees(matrix, ModelTag.DCMM)
    flags: list[str] = []

    if labels is None:
        initial = mscore(matrix, k, vh, threshold)
        flags += initial.flags
        labels = net_round(initial)
    _check_labels(labels, n, k, ModelTag.DCMM)

    r_h = np.asarray(matrix @ labels.matrix) / degrees[:, None]
    found = hunt_vertices(r_h, k, vh, degrees=degrees)
    flags += found.flags
    vertices = found.vertices
    if is_singular(vertices):
        logger.warning("Vertex matrix V_H is singular; resetting it to the identity")
        flags.append("vh_identity_reset")
        vertices = np.eye(k)

    return _gof_mscore_core(matrix, labels, degrees, vertices, regularize, flags)


def fit_mmsbm(
        data: "Network | Matrix",
        k: int,
        vh: VertexHuntingConfig | None = None,
        regularize: bool = True,
        labels: HardLabeling | None = None,
) -> FitResult:
    """GoF-MSCORE-rev fit of the MMSBM: Ω̂ = Π̂·(α_nP̂)·Π̂' with Π̂ = AĤ V̂_H⁻¹."""
    matrix = as_matrix(data)
    n = matrix.shape[0]
    vh = vh or VertexHuntingConfig.data()
    logger.info("Fitting MMSBM: n={} K={} vh={}", n, k, vh.method.value)
    flags: list[str] = []
    vertices = None

    if k == 1:
        labels = HardLabeling.single(n)
        pi = np.ones((n, 1))
    else:
        degrees = _positive_degrees(matrix, ModelTag.MMSBM)
        if labels is None:
            initial = mmsbm_initial_pi(matrix, k, vh)
            flags += initial.flags
            labels = net_round(initial)
        _check_labels(labels, n, k, ModelTag.MMSBM)

        r_h = np.asarray(matrix @ labels.matrix)
        found = hunt_vertices(r_h, k, vh, degrees=degrees)
        flags += found.flags
        vertices = found.vertices
        if is_singular(vertices):
            logger.warning("Vertex matrix V_H is singular; resetting it to the identity")
            flags.append("vh_identity_reset")
            vertices = np.eye(k)

        pi = np.linalg.solve(vertices.T, r_h.T).T
        if regularize:
            pi, _ = truncate_and_normalize(pi)

    gram = pi.T @ pi
    if is_singular(gram):
        raise FitError(ModelTag.MMSBM.value, "Π'Π is singular")
    gram_inv = np.linalg.inv(gram)
    q = gram_inv @ (pi.T @ np.asarray(matrix @ pi)) @ gram_inv
    q = (q + q.T) / 2.0

    prob = ProbMatrix(model=ModelTag.MMSBM, theta=np.ones(n), pi=pi, p=q)
    if regularize:
        prob, changed = clip_to_unit(prob)
        if changed:
            flags.append("clipped_omega")
    return FitResult(model=ModelTag.MMSBM, k=k, omega=prob, labels=labels, vertices=vertices, weights=pi, flags=flags)


def fit_dcbm(
        data: "Network | Matrix",
        k: int,
        threshold: float | None = None,
        regularize: bool = True,
        labels: HardLabeling | None = None,
        rng: np.random.Generator | None = None,
) -> FitResult:
    """
    GoF-SCORE fit of the DCBM.

    M = Π̂'AΠ̂, P̂ = diag(M)^{-1/2} M diag(M)^{-1/2}, θ̂_i = d_i √M_kk / (M1)_k for i in community k.
    """
    matrix = as_matrix(data)
    n = matrix.shape[0]
    logger.info("Fitting DCBM: n={} K={}", n, k)
    degrees = row_sums(matrix)
    flags: list[str] = []

    if labels is None:
        labels = score_cluster(matrix, k, threshold, rng)
        flags += labels.flags
    _check_labels(labels, n, k, ModelTag.DCBM)

    pi = labels.matrix
    m = pi.T @ np.asarray(matrix @ pi)
    m = (m + m.T) / 2.0
    m_diag = np.diag(m)
    empty = np.flatnonzero(m_diag <= 0)
    if empty.size:
        community = int(empty[0])
        raise FitError(ModelTag.DCBM.value, f"community {community} has no internal edges", community=community)

    scale = m_diag ** -0.5
    p = scale[:, None] * m * scale[None, :]
    theta = degrees * np.sqrt(m_diag[labels.labels]) / m.sum(axis=1)[labels.labels]

    prob = ProbMatrix(model=ModelTag.DCBM, theta=theta, pi=pi, p=p)
    if regularize:
        prob, changed = clip_to_unit(prob)
        if changed:
            flags.append("clipped_omega")
    return FitResult(model=ModelTag.DCBM, k=k, omega=prob, labels=labels, flags=flags)


def fit_sbm(
        data: "Network | Matrix",
        k: int,
        regularize: bool = True,
        labels: HardLabeling | None = None,
        rng: np.random.Generator | None = None,
) -> FitResult:
    """GoF-SCORE-rev fit of the SBM: blockwise edge densities of the spectral k-means clusters."""
    matrix = as_matrix(data)
    n = matrix.shape[0]
    logger.info("Fitting SBM: n={} K={}", n, k)
    flags: list[str] = []

    if labels is None:
        labels = spectral_kmeans(matrix, k, rng)
    _check_labels(labels, n, k, ModelTag.SBM)

    pi = labels.matrix
    sizes = pi.sum(axis=0)
    q = (pi.T @ np.asarray(matrix @ pi)) / np.outer(sizes, sizes)
    q = (q + q.T) / 2.0

    prob = ProbMatrix(model=ModelTag.SBM, theta=np.ones(n), pi=pi, p=q)
    if regularize:
        prob, changed = clip_to_unit(prob)
        if changed:
            flags.append("clipped_omega")
    return FitResult(model=ModelTag.SBM, k=k, omega=prob, labels=labels, flags=flags)


def hull_vertices(points: np.ndarray, k: int) -> np.ndarray:
    """
    Indices of the K vertices of the convex hull of points lying on the hyperplane Σx = 1.
    The last coordinate is dropped so the hull is full-dimensional.
    """
    if k == 1:
        return np.array([0])
    reduced = points[:, :-1]
    if k == 2:
        return np.array([int(np.argmax(reduced[:, 0])), int(np.argmin(reduced[:, 0]))])

    hull = ConvexHull(reduced)
    if len(hull.vertices) != k:
        raise NonIdentifiableError(f"convex hull has {len(hull.vertices)} vertices, expected {k}")
    return np.sort(hull.vertices)


def oracle_retrieve(omega: np.ndarray, labels: HardLabeling, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Recover (θ, Π, P) from a noiseless DCMM matrix Ω. Vertex hunting is replaced by the exact
    convex hull of the rows of R_H = D⁻¹ΩH.
    """
    omega = np.asarray(omega, dtype=np.float64)
    degrees = _positive_degrees(omega, ModelTag.DCMM)
    _check_labels(labels, omega.shape[0], k, ModelTag.DCMM)

    r_h = (omega @ labels.matrix) / degrees[:, None]
    indices = hull_vertices(r_h, k)
    vertices = r_h[indices]
    if len(np.unique(np.round(vertices, 12), axis=0)) != k or is_singular(vertices):
        raise NonIdentifiableError("ideal simplex is degenerate; Ω is not an identifiable DCMM")
    if is_singular(labels.matrix.T @ omega @ labels.matrix):
        raise NonIdentifiableError("H'ΩH is singular")

    flags: list[str] = []
    fit = _gof_mscore_core(omega, labels, degrees, vertices, regularize=False, flags=flags)
    return fit.omega.theta, fit.omega.pi, fit.omega.p


def fit_model(
        data: "Network | Matrix",
        model: ModelTag,
        k: int,
        config: GofConfig | None = None,
        labels: HardLabeling | None = None,
        rng: np.random.Generator | None = None,
) -> FitResult:
    """Dispatch to the fitter for `model` using the options of `config`."""
    config = config or GofConfig()
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    match model:
        case ModelTag.DCMM:
            return fit_dcmm(data, k, config.vh, config.regularize, labels, config.score_threshold)
        case ModelTag.MMSBM:
            return fit_mmsbm(data, k, config.vh, config.regularize, labels)
        case ModelTag.DCBM:
            return fit_dcbm(data, k, config.score_threshold, config.regularize, labels, rng)
        case ModelTag.SBM:
            return fit_sbm(data, k, config.regularize, labels, rng)
    raise ValueError(f"unknown model {model!r}")
