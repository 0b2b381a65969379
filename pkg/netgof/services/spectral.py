"""
Leading eigenpairs of a symmetric matrix and the SCORE ratio embedding.
"""
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from netgof.core.env_config import config
from netgof.core.exceptions import SolverError
from netgof.services.graph import Matrix, Network, as_matrix


DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Embedding:
    """Top-K eigenpairs ordered by decreasing |λ|; eigenvectors are unit-norm columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def k(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class ScoreRatio:
    ratios: np.ndarray
    threshold: float
    zero_rows: int


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its first nonzero entry is positive."""
    out = vectors.copy()
    scale = np.abs(out).max(axis=0)
    for k in range(out.shape[1]):
        nonzero = np.flatnonzero(np.abs(out[:, k]) > 1e-12 * max(scale[k], 1.0))
        if nonzero.size and out[nonzero[0], k] < 0:
            out[:, k] = -out[:, k]
    return out


def _solve(matrix: Matrix, k: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    n = matrix.shape[0]
    if n <= config.DENSE_EIGEN_CUTOFF or k >= n - 1:
        dense = matrix.toarray() if sp.issparse(matrix) else matrix
        return np.linalg.eigh(dense)

    try:
        return eigsh(matrix, k=k, which="LM", tol=tol * 1e-3)
    except ArpackNoConvergence as exc:
        residuals = [
            float(np.linalg.norm(matrix @ exc.eigenvectors[:, j] - exc.eigenvalues[j] * exc.eigenvectors[:, j]))
            for j in range(len(exc.eigenvalues))
        ]
        raise SolverError(
            f"Lanczos iteration did not converge for k={k} (n={n}); {len(residuals)} pairs converged",
            residuals=residuals,
        ) from exc


def top_k_eigs(data: "Network | Matrix", k: int, tol: float = DEFAULT_TOL) -> Embedding:
    """
    K eigenpairs of a symmetric matrix with the largest |λ|.

    Dense decomposition up to DENSE_EIGEN_CUTOFF nodes, Lanczos (ARPACK) above. Ties in |λ| keep
    the solver's index order. Every pair must satisfy ‖Aξ − λξ‖ ≤ tol·|λ_1|.
    """
    matrix = as_matrix(data)
    n = matrix.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")

    values, vectors = _solve(matrix, k, tol)
    order = np.argsort(-np.abs(values), kind="stable")[:k]
    values = values[order]
    vectors = _fix_signs(vectors[:, order])

    residuals = np.linalg.norm(matrix @ vectors - vectors * values, axis=0)
    bound = tol * abs(values[0]) + 100 * np.finfo(float).eps * math.sqrt(n)
    if np.any(residuals > bound):
        raise SolverError(
            f"eigen residual {residuals.max():.3e} exceeds bound {bound:.3e}",
            residuals=residuals.tolist(),
        )

    logger.debug("Top-{} eigenvalues: {}", k, np.round(values, 4).tolist())
    return Embedding(eigenvalues=values, eigenvectors=vectors, residuals=residuals)


def score_ratio(emb: Embedding, threshold: float | None = None) -> ScoreRatio:
    """
    SCORE normalization R(i, k) = ξ_{k+1}(i)/ξ_1(i), clamped to [−t, t] with t = log(n) by default.

    Rows where ξ_1(i) = 0 are set to +t and counted in `zero_rows`.
    """
    if emb.k < 2:
        raise ValueError("score_ratio needs at least two eigenvectors")
    t = math.log(emb.n) if threshold is None else threshold

    lead = emb.eigenvectors[:, 0]
    rest = emb.eigenvectors[:, 1:]
    zero = lead == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = rest / lead[:, None]
    ratios[zero] = t
    ratios = np.clip(ratios, -t, t)

    if zero.any():
        logger.warning("{} node(s) with zero leading eigenvector entry clamped to +t", int(zero.sum()))
    return ScoreRatio(ratios=ratios, threshold=t, zero_rows=int(zero.sum()))
