"""
Goodness-of-fit metrics and diagnostics built on the fitters: the four-model GoF report,
sequential estimation of K, the signal-to-noise ratio of a model against a known Ω, the
non-negative factorization feasibility check, and a KNN-SP tuning sweep.
"""
import math

import numpy as np
import polars as pl
from loguru import logger
from scipy.sparse.csgraph import connected_components
from scipy.special import ndtri

from netgof.core.enums import FitClass, ModelTag, VhMethod
from netgof.core.env_config import config as env
from netgof.core.exceptions import NetGofError, ReducibleMatrixError, UndefinedStatisticError
from netgof.schemas.config import GofConfig, VertexHuntingConfig
from netgof.schemas.reports import GofReport, KEstimate, ModelGof, NmfFeasibility, SnrResult
from netgof.services.cycles import count_c3, u_n3
from netgof.services.fitters import fit_dcbm, fit_dcmm, fit_model
from netgof.services.graph import Network


MODEL_ORDER = (ModelTag.SBM, ModelTag.DCBM, ModelTag.MMSBM, ModelTag.DCMM)
GOOD_FIT_BOUND = 5.0
MODERATE_FIT_BOUND = 7.5
DENSE_THETA = 0.5


def z_critical(alpha: float) -> float:
    """Two-sided standard normal critical value z_{α/2}."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(ndtri(1.0 - alpha / 2.0))


def fit_class(t: float) -> FitClass:
    size = abs(t)
    if size < GOOD_FIT_BOUND:
        return FitClass.GOOD
    if size <= MODERATE_FIT_BOUND:
        return FitClass.MODERATE
    return FitClass.SIGNIFICANT


def _model_gof(net: Network, model: ModelTag, k: int, c_n3: int, z: float, config: GofConfig) -> ModelGof:
    try:
        fit = fit_model(net, model, k, config, rng=np.random.default_rng(config.seed))
        u = u_n3(net, fit.omega)
    except NetGofError as exc:
        logger.exception("GoF for {} (K={}) failed: {}", model.value, k, exc)
        return ModelGof(model=model, k=k, c_n3=c_n3, error=str(exc))

    t = u / math.sqrt(6.0 * c_n3)
    flags = list(fit.flags)
    if fit.theta_max > DENSE_THETA:
        flags.append("dense_regime")
    logger.info("{} K={}: T_n = {:.4f}", model.value, k, t)
    return ModelGof(
        model=model, k=k, t_n=t, u_n3=u, c_n3=c_n3,
        decision=abs(t) >= z, fit_class=fit_class(t), flags=flags,
    )


def gof_all(net: Network, k: int, config: GofConfig | None = None) -> GofReport:
    """T_n for SBM, DCBM, MMSBM and DCMM with K communities. A failing fitter is recorded, not raised."""
    config = config or GofConfig()
    c_n3 = count_c3(net)
    if c_n3 == 0:
        raise UndefinedStatisticError("network has no triangles; T_n is undefined")
    z = z_critical(config.alpha)

    logger.info("Running GoF for n={} K={} (C_n3={})", net.n, k, c_n3)
    models = [_model_gof(net, model, k, c_n3, z, config) for model in MODEL_ORDER]
    report = GofReport(n=net.n, k=k, alpha=config.alpha, z_critical=z, c_n3=c_n3, models=models)
    logger.success("GoF finished for {} model(s)", sum(entry.error is None for entry in models))
    return report


def estimate_k(net: Network, k_max: int, alpha: float = 0.05, config: GofConfig | None = None) -> KEstimate:
    """
    Smallest K0 in 1..k_max whose DCBM fit is accepted, |T_n| < z_{α/2}. Returns k_max + 1
    when none is.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    config = config or GofConfig(alpha=alpha)
    c_n3 = count_c3(net)
    if c_n3 == 0:
        raise UndefinedStatisticError("network has no triangles; T_n is undefined")
    z = z_critical(alpha)

    statistics: dict[int, float] = {}
    skipped: dict[int, str] = {}
    for k0 in range(1, k_max + 1):
        try:
            fit = fit_dcbm(
                net, k0, config.score_threshold, config.regularize,
                rng=np.random.default_rng(config.seed),
            )
            t = u_n3(net, fit.omega) / math.sqrt(6.0 * c_n3)
        except NetGofError as exc:
            logger.warning("Skipping K0={}: {}", k0, exc)
            skipped[k0] = str(exc)
            continue

        statistics[k0] = t
        logger.info("K0={}: T_n(DCBM) = {:.4f}", k0, t)
        if abs(t) < z:
            logger.success("Estimated K = {}", k0)
            return KEstimate(k=k0, k_max=k_max, alpha=alpha, statistics=statistics, skipped=skipped)

    logger.warning("No K0 up to {} accepted", k_max)
    return KEstimate(k=k_max + 1, k_max=k_max, alpha=alpha, statistics=statistics, skipped=skipped)


def _trace_power(matrix: np.ndarray, m: int) -> float:
    return float(np.sum(np.linalg.eigvalsh(matrix) ** m))


def snr(omega: np.ndarray, model: ModelTag, k: int, m: int = 3, seed: int = 0) -> SnrResult:
    """
    trace([Ω − Ω̃]^m) / sqrt(2m·trace(Ω^m)), with Ω̃ the model's fitting map applied to Ω itself
    (SP vertex hunting, no regularization).
    """
    omega = np.asarray(omega, dtype=np.float64)
    n = omega.shape[0]
    if n > env.SNR_MAX_N:
        raise ValueError(f"SNR uses dense traces and is limited to n <= {env.SNR_MAX_N} (got {n})")
    if m < 3:
        raise ValueError("m must be at least 3")

    fit = fit_model(omega, model, k, GofConfig.theory(seed=seed))
    fitted = fit.omega.dense()
    trace_residual = _trace_power(omega - fitted, m)
    trace_omega = _trace_power(omega, m)
    if trace_omega <= 0:
        raise UndefinedStatisticError(f"trace(Ω^{m}) = {trace_omega:.4g} is not positive")

    value = trace_residual / math.sqrt(2 * m * trace_omega)
    logger.info("SNR({} K={}, m={}) = {:.6g}", model.value, k, m, value)
    return SnrResult(
        model=model, k=k, m=m, trace_residual=trace_residual, trace_omega=trace_omega,
        snr=value, flags=list(fit.flags),
    )


def nmf_feasibility(omega: np.ndarray, k: int) -> NmfFeasibility:
    """
    Sufficient condition for Ω = ΘΠPΠ'Θ with nonnegative factors.

    With u = Ω1, U = diag(u) and (τ_k, ρ_k) the eigenpairs of U⁻¹Ω (ρ_k unit norm),
    K ≤ 2 is always feasible; otherwise more than K/2 positive eigenvalues of Ω and
    Σ_{k≥2} |τ_k|·ω_k·‖√n ρ_k‖²_∞ ≤ 1/(K−1) with ω_k = ū/(ρ_k'Uρ_k).
    """
    omega = np.asarray(omega, dtype=np.float64)
    n = omega.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    u = omega.sum(axis=1)
    n_components, _ = connected_components(omega > 0, directed=False)
    if n_components > 1 or np.any(u <= 0):
        raise ReducibleMatrixError(f"Ω is reducible ({n_components} components)")

    scale = u ** -0.5
    values, vectors = np.linalg.eigh(scale[:, None] * omega * scale[None, :])
    order = np.argsort(-np.abs(values), kind="stable")[:k]
    tau = values[order]
    rho = scale[:, None] * vectors[:, order]
    rho /= np.linalg.norm(rho, axis=0)
    if rho[:, 0].sum() < 0:
        rho[:, 0] = -rho[:, 0]
    weights = u.mean() / np.einsum("ik,i,ik->k", rho, u, rho)

    omega_values = np.linalg.eigvalsh(omega)
    leading = omega_values[np.argsort(-np.abs(omega_values), kind="stable")[:k]]
    n_positive = int(np.sum(leading > 0))

    lhs = bound = None
    if k <= 2:
        feasible = True
    else:
        spread = n * np.max(rho[:, 1:] ** 2, axis=0)
        lhs = float(np.sum(np.abs(tau[1:]) * weights[1:] * spread))
        bound = 1.0 / (k - 1)
        feasible = n_positive > k / 2 and lhs <= bound

    return NmfFeasibility(
        feasible=feasible, k=k, tau=tau.tolist(), omega=weights.tolist(), rho_1=rho[:, 0].tolist(),
        lhs=lhs, bound=bound, n_positive_eigenvalues=n_positive,
    )


def tuning_sweep(
        net: Network,
        k: int,
        n_values=range(4, 23),
        alpha_values=(5.0, 10.0, 15.0, 20.0),
        config: GofConfig | None = None,
) -> pl.DataFrame:
    """T_n(DCMM) over a grid of KNN-SP (N, α); one row per pair, failures carry the error text."""
    config = config or GofConfig()
    c_n3 = count_c3(net)
    if c_n3 == 0:
        raise UndefinedStatisticError("network has no triangles; T_n is undefined")

    rows = []
    for n_neighbors in n_values:
        for alpha in alpha_values:
            vh = VertexHuntingConfig(method=VhMethod.KNNSP, n_neighbors=n_neighbors, alpha=alpha)
            try:
                fit = fit_dcmm(net, k, vh, config.regularize, threshold=config.score_threshold)
                t, error = u_n3(net, fit.omega) / math.sqrt(6.0 * c_n3), None
            except NetGofError as exc:
                logger.warning("Sweep point N={} alpha={} failed: {}", n_neighbors, alpha, exc)
                t, error = None, str(exc)
            rows.append({"n_neighbors": n_neighbors, "alpha": float(alpha), "t_n": t, "error": error})

    logger.success("Tuning sweep finished: {} grid points", len(rows))
    return pl.DataFrame(
        rows, schema={"n_neighbors": pl.Int64, "alpha": pl.Float64, "t_n": pl.Float64, "error": pl.String}
    )
