"""
Synthetic block-model networks and the Monte-Carlo harness for null calibration and power.

Every replicate owns a PCG64 stream spawned from `SeedSequence(config.seed)`, so results do
not depend on how replicates are scheduled across threads.
"""
import asyncio
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
import polars as pl
from loguru import logger

from netgof.core.enums import ModelTag
from netgof.core.env_config import config as env
from netgof.core.exceptions import ExperimentError, NetGofError, SimConfigError
from netgof.schemas.config import GofConfig
from netgof.schemas.simulation import (
    ExperimentResult,
    ExperimentSummary,
    Histogram,
    LinkSpec,
    PiSpec,
    PSpec,
    SimConfig,
    ThetaSpec,
)
from netgof.services.cycles import count_c3, u_n3
from netgof.services.fitters import fit_model
from netgof.services.gof import z_critical
from netgof.services.graph import Network
from netgof.services.utils.io import save_frame, save_model_json


HISTOGRAM_RANGE = (-6.0, 6.0)
HISTOGRAM_BINS = 40


@dataclass(frozen=True)
class ModelParams:
    theta: np.ndarray
    pi: np.ndarray
    p: np.ndarray


class Preset(NamedTuple):
    config: SimConfig
    assumed: list[ModelTag]
    assumed_k: int | None


# --------------------------------------------------------------------------------------
# Generation
# --------------------------------------------------------------------------------------
def _draw_theta(spec: ThetaSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    match spec.law:
        case "uniform":
            return rng.uniform(spec.low, spec.high, size=n)
        case "inverse_uniform":
            return 1.0 / rng.uniform(spec.low, spec.high, size=n)
        case _:
            return np.full(n, math.sqrt(spec.alpha_n))


def _community_matrix(spec: PSpec, k: int) -> np.ndarray:
    if spec.matrix is not None:
        return np.asarray(spec.matrix, dtype=np.float64)
    return (1.0 - spec.off_diagonal) * np.eye(k) + spec.off_diagonal * np.ones((k, k))


def _draw_pi(spec: PiSpec, n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pure nodes come first, in contiguous community blocks; mixed rows follow."""
    pi = np.zeros((n, k))
    if spec.kind == "pure":
        pi[np.arange(n), np.arange(n) * k // n] = 1.0
        return pi

    per_community = int(spec.pure_fraction * n)
    n_pure = per_community * k
    pi[np.arange(n_pure), np.arange(n_pure) // max(per_community, 1)] = 1.0
    n_mixed = n - n_pure
    if n_mixed == 0:
        return pi

    if spec.kind == "dirichlet":
        concentration = spec.concentration or 1.0 / k
        draws = rng.gamma(concentration, 1.0, size=(n_mixed, k))
        sums = draws.sum(axis=1, keepdims=True)
        # all-zero gamma draws underflow at tiny concentrations
        sums[sums == 0] = 1.0
        draws[draws.sum(axis=1) == 0, 0] = 1.0
        pi[n_pure:] = draws / sums
    else:
        half = n_mixed // 2
        pi[n_pure:n_pure + half] = (spec.x, 1.0 - spec.x)
        pi[n_pure + half:] = (1.0 - spec.x, spec.x)
    return pi


def _apply_link(omega: np.ndarray, link: LinkSpec) -> np.ndarray:
    if link.kind == "quadratic_shift":
        return omega ** 2 + link.shift
    return omega


def gen_omega(config: SimConfig, rng: np.random.Generator) -> tuple[np.ndarray, ModelParams]:
    """
    Ω = ΘΠPΠ'Θ passed through the link function. Entries outside [0, 1] are a configuration
    error; nothing is clipped.
    """
    theta = _draw_theta(config.theta, config.n, rng)
    p = _community_matrix(config.p, config.k)
    pi = _draw_pi(config.pi, config.n, config.k, rng)

    left = theta[:, None] * pi
    omega = _apply_link(left @ p @ left.T, config.link)

    bad = np.argwhere((omega > 1.0) | (omega < 0.0))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise SimConfigError(
            f"Ω({i},{j}) = {omega[i, j]:.4f} lies outside [0, 1]; {len(bad)} entries in total"
        )
    return omega, ModelParams(theta=theta, pi=pi, p=p)


def sample_network(omega: np.ndarray, rng: np.random.Generator) -> Network:
    """Independent Bernoulli draws on the upper triangle, mirrored; the diagonal stays empty."""
    n = omega.shape[0]
    rows, cols = np.triu_indices(n, k=1)
    hits = rng.random(len(rows)) < omega[rows, cols]
    return Network.from_edges(n, np.column_stack([rows[hits], cols[hits]]))


# --------------------------------------------------------------------------------------
# Summaries and export
# --------------------------------------------------------------------------------------
def summarize(values: list[float | None], alpha: float) -> ExperimentSummary:
    ok = np.array([v for v in values if v is not None], dtype=np.float64)
    if ok.size == 0:
        return ExperimentSummary(n_ok=0, n_failed=len(values))
    return ExperimentSummary(
        n_ok=int(ok.size),
        n_failed=len(values) - int(ok.size),
        mean=float(ok.mean()),
        variance=float(ok.var(ddof=1)) if ok.size > 1 else None,
        rejection_rate=float(np.mean(np.abs(ok) >= z_critical(alpha))),
    )


def histogram(values: list[float | None]) -> Histogram:
    ok = np.array([v for v in values if v is not None], dtype=np.float64)
    low, high = HISTOGRAM_RANGE
    counts, edges = np.histogram(ok[(ok >= low) & (ok <= high)], bins=HISTOGRAM_BINS, range=HISTOGRAM_RANGE)
    return Histogram(
        edges=edges.tolist(),
        counts=counts.astype(int).tolist(),
        underflow=int(np.sum(ok < low)),
        overflow=int(np.sum(ok > high)),
    )


def replicate_frame(result: ExperimentResult) -> pl.DataFrame:
    """One row per replicate, one T_n column per assumed model."""
    columns = {"replicate": pl.Series(range(result.config.replicates), dtype=pl.Int64)}
    for model in result.assumed:
        columns[f"t_{model.value.lower()}"] = pl.Series(result.t_values[model], dtype=pl.Float64)
    return pl.DataFrame(columns)


def histogram_frame(result: ExperimentResult) -> pl.DataFrame:
    rows = []
    for model in result.assumed:
        hist = result.histograms[model]
        rows.append({"model": model.value, "bin_left": -math.inf, "bin_right": hist.edges[0], "count": hist.underflow})
        for left, right, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
            rows.append({"model": model.value, "bin_left": left, "bin_right": right, "count": count})
        rows.append({"model": model.value, "bin_left": hist.edges[-1], "bin_right": math.inf, "count": hist.overflow})
    return pl.DataFrame(
        rows, schema={"model": pl.String, "bin_left": pl.Float64, "bin_right": pl.Float64, "count": pl.Int64}
    )


def save_experiment(result: ExperimentResult, output_dir: str | Path) -> None:
    """replicates.csv, histograms.csv and summary.json under `output_dir`."""
    output_dir = Path(output_dir)
    save_frame(replicate_frame(result), output_dir / "replicates.csv")
    save_frame(histogram_frame(result), output_dir / "histograms.csv")
    save_model_json(result, output_dir / "summary.json")


# --------------------------------------------------------------------------------------
# Harness
# --------------------------------------------------------------------------------------
def _run_replicate(
        index: int,
        config: SimConfig,
        assumed: list[ModelTag],
        k: int,
        gof_config: GofConfig,
        rng: np.random.Generator,
) -> dict[ModelTag, float | None]:
    omega, _ = gen_omega(config, rng)
    net = sample_network(omega, rng)
    c_n3 = count_c3(net)
    if c_n3 == 0:
        logger.warning("Replicate {} has no triangles; T_n undefined", index)
        return {model: None for model in assumed}

    values: dict[ModelTag, float | None] = {}
    for model in assumed:
        try:
            fit = fit_model(net, model, k, gof_config, rng=rng)
            values[model] = u_n3(net, fit.omega) / math.sqrt(6.0 * c_n3)
        except SimConfigError:
            raise
        except NetGofError as exc:
            logger.exception("Replicate {} failed for {}: {}", index, model.value, exc)
            values[model] = None
    return values


class ExperimentRunner:
    """
    Generate `config.replicates` networks, fit every assumed model on each and collect T_n.

    Replicates run on worker threads, at most `threads` at a time.
    """

    def __init__(
            self,
            config: SimConfig,
            assumed: list[ModelTag],
            alpha: float = 0.05,
            assumed_k: int | None = None,
            threads: int | None = None,
            gof_config: GofConfig | None = None,
            output_dir: str | Path | None = None,
    ) -> None:
        if not assumed:
            raise ExperimentError("at least one assumed model is required")
        self.config = config
        self.assumed = list(dict.fromkeys(assumed))
        self.alpha = alpha
        self.assumed_k = assumed_k or config.k
        self.threads = threads or env.SIM_THREADS
        self.gof_config = gof_config or GofConfig.theory(seed=config.seed, alpha=alpha)
        self.output_dir = Path(output_dir) if output_dir else None

    def _streams(self) -> list[np.random.Generator]:
        children = np.random.SeedSequence(self.config.seed).spawn(self.config.replicates)
        return [np.random.Generator(np.random.PCG64(child)) for child in children]

    async def run(self) -> ExperimentResult:
        if self.config.replicates == 0:
            raise ExperimentError("experiment has zero replicates")

        logger.info(
            "Starting experiment: truth={} n={} K={} reps={} assumed={} (K={}) threads={}",
            self.config.model.value, self.config.n, self.config.k, self.config.replicates,
            [m.value for m in self.assumed], self.assumed_k, self.threads,
        )
        semaphore = asyncio.Semaphore(self.threads)

        async def one(index: int, rng: np.random.Generator) -> dict[ModelTag, float | None]:
            async with semaphore:
                return await asyncio.to_thread(
                    _run_replicate, index, self.config, self.assumed, self.assumed_k, self.gof_config, rng
                )

        outcomes = await asyncio.gather(*(one(i, rng) for i, rng in enumerate(self._streams())))

        t_values = {model: [outcome[model] for outcome in outcomes] for model in self.assumed}
        result = ExperimentResult(
            config=self.config,
            assumed=self.assumed,
            assumed_k=self.assumed_k,
            alpha=self.alpha,
            t_values=t_values,
            summaries={model: summarize(values, self.alpha) for model, values in t_values.items()},
            histograms={model: histogram(values) for model, values in t_values.items()},
        )

        if self.output_dir is not None:
            save_experiment(result, self.output_dir)
        for model, summary in result.summaries.items():
            logger.success(
                "{}: ok={} failed={} mean={} var={} reject={}",
                model.value, summary.n_ok, summary.n_failed, summary.mean, summary.variance, summary.rejection_rate,
            )
        return result


def run_null_calibration(
        config: SimConfig,
        assumed: ModelTag,
        alpha: float = 0.05,
        threads: int | None = None,
) -> ExperimentResult:
    """Truth nested in the assumed model; T_n should be close to N(0, 1)."""
    if not config.model.nests_in(assumed):
        raise ExperimentError(f"{config.model.value} truth is not nested in assumed {assumed.value}")
    return asyncio.run(ExperimentRunner(config, [assumed], alpha, threads=threads).run())


def run_power(
        config: SimConfig,
        assumed: ModelTag,
        alpha: float = 0.05,
        assumed_k: int | None = None,
        threads: int | None = None,
) -> ExperimentResult:
    """Truth outside the assumed model (different model class or K); rejection rate is the power."""
    if config.model.nests_in(assumed) and (assumed_k or config.k) == config.k:
        logger.warning("Truth {} is nested in {}; power equals the type-I error", config.model.value, assumed.value)
    return asyncio.run(ExperimentRunner(config, [assumed], alpha, assumed_k=assumed_k, threads=threads).run())


# --------------------------------------------------------------------------------------
# Presets
# --------------------------------------------------------------------------------------
_ALL_MODELS = [ModelTag.SBM, ModelTag.DCBM, ModelTag.MMSBM, ModelTag.DCMM]


def _b(b: float | None, default: float) -> float:
    return default if b is None else b


def experiment_preset(
        name: str,
        n: int = 3000,
        replicates: int = 1000,
        seed: int = 0,
        b: float | None = None,
) -> Preset:
    """
    Published simulation designs.

    exp1.1-exp1.4  K=2 DCMM / MMSBM / DCBM / SBM truths, all four models assumed
                   (b = 0.05 by default; b = 0.2 gives the second set of histograms)
    exp2           DCMM with two-point mixed rows, type-I error of the DCMM test
    exp3.1         K0=3 DCMM fitted with K=2
    exp3.2         DCMM passed through f(x) = x² + 0.2
    """
    mixed = PiSpec(kind="dirichlet", pure_fraction=0.125, concentration=0.5)
    heterogeneous = ThetaSpec(law="uniform", low=0.1, high=0.3)
    flat = ThetaSpec(law="constant", alpha_n=0.3)
    common = {"n": n, "replicates": replicates, "seed": seed}

    match name:
        case "exp1.1":
            config = SimConfig(k=2, model=ModelTag.DCMM, theta=heterogeneous, p=PSpec(off_diagonal=_b(b, 0.05)), pi=mixed, **common)
            return Preset(config, _ALL_MODELS, None)
        case "exp1.2":
            config = SimConfig(k=2, model=ModelTag.MMSBM, theta=flat, p=PSpec(off_diagonal=_b(b, 0.05)), pi=mixed, **common)
            return Preset(config, _ALL_MODELS, None)
        case "exp1.3":
            config = SimConfig(k=2, model=ModelTag.DCBM, theta=heterogeneous, p=PSpec(off_diagonal=_b(b, 0.05)), **common)
            return Preset(config, _ALL_MODELS, None)
        case "exp1.4":
            config = SimConfig(k=2, model=ModelTag.SBM, theta=flat, p=PSpec(off_diagonal=_b(b, 0.05)), **common)
            return Preset(config, _ALL_MODELS, None)
        case "exp2":
            config = SimConfig(
                k=2, model=ModelTag.DCMM, theta=heterogeneous, p=PSpec(off_diagonal=_b(b, 0.2)),
                pi=PiSpec(kind="two_point", pure_fraction=0.125, x=0.25), **common,
            )
            return Preset(config, [ModelTag.DCMM], None)
        case "exp3.1":
            config = SimConfig(
                k=3, model=ModelTag.DCMM, theta=heterogeneous, p=PSpec(off_diagonal=_b(b, 0.2)),
                pi=PiSpec(kind="dirichlet", pure_fraction=0.125, concentration=1 / 3), **common,
            )
            return Preset(config, [ModelTag.DCMM], 2)
        case "exp3.2":
            config = SimConfig(
                k=2, model=ModelTag.DCMM, theta=heterogeneous, p=PSpec(off_diagonal=_b(b, 0.2)),
                pi=PiSpec(kind="dirichlet", pure_fraction=0.125, concentration=0.5),
                link=LinkSpec(kind="quadratic_shift", shift=0.2), **common,
            )
            return Preset(config, [ModelTag.DCMM], None)
    raise ExperimentError(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")


PRESET_NAMES = ("exp1.1", "exp1.2", "exp1.3", "exp1.4", "exp2", "exp3.1", "exp3.2")
