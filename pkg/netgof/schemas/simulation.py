from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from netgof.core.enums import ModelTag


class ThetaSpec(BaseModel):
    """
    Degree-parameter law.

    - uniform: θ_i ~ Unif(low, high)
    - inverse_uniform: 1/θ_i ~ Unif(low, high) (severe heterogeneity)
    - constant: θ_i = sqrt(alpha_n)
    """
    model_config = ConfigDict(frozen=True)

    law: Literal["uniform", "inverse_uniform", "constant"] = "uniform"
    low: float = Field(0.1, gt=0)
    high: float = Field(0.3, gt=0)
    alpha_n: float = Field(0.3, gt=0, le=1)

    @model_validator(mode="after")
    def _bounds(self) -> "ThetaSpec":
        if self.law != "constant" and self.low > self.high:
            raise ValueError("theta.low must not exceed theta.high")
        return self


class PSpec(BaseModel):
    """Community matrix: unit diagonal with constant off-diagonal b, or an explicit matrix."""
    model_config = ConfigDict(frozen=True)

    off_diagonal: float = Field(0.05, ge=0)
    matrix: list[list[float]] | None = None


class PiSpec(BaseModel):
    """
    Membership law.

    - pure: every node pure, communities of (nearly) equal size
    - dirichlet: `pure_fraction·n` pure nodes per community, the rest Dirichlet(concentration·1_K)
      (concentration defaults to 1/K)
    - two_point: `pure_fraction·n` pure nodes per community, the rest split between (x, 1−x)
      and (1−x, x); K = 2 only
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["pure", "dirichlet", "two_point"] = "pure"
    pure_fraction: float = Field(0.125, ge=0, le=1)
    concentration: float | None = Field(None, gt=0)
    x: float = Field(0.25, ge=0, le=0.5)


class LinkSpec(BaseModel):
    """Edge probability as a function of Ω: linear, or Ω² + shift (nonlinear DCMM)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["linear", "quadratic_shift"] = "linear"
    shift: float = Field(0.2, ge=0, le=1)


class SimConfig(BaseModel):
    """One synthetic network design plus replicate count and seed."""
    model_config = ConfigDict(frozen=True)

    schema_version: Literal[1] = 1
    n: int = Field(..., ge=3)
    k: int = Field(..., ge=1)
    model: ModelTag
    theta: ThetaSpec = Field(default_factory=ThetaSpec)
    p: PSpec = Field(default_factory=PSpec)
    pi: PiSpec = Field(default_factory=PiSpec)
    link: LinkSpec = Field(default_factory=LinkSpec)
    replicates: int = Field(100, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def _consistent_with_model(self) -> "SimConfig":
        if self.model in (ModelTag.SBM, ModelTag.DCBM) and self.pi.kind != "pure":
            raise ValueError(f"{self.model.value} requires pi.kind='pure'")
        if self.model in (ModelTag.SBM, ModelTag.MMSBM) and self.theta.law != "constant":
            raise ValueError(f"{self.model.value} requires theta.law='constant'")
        if self.pi.kind == "two_point" and self.k != 2:
            raise ValueError("pi.kind='two_point' requires k=2")
        if self.pi.kind != "pure" and self.pi.pure_fraction * self.k > 1:
            raise ValueError("pi.pure_fraction * k exceeds 1")
        if self.p.matrix is not None:
            rows = self.p.matrix
            if len(rows) != self.k or any(len(row) != self.k for row in rows):
                raise ValueError("p.matrix must be k x k")
            if any(rows[a][b] != rows[b][a] for a in range(self.k) for b in range(self.k)):
                raise ValueError("p.matrix must be symmetric")
        return self


class ExperimentSummary(BaseModel):
    n_ok: int
    n_failed: int
    mean: float | None = None
    variance: float | None = None
    rejection_rate: float | None = Field(None, ge=0, le=1)


class Histogram(BaseModel):
    edges: list[float]
    counts: list[int]
    underflow: int
    overflow: int


class ExperimentResult(BaseModel):
    config: SimConfig
    assumed: list[ModelTag]
    assumed_k: int
    alpha: float
    t_values: dict[ModelTag, list[float | None]]
    summaries: dict[ModelTag, ExperimentSummary]
    histograms: dict[ModelTag, Histogram]

    @model_validator(mode="after")
    def _replicate_counts(self) -> "ExperimentResult":
        for model, values in self.t_values.items():
            if len(values) != self.config.replicates:
                raise ValueError(f"{model.value}: {len(values)} values for {self.config.replicates} replicates")
        return self


class ExperimentRequest(BaseModel):
    """HTTP body for scheduling an experiment."""
    config: SimConfig
    assumed: list[ModelTag] = Field(..., min_length=1)
    assumed_k: int | None = Field(None, ge=1)
    alpha: float = Field(0.05, gt=0, lt=1)
    threads: int = Field(1, ge=1)
