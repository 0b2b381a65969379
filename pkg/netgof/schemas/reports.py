from pydantic import BaseModel, Field, model_validator

from netgof.core.enums import FitClass, ModelTag


class DegreeStats(BaseModel):
    d_min: float = Field(..., ge=0)
    d_max: float = Field(..., ge=0)
    d_bar: float = Field(..., ge=0)

    @model_validator(mode="after")
    def _ordered(self) -> "DegreeStats":
        if not self.d_min <= self.d_bar <= self.d_max:
            raise ValueError("degree statistics must satisfy d_min <= d_bar <= d_max")
        return self


class KnnSpTuning(BaseModel):
    n_neighbors: int = Field(..., ge=1)
    alpha: float = Field(..., gt=0)
    m0: int = Field(..., ge=0)


class ModelGof(BaseModel):
    """GoF outcome for one assumed model."""
    model: ModelTag
    k: int
    t_n: float | None = None
    u_n3: float | None = None
    c_n3: int | None = None
    decision: bool | None = Field(None, description="True when the model is rejected at level alpha")
    fit_class: FitClass | None = None
    flags: list[str] = Field(default_factory=list)
    error: str | None = None


class GofReport(BaseModel):
    n: int
    k: int
    alpha: float
    z_critical: float
    c_n3: int
    models: list[ModelGof]

    @model_validator(mode="after")
    def _decisions_consistent(self) -> "GofReport":
        for entry in self.models:
            if entry.t_n is not None and entry.decision != (abs(entry.t_n) >= self.z_critical):
                raise ValueError(f"decision for {entry.model.value} disagrees with its T_n")
        return self

    def by_model(self) -> dict[ModelTag, ModelGof]:
        return {entry.model: entry for entry in self.models}


class KEstimate(BaseModel):
    k: int = Field(..., description="Estimated K; k_max + 1 when no candidate is accepted")
    k_max: int
    alpha: float
    statistics: dict[int, float] = Field(default_factory=dict)
    skipped: dict[int, str] = Field(default_factory=dict)


class SnrResult(BaseModel):
    model: ModelTag
    k: int
    m: int
    trace_residual: float
    trace_omega: float
    snr: float
    flags: list[str] = Field(default_factory=list)


class NmfFeasibility(BaseModel):
    feasible: bool
    k: int
    tau: list[float]
    omega: list[float]
    rho_1: list[float] = Field(..., description="Leading eigenvector of U⁻¹Ω, unit norm, nonnegative sum")
    lhs: float | None = None
    bound: float | None = None
    n_positive_eigenvalues: int


class FitReport(BaseModel):
    """JSON view of a fitted probability matrix; communities sorted by size, largest first."""
    model: ModelTag
    k: int
    theta: list[float]
    pi: list[list[float]]
    p: list[list[float]]
    flags: list[str] = Field(default_factory=list)
