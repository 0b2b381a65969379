from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, model_validator

from netgof.core.enums import ModelTag, OutputFormat, VhMethod


class VertexHuntingConfig(BaseModel):
    """
    Vertex hunting choice. With KNN-SP, `n_neighbors` and `alpha` left as None are
    auto-tuned from the network's degrees.
    """
    model_config = ConfigDict(frozen=True)

    method: VhMethod = VhMethod.KNNSP
    n_neighbors: int | None = Field(None, ge=1)
    alpha: float | None = Field(None, gt=0)

    @classmethod
    def theory(cls) -> "VertexHuntingConfig":
        return cls(method=VhMethod.SP)

    @classmethod
    def data(cls) -> "VertexHuntingConfig":
        return cls(method=VhMethod.KNNSP)


class GofConfig(BaseModel):
    """Options shared by the GoF entry points. Defaults are the data-analysis ones."""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(0.05, gt=0, lt=1)
    regularize: bool = True
    vh: VertexHuntingConfig = Field(default_factory=VertexHuntingConfig.data)
    score_threshold: float | None = Field(None, gt=0, description="SCORE clamp; log(n) when None")
    seed: int = 0

    @classmethod
    def theory(cls, seed: int = 0, alpha: float = 0.05) -> "GofConfig":
        """Simulation-calibration mode: SP vertex hunting, no regularization."""
        return cls(alpha=alpha, regularize=False, vh=VertexHuntingConfig.theory(), seed=seed)


class CliConfig(BaseModel):
    """Validated view of one CLI invocation."""
    subcommand: str
    input_path: Path | None = None
    k: int | None = Field(None, ge=1)
    model: ModelTag | None = None
    alpha: float = Field(0.05, gt=0, lt=1)
    vh: VertexHuntingConfig = Field(default_factory=VertexHuntingConfig.data)
    regularize: bool = True
    seed: int = 0
    output: Path | None = None
    output_format: OutputFormat = OutputFormat.CSV

    @model_validator(mode="after")
    def _check_k(self) -> "CliConfig":
        if self.subcommand in {"gof", "fit", "snr", "nmf-check", "tuning-sweep"} and self.k is None:
            raise ValueError(f"--k is required for '{self.subcommand}'")
        return self

    def gof_config(self) -> GofConfig:
        return GofConfig(alpha=self.alpha, regularize=self.regularize, vh=self.vh, seed=self.seed)
