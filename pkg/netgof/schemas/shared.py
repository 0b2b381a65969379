from typing import Any
from pydantic import BaseModel, Field


class APIResponse(BaseModel):
    """
    Standard schema for API responses

    Attributes:
        success (bool): Whether the request succeeded
        message (str): The description of the outcome
        data (Any): The response payload
        run_id (str): The run id of the request
    """

    success: bool = Field(..., description="Indicates if the request was successful")
    message: str | None = Field(None, description="Human-readable success/error message")
    data: Any | None = Field(None, description="Main response payload")
    run_id: str | None = Field(description="Run ID for debugging and correlation")


class NetworkPayload(BaseModel):
    """An edge list sent over HTTP, always 0-based."""
    n: int = Field(..., ge=3)
    edges: list[tuple[int, int]]


class GofRequest(NetworkPayload):
    k: int = Field(..., ge=1)
    alpha: float = Field(0.05, gt=0, lt=1)
    regularize: bool = True
    seed: int = 0


class EstimateKRequest(NetworkPayload):
    k_max: int = Field(..., ge=1)
    alpha: float = Field(0.05, gt=0, lt=1)
    seed: int = 0
