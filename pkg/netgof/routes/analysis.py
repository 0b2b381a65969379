from asyncer import asyncify
from fastapi import APIRouter, Request, status
from loguru import logger

from netgof.core.env_config import config
from netgof.core.exceptions import NetGofError
from netgof.schemas.config import GofConfig
from netgof.schemas.shared import APIResponse, EstimateKRequest, GofRequest
from netgof.services.gof import estimate_k, gof_all
from netgof.services.graph import Network


def create_analysis_router() -> APIRouter:
    """
    Creates a FastAPI router for GoF analysis of a posted network.
    """

    router = APIRouter(prefix=f"{config.PROJECT_VERSION}/analysis", tags=["Analysis"])

    @router.post(
        path="/gof",
        summary="GoF metrics for SBM, DCBM, MMSBM and DCMM",
        response_model=APIResponse,
        status_code=status.HTTP_200_OK,
    )
    async def gof(request: Request, body: GofRequest) -> APIResponse:
        run_id = request.state.run_id
        logger.info("GoF request: n={} edges={} K={}", body.n, len(body.edges), body.k)

        # Fits on networks of a few thousand nodes finish in seconds -> run off the event loop
        try:
            net = Network.from_edges(body.n, body.edges)
            options = GofConfig(alpha=body.alpha, regularize=body.regularize, seed=body.seed)
            report = await asyncify(gof_all)(net, body.k, options)
        except NetGofError as exc:
            logger.exception("GoF request failed: {}", exc)
            return APIResponse(success=False, message=str(exc), run_id=run_id)

        return APIResponse(success=True, message="GoF metrics computed", data=report.model_dump(), run_id=run_id)

    @router.post(
        path="/estimate-k",
        summary="Estimate the number of communities",
        response_model=APIResponse,
        status_code=status.HTTP_200_OK,
    )
    async def number_of_communities(request: Request, body: EstimateKRequest) -> APIResponse:
        run_id = request.state.run_id
        logger.info("Estimate-K request: n={} k_max={}", body.n, body.k_max)

        try:
            net = Network.from_edges(body.n, body.edges)
            options = GofConfig(alpha=body.alpha, seed=body.seed)
            estimate = await asyncify(estimate_k)(net, body.k_max, body.alpha, options)
        except NetGofError as exc:
            logger.exception("Estimate-K request failed: {}", exc)
            return APIResponse(success=False, message=str(exc), run_id=run_id)

        return APIResponse(success=True, message=f"Estimated K = {estimate.k}", data=estimate.model_dump(), run_id=run_id)

    return router
