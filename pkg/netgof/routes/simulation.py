from pathlib import Path

from fastapi import APIRouter, BackgroundTasks, Request, status
from loguru import logger

from netgof.core.context import run_id_ctx
from netgof.core.env_config import config
from netgof.core.exceptions import NetGofError
from netgof.schemas.shared import APIResponse
from netgof.schemas.simulation import ExperimentRequest
from netgof.services.sim import ExperimentRunner


async def run_experiment_task(runner: ExperimentRunner, run_id: str) -> None:
    """Background entry point; failures are logged since nobody awaits the result."""
    run_id_ctx.set(run_id)
    try:
        await runner.run()
    except NetGofError as exc:
        logger.exception("Experiment {} failed: {}", run_id, exc)


def create_simulation_router() -> APIRouter:
    """
    Creates a FastAPI router that schedules simulation experiments.
    """

    router = APIRouter(prefix=f"{config.PROJECT_VERSION}/simulations", tags=["Simulations"])

    @router.post(
        path="",
        summary="Run a Monte-Carlo experiment in the background",
        description=(
            "Generates `config.replicates` networks, fits every assumed model and writes "
            "replicates.csv, histograms.csv and summary.json under OUTPUT_DIR/<run_id>."
        ),
        response_model=APIResponse,
        status_code=status.HTTP_202_ACCEPTED,
    )
    async def schedule_experiment(request: Request, body: ExperimentRequest, bg_tasks: BackgroundTasks) -> APIResponse:
        run_id = request.state.run_id
        output_dir = Path(config.OUTPUT_DIR) / run_id

        try:
            runner = ExperimentRunner(
                body.config, body.assumed, alpha=body.alpha, assumed_k=body.assumed_k,
                threads=body.threads, output_dir=output_dir,
            )
        except NetGofError as exc:
            return APIResponse(success=False, message=str(exc), run_id=run_id)

        bg_tasks.add_task(run_experiment_task, runner, run_id)
        logger.info("Scheduled experiment with {} replicates -> {}", body.config.replicates, output_dir)
        return APIResponse(
            success=True,
            message="Experiment scheduled",
            data={"output_dir": str(output_dir)},
            run_id=run_id,
        )

    return router
