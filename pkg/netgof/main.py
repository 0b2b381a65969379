from fastapi import FastAPI

from netgof.core.logging_config import setup_logging
from netgof.core.middlewares import RunIDMiddleware
from netgof.routes import analysis_router, simulation_router


setup_logging()
app = FastAPI(
    title="Network GoF",
    description="Goodness-of-fit metrics for block-model families of networks",
)

app.add_middleware(RunIDMiddleware)
app.include_router(analysis_router())
app.include_router(simulation_router())
